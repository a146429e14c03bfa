// Command-line front end: ness <green|scan|field|current|scenario> [options]

#include <CLI11.hpp>
#include <cstdio>
#include <optional>
#include <string>

#include "ness/errors.hpp"
#include "ness/scenario.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kConvergence = 3, kIo = 4 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stationary state of two 2-D lattice reservoirs coupled by a tunneling junction"};
  app.require_subcommand(1);

  std::string config_path;
  ness::RunOptions opt;
  std::optional<double> tol;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--out-dir", opt.out_dir, "directory for output files");
  app.add_option("--tol", tol, "absolute tolerance of adaptive energy integrals");
  app.add_option("--threads", opt.threads, "worker threads for field evaluation")->check(CLI::PositiveNumber);

  auto* green = app.add_subcommand("green", "tabulate g+(e; x) on a uniform energy grid");
  int m = 0, n = 0, points = 81;
  double e_min = 0.05, e_max = 3.95;
  green->add_option("-m", m, "first displacement component");
  green->add_option("-n", n, "second displacement component");
  green->add_option("--emin", e_min, "lowest energy");
  green->add_option("--emax", e_max, "highest energy");
  green->add_option("--points", points, "number of energies");

  auto* scan = app.add_subcommand("scan", "bound states of the junction");
  auto* field = app.add_subcommand("field", "density and current fields over the window");
  auto* current = app.add_subcommand("current", "total current and spectral current j(e)");
  auto* scenario = app.add_subcommand("scenario", "figure presets fig3..fig9, or custom");
  std::string preset;
  scenario->add_option("name", preset, "fig3, fig4, fig5, fig6, fig7, fig8, fig9 or custom")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    ness::ScenarioConfig cfg = config_path.empty() ? ness::parse_config("") : ness::load_config(config_path);
    if (tol) {
      if (!(*tol > 0.0)) throw ness::ConfigError("--tol", "must be positive");
      cfg.tol = *tol;
    }
    ness::RunSummary run;
    if (*green)
      run = ness::run_green(cfg, {m, n}, e_min, e_max, points, opt);
    else if (*scan)
      run = ness::run_scan(cfg, opt);
    else if (*field)
      run = ness::run_field(cfg, opt);
    else if (*current)
      run = ness::run_current(cfg, opt);
    else if (*scenario)
      run = ness::run_scenario(cfg, preset, opt);
    for (const auto& [k, v] : run.entries) std::printf("%s=%s\n", k.c_str(), v.c_str());
    return kOk;
  } catch (const ness::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const ness::DomainError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kConfig;
  } catch (const ness::ConvergenceError& e) {
    std::fprintf(stderr, "convergence failure: %s (best %.12g, error %.3g)\n", e.what(), e.best_estimate().real(),
                 e.error_estimate());
    return kConvergence;
  } catch (const ness::BoundStateProximity& e) {
    std::fprintf(stderr, "convergence failure: %s (rcond %.3g)\n", e.what(), e.rcond());
    return kConvergence;
  } catch (const ness::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  }
}
