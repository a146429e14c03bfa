#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "ness/config.hpp"
#include "ness/errors.hpp"
#include "ness/output.hpp"
#include "ness/scenario.hpp"

using namespace ness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ness_tests_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::map<std::string, std::string> entries(const RunSummary& run) {
  return {run.entries.begin(), run.entries.end()};
}

std::string config_error_path(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NESS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("empty configuration is the default two-contact scenario") {
  const ScenarioConfig cfg = parse_config("");
  CHECK(cfg.states[0].mu == 1.4);
  CHECK(cfg.states[1].mu == 0.3);
  CHECK(cfg.states[0].beta == kInfiniteBeta);
  CHECK(cfg.states[1].beta == kInfiniteBeta);
  const Junction j = cfg.junction();
  CHECK(j.contacts1 == std::vector<Site>{{0, 0}, {1, 0}});
  CHECK(j.contacts2 == std::vector<Site>{{0, 0}, {20, 0}});
  CHECK(j.t(0, 0) == 1.0);
  CHECK(j.t(1, 1) == 1.0);
  CHECK(j.t(0, 1) == 0.0);
  CHECK(cfg.window_sites().size() == 1600);
  CHECK(!cfg.energy);
}

TEST_CASE("configuration parsing") {
  const ScenarioConfig cfg = parse_config(
      "# comment line\n"
      "mu1 = 0.9   # trailing comment\n"
      "beta2 = 12.5\r\n"
      "contacts = 0 0 0 0 1; 2 1 5 -3 -0.25\n"
      "window = -1 2 0 0\n"
      "outputs = density, point\n"
      "include_point = false\n");
  CHECK(cfg.states[0].mu == 0.9);
  CHECK(cfg.states[1].beta == 12.5);
  const Junction j = cfg.junction();
  REQUIRE(j.size() == 4);
  CHECK(j.contacts1[1] == Site{2, 1});
  CHECK(j.contacts2[1] == Site{5, -3});
  CHECK(j.t(1, 1) == -0.25);
  CHECK(cfg.window_sites().size() == 4);
  CHECK(cfg.wants("point"));
  CHECK(!cfg.wants("current"));
  CHECK(!cfg.include_point);
}

TEST_CASE("configuration errors name the offending key") {
  CHECK(config_error_path("colour = red") == "colour");
  CHECK(config_error_path("mu1 = 4.5") == "mu1");
  CHECK(config_error_path("mu2 = -0.1") == "mu2");
  CHECK(config_error_path("beta1 = 0") == "beta1");
  CHECK(config_error_path("window = 3 2 0 0") == "window");
  CHECK(config_error_path("contacts = 0.5 0 0 0 1") == "contacts[0].x1");
  CHECK(config_error_path("contacts = 0 0 0 0 1; 1 0 2 0") == "contacts[1]");
  CHECK(config_error_path("contacts = 0 0 0 0 1\nt1 = 2") == "t1");
  CHECK(config_error_path("mu1 = 1\nmu1 = 2") == "mu1");
  CHECK(config_error_path("energy = 2") == "energy");
  CHECK(config_error_path("outputs = density, pictures") == "outputs");
  CHECK(config_error_path("d1 = 0") == "d1");
  CHECK(config_error_path("just words") == "line 1");
  CHECK_THROWS_AS(load_config("/nonexistent/ness.cfg"), IoError);
}

TEST_CASE("window bonds are listed once, x before y") {
  const ScenarioConfig cfg = parse_config("");
  const auto bonds = cfg.window_bonds();
  // 40 x 40 sites: 40 rows of 39 horizontal bonds and 40 columns of 39 vertical bonds.
  CHECK(bonds.size() == 2 * 40 * 39);
  CHECK(std::is_sorted(bonds.begin(), bonds.end()));
  CHECK(std::adjacent_find(bonds.begin(), bonds.end()) == bonds.end());
  for (const Bond& b : bonds) CHECK(b.x < b.y);
}

TEST_CASE("field csv files are sorted and deterministic") {
  const fs::path dir = scratch("csv");
  DensityField d{{{1, 1}, {0, 1}, {1, 0}, {0, 0}}, {0.5, -0.0, 1.0 / 3.0, 12345678.9}};
  write_field_csv(d, (dir / "a.csv").string());
  write_field_csv(d, (dir / "b.csv").string());
  const std::string text = slurp(dir / "a.csv");
  CHECK(text == slurp(dir / "b.csv"));
  CHECK(text.find('\r') == std::string::npos);
  const auto rows = lines(text);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "x1,x2,value");
  CHECK(rows[1] == "0,0,12345678.9");
  CHECK(rows[2] == "0,1,0");
  CHECK(rows[3] == "1,0,0.333333333333");
  CHECK(rows[4] == "1,1,0.5");

  CurrentField c{{{{0, 1}, {1, 1}}, {{0, 0}, {0, 1}}}, {-1e-20, 2.0}};
  write_field_csv(c, (dir / "c.csv").string());
  const auto crows = lines(slurp(dir / "c.csv"));
  REQUIRE(crows.size() == 3);
  CHECK(crows[0] == "x1,x2,y1,y2,value");
  CHECK(crows[1] == "0,0,0,1,2");
  CHECK(crows[2] == "0,1,1,1,-1e-20");

  CHECK_THROWS_AS(write_field_csv(d, (dir / "missing" / "x.csv").string()), IoError);
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(kInfiniteBeta) == "inf");
}

TEST_CASE("summary files are key=value lines") {
  const fs::path dir = scratch("summary");
  write_summary({{"J", "0.25"}, {"bound_states", "2"}}, (dir / "s.txt").string());
  CHECK(slurp(dir / "s.txt") == "J=0.25\nbound_states=2\n");
}

TEST_CASE("uncoupled junction gives zero current and no bound states") {
  const fs::path dir = scratch("uncoupled");
  const ScenarioConfig cfg = parse_config("t1 = 0\nt2 = 0\nwindow = 0 1 0 1\n");
  const RunSummary run = run_scenario(cfg, "custom", {dir.string(), 1});
  const auto e = entries(run);
  CHECK(e.at("J") == "0");
  CHECK(e.at("bound_states") == "0");
  CHECK(e.at("q_norm_e1") == "0");
  for (const char* name : {"current_transmitted.csv", "current_reflected.csv", "current_total.csv"}) {
    const auto rows = lines(slurp(dir / name));
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].substr(rows[i].rfind(',') + 1) == "0");
  }
  // Densities stay at the equilibrium value of reservoir 2.
  for (const std::string& row : lines(slurp(dir / "density_total.csv")))
    if (row[0] != 'x') CHECK(row.substr(row.rfind(',') + 1) == e.at("rho_eq2"));
  CHECK(fs::exists(dir / "custom_summary.txt"));
}

TEST_CASE("equal chemical potentials give zero current with non-zero scattering") {
  const fs::path dir = scratch("equal");
  const RunSummary run = run_current(parse_config("mu1 = 0.3\n"), {dir.string(), 1});
  const auto e = entries(run);
  CHECK(e.at("J") == "0");
  CHECK(std::stod(e.at("q_norm_e1")) > 0.1);
  CHECK(std::abs(std::stod(e.at("J_junction_bonds"))) < 1e-12);
}

TEST_CASE("scenario runs are byte-identical") {
  const ScenarioConfig cfg = parse_config("window = 18 21 -1 1\noutputs = density, current, point\n");
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const RunSummary ra = run_scenario(cfg, "custom", {a.string(), 1});
  const RunSummary rb = run_scenario(cfg, "custom", {b.string(), 2});
  CHECK(ra.entries == rb.entries);
  REQUIRE(!ra.files.empty());
  for (const std::string& f : ra.files) {
    CAPTURE(f);
    CHECK(slurp(a / fs::path(f).filename()) == slurp(b / fs::path(f).filename()));
  }
}

TEST_CASE("preset parameter tuples") {
  const Preset& f3 = find_preset("fig3");
  REQUIRE(f3.cases.size() == 3);
  CHECK(f3.cases[0].t1 == 1.0);
  CHECK(f3.cases[1].t1 == 0.5);
  CHECK(f3.cases[2].t1 == 0.0);
  for (const auto& c : f3.cases) {
    CHECK(c.d1 == 1);
    CHECK(*c.energy == 0.3);
    CHECK(c.channel == "transmitted");
  }
  const Preset& f4 = find_preset("fig4");
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(f4.cases[i].t1 == f3.cases[i].t1);
    CHECK(*f4.cases[i].energy == 0.3);
    CHECK(f4.cases[i].channel == "reflected");
  }
  const Preset& f5 = find_preset("fig5");
  REQUIRE(f5.cases.size() == 3);
  CHECK((f5.cases[0].t1 == 1.0 && f5.cases[0].d1 == 1));
  CHECK((f5.cases[1].t1 == 1.0 && f5.cases[1].d1 == 20));
  CHECK(f5.cases[2].t1 == 0.0);
  for (const auto& c : f5.cases) CHECK(*c.energy == 1.4);
  const Preset& f8 = find_preset("fig8");
  REQUIRE(f8.cases.size() == 3);
  CHECK(*f8.cases[0].energy == 1.4);
  CHECK(*f8.cases[1].energy == 0.3);
  CHECK(!f8.cases[2].energy);
  CHECK(find_preset("fig9").cases[0].channel == "total");
  CHECK(find_preset("fig7").cases[1].t1 == 0.0);
  CHECK(find_preset("custom").locked.empty());
  CHECK_THROWS_AS(find_preset("fig10"), ConfigError);
}

TEST_CASE("presets reject overridden keys and list them") {
  const ScenarioConfig cfg = parse_config("t1 = 0.7\nenergy = 0.5\nmu1 = 1.2\n");
  try {
    run_scenario(cfg, "fig3", {scratch("locked").string(), 1});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("t1") != std::string::npos);
    CHECK(what.find("energy") != std::string::npos);
    CHECK(what.find("mu1") == std::string::npos);
  }
  CHECK_THROWS_AS(run_scenario(cfg, "fig9", {scratch("locked9").string(), 1}), ConfigError);
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = scratch("exit");
  {
    std::ofstream(dir / "bad.cfg") << "mu1 = 9\n";
    std::ofstream(dir / "ok.cfg") << "contacts = 0 0 0 0 0.5\nwindow = 0 0 0 0\n";
    std::ofstream(dir / "blocker") << "x";
  }
  const std::string ok = "--config " + (dir / "ok.cfg").string();
  CHECK(run_cli("--out-dir " + (dir / "g").string() + " green -m 1 -n 2 --points 5") == 0);
  CHECK(fs::exists(dir / "g" / "green_1_2.csv"));
  CHECK(run_cli("--config " + (dir / "bad.cfg").string() + " scan") == 2);
  CHECK(run_cli("--config " + (dir / "nothing.cfg").string() + " scan") == 2);
  CHECK(run_cli("bogus") == 2);
  CHECK(run_cli(ok + " --out-dir " + (dir / "s").string() + " scenario fig10") == 2);
  CHECK(run_cli(ok + " --tol 1e-300 --out-dir " + (dir / "c").string() + " current") == 3);
  CHECK(run_cli(ok + " --out-dir " + (dir / "blocker" / "sub").string() + " scan") == 4);
  CHECK(run_cli(ok + " --out-dir " + (dir / "s").string() + " scan") == 0);
  CHECK(fs::exists(dir / "s" / "bound_states.csv"));
  // One contact pair: four blocks of 1 x 1, Q- the conjugate of Q+.
  const auto plus = lines(slurp(dir / "s" / "q_plus.csv"));
  const auto minus = lines(slurp(dir / "s" / "q_minus.csv"));
  REQUIRE(plus.size() == 5);
  REQUIRE(minus.size() == 5);
  CHECK(plus[0] == "e,block,row,col,re,im");
  CHECK(plus[1].rfind("1,11,0,0,", 0) == 0);
  CHECK(plus[4].rfind("1,22,0,0,", 0) == 0);
  CHECK(std::stod(plus[2].substr(plus[2].rfind(',') + 1)) == -std::stod(minus[2].substr(minus[2].rfind(',') + 1)));
}
