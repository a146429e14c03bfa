#include "ness/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "ness/errors.hpp"

namespace ness {

namespace {

constexpr int kLineRow = 19;      // fig6/8/9 sites (i, 19), bonds (i,19)-(i,20)
constexpr int kLineLength = 40;
constexpr int kSpectralPoints = 221;
constexpr double kQProbeEnergy = 1.0;

std::string path_in(const RunOptions& opt, const std::string& name) {
  return (std::filesystem::path(opt.out_dir) / name).string();
}

std::string fmt(double x) { return format_number(x); }

std::string describe_contacts(const Junction& j) {
  std::string s;
  for (std::size_t a = 0; a < j.n1(); ++a)
    for (std::size_t b = 0; b < j.n2(); ++b) {
      const double t = j.t(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (t == 0.0) continue;
      if (!s.empty()) s += "; ";
      s += std::to_string(j.contacts1[a].x1) + ' ' + std::to_string(j.contacts1[a].x2) + ' ' +
           std::to_string(j.contacts2[b].x1) + ' ' + std::to_string(j.contacts2[b].x2) + ' ' + fmt(t);
    }
  return s.empty() ? "none" : s;
}

Summary header(const std::string& scenario, const ScenarioConfig& cfg, const Junction& j) {
  return {{"scenario", scenario},
          {"mu1", fmt(cfg.states[0].mu)},
          {"mu2", fmt(cfg.states[1].mu)},
          {"beta1", fmt(cfg.states[0].beta)},
          {"beta2", fmt(cfg.states[1].beta)},
          {"contacts", describe_contacts(j)},
          {"tol", fmt(cfg.tol)},
          {"bound_tol", fmt(cfg.bound_tol)}};
}

void add_equilibrium(Summary& s, const ScenarioConfig& cfg) {
  s.emplace_back("rho_eq1", fmt(equilibrium_density(cfg.states[0], cfg.tol)));
  s.emplace_back("rho_eq2", fmt(equilibrium_density(cfg.states[1], cfg.tol)));
}

void add_current(Summary& s, const ScenarioConfig& cfg, const Junction& j) {
  const GreenTable table(j.displacements());
  const auto est = total_current(j, table, cfg.states, cfg.tol);
  const JunctionCurrents bonds = junction_currents(j, table, cfg.states, cfg.tol);
  s.emplace_back("J", fmt(est.value));
  s.emplace_back("J_error", fmt(est.error));
  s.emplace_back("J_junction_bonds", fmt(bonds.total));
  s.emplace_back("J_junction_bonds_error", fmt(bonds.error));
  const double qn = j.is_zero() ? 0.0 : q_matrix(j, table, kQProbeEnergy, Side::plus).q.norm();
  s.emplace_back("q_norm_e1", fmt(qn));
}

std::vector<BoundState> add_bound_states(Summary& s, const ScenarioConfig& cfg, const Junction& j) {
  const GreenTable table(j.displacements());
  ScanOptions so;
  so.tol = cfg.bound_tol;
  std::vector<BoundState> bound = find_bound_states(j, table, so);
  s.emplace_back("bound_states", std::to_string(bound.size()));
  for (std::size_t i = 0; i < bound.size(); ++i) {
    const std::string p = "bound_state." + std::to_string(i) + '.';
    s.emplace_back(p + "lambda", fmt(bound[i].lambda));
    s.emplace_back(p + "multiplicity", std::to_string(bound[i].multiplicity));
    s.emplace_back(p + "residual", fmt(bound[i].residual));
    s.emplace_back(p + "norm2", fmt(bound[i].norm2));
    s.emplace_back(p + "occupation", fmt(occupation_weight(j, bound[i], cfg.states, cfg.bound_tol)));
  }
  return bound;
}

double field_radius(const Junction& j, std::span<const Site> sites, std::span<const Bond> bonds) {
  double r = 1.0;
  auto far = [&](const Site& x) {
    for (const Site& s : j.contacts2) r = std::max(r, std::hypot(x.x1 - s.x1, x.x2 - s.x2));
  };
  for (const Site& x : sites) far(x);
  for (const Bond& b : bonds) {
    far(b.x);
    far(b.y);
  }
  double spread = 0.0;
  for (const auto* set : {&j.contacts1, &j.contacts2})
    for (const Site& a : *set)
      for (const Site& b : *set) spread = std::max(spread, std::hypot(a.x1 - b.x1, a.x2 - b.x2));
  return r + spread;
}

struct IntegratedFields {
  FieldResult result;
  std::vector<double> point;
  std::size_t nodes = 0;
  double quadrature_delta = 0.0;  // change under one bisection of the energy rule, on probe sites and bonds
};

IntegratedFields integrate_fields(const ScenarioConfig& cfg, const Junction& j, const GreenTable& table,
                                  std::span<const Site> sites, std::span<const Bond> bonds,
                                  const std::vector<BoundState>& bound, bool with_point, int threads) {
  IntegratedFields out;
  EnergyRuleOptions eo;
  eo.radius = field_radius(j, sites, bonds);
  eo.min_nodes = cfg.energy_nodes;
  const EnergyRule rule = energy_rule(cfg.states, eo);
  out.nodes = rule.size();
  out.result = evaluate_fields(j, table, rule, sites, bonds, threads);

  std::vector<Site> probe_sites;
  std::vector<std::size_t> site_ids;
  for (std::size_t k = 0; k < 5 && !sites.empty(); ++k) site_ids.push_back(k * (sites.size() - 1) / 4);
  for (std::size_t i : site_ids) probe_sites.push_back(sites[i]);
  std::vector<Bond> probe_bonds;
  std::vector<std::size_t> bond_ids;
  for (std::size_t k = 0; k < 5 && !bonds.empty(); ++k) bond_ids.push_back(k * (bonds.size() - 1) / 4);
  for (std::size_t i : bond_ids) probe_bonds.push_back(bonds[i]);
  eo.bisections = 1;
  const FieldResult fine = evaluate_fields(j, table, energy_rule(cfg.states, eo), probe_sites, probe_bonds, threads);
  for (std::size_t k = 0; k < site_ids.size(); ++k)
    out.quadrature_delta = std::max(out.quadrature_delta, std::abs(fine.density[k].total() -
                                                                   out.result.density[site_ids[k]].total()));
  for (std::size_t k = 0; k < bond_ids.size(); ++k)
    out.quadrature_delta = std::max(out.quadrature_delta, std::abs(fine.current[k].total() -
                                                                   out.result.current[bond_ids[k]].total()));

  if (with_point) out.point = density_point(j, table, cfg.states, bound, sites, cfg.bound_tol);
  else out.point.assign(sites.size(), 0.0);
  return out;
}

void require_unlocked(const ScenarioConfig& cfg, const Preset& p) {
  std::vector<std::string> hit;
  for (const std::string& k : p.locked)
    if (cfg.keys.count(k)) hit.push_back(k);
  if (hit.empty()) return;
  std::string list;
  for (const std::string& k : hit) list += (list.empty() ? "" : ", ") + k;
  throw ConfigError("preset " + p.name, "configuration overrides keys fixed by the preset: " + list);
}

ScenarioConfig with_case(ScenarioConfig cfg, const PresetCase& c) {
  cfg.contacts.clear();
  cfg.t1 = c.t1;
  cfg.d1 = c.d1;
  cfg.t2 = 1.0;
  cfg.d2 = 20;
  cfg.energy = c.energy;
  return cfg;
}

std::vector<Site> line_sites() {
  std::vector<Site> s;
  for (int i = 1; i <= kLineLength; ++i) s.push_back({i, kLineRow});
  return s;
}

std::vector<Bond> line_bonds() {
  std::vector<Bond> b;
  for (int i = 1; i <= kLineLength; ++i) b.push_back({{i, kLineRow}, {i, kLineRow + 1}});
  return b;
}

// Spectral densities over the window for the panels of fig3..fig5.
RunSummary run_spectral_figure(const ScenarioConfig& base, const Preset& p, const RunOptions& opt) {
  RunSummary run;
  run.scenario = p.name;
  run.entries = header(p.name, base, base.junction());
  const std::vector<Site> sites = base.window_sites();
  std::vector<Junction> junctions;
  std::vector<Displacement> ds;
  for (const PresetCase& c : p.cases) {
    junctions.push_back(with_case(base, c).junction());
    const auto add = field_displacements(junctions.back(), sites);
    ds.insert(ds.end(), add.begin(), add.end());
  }
  const GreenTable table(ds);
  for (std::size_t k = 0; k < p.cases.size(); ++k) {
    const PresetCase& c = p.cases[k];
    const EnergySlice slice(junctions[k], table, *c.energy);
    DensityField f{sites, {}};
    double lo = INFINITY, hi = -INFINITY;
    for (const Site& x : sites) {
      const double v = c.channel == "transmitted" ? slice.delta_transmitted(x) : slice.delta_reflected(x);
      f.values.push_back(v);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const std::string name = p.name + c.label + "_delta_" + c.channel + ".csv";
    write_field_csv(f, path_in(opt, name));
    run.files.push_back(name);
    const std::string key = p.name + c.label;
    run.entries.emplace_back(key + ".t1", fmt(c.t1));
    run.entries.emplace_back(key + ".d1", std::to_string(c.d1));
    run.entries.emplace_back(key + ".energy", fmt(*c.energy));
    run.entries.emplace_back(key + ".min", fmt(lo));
    run.entries.emplace_back(key + ".max", fmt(hi));
  }
  return run;
}

RunSummary run_fig6(const ScenarioConfig& cfg, const Preset& p, const RunOptions& opt) {
  const Junction j = with_case(cfg, p.cases[0]).junction();
  RunSummary run{p.name, header(p.name, cfg, j), {}};
  add_equilibrium(run.entries, cfg);
  const std::vector<BoundState> bound = add_bound_states(run.entries, cfg, j);
  const std::vector<Site> sites = line_sites();
  const GreenTable table(field_displacements(j, sites));
  const IntegratedFields f = integrate_fields(cfg, j, table, sites, {}, bound, true, opt.threads);
  const double rho2 = equilibrium_density(cfg.states[1], cfg.tol);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const Channels& c = f.result.density[i];
    const double total = c.total() + (cfg.include_point ? f.point[i] : 0.0);
    rows.push_back({double(i + 1), double(sites[i].x1), double(sites[i].x2), c.transmitted, c.reflected, f.point[i],
                    total, rho2});
  }
  const std::string name = "fig6_line_density.csv";
  write_table_csv({"i", "x1", "x2", "transmitted", "reflected", "point", "total", "rho_eq2"}, rows,
                  path_in(opt, name));
  run.files.push_back(name);
  run.entries.emplace_back("include_point", cfg.include_point ? "true" : "false");
  run.entries.emplace_back("energy_nodes", std::to_string(f.nodes));
  run.entries.emplace_back("field_quadrature_delta", fmt(f.quadrature_delta));
  return run;
}

RunSummary run_fig7(const ScenarioConfig& cfg, const Preset& p, const RunOptions& opt) {
  const Junction j = with_case(cfg, p.cases[0]).junction();
  const Junction j0 = with_case(cfg, p.cases[1]).junction();
  RunSummary run{p.name, header(p.name, cfg, j), {}};
  add_current(run.entries, cfg, j);
  std::vector<Displacement> ds = j.displacements();
  const auto more = j0.displacements();
  ds.insert(ds.end(), more.begin(), more.end());
  const GreenTable table(ds);
  const double lo = std::min(cfg.states[0].mu, cfg.states[1].mu), hi = std::max(cfg.states[0].mu, cfg.states[1].mu);
  const int n = cfg.energy_nodes > 1 ? cfg.energy_nodes : kSpectralPoints;
  std::vector<std::vector<double>> rows;
  std::vector<double> js;
  double excess = -INFINITY;
  for (int k = 0; k < n; ++k) {
    const double e = lo + (hi - lo) * k / (n - 1);
    if (!(e > 0.0 && e < kBandTop) || e == kBandCenter) continue;
    const double jv = spectral_total_current(j, table, e), j0v = 2.0 * spectral_total_current(j0, table, e);
    rows.push_back({e, jv, j0v});
    js.push_back(jv);
    excess = std::max(excess, jv - j0v);
  }
  int maxima = 0;
  for (std::size_t k = 1; k + 1 < js.size(); ++k)
    if (js[k] > js[k - 1] && js[k] > js[k + 1]) ++maxima;
  const std::string name = "fig7_spectral_current.csv";
  write_table_csv({"e", "j", "two_j0"}, rows, path_in(opt, name));
  run.files.push_back(name);
  run.entries.emplace_back("spectral_points", std::to_string(rows.size()));
  run.entries.emplace_back("interior_maxima", std::to_string(maxima));
  run.entries.emplace_back("max_j_minus_two_j0", fmt(excess));
  return run;
}

RunSummary run_line_currents(const ScenarioConfig& cfg, const Preset& p, const RunOptions& opt) {
  const Junction j = with_case(cfg, p.cases[0]).junction();
  RunSummary run{p.name, header(p.name, cfg, j), {}};
  add_equilibrium(run.entries, cfg);
  const std::vector<BoundState> bound = add_bound_states(run.entries, cfg, j);
  const std::vector<Site> sites = line_sites();
  const std::vector<Bond> bonds = line_bonds();
  const GreenTable table(field_displacements(j, sites, bonds));
  const IntegratedFields f = integrate_fields(cfg, j, table, sites, bonds, bound, true, opt.threads);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> head{"i", "x1", "x2", "y1", "y2"};
  const bool fig8 = p.name == "fig8";
  std::vector<EnergySlice> slices;
  if (fig8) {
    for (const PresetCase& c : p.cases)
      if (c.energy) {
        slices.emplace_back(j, table, *c.energy);
        head.push_back("transmitted_at_" + fmt(*c.energy));
      }
    head.push_back("transmitted");
  } else {
    head.insert(head.end(), {"transmitted", "reflected", "total"});
  }
  head.push_back("density");
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    const Bond& b = bonds[i];
    std::vector<double> row{double(i + 1), double(b.x.x1), double(b.x.x2), double(b.y.x1), double(b.y.x2)};
    const Channels& c = f.result.current[i];
    if (fig8) {
      for (const EnergySlice& s : slices) row.push_back(s.current_transmitted(b.x, b.y));
      row.push_back(c.transmitted);
    } else {
      row.insert(row.end(), {c.transmitted, c.reflected, c.total()});
    }
    row.push_back(f.result.density[i].total() + (cfg.include_point ? f.point[i] : 0.0));
    rows.push_back(std::move(row));
  }
  const std::string name = p.name + "_line_current.csv";
  write_table_csv(head, rows, path_in(opt, name));
  run.files.push_back(name);
  run.entries.emplace_back("energy_nodes", std::to_string(f.nodes));
  run.entries.emplace_back("field_quadrature_delta", fmt(f.quadrature_delta));
  return run;
}

RunSummary finish(RunSummary run, const RunOptions& opt) {
  const std::string name = run.scenario + "_summary.txt";
  run.entries.emplace_back("files", [&] {
    std::string s;
    for (const std::string& f : run.files) s += (s.empty() ? "" : ",") + f;
    return s;
  }());
  write_summary(run.entries, path_in(opt, name));
  run.files.push_back(name);
  return run;
}

RunSummary field_products(const std::string& scenario, const ScenarioConfig& cfg, const RunOptions& opt,
                          bool with_scalars) {
  const Junction j = cfg.junction();
  RunSummary run{scenario, header(scenario, cfg, j), {}};
  if (with_scalars) {
    add_equilibrium(run.entries, cfg);
    add_current(run.entries, cfg, j);
  }
  const std::vector<Site> sites = cfg.window_sites();
  const std::vector<Bond> bonds = cfg.wants("current") ? cfg.window_bonds() : std::vector<Bond>{};
  const bool densities = cfg.wants("density") || cfg.wants("point");
  const std::vector<Site> used_sites = densities ? sites : std::vector<Site>{};
  if (used_sites.empty() && bonds.empty()) return run;
  const GreenTable table(field_displacements(j, used_sites, bonds));
  auto emit_density = [&](const std::string& name, const std::vector<double>& v) {
    write_field_csv(DensityField{used_sites, v}, path_in(opt, name));
    run.files.push_back(name);
  };
  auto emit_current = [&](const std::string& name, const std::vector<double>& v) {
    write_field_csv(CurrentField{bonds, v}, path_in(opt, name));
    run.files.push_back(name);
  };

  if (cfg.energy) {
    run.entries.emplace_back("energy", fmt(*cfg.energy));
    const EnergySlice slice(j, table, *cfg.energy);
    if (cfg.wants("density")) {
      std::vector<double> tr, ref;
      for (const Site& x : used_sites) {
        tr.push_back(slice.delta_transmitted(x));
        ref.push_back(slice.delta_reflected(x));
      }
      emit_density("spectral_density_transmitted.csv", tr);
      emit_density("spectral_density_reflected.csv", ref);
    }
    if (!bonds.empty()) {
      std::vector<double> tr, ref, tot;
      for (const Bond& b : bonds) {
        tr.push_back(slice.current_transmitted(b.x, b.y));
        ref.push_back(slice.current_reflected(b.x, b.y));
        tot.push_back(tr.back() + ref.back());
      }
      emit_current("spectral_current_transmitted.csv", tr);
      emit_current("spectral_current_reflected.csv", ref);
      emit_current("spectral_current_total.csv", tot);
    }
    return run;
  }

  std::vector<BoundState> bound;
  const bool point = densities && (cfg.include_point || cfg.wants("point"));
  if (point) bound = add_bound_states(run.entries, cfg, j);
  const IntegratedFields f = integrate_fields(cfg, j, table, used_sites, bonds, bound, point, opt.threads);
  run.entries.emplace_back("include_point", cfg.include_point ? "true" : "false");
  run.entries.emplace_back("energy_nodes", std::to_string(f.nodes));
  run.entries.emplace_back("field_quadrature_delta", fmt(f.quadrature_delta));
  if (densities) {
    std::vector<double> tr, ref, tot;
    double dp_sum = 0.0;
    for (std::size_t i = 0; i < used_sites.size(); ++i) {
      tr.push_back(f.result.density[i].transmitted);
      ref.push_back(f.result.density[i].reflected);
      tot.push_back(f.result.density[i].total() + (cfg.include_point ? f.point[i] : 0.0));
      dp_sum += f.point[i];
    }
    run.entries.emplace_back("point_density_window_sum", fmt(dp_sum));
    if (cfg.wants("density")) {
      emit_density("density_transmitted.csv", tr);
      emit_density("density_reflected.csv", ref);
      emit_density("density_total.csv", tot);
    }
    if (cfg.wants("point")) emit_density("density_point.csv", f.point);
  }
  if (!bonds.empty()) {
    std::vector<double> tr, ref, tot;
    for (const Channels& c : f.result.current) {
      tr.push_back(c.transmitted);
      ref.push_back(c.reflected);
      tot.push_back(c.total());
    }
    emit_current("current_transmitted.csv", tr);
    emit_current("current_reflected.csv", ref);
    emit_current("current_total.csv", tot);
  }
  return run;
}

void spectral_samples(RunSummary& run, const ScenarioConfig& cfg, const Junction& j, const RunOptions& opt) {
  const GreenTable table(j.displacements());
  const double lo = std::min(cfg.states[0].mu, cfg.states[1].mu), hi = std::max(cfg.states[0].mu, cfg.states[1].mu);
  std::vector<std::vector<double>> rows;
  const int n = cfg.energy_nodes > 1 ? cfg.energy_nodes : kSpectralPoints;
  if (hi > lo) {
    for (int k = 0; k < n; ++k) {
      const double e = lo + (hi - lo) * k / (n - 1);
      if (!(e > 0.0 && e < kBandTop) || e == kBandCenter) continue;
      rows.push_back({e, j.is_zero() ? 0.0 : spectral_total_current(j, table, e)});
    }
  }
  const std::string name = "spectral_current.csv";
  write_table_csv({"e", "j"}, rows, path_in(opt, name));
  run.files.push_back(name);
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = [] {
    const std::vector<std::string> junction_keys{"t1", "d1", "t2", "d2", "contacts", "energy"};
    std::vector<std::string> full = junction_keys;
    full.insert(full.end(), {"mu1", "mu2", "beta1", "beta2"});
    std::vector<Preset> p;
    p.push_back({"fig3", "transmitted density at e = 0.3 for t1 = 1, 1/2, 0 (d1 = 1)",
                 {{"a", 1.0, 1, 0.3, "transmitted"}, {"b", 0.5, 1, 0.3, "transmitted"}, {"c", 0.0, 1, 0.3, "transmitted"}},
                 junction_keys});
    p.push_back({"fig4", "reflected density at e = 0.3 for t1 = 1, 1/2, 0 (d1 = 1)",
                 {{"a", 1.0, 1, 0.3, "reflected"}, {"b", 0.5, 1, 0.3, "reflected"}, {"c", 0.0, 1, 0.3, "reflected"}},
                 junction_keys});
    p.push_back({"fig5", "transmitted density at e = 1.4 for (t1, d1) = (1, 1), (1, 20), (0, -)",
                 {{"a", 1.0, 1, 1.4, "transmitted"}, {"b", 1.0, 20, 1.4, "transmitted"}, {"c", 0.0, 1, 1.4, "transmitted"}},
                 junction_keys});
    p.push_back({"fig6", "densities on the line (i, 19), i = 1..40", {{"", 1.0, 1, std::nullopt, "density"}}, full});
    p.push_back({"fig7", "spectral current j(e) and 2 j0(e) on (mu2, mu1)",
                 {{"j", 1.0, 1, std::nullopt, "spectral"}, {"j0", 0.0, 1, std::nullopt, "spectral"}},
                 full});
    p.push_back({"fig8", "transmitted currents across bonds (i,19)-(i,20)",
                 {{"a", 1.0, 1, 1.4, "transmitted"}, {"b", 1.0, 1, 0.3, "transmitted"},
                  {"c", 1.0, 1, std::nullopt, "transmitted"}},
                 full});
    p.push_back({"fig9", "total currents across bonds (i,19)-(i,20)", {{"", 1.0, 1, std::nullopt, "total"}}, full});
    p.push_back({"custom", "fields, currents and bound states of the configuration", {}, {}});
    return p;
  }();
  return all;
}

const Preset& find_preset(std::string_view name) {
  for (const Preset& p : presets())
    if (p.name == name) return p;
  throw ConfigError("preset", "unknown scenario '" + std::string(name) + "'");
}

RunSummary run_scenario(const ScenarioConfig& cfg, std::string_view name, const RunOptions& opt) {
  const Preset& p = find_preset(name);
  require_unlocked(cfg, p);
  std::filesystem::create_directories(opt.out_dir);
  RunSummary run;
  if (p.name == "fig3" || p.name == "fig4" || p.name == "fig5") {
    run = run_spectral_figure(cfg, p, opt);
  } else if (p.name == "fig6") {
    run = run_fig6(cfg, p, opt);
  } else if (p.name == "fig7") {
    run = run_fig7(cfg, p, opt);
  } else if (p.name == "fig8" || p.name == "fig9") {
    run = run_line_currents(cfg, p, opt);
  } else {
    run = field_products("custom", cfg, opt, true);
    const Junction j = cfg.junction();
    const bool scanned = std::any_of(run.entries.begin(), run.entries.end(),
                                     [](const auto& kv) { return kv.first == "bound_states"; });
    if (!scanned) add_bound_states(run.entries, cfg, j);
    if (cfg.wants("spectral")) spectral_samples(run, cfg, j, opt);
  }
  return finish(std::move(run), opt);
}

RunSummary run_green(const ScenarioConfig& cfg, Displacement x, double e_min, double e_max, int points,
                     const RunOptions& opt) {
  if (points < 2) throw ConfigError("points", "need at least 2 energies");
  if (!(e_min > 0.0 && e_max < kBandTop && e_min < e_max))
    throw ConfigError("energy range", "need 0 < e_min < e_max < 4");
  std::filesystem::create_directories(opt.out_dir);
  const GreenTable table({x});
  std::vector<std::vector<double>> rows;
  for (int k = 0; k < points; ++k) {
    const double e = e_min + (e_max - e_min) * k / (points - 1);
    if (e == kBandCenter) continue;
    const cplx g = table.boundary(e, Side::plus, x);
    rows.push_back({e, g.real(), g.imag()});
  }
  RunSummary run{"green", {{"scenario", "green"}, {"m", std::to_string(x.m)}, {"n", std::to_string(x.n)},
                           {"side", "plus"}, {"tol", fmt(cfg.tol)}}, {}};
  const std::string name = "green_" + std::to_string(x.m) + '_' + std::to_string(x.n) + ".csv";
  write_table_csv({"e", "re", "im"}, rows, path_in(opt, name));
  run.files.push_back(name);
  return finish(std::move(run), opt);
}

RunSummary run_scan(const ScenarioConfig& cfg, const RunOptions& opt) {
  std::filesystem::create_directories(opt.out_dir);
  const Junction j = cfg.junction();
  RunSummary run{"scan", header("scan", cfg, j), {}};
  const std::vector<BoundState> bound = add_bound_states(run.entries, cfg, j);
  std::vector<std::vector<double>> rows;
  for (const BoundState& b : bound)
    rows.push_back({b.lambda, double(b.multiplicity), b.residual, b.norm2,
                    occupation_weight(j, b, cfg.states, cfg.bound_tol)});
  const std::string name = "bound_states.csv";
  write_table_csv({"lambda", "multiplicity", "residual", "norm2", "occupation"}, rows, path_in(opt, name));
  run.files.push_back(name);

  // Q+- at the configured energy (or the probe energy), block ij = 11, 12, 21, 22.
  const double e = cfg.energy.value_or(kQProbeEnergy);
  const GreenTable table(j.displacements());
  for (Side side : {Side::plus, Side::minus}) {
    const QMatrices q = q_matrix(j, table, e, side);
    std::vector<std::vector<double>> qrows;
    for (int bi = 1; bi <= 2; ++bi)
      for (int bj = 1; bj <= 2; ++bj) {
        const Eigen::MatrixXcd b = q.block(bi, bj);
        for (Eigen::Index r = 0; r < b.rows(); ++r)
          for (Eigen::Index c = 0; c < b.cols(); ++c)
            qrows.push_back({e, double(10 * bi + bj), double(r), double(c), b(r, c).real(), b(r, c).imag()});
      }
    const std::string qname = side == Side::plus ? "q_plus.csv" : "q_minus.csv";
    write_table_csv({"e", "block", "row", "col", "re", "im"}, qrows, path_in(opt, qname));
    run.files.push_back(qname);
  }
  return finish(std::move(run), opt);
}

RunSummary run_field(const ScenarioConfig& cfg, const RunOptions& opt) {
  std::filesystem::create_directories(opt.out_dir);
  return finish(field_products("field", cfg, opt, false), opt);
}

RunSummary run_current(const ScenarioConfig& cfg, const RunOptions& opt) {
  std::filesystem::create_directories(opt.out_dir);
  const Junction j = cfg.junction();
  RunSummary run{"current", header("current", cfg, j), {}};
  add_equilibrium(run.entries, cfg);
  add_current(run.entries, cfg, j);
  spectral_samples(run, cfg, j, opt);
  return finish(std::move(run), opt);
}

}  // namespace ness
