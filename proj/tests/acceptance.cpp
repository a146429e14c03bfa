// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "ness/asymptotic.hpp"
#include "ness/bessel_route.hpp"
#include "ness/config.hpp"
#include "ness/green.hpp"
#include "ness/lattice.hpp"
#include "ness/observables.hpp"
#include "ness/quadrature.hpp"
#include "ness/scattering.hpp"

using namespace ness;

namespace {

constexpr double kPi = std::numbers::pi;
const ReservoirStates kDefaultStates{ReservoirState{kInfiniteBeta, 1.4}, ReservoirState{kInfiniteBeta, 0.3}};

int failures = 0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

void run(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0 && dt > budget_s) {
    o.pass = false;
    o.detail += "; over the time budget";
  }
  if (!o.pass) ++failures;
  std::printf("%s %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), dt);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

double parity(Displacement x) { return (x.m + x.n) % 2 == 0 ? 1.0 : -1.0; }

double rule_radius(const Junction& j, const std::vector<Site>& sites) {
  double r = 1.0, spread = 0.0;
  for (const Site& x : sites)
    for (const Site& s : j.contacts2) r = std::max(r, std::hypot(x.x1 - s.x1, x.x2 - s.x2));
  for (const auto* set : {&j.contacts1, &j.contacts2})
    for (const Site& a : *set)
      for (const Site& b : *set) spread = std::max(spread, std::hypot(a.x1 - b.x1, a.x2 - b.x2));
  return r + spread + 1.0;
}

Outcome equilibrium() {
  const double r1 = equilibrium_density(kDefaultStates[0]);
  const double r2 = equilibrium_density(kDefaultStates[1]);
  return {std::abs(r1 - 0.2804) <= 5e-4 && std::abs(r2 - 0.0492) <= 5e-4,
          fmt("rho_eq(1.4) = %.6f, rho_eq(0.3) = %.6f", r1, r2)};
}

Outcome total_current_check() {
  const Junction j = Junction::two_contacts(1.0, 1, 1.0, 20);
  const GreenTable table(j.displacements());
  const auto landauer = total_current(j, table, kDefaultStates, 1e-9);
  const auto bonds = junction_currents(j, table, kDefaultStates, 1e-9);
  const bool near_target = std::abs(landauer.value - 0.2416) <= 5e-3;
  const bool routes = std::abs(landauer.value - bonds.total) <= 1e-3;
  return {near_target && routes, fmt("J = %.10f (+- %.1e), junction bonds %.10f, |J - 0.2416| = %.4f, routes differ by %.2e",
                                    landauer.value, landauer.error, bonds.total, std::abs(landauer.value - 0.2416),
                                    std::abs(landauer.value - bonds.total))};
}

Outcome amplitudes() {
  const double r14 = asymptotic_amplitude(1.4, 0.0) / asymptotic_amplitude(1.4, kPi / 4);
  const double r03 = asymptotic_amplitude(0.3, 0.0) / asymptotic_amplitude(0.3, kPi / 4);
  return {std::abs(r14 - 2.264) <= 2e-3 && std::abs(r03 - 1.127) <= 2e-3,
          fmt("psi ratio at 1.4 = %.5f, at 0.3 = %.5f", r14, r03)};
}

Outcome phase_speed() {
  double lo = 1e300, hi = -1e300, slope = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double phi = 0.5 * kPi * i / 199.0;
    const double c = asymptotic_shell(0.3, phi).phase_speed;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
    slope = std::max(slope, std::abs(phase_speed_slope(0.3, phi)));
  }
  // On the axis the stationary point is theta = 0 and the speed is K(0.3, 0) = acos(0.7).
  return {lo >= 0.784 && hi <= 0.795 && slope <= 0.022,
          fmt("phase speed in [%.6f, %.6f] (axis value acos(0.7) = %.6f), max |slope| = %.6f", lo, hi,
              std::acos(0.7), slope)};
}

Outcome spectral_measure() {
  double worst_int = 0.0;
  std::string parts;
  for (Displacement x : {Displacement{0, 0}, Displacement{1, 0}, Displacement{1, 1}, Displacement{2, 0}}) {
    const auto est = quad::integrate_adaptive([x](double e) { return shell_density(e, x); }, 0.0, 4.0, {2.0}, 1e-10);
    const double want = x == Displacement{0, 0} ? 1.0 : 0.0;
    worst_int = std::max(worst_int, std::abs(est.value - want));
    parts += fmt(" (%d,%d): %.3e", x.m, x.n, est.value - want);
  }
  const GreenTable table({{0, 0}});
  double worst_im = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double e = 4.0 * (k + 0.5) / 50.0;
    worst_im = std::max(worst_im, std::abs(table.boundary(e, Side::plus, {0, 0}).imag() -
                                           kPi * shell_density(e, {0, 0})));
  }
  return {worst_int <= 1e-6 && worst_im <= 1e-8,
          "integral errors" + parts + fmt("; max |Im g+ - pi P| = %.2e", worst_im)};
}

Outcome cross_validation() {
  std::vector<Displacement> xs;
  for (int m = -10; m <= 10; ++m)
    for (int n = -10; n <= 10; ++n)
      if (m * m + n * n <= 100) xs.push_back({m, n});
  std::vector<Displacement> canon;
  for (Displacement x : xs)
    if (x.m >= 0 && x.n >= x.m) canon.push_back(x);
  const GreenTable table(xs);
  double worst_route = 0.0, worst_sym = 0.0;
  for (double e : {0.3, 0.9, 1.4}) {
    const auto damped = green_damped(e, xs);
    std::map<Displacement, cplx> by_x;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      by_x[xs[i]] = damped[i];
      worst_route = std::max(worst_route, std::abs(damped[i] - table.boundary(e, Side::plus, xs[i])));
    }
    for (Displacement x : xs) {
      const cplx g = table.boundary(e, Side::plus, x);
      // Swap and reflection on the independent route; 4 - e and conjugation on the table.
      worst_sym = std::max(worst_sym, std::abs(by_x[{x.n, x.m}] - by_x[x]));
      worst_sym = std::max(worst_sym, std::abs(by_x[{std::abs(x.m), std::abs(x.n)}] - by_x[x]));
      worst_sym = std::max(worst_sym, std::abs(-parity(x) * table.boundary(4.0 - e, Side::minus, x) - g));
      worst_sym = std::max(worst_sym, std::abs(std::conj(table.boundary(e, Side::minus, x)) - g));
    }
  }
  for (cplx z : {cplx(-0.7, 0.0), cplx(1.3, 0.4), cplx(4.6, -0.2)})
    for (Displacement x : canon) {
      const cplx g = table.offband(z, x);
      worst_sym = std::max(worst_sym, std::abs(-parity(x) * table.offband(4.0 - z, x) - g));
      worst_sym = std::max(worst_sym, std::abs(std::conj(table.offband(std::conj(z), x)) - g));
    }
  return {worst_route <= 1e-6 && worst_sym <= 1e-8,
          fmt("%zu displacements, max |PV - damped| = %.2e, max symmetry defect = %.2e", xs.size(), worst_route,
              worst_sym)};
}

Outcome conservation() {
  const ScenarioConfig cfg = parse_config("");
  const Junction j = cfg.junction();
  const std::vector<Site> sites = cfg.window_sites();
  const std::vector<Bond> bonds = cfg.window_bonds();
  const GreenTable table(field_displacements(j, sites, bonds));
  EnergyRuleOptions eo;
  eo.radius = rule_radius(j, sites);
  const EnergyRule rule = energy_rule(kDefaultStates, eo);
  const FieldResult f = evaluate_fields(j, table, rule, {}, bonds, threads());

  // Junction inflow on the same energy rule.
  Eigen::MatrixXd inflow = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(j.n1()), static_cast<Eigen::Index>(j.n2()));
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const EnergySlice s(j, table, rule.x[k]);
    inflow += rule.w1[k] * s.junction_currents(1) + rule.w2[k] * s.junction_currents(2);
  }

  std::map<Bond, double> current;
  double jmax = 0.0;
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    current[bonds[i]] = f.current[i].total();
    jmax = std::max(jmax, std::abs(f.current[i].total()));
  }
  auto flow = [&](Site x, Site y) {
    const auto it = current.find({x, y});
    return it != current.end() ? it->second : -current.at({y, x});
  };
  auto in_window = [&](Site x) {
    return x.x1 >= cfg.window.x1_min && x.x1 <= cfg.window.x1_max && x.x2 >= cfg.window.x2_min &&
           x.x2 <= cfg.window.x2_max;
  };
  const Site steps[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  double worst_div = 0.0;
  int interior = 0;
  for (const Site& x : sites) {
    bool inner = true;
    for (const Site& d : steps) inner = inner && in_window({x.x1 + d.x1, x.x2 + d.x2});
    if (!inner) continue;
    ++interior;
    double div = 0.0;
    for (const Site& d : steps) div += flow(x, {x.x1 + d.x1, x.x2 + d.x2});
    for (std::size_t b = 0; b < j.n2(); ++b)
      if (j.contacts2[b] == x) div -= inflow.col(static_cast<Eigen::Index>(b)).sum();
    worst_div = std::max(worst_div, std::abs(div));
  }

  // Net flux out of nested rectangles around both contacts.
  struct Rect {
    int a1, b1, a2, b2;
  };
  std::vector<double> flux;
  for (Rect r : {Rect{-3, 23, -3, 3}, Rect{-6, 26, -10, 10}, Rect{-9, 28, -18, 19}}) {
    auto inside = [&](Site x) { return x.x1 >= r.a1 && x.x1 <= r.b1 && x.x2 >= r.a2 && x.x2 <= r.b2; };
    double out = 0.0;
    for (const Bond& b : bonds) {
      if (inside(b.x) && !inside(b.y)) out += current[b];
      if (inside(b.y) && !inside(b.x)) out -= current[b];
    }
    flux.push_back(out);
  }
  const double spread = *std::max_element(flux.begin(), flux.end()) - *std::min_element(flux.begin(), flux.end());

  // Exact antisymmetry, integrated and spectral.
  std::vector<std::size_t> ids;
  std::vector<Bond> sample, reversed;
  for (std::size_t i = 0; i < bonds.size(); i += 37) {
    ids.push_back(i);
    sample.push_back(bonds[i]);
    reversed.push_back({bonds[i].y, bonds[i].x});
  }
  const FieldResult back = evaluate_fields(j, table, rule, {}, reversed, threads());
  bool exact = true;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Channels& a = f.current[ids[i]];
    exact = exact && back.current[i].transmitted == -a.transmitted && back.current[i].reflected == -a.reflected;
  }
  for (double e : {0.3, 1.4})
    for (std::size_t i = 0; i < sample.size(); i += 4)
      for (Channel c : {Channel::transmitted, Channel::reflected, Channel::total})
        exact = exact && bond_current_spectral(j, table, e, sample[i], c) ==
                             -bond_current_spectral(j, table, e, reversed[i], c);

  const bool pass = worst_div <= 1e-6 * jmax && spread <= 1e-4 && exact;
  return {pass, fmt("%d interior sites, max |div| = %.2e (max |j| = %.3e); fluxes %.8f %.8f %.8f; "
                    "antisymmetry %s; %zu energy nodes",
                    interior, worst_div, jmax, flux[0], flux[1], flux[2], exact ? "exact" : "broken", rule.size())};
}

Outcome interference() {
  const ScenarioConfig cfg = parse_config("");
  const std::vector<Site> sites = cfg.window_sites();
  const Junction j = Junction::two_contacts(1.0, 1, 1.0, 20);
  const Junction j0 = Junction::two_contacts(0.0, 1, 1.0, 20);
  const GreenTable table(field_displacements(j, sites));
  std::string detail;
  bool pass = true;

  // (a), (b): spectral fields at e = 0.3.
  const EnergySlice s(j, table, 0.3);
  double d1_max = 0.0, d1_away = 0.0, d2_lo = 1e300, d2_hi = -1e300;
  for (const Site& x : sites) {
    const double d1 = s.delta_transmitted(x);
    d1_max = std::max(d1_max, d1);
    double r = 1e300;
    for (const Site& c : j.contacts2) r = std::min(r, std::hypot(x.x1 - c.x1, x.x2 - c.x2));
    if (r >= 3.0) d1_away = std::max(d1_away, d1);
    const double d2 = s.delta_reflected(x);
    d2_lo = std::min(d2_lo, d2);
    d2_hi = std::max(d2_hi, d2);
  }
  const bool a = d1_max >= 5e-3 && d1_max <= 2e-2;
  const bool b = d2_lo >= 0.09 && d2_hi <= 0.23;
  detail += fmt("(a) max delta1 = %.5f %s (%.5f at distance >= 3 from S2); (b) delta2 in [%.5f, %.5f] %s", d1_max,
                a ? "ok" : "out", d1_away, d2_lo, d2_hi, b ? "ok" : "out");
  pass = pass && a && b;

  // (c): with t1 = 0 only the pair (1,0)-(20,0) couples.
  const EnergySlice s0(j0, table, 0.3);
  const cplx g0 = s0.green_values()[table.index_of({0, 0})];
  const double m = s0.p00() / std::norm(1.0 - g0 * g0);
  double worst = 0.0, scale = 0.0;
  for (const Site& x : sites) {
    const double want = std::norm(table.boundary(0.3, Side::minus, x - Site{20, 0})) * m;
    worst = std::max(worst, std::abs(s0.delta_transmitted(x) - want));
    scale = std::max(scale, want);
  }
  const Eigen::MatrixXcd& mt = s0.kernels().m_tr;
  const double cross = std::max({std::abs(mt(0, 1)), std::abs(mt(1, 0)), std::abs(mt(0, 0))});
  const bool c = worst <= 1e-13 * scale && cross == 0.0;
  detail += fmt("; (c) closed-form defect %.1e of %.3e, cross term %.1e %s", worst, scale, cross, c ? "ok" : "off");
  pass = pass && c;

  // (d): j against twice the single-pair current.
  const GreenTable small(j.displacements());
  std::vector<double> js;
  bool below = true;
  double margin = 1e300;
  for (int k = 1; k <= 50; ++k) {
    const double e = 0.3 + 1.1 * k / 51.0;
    const double jj = spectral_total_current(j, small, e);
    const double j0v = spectral_total_current(j0, small, e);
    below = below && jj < 2.0 * j0v;
    margin = std::min(margin, 2.0 * j0v - jj);
    js.push_back(jj);
  }
  int maxima = 0;
  for (std::size_t k = 1; k + 1 < js.size(); ++k) maxima += js[k] > js[k - 1] && js[k] > js[k + 1];
  const bool d = below && maxima >= 2;
  detail += fmt("; (d) min(2 j0 - j) = %.4f, %d interior maxima %s", margin, maxima, d ? "ok" : "off");
  return {pass && d, detail};
}

Outcome far_field() {
  const Junction j = Junction::two_contacts(1.0, 1, 1.0, 20);
  const std::vector<Site> far{{20, 100}, {-100, 0}, {120, 0}, {-60, -80}};
  const GreenTable table(field_displacements(j, far));
  EnergyRuleOptions eo;
  eo.radius = rule_radius(j, far);
  const FieldResult f = evaluate_fields(j, table, energy_rule(kDefaultStates, eo), far, {}, threads());
  const GreenTable contacts(j.displacements());
  const auto bound = find_bound_states(j, contacts);
  const auto point = density_point(j, table, kDefaultStates, bound, far);
  double worst = 0.0;
  std::string values;
  for (std::size_t i = 0; i < far.size(); ++i) {
    const double d = f.density[i].total() + point[i];
    worst = std::max(worst, std::abs(d - 0.0492));
    values += fmt(" (%d,%d): %.6f", far[i].x1, far[i].x2, d);
  }
  return {worst <= 1e-3, "densities" + values + fmt("; max deviation %.2e", worst)};
}

Outcome properties() {
  std::string detail;
  // Single contact Q against the closed form, on and off the band.
  const Junction one = Junction::single(1.0);
  const GreenTable table(one.displacements());
  double worst_q = 0.0;
  auto compare = [&](const QMatrices& q, cplx g0) {
    Eigen::Matrix2cd want;
    want << g0, -1.0, -1.0, g0;
    want /= g0 * g0 - 1.0;
    worst_q = std::max(worst_q, (q.q - want).cwiseAbs().maxCoeff());
  };
  for (double e : {0.3, 1.4, 2.6, 3.7}) compare(q_matrix(one, table, e, Side::plus), table.boundary(e, Side::plus, {0, 0}));
  for (cplx z : {cplx(-1.0, 0.0), cplx(5.5, 0.0), cplx(2.0, 0.7)}) compare(q_matrix(one, table, z), table.offband(z, {0, 0}));
  const auto bound = find_bound_states(one, table);
  double worst_res = 0.0;
  for (const BoundState& b : bound) worst_res = std::max(worst_res, b.residual);
  const bool q_ok = worst_q <= 1e-10;
  const bool b_ok = bound.size() == 2 && worst_res <= 1e-8;
  detail += fmt("single contact Q defect %.1e; %zu bound states", worst_q, bound.size());
  for (const BoundState& b : bound) detail += fmt(" %.8f", b.lambda);
  detail += fmt(" (max residual %.1e)", worst_res);

  // Uncoupled junction: no scattering, no current, equilibrium fields.
  const Junction zero = Junction::two_contacts(0.0, 1, 0.0, 20);
  const GreenTable zt(zero.displacements());
  double q_norm = 0.0;
  for (double e : {0.3, 1.4}) q_norm = std::max(q_norm, q_matrix(zero, zt, e, Side::plus).q.norm());
  const double jz = total_current(zero, zt, kDefaultStates).value;
  const ScenarioConfig cfg = parse_config("window = -2 3 -2 2\n");
  const auto sites = cfg.window_sites();
  const auto bonds = cfg.window_bonds();
  const GreenTable ft(field_displacements(zero, sites, bonds));
  EnergyRuleOptions eo;
  eo.radius = rule_radius(zero, sites);
  const FieldResult f = evaluate_fields(zero, ft, energy_rule(kDefaultStates, eo), sites, bonds, threads());
  const double rho2 = equilibrium_density(kDefaultStates[1]);
  double d_dev = 0.0, j_dev = 0.0;
  for (const Channels& c : f.density) d_dev = std::max(d_dev, std::abs(c.total() - rho2));
  for (const Channels& c : f.current) j_dev = std::max(j_dev, std::abs(c.total()));
  const bool z_ok = q_norm == 0.0 && jz == 0.0 && d_dev <= 1e-9 && j_dev == 0.0;
  detail += fmt("; t = 0: |Q| = %.1e, J = %.1e, density deviation %.1e, max |j| = %.1e", q_norm, jz, d_dev, j_dev);
  return {q_ok && b_ok && z_ok, detail};
}

}  // namespace

int main() {
  run(1, "equilibrium densities", 1.0, equilibrium);
  run(2, "total current", 120.0, total_current_check);
  run(3, "asymptotic amplitude ratios", 1.0, amplitudes);
  run(4, "phase-speed window", 1.0, phase_speed);
  run(5, "spectral measure", 0.0, spectral_measure);
  run(6, "Green's function cross-validation", 0.0, cross_validation);
  run(7, "current conservation", 0.0, conservation);
  run(8, "interference checks", 0.0, interference);
  run(9, "far-field relaxation", 0.0, far_field);
  run(10, "property suite", 0.0, properties);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
