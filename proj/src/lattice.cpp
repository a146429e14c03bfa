#include "ness/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <string>

#include "ness/errors.hpp"
#include "ness/quadrature.hpp"

namespace ness {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kShellOrder = 16;
constexpr double kPanelPhase = 4.0;  // radians of phase per Gauss panel
constexpr int kMaxRefine = 8;

inline double sin2_half(double x) {
  const double s = std::sin(0.5 * x);
  return 2.0 * s * s;
}

struct Ray {
  double k;      // shell radius K
  double slope;  // d omega / dK along the ray, > 0
};

// Solves omega(K c, K s) = e on 0 < K < pi / (c + s), where omega reaches 2.
// Below e = 1 the unknown is K itself. Above, it is u = pi/(c+s) - K, and
// omega = 2 - 2 sin(u (c+s)/2) cos(K (c-s)/2), so the root and the slope
// keep full relative precision as e approaches the van Hove point.
Ray solve_ray(double e, double c, double s, double guess) {
  c = std::abs(c);
  s = std::abs(s);
  const double top = kPi / (c + s);
  if (e <= 1.0) {
    double lo = 0.0, hi = top;
    double k = (guess > lo && guess < hi) ? guess : std::min(std::sqrt(2.0 * e), 0.5 * hi);
    for (int it = 0; it < 200; ++it) {
      const double f = sin2_half(k * c) + sin2_half(k * s) - e;
      if (f < 0.0)
        lo = k;
      else if (f > 0.0)
        hi = k;
      const double df = c * std::sin(k * c) + s * std::sin(k * s);
      double next = f == 0.0 ? k : k - f / df;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const bool done = f == 0.0 || std::abs(next - k) <= 4e-16 * k || hi - lo <= 4e-16 * hi;
      k = next;
      if (done) break;
    }
    return {k, c * std::sin(k * c) + s * std::sin(k * s)};
  }
  const double delta = kBandCenter - e;  // exact for e in [1, 2]
  const double base = kPi * s / (c + s);
  auto slope_at = [&](double u) { return c * std::sin(base + u * c) + s * std::sin(base - u * s); };
  double lo = 0.0, hi = top;
  double u = (guess > 0.0 && guess < top) ? top - guess : 0.5 * top;
  for (int it = 0; it < 200; ++it) {
    const double f = 2.0 * std::sin(0.5 * u * (c + s)) * std::cos(0.5 * (top - u) * (c - s)) - delta;
    if (f < 0.0)
      lo = u;
    else if (f > 0.0)
      hi = u;
    double next = f == 0.0 ? u : u - f / slope_at(u);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool done = f == 0.0 || std::abs(next - u) <= 4e-16 * u || hi - lo <= 4e-16 * hi;
    u = next;
    if (done) break;
  }
  return {top - u, slope_at(u)};
}

double solve_radius(double e, double c, double s, double guess) { return solve_ray(e, c, s, guess).k; }

void check_lower(double e, const char* who) {
  if (!(e > 0.0 && e < kBandCenter)) throw DomainError(std::string(who) + ": energy must lie in (0, 2)");
}

// Quadrature nodes on theta in [0, pi/4] for 0 < e < 2, with the values the
// shell integrand needs at each node.
struct ShellNodes {
  std::vector<double> weight;  // quadrature weight times J / pi^2
  std::vector<double> kc;      // K cos theta
  std::vector<double> ks;      // K sin theta
};

ShellNodes build_nodes(double e, double radius, int refine) {
  const double quarter = 0.25 * kPi;
  // J is peaked at theta = 0 on a width ~ sqrt(2 (2 - e)) / pi near the van
  // Hove energy; grade geometrically away from it.
  std::vector<double> cuts{0.0};
  const double width = std::sqrt(2.0 * (kBandCenter - e)) / kPi;
  if (width < 0.25 * quarter) {
    for (double t = width; t < 0.5 * quarter; t *= 2.0) cuts.push_back(t);
  }
  cuts.push_back(quarter);

  std::vector<quad::Panel> panels;
  double k_prev = solve_radius(e, 1.0, 0.0, 0.0);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const double k_next = solve_radius(e, std::cos(b), std::sin(b), k_prev);
    const double phase = radius * (std::abs(k_next - k_prev) + std::max(k_next, k_prev) * (b - a));
    const int pieces = std::max(1, static_cast<int>(std::ceil(phase / kPanelPhase)));
    for (int p = 0; p < pieces; ++p) panels.push_back({a + (b - a) * p / pieces, a + (b - a) * (p + 1) / pieces});
    k_prev = k_next;
  }
  for (int r = 0; r < refine; ++r) panels = quad::bisect_panels(panels);
  const quad::PanelRule rule = quad::make_panel_rule(std::move(panels), kShellOrder);

  ShellNodes nodes;
  nodes.weight.resize(rule.size());
  nodes.kc.resize(rule.size());
  nodes.ks.resize(rule.size());
  double k = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double c = std::cos(rule.x[i]), s = std::sin(rule.x[i]);
    const Ray ray = solve_ray(e, c, s, k);
    k = ray.k;
    const double jac = k / ray.slope;
    nodes.weight[i] = rule.w[i] * jac / (kPi * kPi);
    nodes.kc[i] = k * c;
    nodes.ks[i] = k * s;
  }
  return nodes;
}

// P(e)_{0,x} = (1/pi^2) int_0^{pi/4} J [cos(m Kc) cos(n Ks) + cos(n Kc) cos(m Ks)].
void accumulate(const ShellNodes& nodes, std::span<const Displacement> xs, int max_index, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> ca(max_index + 1), cb(max_index + 1);
  for (std::size_t i = 0; i < nodes.weight.size(); ++i) {
    const double a = nodes.kc[i], b = nodes.ks[i];
    ca[0] = cb[0] = 1.0;
    if (max_index > 0) {
      ca[1] = std::cos(a);
      cb[1] = std::cos(b);
    }
    for (int j = 1; j < max_index; ++j) {
      ca[j + 1] = 2.0 * ca[1] * ca[j] - ca[j - 1];
      cb[j + 1] = 2.0 * cb[1] * cb[j] - cb[j - 1];
    }
    const double w = nodes.weight[i];
    for (std::size_t d = 0; d < xs.size(); ++d) {
      const int m = xs[d].m, n = xs[d].n;
      out[d] += w * (ca[m] * cb[n] + ca[n] * cb[m]);
    }
  }
}

}  // namespace

Displacement canonical(Displacement x) {
  int m = std::abs(x.m), n = std::abs(x.n);
  if (m > n) std::swap(m, n);
  return {m, n};
}

double dispersion(double k1, double k2) { return sin2_half(k1) + sin2_half(k2); }

double shell_radius(double e, double theta) {
  check_lower(e, "shell_radius");
  return solve_radius(e, std::cos(theta), std::sin(theta), 0.0);
}

double shell_jacobian(double e, double theta) {
  check_lower(e, "shell_jacobian");
  const Ray ray = solve_ray(e, std::cos(theta), std::sin(theta), 0.0);
  return ray.k / ray.slope;
}

double shell_radius_dtheta(double e, double theta) {
  check_lower(e, "shell_radius_dtheta");
  const double c = std::abs(std::cos(theta)), s = std::abs(std::sin(theta));
  const Ray ray = solve_ray(e, c, s, 0.0);
  const double w1 = std::sin(ray.k * c), w2 = std::sin(ray.k * s);
  const double sign = std::cos(theta) * std::sin(theta) < 0.0 ? -1.0 : 1.0;
  return sign * ray.k * (s * w1 - c * w2) / ray.slope;
}

double shell_density(double e, Displacement x) {
  ShellDensity p({x});
  double out = 0.0;
  p.evaluate(e, std::span<double>(&out, 1));
  return out;
}

ShellDensity::ShellDensity(std::vector<Displacement> xs, double tol) : tol_(tol) {
  xs_.reserve(xs.size());
  double far = -1.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Displacement c = canonical(xs[i]);
    xs_.push_back(c);
    max_index_ = std::max(max_index_, c.n);
    const double r = std::hypot(c.m, c.n);
    if (r > far) {
      far = r;
      probe_far_ = i;
    }
  }
  radius_ = std::max(far, 1.0);
}

void ShellDensity::evaluate(double e, std::span<double> out) const {
  if (!(e > 0.0 && e < kBandTop) || e == kBandCenter)
    throw DomainError("shell_density: energy must lie in (0, 4) away from the van Hove point 2");
  if (out.size() != xs_.size()) throw DomainError("ShellDensity::evaluate: output size mismatch");
  if (xs_.empty()) return;
  const bool upper = e > kBandCenter;
  const double lower = upper ? kBandTop - e : e;

  // Probe the most oscillatory entry and the on-site entry (most sensitive to
  // the van Hove peak) under one bisection of every panel.
  const Displacement probes[2] = {Displacement{0, 0}, xs_[probe_far_]};
  const int probe_index = std::max(probes[1].n, 0);
  double coarse[2], fine[2];
  ShellNodes nodes = build_nodes(lower, radius_, 0);
  accumulate(nodes, probes, probe_index, coarse);
  for (int r = 1; r <= kMaxRefine; ++r) {
    ShellNodes next = build_nodes(lower, radius_, r);
    accumulate(next, probes, probe_index, fine);
    nodes = std::move(next);
    const double diff = std::max(std::abs(fine[0] - coarse[0]), std::abs(fine[1] - coarse[1]));
    // Near the van Hove point the slope d omega/dK is O(sqrt(2 - e)) and
    // rounding in it sets a floor on attainable agreement.
    const double floor = 4e-16 / std::sqrt(kBandCenter - lower);
    if (diff <= tol_ * std::max(1.0, std::abs(fine[0])) + floor) break;
    if (r == kMaxRefine) {
      char msg[96];
      std::snprintf(msg, sizeof msg, "shell_density: angular quadrature did not settle at e=%.17g", e);
      throw ConvergenceError(msg, fine[0], diff);
    }
    coarse[0] = fine[0];
    coarse[1] = fine[1];
  }
  accumulate(nodes, xs_, max_index_, out);
  if (upper) {
    for (std::size_t d = 0; d < xs_.size(); ++d)
      if ((xs_[d].m + xs_[d].n) % 2 != 0) out[d] = -out[d];
  }
}

}  // namespace ness
