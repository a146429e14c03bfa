#include "ness/green.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ness/errors.hpp"

namespace ness {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kOrder = 16;
constexpr double kPanelPhase = 6.0;    // radians of R * K_axis per panel
constexpr double kMaxPanel = 0.25;     // widest panel on (0, 2)
constexpr double kEdgeScale = 1e-12;   // innermost grading step at s = 0
constexpr double kCenterScale = 1e-11; // innermost grading step at s = 2
constexpr double kNearRadius = 1.5;    // |y| below which a panel is treated as near the pole
constexpr double kMinEllipse = 2.5;    // Bernstein ellipse parameter required for plain Gauss sums

// On-axis shell radius arccos(1 - s), written to keep precision at small s.
double axis_radius(double s) { return 2.0 * std::asin(std::sqrt(0.5 * s)); }

double ellipse_parameter(cplx y) {
  const cplx w = y + std::sqrt(y - 1.0) * std::sqrt(y + 1.0);
  const double r = std::abs(w);
  return std::max(r, 1.0 / r);
}

double distance_to_band(cplx z) {
  const double x = z.real();
  if (x < 0.0) return std::abs(z);
  if (x > kBandTop) return std::abs(z - kBandTop);
  return std::abs(z.imag());
}

}  // namespace

GreenTable::GreenTable(std::vector<Displacement> xs, GreenOptions opt)
    : opt_(opt), shell_([&] {
        std::vector<Displacement> c;
        c.reserve(xs.size());
        for (const Displacement& x : xs) c.push_back(canonical(x));
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        return c;
      }(), opt.shell_tol) {
  xs_ = shell_.displacements();
  for (std::size_t d = 0; d < xs_.size(); ++d) {
    lookup_[xs_[d]] = d;
    parity_.push_back((xs_[d].m + xs_[d].n) % 2 == 0 ? 1.0 : -1.0);
    radius_ = std::max(radius_, std::hypot(xs_[d].m, xs_[d].n));
  }
  mesh_ = build_mesh({}, {}, true);
}

std::size_t GreenTable::index_of(Displacement x) const {
  auto it = lookup_.find(canonical(x));
  if (it == lookup_.end()) throw DomainError("GreenTable: displacement not tabulated");
  return it->second;
}

GreenTable::Mesh GreenTable::build_mesh(std::span<const double> foci, std::span<const double> scales,
                                        bool with_coefficients) const {
  std::vector<double> cuts{0.0, kBandCenter};
  auto grade = [&](double focus, double scale) {
    cuts.push_back(focus);
    for (double d = scale; d < kBandCenter; d *= 2.0) {
      if (focus - d > 0.0) cuts.push_back(focus - d);
      if (focus + d < kBandCenter) cuts.push_back(focus + d);
    }
  };
  grade(0.0, kEdgeScale);
  grade(kBandCenter, kCenterScale);
  for (std::size_t i = 0; i < foci.size(); ++i) grade(foci[i], scales[i]);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<quad::Panel> panels;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const double phase = radius_ * (axis_radius(b) - axis_radius(a));
    const int pieces = std::max({1, static_cast<int>(std::ceil(phase / kPanelPhase)),
                                 static_cast<int>(std::ceil((b - a) / kMaxPanel))});
    for (int p = 0; p < pieces; ++p) {
      const double lo = p == 0 ? a : a + (b - a) * p / pieces;
      const double hi = p + 1 == pieces ? b : a + (b - a) * (p + 1) / pieces;
      panels.push_back({lo, hi});
    }
  }

  Mesh mesh;
  mesh.rule = quad::make_panel_rule(std::move(panels), kOrder);
  const std::size_t nd = xs_.size();
  mesh.table.resize(mesh.size() * nd);
  for (std::size_t j = 0; j < mesh.size(); ++j)
    shell_.evaluate(mesh.rule.x[j], std::span<double>(mesh.table.data() + j * nd, nd));

  if (with_coefficients) {
    const std::vector<double>& tr = quad::legendre_transform(kOrder);
    mesh.coef.assign(mesh.size() * nd, 0.0);
    for (std::size_t p = 0; p < mesh.rule.panels.size(); ++p) {
      for (int k = 0; k < kOrder; ++k) {
        double* c = mesh.coef.data() + (p * kOrder + k) * nd;
        for (int j = 0; j < kOrder; ++j) {
          const double t = tr[k * kOrder + j];
          const double* f = mesh.table.data() + (p * kOrder + j) * nd;
          for (std::size_t d = 0; d < nd; ++d) c[d] += t * f[d];
        }
      }
    }
  }
  return mesh;
}

bool GreenTable::resolves(const Mesh& mesh, cplx pole) const {
  for (const quad::Panel& p : mesh.rule.panels) {
    const cplx y = (pole - p.mid()) / p.half();
    if (std::abs(y) > 8.0) continue;
    if (ellipse_parameter(y) < kMinEllipse) return false;
  }
  return true;
}

void GreenTable::sum_offband(const Mesh& mesh, cplx z, std::span<cplx> out) const {
  const std::size_t nd = xs_.size();
  std::vector<cplx> direct(nd), mirror(nd);
  for (std::size_t j = 0; j < mesh.size(); ++j) {
    const double s = mesh.rule.x[j], w = mesh.rule.w[j];
    const cplx k1 = w / (s - z);
    const cplx k2 = w / (kBandTop - s - z);
    const double* row = mesh.table.data() + j * nd;
    for (std::size_t d = 0; d < nd; ++d) {
      direct[d] += k1 * row[d];
      mirror[d] += k2 * row[d];
    }
  }
  for (std::size_t d = 0; d < nd; ++d) out[d] = direct[d] + parity_[d] * mirror[d];
}

void GreenTable::offband(cplx z, std::span<cplx> out) const {
  if (out.size() != xs_.size()) throw DomainError("GreenTable::offband: output size mismatch");
  if (!(distance_to_band(z) > opt_.offband_gap))
    throw DomainError("green_offband: z lies on or too close to the band [0, 4]; use green_boundary");
  const cplx poles[2] = {z, kBandTop - z};
  std::vector<double> foci, scales;
  for (const cplx& p : poles) {
    if (resolves(mesh_, p)) continue;
    const double focus = std::clamp(p.real(), 0.0, kBandCenter);
    foci.push_back(focus);
    scales.push_back(std::abs(p - focus));
  }
  if (foci.empty()) {
    sum_offband(mesh_, z, out);
  } else {
    const Mesh local = build_mesh(foci, scales, false);
    sum_offband(local, z, out);
  }
}

cplx GreenTable::offband(cplx z, Displacement x) const {
  std::vector<cplx> all(xs_.size());
  offband(z, all);
  return all[index_of(x)];
}

void GreenTable::boundary(double e, Side side, std::span<cplx> out, std::span<double> density) const {
  if (!(e > 0.0 && e < kBandTop) || e == kBandCenter)
    throw DomainError("green_boundary: energy must lie in (0, 4) away from the van Hove point 2");
  const std::size_t nd = xs_.size();
  if (out.size() != nd || (!density.empty() && density.size() != nd))
    throw DomainError("GreenTable::boundary: output size mismatch");
  const bool upper = e > kBandCenter;
  const double s_e = upper ? kBandTop - e : e;

  std::vector<double> p_e(nd);
  shell_.evaluate(s_e, p_e);

  const auto& panels = mesh_.rule.panels;
  const std::size_t np = panels.size();
  auto local = [&](std::size_t p) { return (s_e - panels[p].mid()) / panels[p].half(); };
  std::size_t home = static_cast<std::size_t>(
      std::upper_bound(panels.begin(), panels.end(), s_e, [](double v, const quad::Panel& p) { return v < p.b; }) -
      panels.begin());
  home = std::min(home, np - 1);
  std::size_t first = home, last = home;
  while (first > 0 && std::abs(local(first - 1)) <= kNearRadius) --first;
  while (last + 1 < np && std::abs(local(last + 1)) <= kNearRadius) ++last;

  std::vector<double> direct(nd, 0.0), mirror(nd, 0.0);
  for (std::size_t j = 0; j < mesh_.size(); ++j) {
    const double s = mesh_.rule.x[j], w = mesh_.rule.w[j];
    const double* row = mesh_.table.data() + j * nd;
    const double k2 = w / (kBandTop - s - s_e);
    const std::size_t p = j / kOrder;
    if (p < first || p > last) {
      const double k1 = w / (s - s_e);
      for (std::size_t d = 0; d < nd; ++d) {
        direct[d] += k1 * row[d];
        mirror[d] += k2 * row[d];
      }
    } else {
      for (std::size_t d = 0; d < nd; ++d) mirror[d] += k2 * row[d];
    }
  }

  // Near panels: int (L(s) - P(e)) / (s - e) ds with L the Legendre
  // interpolant of the panel, in closed form from Cauchy moments.
  double nu[kOrder], leg[kOrder];
  for (std::size_t p = first; p <= last; ++p) {
    const double y = local(p);
    double mu0 = 0.0;
    quad::cauchy_moments(y, nu, mu0);
    quad::legendre_values(y, leg);
    const bool at_edge = 1.0 - std::abs(y) < 1e-13;
    for (std::size_t d = 0; d < nd; ++d) {
      double moment = 0.0, interp = 0.0;
      for (int k = 0; k < kOrder; ++k) {
        const double c = mesh_.coef[(p * kOrder + k) * nd + d];
        moment += c * nu[k];
        interp += c * leg[k];
      }
      direct[d] += moment;
      if (!at_edge) direct[d] += (interp - p_e[d]) * mu0;
    }
  }
  const double log_ratio = std::log((panels[last].b - s_e) / (s_e - panels[first].a));

  for (std::size_t d = 0; d < nd; ++d) {
    const double re = direct[d] + p_e[d] * log_ratio + parity_[d] * mirror[d];
    cplx g(re, kPi * p_e[d]);  // g+(s_e)
    double pd = p_e[d];
    if (upper) {
      g = -parity_[d] * std::conj(g);
      pd = parity_[d] * pd;
    }
    out[d] = side == Side::plus ? g : std::conj(g);
    if (!density.empty()) density[d] = pd;
  }
}

cplx GreenTable::boundary(double e, Side side, Displacement x) const {
  std::vector<cplx> all(xs_.size());
  boundary(e, side, all);
  return all[index_of(x)];
}

double green_density(double e, Displacement x) { return shell_density(e, x); }

cplx green_boundary(double e, Side side, Displacement x) { return GreenTable({x}).boundary(e, side, x); }

cplx green_offband(cplx z, Displacement x) { return GreenTable({x}).offband(z, x); }

}  // namespace ness
