#include "ness/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "ness/errors.hpp"
#include "ness/quadrature.hpp"

namespace ness {

namespace {

constexpr double kRangeTol = 1e-12;  // relative eigenvalue cut for the range of v
constexpr double kMinRcond = 1e-12;

// Orthonormal basis of the range of v restricted to the active contacts.
struct Range {
  std::vector<Eigen::Index> active;  // contacts with a non-zero coupling
  Eigen::MatrixXd basis;             // |active| x rank; empty when v is invertible there
  bool full = true;
};

Range coupling_range(const Eigen::MatrixXd& v) {
  Range r;
  for (Eigen::Index k = 0; k < v.rows(); ++k)
    if (v.row(k).cwiseAbs().maxCoeff() > 0.0) r.active.push_back(k);
  if (r.active.empty()) return r;
  const auto n = static_cast<Eigen::Index>(r.active.size());
  Eigen::MatrixXd va(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) va(a, b) = v(r.active[a], r.active[b]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(va);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < n; ++k)
    if (std::abs(ev(k)) > kRangeTol * scale) keep.push_back(k);
  if (static_cast<Eigen::Index>(keep.size()) == n) return r;
  r.full = false;
  r.basis.resize(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) r.basis.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(keep[c]);
  return r;
}

template <class Mat>
Mat restrict_active(const Mat& m, const std::vector<Eigen::Index>& active) {
  const auto n = static_cast<Eigen::Index>(active.size());
  Mat out(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) out(a, b) = m(active[a], active[b]);
  return out;
}

// Reduced M on the range of v: the active block itself when v is invertible
// there, otherwise U^T M U.
Eigen::MatrixXcd reduced_m(const Range& r, const Eigen::MatrixXcd& m) {
  Eigen::MatrixXcd ma = restrict_active(m, r.active);
  if (r.full) return ma;
  const Eigen::MatrixXcd u = r.basis.cast<cplx>();
  return u.transpose() * ma * u;
}

std::size_t pair_index(const GreenTable& table, Displacement d) { return table.index_of(d); }

}  // namespace

Junction Junction::two_contacts(double t1, int d1, double t2, int d2) {
  Junction j;
  j.contacts1 = {{0, 0}, {d1, 0}};
  j.contacts2 = {{0, 0}, {d2, 0}};
  j.t = Eigen::MatrixXd::Zero(2, 2);
  j.t(0, 0) = t1;
  j.t(1, 1) = t2;
  return j;
}

Junction Junction::single(double t) {
  Junction j;
  j.contacts1 = {{0, 0}};
  j.contacts2 = {{0, 0}};
  j.t = Eigen::MatrixXd::Constant(1, 1, t);
  return j;
}

Eigen::MatrixXd Junction::coupling() const {
  const auto a = static_cast<Eigen::Index>(n1()), b = static_cast<Eigen::Index>(n2());
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(a + b, a + b);
  if (t.size() > 0) {
    v.topRightCorner(a, b) = t;
    v.bottomLeftCorner(b, a) = t.transpose();
  }
  return v;
}

std::vector<Displacement> Junction::displacements() const {
  std::set<Displacement> out;
  for (const auto* set : {&contacts1, &contacts2})
    for (const Site& a : *set)
      for (const Site& b : *set) out.insert(canonical(a - b));
  return {out.begin(), out.end()};
}

void Junction::validate() const {
  if (t.rows() != static_cast<Eigen::Index>(n1()) || t.cols() != static_cast<Eigen::Index>(n2()))
    throw ConfigError("contacts", "tunneling matrix shape does not match the contact sets");
  for (const auto* set : {&contacts1, &contacts2}) {
    std::set<Site> seen(set->begin(), set->end());
    if (seen.size() != set->size()) throw ConfigError("contacts", "a contact site is listed twice in one reservoir");
  }
  for (Eigen::Index a = 0; a < t.rows(); ++a)
    for (Eigen::Index b = 0; b < t.cols(); ++b)
      if (!std::isfinite(t(a, b))) throw ConfigError("contacts", "tunneling amplitudes must be finite");
}

ContactKernels contact_kernels(const Junction& j, const GreenTable& table, double e, Side side) {
  std::vector<cplx> g(table.size());
  std::vector<double> p(table.size());
  table.boundary(e, side, g, p);
  const auto n = static_cast<Eigen::Index>(j.size());
  ContactKernels k{Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      if (j.reservoir(a) != j.reservoir(b)) continue;
      const std::size_t idx = pair_index(table, j.site(b) - j.site(a));
      k.r0(a, b) = g[idx];
      k.p(a, b) = p[idx];
    }
  return k;
}

Eigen::MatrixXcd contact_resolvent(const Junction& j, const GreenTable& table, cplx z) {
  std::vector<cplx> g(table.size());
  table.offband(z, g);
  const auto n = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXcd r0 = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      if (j.reservoir(a) == j.reservoir(b)) r0(a, b) = g[pair_index(table, j.site(b) - j.site(a))];
  return r0;
}

Eigen::MatrixXcd m_matrix(const Junction& j, const Eigen::MatrixXcd& r0) {
  const Eigen::MatrixXcd v = j.coupling().cast<cplx>();
  return v + v * r0 * v;
}

Eigen::MatrixXcd QMatrices::block(int i, int jdx) const {
  const auto r0 = static_cast<Eigen::Index>(i == 1 ? 0 : n1), c0 = static_cast<Eigen::Index>(jdx == 1 ? 0 : n1);
  const auto rn = static_cast<Eigen::Index>(i == 1 ? n1 : n2), cn = static_cast<Eigen::Index>(jdx == 1 ? n1 : n2);
  return q.block(r0, c0, rn, cn);
}

QMatrices q_matrix(const Junction& j, const Eigen::MatrixXcd& r0) {
  QMatrices out;
  out.n1 = j.n1();
  out.n2 = j.n2();
  const auto n = static_cast<Eigen::Index>(j.size());
  out.q = Eigen::MatrixXcd::Zero(n, n);
  const Eigen::MatrixXd v = j.coupling();
  const Range range = coupling_range(v);
  if (range.active.empty()) return out;

  const Eigen::MatrixXcd m = m_matrix(j, r0);
  const Eigen::MatrixXcd mr = reduced_m(range, m);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(mr);
  out.rcond = lu.rcond();
  if (!(out.rcond > kMinRcond))
    throw BoundStateProximity("q_matrix: v + v r0 v is singular on the range of v (bound state nearby)", out.rcond,
                              lu.determinant());
  const Eigen::MatrixXcd va = restrict_active(v, range.active).cast<cplx>();
  Eigen::MatrixXcd qa;
  if (range.full) {
    qa = va * lu.solve(va);
  } else {
    const Eigen::MatrixXcd vu = va * range.basis.cast<cplx>();
    qa = vu * lu.solve(vu.transpose());
  }
  for (std::size_t a = 0; a < range.active.size(); ++a)
    for (std::size_t b = 0; b < range.active.size(); ++b)
      out.q(range.active[a], range.active[b]) = qa(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  return out;
}

QMatrices q_matrix(const Junction& j, const GreenTable& table, double e, Side side) {
  return q_matrix(j, contact_kernels(j, table, e, side).r0);
}

QMatrices q_matrix(const Junction& j, const GreenTable& table, cplx z) {
  return q_matrix(j, contact_resolvent(j, table, z));
}

std::vector<BoundState> find_bound_states(const Junction& j, const GreenTable& table, const ScanOptions& opt) {
  std::vector<BoundState> found;
  const Eigen::MatrixXd v = j.coupling();
  const Range range = coupling_range(v);
  if (range.active.empty()) return found;
  if (!(opt.min_distance > 0.0 && opt.max_distance > opt.min_distance && opt.points >= 2))
    throw DomainError("find_bound_states: invalid scan range");

  auto reduced = [&](double z) -> Eigen::MatrixXd {
    return reduced_m(range, m_matrix(j, contact_resolvent(j, table, z))).real();
  };
  // Eigenvalues of the reduced M increase with z (dM/dz = v r0^2 v >= 0), so
  // the number of negative ones drops by the kernel dimension at each root.
  auto negatives = [&](double z) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced(z), Eigen::EigenvaluesOnly);
    return static_cast<int>((eig.eigenvalues().array() < 0.0).count());
  };

  std::vector<std::pair<double, int>> roots;
  auto refine = [&](auto&& self, double lo, int c_lo, double hi, int c_hi) -> void {
    if (c_lo == c_hi) return;
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi) || hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) {
      roots.emplace_back(mid, c_lo - c_hi);
      return;
    }
    const int c_mid = negatives(mid);
    self(self, lo, c_lo, mid, c_mid);
    self(self, mid, c_mid, hi, c_hi);
  };

  const double ratio = std::log(opt.max_distance / opt.min_distance) / (opt.points - 1);
  auto distance = [&](int k) { return opt.min_distance * std::exp(ratio * k); };
  // Below the band, z runs upward from -max_distance to -min_distance.
  {
    double z_prev = -distance(opt.points - 1);
    int c_prev = negatives(z_prev);
    for (int k = opt.points - 2; k >= 0; --k) {
      const double z = -distance(k);
      const int c = negatives(z);
      refine(refine, z_prev, c_prev, z, c);
      z_prev = z;
      c_prev = c;
    }
  }
  // Above the band, from 4 + min_distance to 4 + max_distance.
  {
    double z_prev = kBandTop + distance(0);
    int c_prev = negatives(z_prev);
    for (int k = 1; k < opt.points; ++k) {
      const double z = kBandTop + distance(k);
      const int c = negatives(z);
      refine(refine, z_prev, c_prev, z, c);
      z_prev = z;
      c_prev = c;
    }
  }

  const std::array<ReservoirState, 2> empty{};
  for (const auto& [lambda, mult] : roots) {
    const Eigen::MatrixXd m = m_matrix(j, contact_resolvent(j, table, lambda)).real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced(lambda));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(eig.eigenvalues().size()));
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<Eigen::Index>(k);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::abs(eig.eigenvalues()(a)) < std::abs(eig.eigenvalues()(b));
    });
    const SpectralMoments mom = bound_state_moments(j, lambda, empty, opt.tol);
    for (int k = 0; k < mult; ++k) {
      const Eigen::VectorXd y = eig.eigenvectors().col(order[static_cast<std::size_t>(k)]);
      Eigen::VectorXd ya = range.full ? y : Eigen::VectorXd(range.basis * y);
      BoundState b;
      b.lambda = lambda;
      b.multiplicity = mult;
      b.psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(j.size()));
      for (std::size_t a = 0; a < range.active.size(); ++a) b.psi(range.active[a]) = ya(static_cast<Eigen::Index>(a));
      b.psi.normalize();
      b.residual = (m * b.psi).norm();
      const Eigen::VectorXd vpsi = v * b.psi;
      b.norm2 = vpsi.dot(mom.norm * vpsi);
      found.push_back(std::move(b));
    }
  }
  return found;
}

std::vector<double> bound_state_amplitudes(const Junction& j, const GreenTable& table, const BoundState& b,
                                           const std::vector<Site>& xs, int r) {
  std::vector<cplx> g(table.size());
  table.offband(b.lambda, g);
  const Eigen::VectorXd vpsi = j.coupling() * b.psi;
  std::vector<double> f(xs.size(), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < j.size(); ++k) {
      if (j.reservoir(k) != r) continue;
      acc += g[table.index_of(xs[i] - j.site(k))].real() * vpsi(static_cast<Eigen::Index>(k));
    }
    f[i] = -acc;
  }
  return f;
}

SpectralMoments bound_state_moments(const Junction& j, double lambda, const std::array<ReservoirState, 2>& states,
                                    double tol) {
  const std::vector<Displacement> ds = j.displacements();
  const ShellDensity shell(ds);
  const auto n = static_cast<Eigen::Index>(j.size());
  std::vector<std::size_t> pair(static_cast<std::size_t>(n * n), 0);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      if (j.reservoir(a) != j.reservoir(b)) continue;
      const Displacement d = canonical(j.site(b) - j.site(a));
      pair[static_cast<std::size_t>(a * n + b)] =
          static_cast<std::size_t>(std::lower_bound(shell.displacements().begin(), shell.displacements().end(), d) -
                                   shell.displacements().begin());
    }
  const double dist = lambda < 0.0 ? -lambda : lambda - kBandTop;
  if (!(dist > 0.0)) throw DomainError("bound_state_moments: lambda must lie outside [0, 4]");

  std::vector<double> p(ds.size());
  auto integrand = [&](double e) -> Eigen::VectorXd {
    shell.evaluate(e, p);
    const double k = 1.0 / ((e - lambda) * (e - lambda));
    Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * n * n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) {
        const int r = j.reservoir(a);
        if (r != j.reservoir(b)) continue;
        const double val = p[pair[static_cast<std::size_t>(a * n + b)]] * k;
        out(a * n + b) = val;
        out(n * n + a * n + b) = val * fermi_weight(states[static_cast<std::size_t>(r - 1)], e);
      }
    return out;
  };
  std::vector<double> hints{kBandCenter};
  for (const ReservoirState& s : states)
    if (s.mu > 0.0 && s.mu < kBandTop) hints.push_back(s.mu);
  const auto est = quad::integrate_adaptive(integrand, 0.0, kBandTop, hints, tol * (1.0 + 1.0 / dist), 20000);
  SpectralMoments out;
  out.norm.resize(n, n);
  out.occupied.resize(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      out.norm(a, b) = est.value(a * n + b);
      out.occupied(a, b) = est.value(n * n + a * n + b);
    }
  return out;
}

double occupation_weight(const Junction& j, const BoundState& b, const std::array<ReservoirState, 2>& states,
                         double tol) {
  const SpectralMoments mom = bound_state_moments(j, b.lambda, states, tol);
  const Eigen::VectorXd vpsi = j.coupling() * b.psi;
  return vpsi.dot(mom.occupied * vpsi);
}

}  // namespace ness
