#include "ness/observables.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <thread>
#include <utility>

#include "ness/errors.hpp"
#include "ness/lattice.hpp"

namespace ness {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxPanel = 0.25;
constexpr int kOrder = 16;
constexpr std::size_t kBlocks = 64;  // fixed reduction blocks, independent of the thread count

// On-axis wavenumber, the fastest phase growth of g(e; x) in e.
double axis_wavenumber(double e) {
  const double s = e > kBandCenter ? kBandTop - e : e;
  return 2.0 * std::asin(std::sqrt(0.5 * std::clamp(s, 0.0, kBandCenter)));
}

double support_top(const ReservoirState& s) {
  if (std::isinf(s.beta)) return std::clamp(s.mu, 0.0, kBandTop);
  return kBandTop;
}

std::vector<double> energy_hints(const ReservoirStates& states) {
  std::vector<double> h{kBandCenter};
  for (const ReservoirState& s : states)
    if (s.mu > 0.0 && s.mu < kBandTop) h.push_back(s.mu);
  return h;
}

void require_neighbours(Site x, Site y) {
  const int d = std::abs(x.x1 - y.x1) + std::abs(x.x2 - y.x2);
  if (d > 1) throw DomainError("bond current: sites are not nearest neighbours");
}

}  // namespace

double equilibrium_density(const ReservoirState& state, double tol) {
  const ShellDensity p00({Displacement{0, 0}});
  auto integrand = [&](double e) {
    double v = 0.0;
    p00.evaluate(e, std::span<double>(&v, 1));
    return v * fermi_weight(state, e);
  };
  const double top = support_top(state);
  if (!(top > 0.0)) return 0.0;
  return quad::integrate_adaptive(integrand, 0.0, top, energy_hints({state, state}), tol).value;
}

EnergySlice::EnergySlice(const Junction& j, const GreenTable& table, double e)
    : j_(&j), table_(&table), e_(e), g_(table.size()), p_(table.size()) {
  table.boundary(e, Side::plus, g_, p_);
  const auto n = static_cast<Eigen::Index>(j.size());
  contact_.r0 = Eigen::MatrixXcd::Zero(n, n);
  contact_.p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      if (j.reservoir(a) != j.reservoir(b)) continue;
      const std::size_t idx = table.index_of(j.site(b) - j.site(a));
      contact_.r0(a, b) = g_[idx];
      contact_.p(a, b) = p_[idx];
    }
  q_ = q_matrix(j, contact_.r0);

  const auto n1 = static_cast<Eigen::Index>(j.n1()), n2 = static_cast<Eigen::Index>(j.n2());
  const Eigen::MatrixXcd qp21 = q_.q.block(n1, 0, n2, n1);
  const Eigen::MatrixXcd qp22 = q_.q.block(n1, n1, n2, n2);
  const Eigen::MatrixXcd p1 = contact_.p.topLeftCorner(n1, n1).cast<cplx>();
  k_.energy = e;
  k_.p2 = contact_.p.bottomRightCorner(n2, n2);
  k_.q22 = qp22;
  k_.m_tr = qp21 * p1 * qp21.adjoint();
  k_.m_ref = qp22 * k_.p2.cast<cplx>() * qp22.adjoint();
}

Eigen::VectorXcd EnergySlice::v_minus(Site x) const {
  const auto n2 = static_cast<Eigen::Index>(j_->n2());
  Eigen::VectorXcd v(n2);
  for (Eigen::Index k = 0; k < n2; ++k) v(k) = std::conj(g_[table_->index_of(x - j_->contacts2[k])]);
  return v;
}

Eigen::VectorXd EnergySlice::v_zero(Site x) const {
  const auto n2 = static_cast<Eigen::Index>(j_->n2());
  Eigen::VectorXd v(n2);
  for (Eigen::Index k = 0; k < n2; ++k) v(k) = p_[table_->index_of(x - j_->contacts2[k])];
  return v;
}

double EnergySlice::delta_transmitted(Site x) const {
  const Eigen::VectorXcd vm = v_minus(x);
  return vm.dot(k_.m_tr * vm).real();
}

double EnergySlice::delta_reflected(Site x) const {
  const Eigen::VectorXcd vm = v_minus(x);
  const Eigen::VectorXcd v0 = v_zero(x).cast<cplx>();
  return p00() - 2.0 * vm.dot(k_.q22 * v0).real() + vm.dot(k_.m_ref * vm).real();
}

// Both orientations evaluate the same expression, so j(x, y) = -j(y, x) exactly.
double EnergySlice::current_transmitted(Site x, Site y) const {
  require_neighbours(x, y);
  if (x == y) return 0.0;
  if (y < x) return -current_transmitted(y, x);
  return -v_minus(x).dot(k_.m_tr * v_minus(y)).imag();
}

double EnergySlice::current_reflected(Site x, Site y) const {
  require_neighbours(x, y);
  if (x == y) return 0.0;
  if (y < x) return -current_reflected(y, x);
  const Eigen::VectorXcd vx = v_minus(x), vy = v_minus(y);
  const Eigen::VectorXcd ux = k_.q22 * v_zero(x).cast<cplx>(), uy = k_.q22 * v_zero(y).cast<cplx>();
  return vx.dot(uy).imag() - vy.dot(ux).imag() - vx.dot(k_.m_ref * vy).imag();
}

double EnergySlice::spectral_current() const {
  return 2.0 * kPi * (k_.m_tr * k_.p2.cast<cplx>()).trace().real();
}

Eigen::MatrixXd EnergySlice::junction_currents(int r) const {
  const auto n = static_cast<Eigen::Index>(j_->size());
  const auto n1 = static_cast<Eigen::Index>(j_->n1()), n2 = static_cast<Eigen::Index>(j_->n2());
  Eigen::MatrixXcd pr = Eigen::MatrixXcd::Zero(n, n);
  if (r == 1)
    pr.topLeftCorner(n1, n1) = contact_.p.topLeftCorner(n1, n1).cast<cplx>();
  else
    pr.bottomRightCorner(n2, n2) = contact_.p.bottomRightCorner(n2, n2).cast<cplx>();
  const Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n) - contact_.r0 * q_.q;
  const Eigen::MatrixXcd rho = a * pr * a.adjoint();
  Eigen::MatrixXd out(n1, n2);
  for (Eigen::Index x = 0; x < n1; ++x)
    for (Eigen::Index y = 0; y < n2; ++y) out(x, y) = 2.0 * j_->t(x, y) * rho(x, n1 + y).imag();
  return out;
}

double delta_transmitted(const Junction& j, const GreenTable& table, double e, Site x) {
  return EnergySlice(j, table, e).delta_transmitted(x);
}

double delta_reflected(const Junction& j, const GreenTable& table, double e, Site x) {
  return EnergySlice(j, table, e).delta_reflected(x);
}

double bond_current_spectral(const Junction& j, const GreenTable& table, double e, Bond b, Channel c) {
  const EnergySlice slice(j, table, e);
  switch (c) {
    case Channel::transmitted:
      return slice.current_transmitted(b.x, b.y);
    case Channel::reflected:
      return slice.current_reflected(b.x, b.y);
    case Channel::total:
      break;
  }
  return slice.current_transmitted(b.x, b.y) + slice.current_reflected(b.x, b.y);
}

double spectral_total_current(const Junction& j, const GreenTable& table, double e) {
  return EnergySlice(j, table, e).spectral_current();
}

quad::Estimate<double> total_current(const Junction& j, const GreenTable& table, const ReservoirStates& states,
                                     double tol) {
  if (j.is_zero()) return {};
  const bool sharp = std::isinf(states[0].beta) && std::isinf(states[1].beta);
  if (sharp) {
    const double lo = std::clamp(std::min(states[0].mu, states[1].mu), 0.0, kBandTop);
    const double hi = std::clamp(std::max(states[0].mu, states[1].mu), 0.0, kBandTop);
    if (lo == hi) return {};
    const double sign = states[0].mu > states[1].mu ? 1.0 : -1.0;
    auto f = [&](double e) { return spectral_total_current(j, table, e); };
    auto est = quad::integrate_adaptive(f, lo, hi, {kBandCenter}, tol);
    est.value *= sign;
    return est;
  }
  auto f = [&](double e) {
    const double df = fermi_weight(states[0], e) - fermi_weight(states[1], e);
    return df == 0.0 ? 0.0 : df * spectral_total_current(j, table, e);
  };
  return quad::integrate_adaptive(f, 0.0, kBandTop, energy_hints(states), tol);
}

JunctionCurrents junction_currents(const Junction& j, const GreenTable& table, const ReservoirStates& states,
                                   double tol) {
  const auto n1 = static_cast<Eigen::Index>(j.n1()), n2 = static_cast<Eigen::Index>(j.n2());
  JunctionCurrents out;
  out.bonds = Eigen::MatrixXd::Zero(n1, n2);
  const double top = std::max(support_top(states[0]), support_top(states[1]));
  if (j.is_zero() || !(top > 0.0)) return out;
  auto f = [&](double e) -> Eigen::VectorXd {
    const EnergySlice slice(j, table, e);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n1, n2);
    for (int r = 1; r <= 2; ++r) {
      const double w = fermi_weight(states[static_cast<std::size_t>(r - 1)], e);
      if (w != 0.0) acc += w * slice.junction_currents(r);
    }
    return Eigen::Map<Eigen::VectorXd>(acc.data(), acc.size());
  };
  const auto est = quad::integrate_adaptive(f, 0.0, top, energy_hints(states), tol);
  out.bonds = Eigen::Map<const Eigen::MatrixXd>(est.value.data(), n1, n2);
  out.total = out.bonds.sum();
  out.error = est.error;
  return out;
}

EnergyRule energy_rule(const ReservoirStates& states, const EnergyRuleOptions& opt) {
  EnergyRule rule;
  const double top = std::max(support_top(states[0]), support_top(states[1]));
  if (!(top > 0.0)) return rule;

  std::vector<double> cuts{0.0, top};
  if (kBandCenter < top) cuts.push_back(kBandCenter);
  auto grade = [&](double focus, double scale) {
    for (double d = scale; d < 1.0; d *= 2.0) {
      if (focus - d > 0.0 && focus - d < top) cuts.push_back(focus - d);
      if (focus + d < top) cuts.push_back(focus + d);
    }
  };
  grade(0.0, opt.edge_scale);
  if (kBandCenter < top + opt.edge_scale) grade(kBandCenter, opt.edge_scale);
  if (top == kBandTop) grade(kBandTop, opt.edge_scale);
  for (const ReservoirState& s : states) {
    if (!(s.mu > 0.0 && s.mu < top)) continue;
    cuts.push_back(s.mu);
    if (!std::isinf(s.beta)) grade(s.mu, std::min(0.5 / s.beta, 0.05));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<quad::Panel> panels;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const double phase = opt.radius * std::abs(axis_wavenumber(b) - axis_wavenumber(a));
    const int pieces = std::max({1, static_cast<int>(std::ceil(phase / opt.panel_phase)),
                                 static_cast<int>(std::ceil((b - a) / kMaxPanel))});
    for (int p = 0; p < pieces; ++p)
      panels.push_back({p == 0 ? a : a + (b - a) * p / pieces, p + 1 == pieces ? b : a + (b - a) * (p + 1) / pieces});
  }
  while (panels.size() * kOrder < static_cast<std::size_t>(std::max(opt.min_nodes, 0)))
    panels = quad::bisect_panels(panels);
  for (int r = 0; r < opt.bisections; ++r) panels = quad::bisect_panels(panels);

  const quad::PanelRule pr = quad::make_panel_rule(std::move(panels), kOrder);
  for (std::size_t k = 0; k < pr.size(); ++k) {
    const double e = pr.x[k];
    if (e == kBandCenter || !(e > 0.0 && e < kBandTop)) continue;
    rule.x.push_back(e);
    rule.w1.push_back(pr.w[k] * fermi_weight(states[0], e));
    rule.w2.push_back(pr.w[k] * fermi_weight(states[1], e));
  }
  return rule;
}

FieldResult evaluate_fields(const Junction& j, const GreenTable& table, const EnergyRule& rule,
                            std::span<const Site> sites, std::span<const Bond> bonds, int threads) {
  // Distinct sites touched by the field, with their table indices per S2 contact.
  std::map<Site, std::size_t> slot;
  for (const Site& s : sites) slot.emplace(s, 0);
  for (const Bond& b : bonds) {
    require_neighbours(b.x, b.y);
    slot.emplace(b.x, 0);
    slot.emplace(b.y, 0);
  }
  const std::size_t nu = slot.size();
  const auto n2 = static_cast<Eigen::Index>(j.n2());
  std::vector<std::size_t> index(nu * static_cast<std::size_t>(n2));
  {
    std::size_t u = 0;
    for (auto& [site, k] : slot) {
      k = u;
      for (Eigen::Index c = 0; c < n2; ++c)
        index[u * static_cast<std::size_t>(n2) + static_cast<std::size_t>(c)] = table.index_of(site - j.contacts2[c]);
      ++u;
    }
  }
  std::vector<std::size_t> site_slot(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) site_slot[i] = slot.at(sites[i]);
  std::vector<std::pair<std::size_t, std::size_t>> bond_slot(bonds.size());
  for (std::size_t i = 0; i < bonds.size(); ++i) bond_slot[i] = {slot.at(bonds[i].x), slot.at(bonds[i].y)};

  const std::size_t ns = sites.size(), nb = bonds.size();
  const std::size_t width = 2 * (ns + nb);
  const std::size_t blocks = std::min(kBlocks, std::max<std::size_t>(rule.size(), 1));
  std::vector<std::vector<double>> partial(blocks, std::vector<double>(width, 0.0));

  auto run_block = [&](std::size_t blk) {
    std::vector<double>& acc = partial[blk];
    const std::size_t lo = rule.size() * blk / blocks, hi = rule.size() * (blk + 1) / blocks;
    Eigen::MatrixXcd vm(n2, static_cast<Eigen::Index>(nu));
    Eigen::MatrixXcd v0(n2, static_cast<Eigen::Index>(nu));
    for (std::size_t k = lo; k < hi; ++k) {
      const double w1 = rule.w1[k], w2 = rule.w2[k];
      if (w1 == 0.0 && w2 == 0.0) continue;
      const EnergySlice slice(j, table, rule.x[k]);
      const auto g = slice.green_values();
      const auto p = slice.density_values();
      for (std::size_t u = 0; u < nu; ++u)
        for (Eigen::Index c = 0; c < n2; ++c) {
          const std::size_t idx = index[u * static_cast<std::size_t>(n2) + static_cast<std::size_t>(c)];
          vm(c, static_cast<Eigen::Index>(u)) = std::conj(g[idx]);
          v0(c, static_cast<Eigen::Index>(u)) = p[idx];
        }
      const InterferenceKernels& kern = slice.kernels();
      // Columns m_tr V-, m_ref V-, Q+ V0 for every distinct site.
      const Eigen::MatrixXcd mt = kern.m_tr * vm;
      const Eigen::MatrixXcd mr = kern.m_ref * vm;
      const Eigen::MatrixXcd qv = kern.q22 * v0;
      const double p00 = slice.p00();
      auto col = [](const Eigen::MatrixXcd& m, std::size_t u) { return m.col(static_cast<Eigen::Index>(u)); };
      for (std::size_t i = 0; i < ns; ++i) {
        const std::size_t u = site_slot[i];
        if (w1 != 0.0) acc[2 * i] += w1 * col(vm, u).dot(col(mt, u)).real();
        if (w2 != 0.0)
          acc[2 * i + 1] +=
              w2 * (p00 - 2.0 * col(vm, u).dot(col(qv, u)).real() + col(vm, u).dot(col(mr, u)).real());
      }
      for (std::size_t i = 0; i < nb; ++i) {
        auto [ux, uy] = bond_slot[i];
        if (ux == uy) continue;
        // Slots follow site order; reversed bonds get the exact negative.
        const double sign = ux < uy ? 1.0 : -1.0;
        if (uy < ux) std::swap(ux, uy);
        const std::size_t o = 2 * (ns + i);
        if (w1 != 0.0) acc[o] += sign * (w1 * -col(vm, ux).dot(col(mt, uy)).imag());
        if (w2 != 0.0)
          acc[o + 1] += sign * (w2 * (col(vm, ux).dot(col(qv, uy)).imag() - col(vm, uy).dot(col(qv, ux)).imag() -
                                      col(vm, ux).dot(col(mr, uy)).imag()));
      }
    }
  };

  const int nthreads = std::max(1, threads);
  if (nthreads == 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_lock;
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&] {
        for (std::size_t b; (b = next.fetch_add(1)) < blocks;) {
          try {
            run_block(b);
          } catch (...) {
            std::lock_guard lock(failure_lock);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  FieldResult out;
  out.density.resize(ns);
  out.current.resize(nb);
  std::vector<double> total(width, 0.0);
  for (const auto& part : partial)
    for (std::size_t k = 0; k < width; ++k) total[k] += part[k];
  for (std::size_t i = 0; i < ns; ++i) out.density[i] = {total[2 * i], total[2 * i + 1]};
  for (std::size_t i = 0; i < nb; ++i) out.current[i] = {total[2 * (ns + i)], total[2 * (ns + i) + 1]};
  return out;
}

std::vector<double> density_point(const Junction& j, const GreenTable& table, const ReservoirStates& states,
                                  const std::vector<BoundState>& bound, std::span<const Site> sites, double tol) {
  std::vector<double> d(sites.size(), 0.0);
  const std::vector<Site> xs(sites.begin(), sites.end());
  const Eigen::MatrixXd v = j.coupling();
  for (std::size_t first = 0; first < bound.size();) {
    std::size_t last = first + 1;
    while (last < bound.size() && bound[last].lambda == bound[first].lambda) ++last;
    const auto k = static_cast<Eigen::Index>(last - first);
    const SpectralMoments mom = bound_state_moments(j, bound[first].lambda, states, tol);
    Eigen::MatrixXd vpsi(v.rows(), k);
    for (Eigen::Index c = 0; c < k; ++c) vpsi.col(c) = v * bound[first + static_cast<std::size_t>(c)].psi;
    const Eigen::MatrixXd gram = vpsi.transpose() * mom.norm * vpsi;
    const Eigen::MatrixXd occ = vpsi.transpose() * mom.occupied * vpsi;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const Eigen::MatrixXd kernel = ldlt.solve(ldlt.solve(occ).transpose());  // G^-1 R G^-1
    std::vector<std::vector<double>> amp;
    for (std::size_t b = first; b < last; ++b) amp.push_back(bound_state_amplitudes(j, table, bound[b], xs, 2));
    for (std::size_t i = 0; i < sites.size(); ++i) {
      Eigen::VectorXd u(k);
      for (Eigen::Index c = 0; c < k; ++c) u(c) = amp[static_cast<std::size_t>(c)][i];
      d[i] += u.dot(kernel * u);
    }
    first = last;
  }
  return d;
}

std::vector<Displacement> field_displacements(const Junction& j, std::span<const Site> sites,
                                              std::span<const Bond> bonds) {
  std::set<Displacement> out;
  auto add = [&](const Site& x) {
    for (const Site& s : j.contacts2) out.insert(canonical(x - s));
  };
  for (const Site& x : sites) add(x);
  for (const Bond& b : bonds) {
    add(b.x);
    add(b.y);
  }
  for (const Displacement& d : j.displacements()) out.insert(d);
  out.insert({0, 0});
  return {out.begin(), out.end()};
}

}  // namespace ness
