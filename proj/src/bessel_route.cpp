#include "ness/bessel_route.hpp"

#include <algorithm>
#include <cmath>

#include "ness/errors.hpp"

namespace ness {

namespace {

// J_0..J_{n} at t. Upward recurrence is stable once t exceeds the order.
void bessel_row(double t, int n, std::vector<double>& out) {
  out.resize(n + 1);
  if (t <= n + 1.0) {
    for (int k = 0; k <= n; ++k) out[k] = std::cyl_bessel_j(static_cast<double>(k), t);
    return;
  }
  out[0] = std::cyl_bessel_j(0.0, t);
  if (n > 0) out[1] = std::cyl_bessel_j(1.0, t);
  for (int k = 1; k < n; ++k) out[k + 1] = 2.0 * k / t * out[k] - out[k - 1];
}

cplx i_power(int p) {
  switch (((p % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

std::vector<std::vector<cplx>> green_damped_ladder(double e, std::span<const Displacement> xs,
                                                   const DampedOptions& opt) {
  if (opt.levels < 1 || !(opt.eps_max > 0.0)) throw DomainError("green_damped: invalid damping ladder");
  std::vector<Displacement> cs;
  int order = 0;
  for (const Displacement& x : xs) {
    cs.push_back(canonical(x));
    order = std::max(order, cs.back().n);
  }
  const int levels = opt.levels;
  const double eps_min = std::ldexp(opt.eps_max, -(levels - 1));
  const double horizon = opt.decay / eps_min;
  const auto panels = static_cast<long>(std::ceil(horizon / opt.panel));
  const quad::GaussRule& g = quad::gauss_legendre(16);

  std::vector<std::vector<cplx>> acc(levels, std::vector<cplx>(cs.size()));
  std::vector<double> jn;
  std::vector<cplx> damp(levels);
  for (long p = 0; p < panels; ++p) {
    const double a = p * opt.panel, h = 0.5 * opt.panel;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
      const double t = a + h * (1.0 + g.nodes[k]);
      const double w = h * g.weights[k];
      bessel_row(t, order, jn);
      // exp(-eps_k t) for the whole ladder by repeated squaring of the weakest damping.
      double d = std::exp(-eps_min * t);
      const cplx osc = w * std::polar(1.0, -t * (2.0 - e));
      for (int l = levels - 1; l >= 0; --l) {
        damp[l] = osc * d;
        d *= d;
      }
      for (std::size_t i = 0; i < cs.size(); ++i) {
        const double prod = jn[cs[i].m] * jn[cs[i].n];
        for (int l = 0; l < levels; ++l) acc[l][i] += damp[l] * prod;
      }
    }
  }
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const cplx phase = i_power(cs[i].m + cs[i].n + 1);
    for (int l = 0; l < levels; ++l) acc[l][i] *= phase;
  }
  return acc;
}

std::vector<cplx> green_damped(double e, std::span<const Displacement> xs, const DampedOptions& opt) {
  const auto ladder = green_damped_ladder(e, xs, opt);
  const int levels = opt.levels;
  std::vector<double> eps(levels);
  for (int l = 0; l < levels; ++l) eps[l] = std::ldexp(opt.eps_max, -l);
  std::vector<cplx> out(xs.size());
  std::vector<cplx> tab(levels);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (int l = 0; l < levels; ++l) tab[l] = ladder[l][i];
    // Neville's scheme evaluated at eps = 0.
    for (int k = 1; k < levels; ++k)
      for (int l = levels - 1; l >= k; --l)
        tab[l] = (eps[l - k] * tab[l] - eps[l] * tab[l - 1]) / (eps[l - k] - eps[l]);
    out[i] = tab[levels - 1];
  }
  return out;
}

}  // namespace ness
