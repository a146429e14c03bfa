#pragma once

// Quadrature engine: Gauss-Legendre panels, globally adaptive Gauss-Kronrod
// with singular-point splitting, and Cauchy principal values.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <type_traits>
#include <vector>

#include "ness/errors.hpp"

namespace ness::quad {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// Gauss-Legendre rule of order n (1 <= n <= 64). Rules are computed once.
const GaussRule& gauss_legendre(int n);

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double mid() const { return 0.5 * (a + b); }
  double half() const { return 0.5 * (b - a); }
};

/// Composite rule: panels of one Gauss-Legendre order laid end to end.
/// Node k of panel p lives at index p * order + k.
struct PanelRule {
  int order = 0;
  std::vector<Panel> panels;
  std::vector<double> x;
  std::vector<double> w;

  std::size_t size() const { return x.size(); }
};

PanelRule make_panel_rule(std::vector<Panel> panels, int order);

/// Splits every panel in two.
std::vector<Panel> bisect_panels(std::span<const Panel> panels);

/// Moments against the Cauchy kernel on [-1, 1]:
///   mu0 = PV int dx / (x - y) = log|(1 - y)/(1 + y)|
///   nu[k] = int (P_k(x) - P_k(y)) / (x - y) dx,  k = 0..nu.size()-1
/// nu is finite for every y; mu0 diverges at y = +-1.
void cauchy_moments(double y, std::span<double> nu, double& mu0);

/// Legendre polynomials P_0..P_{out.size()-1} at x.
void legendre_values(double x, std::span<double> out);

/// Matrix mapping nodal values of an order-n Gauss rule to Legendre
/// coefficients: c = T * f, row-major n x n.
const std::vector<double>& legendre_transform(int n);

template <class T>
struct Estimate {
  T value{};
  double error = 0.0;
  int evaluations = 0;
};

namespace detail {

// Size of an integrand value for error control: modulus for scalars, largest
// component modulus for vector types (Eigen vectors and arrays).
template <class T>
double magnitude(const T& x) {
  if constexpr (std::is_arithmetic_v<T> || std::is_convertible_v<T, std::complex<double>>)
    return std::abs(x);
  else
    return x.cwiseAbs().maxCoeff();
}

template <class T>
std::complex<double> headline(const T& x) {
  if constexpr (std::is_convertible_v<T, std::complex<double>>)
    return std::complex<double>(x);
  else
    return x.size() > 0 ? std::complex<double>(x(0)) : std::complex<double>{};
}

inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss7_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Interval {
  double a, b;
  T value;
  double error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

template <class T, class F>
Interval<T> gauss_kronrod_15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T kron = fc * kronrod_w[7];
  T gauss = fc * gauss7_w[3];
  T pair = fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kronrod_x[j];
    pair = f(c - dx);
    pair += f(c + dx);
    kron += pair * kronrod_w[j];
    if (j % 2 == 1) gauss += pair * gauss7_w[j / 2];
  }
  kron *= h;
  gauss *= h;
  const double err = magnitude(T(kron - gauss));
  return {a, b, std::move(kron), err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
/// The interval is split up front at every hint strictly inside (a, b), so
/// integrable endpoint singularities (van Hove point, band edges, poles already
/// subtracted) are never sampled. Works for real or complex integrands.
/// Throws ConvergenceError carrying the best estimate when the absolute error
/// estimate stays above tol after max_intervals subintervals.
template <class F>
auto integrate_adaptive(F&& f, double a, double b, std::span<const double> hints, double tol,
                        int max_intervals = 4000) {
  using T = std::decay_t<std::invoke_result_t<F&, double>>;
  using Item = detail::Interval<T>;
  Estimate<T> out;
  if (!(b > a)) {
    if (a == b) return out;
    throw DomainError("integrate_adaptive: empty or reversed interval");
  }
  std::vector<double> cuts{a};
  for (double h : hints)
    if (h > a && h < b) cuts.push_back(h);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Item> heap;  // max-heap on the error estimate
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    heap.push_back(detail::gauss_kronrod_15<T>(f, cuts[i], cuts[i + 1]));
    out.evaluations += 15;
    total_err += heap.back().error;
  }
  std::make_heap(heap.begin(), heap.end());
  auto exact_error = [&heap] {
    double e = 0.0;
    for (const Item& it : heap) e += it.error;
    return e;
  };
  auto sum = [&heap] {
    std::vector<Item> parts(heap);
    std::sort(parts.begin(), parts.end(), [](const Item& l, const Item& r) { return l.a < r.a; });
    T s = parts.front().value;
    for (std::size_t i = 1; i < parts.size(); ++i) s += parts[i].value;
    return s;
  };
  for (;;) {
    if (!std::isfinite(total_err))
      throw ConvergenceError("integrate_adaptive: integrand is not finite on the interval", {}, total_err);
    // The running error drifts through cancellation; confirm before stopping.
    if (total_err <= tol && (total_err = exact_error()) <= tol) break;
    if (static_cast<int>(heap.size()) >= max_intervals)
      throw ConvergenceError("integrate_adaptive: subdivision limit reached", detail::headline(sum()), total_err);
    std::pop_heap(heap.begin(), heap.end());
    Item worst = std::move(heap.back());
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push_back(std::move(worst));
      throw ConvergenceError("integrate_adaptive: interval below machine resolution", detail::headline(sum()),
                             exact_error());
    }
    for (Item half : {detail::gauss_kronrod_15<T>(f, worst.a, mid), detail::gauss_kronrod_15<T>(f, mid, worst.b)}) {
      total_err += half.error;
      heap.push_back(std::move(half));
      std::push_heap(heap.begin(), heap.end());
    }
    total_err -= worst.error;
    out.evaluations += 30;
  }
  // Final sum in a fixed order, free of the drift of incremental updates.
  const T total = sum();
  out.value = total;
  out.error = total_err;
  return out;
}

template <class F>
auto integrate_adaptive(F&& f, double a, double b, std::initializer_list<double> hints, double tol,
                        int max_intervals = 4000) {
  return integrate_adaptive(std::forward<F>(f), a, b, std::span<const double>(hints.begin(), hints.size()),
                            tol, max_intervals);
}

/// PV int_a^b f(t)/(t - pole) dt by singularity subtraction:
///   int (f(t) - f(pole))/(t - pole) dt + f(pole) log((b - pole)/(pole - a)).
template <class F>
auto principal_value(F&& f, double pole, double a, double b, double tol) {
  if (!(pole > a && pole < b)) throw DomainError("principal_value: pole must lie strictly inside (a, b)");
  using T = std::decay_t<std::invoke_result_t<F&, double>>;
  const T f_pole = f(pole);
  auto smooth = [&](double t) -> T { return (f(t) - f_pole) / (t - pole); };
  const double hint[] = {pole};
  auto est = integrate_adaptive(smooth, a, b, std::span<const double>(hint, 1), tol);
  est.value += f_pole * std::log((b - pole) / (pole - a));
  return est;
}

}  // namespace ness::quad
