#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "ness/errors.hpp"
#include "ness/quadrature.hpp"
#include "oracles.hpp"

using namespace ness;
using doctest::Approx;

TEST_CASE("gauss rule integrates polynomials of degree 2n-1 exactly") {
  for (int n : {1, 5, 16, 64}) {
    const auto& r = quad::gauss_legendre(n);
    REQUIRE(r.nodes.size() == static_cast<std::size_t>(n));
    double sum_w = 0.0, moment = 0.0;
    const int deg = 2 * n - 2;  // even, so the integral is non-zero
    for (int i = 0; i < n; ++i) {
      sum_w += r.weights[i];
      moment += r.weights[i] * std::pow(r.nodes[i], deg);
    }
    CHECK(sum_w == Approx(2.0).epsilon(1e-14));
    CHECK(moment == Approx(2.0 / (deg + 1)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(quad::gauss_legendre(0), DomainError);
  CHECK_THROWS_AS(quad::gauss_legendre(65), DomainError);
}

TEST_CASE("legendre values and nodal transform") {
  std::vector<double> p(4);
  quad::legendre_values(0.3, p);
  CHECK(p[0] == Approx(1.0));
  CHECK(p[1] == Approx(0.3));
  CHECK(p[2] == Approx(0.5 * (3 * 0.09 - 1)));
  CHECK(p[3] == Approx(0.5 * (5 * 0.027 - 3 * 0.3)));

  const int n = 8;
  const auto& rule = quad::gauss_legendre(n);
  const auto& t = quad::legendre_transform(n);
  std::vector<double> f(n), vals(n);
  for (int i = 0; i < n; ++i) {
    quad::legendre_values(rule.nodes[i], vals);
    f[i] = vals[3] - 2.0 * vals[5];
  }
  for (int k = 0; k < n; ++k) {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += t[k * n + i] * f[i];
    const double want = k == 3 ? 1.0 : (k == 5 ? -2.0 : 0.0);
    CHECK(c == Approx(want).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("cauchy moments against direct integration") {
  const double y = 0.37;
  std::vector<double> nu(6);
  double mu0 = 0.0;
  quad::cauchy_moments(y, nu, mu0);
  CHECK(mu0 == Approx(std::log((1 - y) / (1 + y))).epsilon(1e-14));
  std::vector<double> px(6), py(6);
  quad::legendre_values(y, py);
  for (int k = 0; k < 6; ++k) {
    std::function<double(double)> f = [&](double x) {
      if (x == y) return 0.0;
      quad::legendre_values(x, px);
      return (px[k] - py[k]) / (x - y);
    };
    CHECK(nu[k] == Approx(oracle::simpson(f, -1.0, 1.0)).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("panel rules cover their interval") {
  std::vector<quad::Panel> panels{{0.0, 0.5}, {0.5, 2.0}};
  const auto r = quad::make_panel_rule(panels, 6);
  CHECK(r.size() == 12);
  double s = 0.0, m = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    s += r.w[i];
    m += r.w[i] * r.x[i] * r.x[i];
  }
  CHECK(s == Approx(2.0));
  CHECK(m == Approx(8.0 / 3.0));
  const auto halves = quad::bisect_panels(panels);
  REQUIRE(halves.size() == 4);
  CHECK(halves[1].a == 0.25);
  CHECK(halves[3].b == 2.0);
}

TEST_CASE("adaptive integration of smooth and endpoint-singular integrands") {
  auto sq = [](double t) { return t * t; };
  CHECK(quad::integrate_adaptive(sq, 0.0, 1.0, {}, 1e-13).value == Approx(1.0 / 3.0).epsilon(1e-14));

  auto lg = [](double t) { return std::log(t); };
  const auto l = quad::integrate_adaptive(lg, 0.0, 1.0, {}, 1e-12);
  CHECK(l.value == Approx(-1.0).epsilon(1e-11));
  CHECK(l.error <= 1e-12);

  auto isq = [](double t) { return 1.0 / std::sqrt(t); };
  CHECK(quad::integrate_adaptive(isq, 0.0, 1.0, {}, 1e-10).value == Approx(2.0).epsilon(1e-10));

  auto ll = [](double t) { return std::log(std::abs(t - 0.3)); };
  const double want = 0.7 * std::log(0.7) - 0.7 + 0.3 * std::log(0.3) - 0.3;
  CHECK(quad::integrate_adaptive(ll, 0.0, 1.0, {0.3}, 1e-12).value == Approx(want).epsilon(1e-11));

  auto pole = [](double t) { return 1.0 / (t - 0.5); };
  CHECK_THROWS_AS(quad::integrate_adaptive(pole, 0.0, 1.0, {}, 1e-10, 100000), ConvergenceError);

  auto ex = [](double t) { return std::exp(std::complex<double>(0.0, t)); };
  const auto c = quad::integrate_adaptive(ex, 0.0, std::numbers::pi, {}, 1e-13).value;
  CHECK(std::abs(c - std::complex<double>(0.0, 2.0)) < 1e-13);

  auto vec = [](double t) {
    Eigen::Vector2d v(t, t * t * t);
    return v;
  };
  const auto v = quad::integrate_adaptive(vec, 0.0, 2.0, {}, 1e-13).value;
  CHECK(v(0) == Approx(2.0));
  CHECK(v(1) == Approx(4.0));

  CHECK(quad::integrate_adaptive(sq, 1.0, 1.0, {}, 1e-13).value == 0.0);
  CHECK_THROWS_AS(quad::integrate_adaptive(sq, 1.0, 0.0, {}, 1e-13), DomainError);
}

TEST_CASE("adaptive integration reports non-convergence with the best estimate") {
  auto inv = [](double t) { return 1.0 / t; };
  try {
    quad::integrate_adaptive(inv, 0.0, 1.0, {}, 1e-10, 50);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.best_estimate().real() > 1.0);
    CHECK(e.error_estimate() > 1e-10);
  }
}

TEST_CASE("principal value integrals") {
  const double y = 0.3;
  auto one = [](double) { return 1.0; };
  CHECK(quad::principal_value(one, y, -1.0, 1.0, 1e-13).value == Approx(std::log(0.7 / 1.3)).epsilon(1e-13));

  // PV int t^2/(t - y) = int (t + y) dt + y^2 PV int dt/(t - y).
  auto sq = [](double t) { return t * t; };
  const double want = 2 * y + y * y * std::log((1 - y) / (1 + y));
  CHECK(quad::principal_value(sq, y, -1.0, 1.0, 1e-13).value == Approx(want).epsilon(1e-13));

  CHECK_THROWS_AS(quad::principal_value(one, 1.0, -1.0, 1.0, 1e-10), DomainError);
}
