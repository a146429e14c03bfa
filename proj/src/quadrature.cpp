#include "ness/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ness::quad {

namespace {

constexpr int kMaxOrder = 64;

GaussRule build_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > kMaxOrder) throw DomainError("gauss_legendre: order must be in [1, 64]");
  static const std::array<GaussRule, kMaxOrder + 1> rules = [] {
    std::array<GaussRule, kMaxOrder + 1> r;
    r[1] = GaussRule{{0.0}, {2.0}};
    for (int k = 2; k <= kMaxOrder; ++k) r[k] = build_gauss_legendre(k);
    return r;
  }();
  return rules[n];
}

PanelRule make_panel_rule(std::vector<Panel> panels, int order) {
  const GaussRule& g = gauss_legendre(order);
  PanelRule rule;
  rule.order = order;
  rule.panels = std::move(panels);
  rule.x.reserve(rule.panels.size() * order);
  rule.w.reserve(rule.panels.size() * order);
  for (const Panel& p : rule.panels) {
    const double c = p.mid(), h = p.half();
    for (int k = 0; k < order; ++k) {
      rule.x.push_back(c + h * g.nodes[k]);
      rule.w.push_back(h * g.weights[k]);
    }
  }
  return rule;
}

std::vector<Panel> bisect_panels(std::span<const Panel> panels) {
  std::vector<Panel> out;
  out.reserve(2 * panels.size());
  for (const Panel& p : panels) {
    out.push_back({p.a, p.mid()});
    out.push_back({p.mid(), p.b});
  }
  return out;
}

void legendre_values(double x, std::span<double> out) {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() > 1) out[1] = x;
  for (std::size_t k = 1; k + 1 < out.size(); ++k)
    out[k + 1] = ((2.0 * k + 1.0) * x * out[k] - k * out[k - 1]) / (k + 1.0);
}

void cauchy_moments(double y, std::span<double> nu, double& mu0) {
  mu0 = std::log(std::abs((1.0 - y) / (1.0 + y)));
  if (nu.empty()) return;
  nu[0] = 0.0;
  if (nu.size() > 1) nu[1] = 2.0;
  for (std::size_t n = 1; n + 1 < nu.size(); ++n)
    nu[n + 1] = ((2.0 * n + 1.0) * y * nu[n] - n * nu[n - 1]) / (n + 1.0);
}

const std::vector<double>& legendre_transform(int n) {
  if (n < 1 || n > kMaxOrder) throw DomainError("legendre_transform: order must be in [1, 64]");
  static const std::array<std::vector<double>, kMaxOrder + 1> mats = [] {
    std::array<std::vector<double>, kMaxOrder + 1> m;
    for (int order = 1; order <= kMaxOrder; ++order) {
      const GaussRule& g = gauss_legendre(order);
      std::vector<double> t(order * order);
      std::vector<double> p(order);
      for (int j = 0; j < order; ++j) {
        legendre_values(g.nodes[j], p);
        for (int k = 0; k < order; ++k) t[k * order + j] = 0.5 * (2 * k + 1) * g.weights[j] * p[k];
      }
      m[order] = std::move(t);
    }
    return m;
  }();
  return mats[n];
}

}  // namespace ness::quad
