#include "ness/asymptotic.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "ness/errors.hpp"

namespace ness {

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

void check_direction(double e, double phi) {
  if (!(e > 0.0 && e < kBandCenter)) throw DomainError("asymptotics: energy must lie in (0, 2)");
  if (!(phi >= 0.0 && phi <= kHalfPi)) throw DomainError("asymptotics: direction must lie in [0, pi/2]");
}

}  // namespace

double phase_slope(double e, double phi, double theta) {
  const double k = shell_radius(e, theta);
  const double kt = shell_radius_dtheta(e, theta);
  return -kt * std::cos(phi - theta) - k * std::sin(phi - theta);
}

double stationary_angle(double e, double phi) {
  check_direction(e, phi);
  if (phi == 0.0) return 0.0;
  if (phi == kHalfPi) return kHalfPi;
  // The slope is -K sin(phi) < 0 at theta = 0 and K cos(phi) > 0 at pi/2.
  double lo = 0.0, hi = kHalfPi;
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (phase_slope(e, phi, mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

AsymptoticShell asymptotic_shell(double e, double phi) {
  AsymptoticShell a;
  a.energy = e;
  a.phi = phi;
  a.theta_s = stationary_angle(e, phi);
  a.radius_s = shell_radius(e, a.theta_s);
  const double kc = a.radius_s * std::cos(a.theta_s), ks = a.radius_s * std::sin(a.theta_s);
  a.phase_speed = a.radius_s * std::cos(phi - a.theta_s);
  a.amplitude = std::cos(kc) * std::sin(ks) * std::sin(phi) + std::cos(ks) * std::sin(kc) * std::cos(phi);
  return a;
}

double asymptotic_amplitude(double e, double phi) { return asymptotic_shell(e, phi).amplitude; }

double phase_speed_slope(double e, double phi) {
  const AsymptoticShell a = asymptotic_shell(e, phi);
  return -a.radius_s * std::sin(phi - a.theta_s);
}

cplx green_asymptotic(double e, Displacement x) {
  const double m = std::abs(x.m), n = std::abs(x.n);
  const double r = std::hypot(m, n);
  if (r == 0.0) throw DomainError("green_asymptotic: displacement must be non-zero");
  const AsymptoticShell a = asymptotic_shell(e, std::atan2(n, m));
  const double arg = r * a.phase_speed + 0.25 * std::numbers::pi;
  return std::polar(1.0 / std::sqrt(2.0 * std::numbers::pi * a.amplitude * r), arg);
}

}  // namespace ness
