#pragma once

// Large-|x| behaviour of g+(e; x) from the stationary points of the shell phase
// Phi(e, phi; theta) = -K(e, theta) cos(phi - theta).

#include "ness/green.hpp"

namespace ness {

struct AsymptoticShell {
  double energy = 0.0;
  double phi = 0.0;          // direction of x, [0, pi/2]
  double theta_s = 0.0;      // stationary angle in [0, pi/2]
  double radius_s = 0.0;     // K(e, theta_s)
  double phase_speed = 0.0;  // K_s cos(phi - theta_s)
  double amplitude = 0.0;    // psi(e, phi) > 0
};

/// d Phi / d theta at fixed e and phi.
double phase_slope(double e, double phi, double theta);

/// Root of d Phi / d theta in [0, pi/2]; e in (0, 2), phi in [0, pi/2].
double stationary_angle(double e, double phi);

/// psi(e, phi) = cos(K_s cos t) sin(K_s sin t) sin phi + cos(K_s sin t) sin(K_s cos t) cos phi, t = theta_s.
double asymptotic_amplitude(double e, double phi);

AsymptoticShell asymptotic_shell(double e, double phi);

/// d/dphi of K_s cos(phi - theta_s) = -K_s sin(phi - theta_s) (theta_s is stationary).
double phase_speed_slope(double e, double phi);

/// Leading term exp(i(|x| K_s cos(phi - theta_s) + pi/4)) / sqrt(2 pi psi |x|), x != 0.
cplx green_asymptotic(double e, Displacement x);

}  // namespace ness
