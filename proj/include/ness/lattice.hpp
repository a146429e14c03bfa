#pragma once

// Square-lattice model: dispersion, energy-shell geometry and the shell
// density P(e)_{0,x}.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ness {

inline constexpr double kBandTop = 4.0;
inline constexpr double kBandCenter = 2.0;

/// Lattice displacement x = (m, n).
struct Displacement {
  int m = 0;
  int n = 0;
  friend bool operator==(const Displacement&, const Displacement&) = default;
  friend auto operator<=>(const Displacement&, const Displacement&) = default;
};

/// Representative of x under the square-lattice point group: 0 <= m <= n.
/// Every kernel in this library (P, g, g+-) is invariant under the group.
Displacement canonical(Displacement x);

/// omega(k1, k2) = 2 sin^2(k1/2) + 2 sin^2(k2/2) = 2 - cos k1 - cos k2.
double dispersion(double k1, double k2);

/// Radius K(e, theta) of the energy shell omega = e along direction theta,
/// 0 < e < 2. Solved to machine precision.
double shell_radius(double e, double theta);

/// J(e, theta) = K dK/de = K / (d omega / dK along the ray).
double shell_jacobian(double e, double theta);

/// dK/dtheta at fixed e.
double shell_radius_dtheta(double e, double theta);

/// Shell density P(e)_{0,x}, 0 < e < 4, e != 2. Real for this lattice.
double shell_density(double e, Displacement x);

/// Evaluates P(e)_{0,x} for many displacements with one shell quadrature.
/// The angular mesh is sized for the largest |x| in the set and refined by
/// doubling until the representative entries are stable.
class ShellDensity {
 public:
  explicit ShellDensity(std::vector<Displacement> xs, double tol = 1e-12);

  std::size_t size() const { return xs_.size(); }
  const std::vector<Displacement>& displacements() const { return xs_; }

  /// out[i] = P(e)_{0,xs[i]}; e in (0, 4) \ {2}.
  void evaluate(double e, std::span<double> out) const;

 private:
  std::vector<Displacement> xs_;  // canonical
  int max_index_ = 0;
  double radius_ = 0.0;
  double tol_;
  std::size_t probe_far_ = 0;
};

}  // namespace ness
