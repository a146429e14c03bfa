#pragma once

// Tunneling junction between the two reservoirs, the scattering matrices
// Q(z) = v (v + v r0(z) v)^{-1} v on the contact space S1 u S2, and the point
// spectrum of the coupled Hamiltonian.

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <vector>

#include "ness/green.hpp"
#include "ness/reservoir.hpp"

namespace ness {

struct Site {
  int x1 = 0;
  int x2 = 0;
  friend bool operator==(const Site&, const Site&) = default;
  friend auto operator<=>(const Site&, const Site&) = default;
};

inline Displacement operator-(const Site& a, const Site& b) { return {a.x1 - b.x1, a.x2 - b.x2}; }

/// Contact sets S1 (reservoir 1), S2 (reservoir 2) and the real tunneling
/// amplitudes t[a][b] between contacts1[a] and contacts2[b]. The contact
/// space is ordered [S1..., S2...].
struct Junction {
  std::vector<Site> contacts1;
  std::vector<Site> contacts2;
  Eigen::MatrixXd t;

  /// S_i = {(0,0), (d_i,0)}, tunneling (0,0)-(0,0) with t1 and (d1,0)-(d2,0) with t2.
  static Junction two_contacts(double t1, int d1, double t2 = 1.0, int d2 = 20);
  /// One contact pair (0,0)-(0,0) with amplitude t.
  static Junction single(double t);

  std::size_t n1() const { return contacts1.size(); }
  std::size_t n2() const { return contacts2.size(); }
  std::size_t size() const { return n1() + n2(); }
  /// Reservoir (1 or 2) of contact-space index k.
  int reservoir(std::size_t k) const { return k < n1() ? 1 : 2; }
  const Site& site(std::size_t k) const { return k < n1() ? contacts1[k] : contacts2[k - n1()]; }
  bool is_zero() const { return t.size() == 0 || t.cwiseAbs().maxCoeff() == 0.0; }

  /// Coupling v on the contact space: v = [[0, t], [t^T, 0]].
  Eigen::MatrixXd coupling() const;

  /// Every displacement s - s' between contacts of the same reservoir.
  std::vector<Displacement> displacements() const;

  /// Throws ConfigError when shapes disagree or a contact is listed twice.
  void validate() const;
};

/// r0 and P restricted to the contact space at one energy.
struct ContactKernels {
  Eigen::MatrixXcd r0;  // block diagonal, r0[k][l] = g(site_l - site_k)
  Eigen::MatrixXd p;    // block diagonal, P(e)_{site_k, site_l}
};

/// Boundary values r0+-(e) and P(e) on the contact space.
ContactKernels contact_kernels(const Junction& j, const GreenTable& table, double e, Side side);
/// r0(z) on the contact space, z off the band.
Eigen::MatrixXcd contact_resolvent(const Junction& j, const GreenTable& table, cplx z);

/// M = v + v r0 v.
Eigen::MatrixXcd m_matrix(const Junction& j, const Eigen::MatrixXcd& r0);

struct QMatrices {
  Eigen::MatrixXcd q;  // full contact space
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double rcond = 1.0;  // reciprocal condition number of the reduced M

  /// Block Q^{(i,j)}, rows in S_i, columns in S_j (i, j in {1, 2}).
  Eigen::MatrixXcd block(int i, int jdx) const;
};

/// Q = v M^{-1} v with M inverted on the range of v. Throws
/// BoundStateProximity when the reduced M has rcond <= 1e-12.
QMatrices q_matrix(const Junction& j, const Eigen::MatrixXcd& r0);
QMatrices q_matrix(const Junction& j, const GreenTable& table, double e, Side side);
QMatrices q_matrix(const Junction& j, const GreenTable& table, cplx z);

struct BoundState {
  double lambda = 0.0;
  Eigen::VectorXd psi;    // unit kernel vector of M(lambda) on the contact space
  double residual = 0.0;  // |M(lambda) psi|
  double norm2 = 0.0;     // |f|^2 for f = -r0(lambda) v psi
  int multiplicity = 1;   // dimension of the kernel at lambda
};

struct ScanOptions {
  double min_distance = 1e-6;  // closest approach to the band edges
  double max_distance = 40.0;  // farthest point of the scan from the band
  int points = 2000;           // log-spaced scan points per side
  double tol = 1e-10;          // relative tolerance of energy integrals
};

/// Eigenvalues of h outside [0, 4] within the scan range. Degenerate
/// eigenvalues yield one entry per vector of an orthonormal kernel basis.
std::vector<BoundState> find_bound_states(const Junction& j, const GreenTable& table, const ScanOptions& opt = {});

/// Amplitudes f_x = -sum_s g(lambda; x - s) (v psi)_s for sites x of reservoir r.
/// The table must hold every displacement x - s.
std::vector<double> bound_state_amplitudes(const Junction& j, const GreenTable& table, const BoundState& b,
                                           const std::vector<Site>& xs, int r);

/// Matrices int w_r(e) P_r(e) / (e - lambda)^2 de on the contact space, with
/// w_r = 1 (first) and w_r = Fermi weight of reservoir r (second).
struct SpectralMoments {
  Eigen::MatrixXd norm;       // unweighted
  Eigen::MatrixXd occupied;   // Fermi-weighted
};
SpectralMoments bound_state_moments(const Junction& j, double lambda, const std::array<ReservoirState, 2>& states,
                                    double tol = 1e-10);

/// (f, rho0 f) for the eigenvector of one bound state.
double occupation_weight(const Junction& j, const BoundState& b, const std::array<ReservoirState, 2>& states,
                         double tol = 1e-10);

}  // namespace ness
