#pragma once

// Green's function g(z; x) = int_0^4 P(t)_{0,x} / (t - z) dt of the square
// lattice, off the band and as boundary values g+-(e; x) on the band.

#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "ness/lattice.hpp"
#include "ness/quadrature.hpp"

namespace ness {

using cplx = std::complex<double>;

enum class Side { plus = +1, minus = -1 };

struct GreenOptions {
  double shell_tol = 1e-12;   // angular quadrature stability target for P
  double offband_gap = 1e-9;  // minimum distance of z from [0, 4] for off-band calls
};

/// Spectral table for a fixed set of displacements. P(s)_{0,x} is tabulated
/// once on a graded Gauss-Legendre mesh of (0, 2); every g value is a
/// weighted sum over that table. The upper half of the band enters through
/// P(4 - s)_{0,x} = (-1)^{m+n} P(s)_{0,x}. Immutable after construction.
class GreenTable {
 public:
  explicit GreenTable(std::vector<Displacement> xs, GreenOptions opt = {});

  std::size_t size() const { return xs_.size(); }
  const std::vector<Displacement>& displacements() const { return xs_; }

  /// Position of x (any orientation) in the table; DomainError if absent.
  std::size_t index_of(Displacement x) const;

  /// g+-(e; x) for every tabulated x, e in (0, 4) \ {2}. When density is
  /// non-empty it receives P(e)_{0,x}.
  void boundary(double e, Side side, std::span<cplx> out, std::span<double> density = {}) const;
  cplx boundary(double e, Side side, Displacement x) const;

  /// g(z; x) for every tabulated x, dist(z, [0, 4]) > offband_gap.
  void offband(cplx z, std::span<cplx> out) const;
  cplx offband(cplx z, Displacement x) const;

  /// P(e)_{0,x} for every tabulated x.
  void density(double e, std::span<double> out) const { shell_.evaluate(e, out); }

  const ShellDensity& shell() const { return shell_; }
  std::size_t mesh_nodes() const { return mesh_.size(); }

 private:
  struct Mesh {
    quad::PanelRule rule;
    std::vector<double> table;  // node-major: table[j * size + d] = P(s_j)_{0,x_d}
    std::vector<double> coef;   // Legendre coefficients per panel, [(p * order + k) * size + d]
    std::size_t size() const { return rule.size(); }
  };

  Mesh build_mesh(std::span<const double> foci, std::span<const double> scales, bool with_coefficients) const;
  void sum_offband(const Mesh& mesh, cplx z, std::span<cplx> out) const;
  bool resolves(const Mesh& mesh, cplx pole) const;

  std::vector<Displacement> xs_;
  std::map<Displacement, std::size_t> lookup_;
  std::vector<double> parity_;  // (-1)^{m+n}
  double radius_ = 1.0;
  GreenOptions opt_;
  ShellDensity shell_;
  Mesh mesh_;
};

/// Convenience wrappers building a one-entry table.
double green_density(double e, Displacement x);
cplx green_boundary(double e, Side side, Displacement x);
cplx green_offband(cplx z, Displacement x);

}  // namespace ness
