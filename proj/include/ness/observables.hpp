#pragma once

// Stationary-state observables in reservoir 2: densities split into the
// transmitted, reflected and point-spectrum channels, bond currents, the
// spectral current j(e) and the total current.

#include <Eigen/Dense>
#include <array>
#include <span>
#include <vector>

#include "ness/green.hpp"
#include "ness/quadrature.hpp"
#include "ness/reservoir.hpp"
#include "ness/scattering.hpp"

namespace ness {

using ReservoirStates = std::array<ReservoirState, 2>;

/// Oriented bond (x, y); positive current means particles flow from x to y.
struct Bond {
  Site x;
  Site y;
  friend bool operator==(const Bond&, const Bond&) = default;
  friend auto operator<=>(const Bond&, const Bond&) = default;
};

/// rho_eq = int f(e) P(e)_{0,0} de for one reservoir.
double equilibrium_density(const ReservoirState& state, double tol = 1e-10);

/// Energy-resolved matrices on S2 x S2.
struct InterferenceKernels {
  double energy = 0.0;
  Eigen::MatrixXcd m_tr;   // Q+^{(2,1)} P|S1 Q-^{(1,2)}
  Eigen::MatrixXcd m_ref;  // Q+^{(2,2)} P|S2 Q-^{(2,2)}
  Eigen::MatrixXcd q22;    // Q+^{(2,2)}
  Eigen::MatrixXd p2;      // P|S2
};

/// Scattering data at one energy, with g+ and P tabulated over every
/// displacement of the table. Sites are reservoir-2 sites; the table must
/// hold x - s for every queried x and s in S2, plus the junction displacements.
class EnergySlice {
 public:
  EnergySlice(const Junction& j, const GreenTable& table, double e);

  double energy() const { return e_; }
  const InterferenceKernels& kernels() const { return k_; }
  double p00() const { return p_[table_->index_of({0, 0})]; }
  /// g+(e) and P(e) over the displacements of the table.
  std::span<const cplx> green_values() const { return g_; }
  std::span<const double> density_values() const { return p_; }

  /// V-(e,x)_s = g-(e; x - s) and V0(e,x)_s = P(e)_{x,s}, s in S2.
  Eigen::VectorXcd v_minus(Site x) const;
  Eigen::VectorXd v_zero(Site x) const;

  /// (V-(x), m_tr V-(x)).
  double delta_transmitted(Site x) const;
  /// P00 - 2 Re(V-(x), Q+^{(2,2)} V0(x)) + (V-(x), m_ref V-(x)).
  double delta_reflected(Site x) const;
  /// Spectral bond currents; (x, y) must be nearest neighbours or equal.
  double current_transmitted(Site x, Site y) const;
  double current_reflected(Site x, Site y) const;
  /// j(e) = 2 pi tr(m_tr P|S2).
  double spectral_current() const;
  /// Spectral currents on the junction bonds (S1[a], S2[b]) for reservoir r
  /// as the source, as a |S1| x |S2| matrix.
  Eigen::MatrixXd junction_currents(int r) const;

 private:
  const Junction* j_;
  const GreenTable* table_;
  double e_;
  std::vector<cplx> g_;
  std::vector<double> p_;
  ContactKernels contact_;
  QMatrices q_;
  InterferenceKernels k_;
};

double delta_transmitted(const Junction& j, const GreenTable& table, double e, Site x);
double delta_reflected(const Junction& j, const GreenTable& table, double e, Site x);
enum class Channel { transmitted, reflected, total };
double bond_current_spectral(const Junction& j, const GreenTable& table, double e, Bond b, Channel c);
double spectral_total_current(const Junction& j, const GreenTable& table, double e);

/// Sum of the two channels.
struct Channels {
  double transmitted = 0.0;
  double reflected = 0.0;
  double total() const { return transmitted + reflected; }
};

/// J = int (f1 - f2) j(e) de, adaptively.
quad::Estimate<double> total_current(const Junction& j, const GreenTable& table, const ReservoirStates& states, double tol = 1e-9);

/// Stationary currents on every junction bond (S1[a], S2[b]) from the
/// two-point function on S1 u S2, and their sum.
struct JunctionCurrents {
  Eigen::MatrixXd bonds;
  double total = 0.0;
  double error = 0.0;
};
JunctionCurrents junction_currents(const Junction& j, const GreenTable& table, const ReservoirStates& states,
                                   double tol = 1e-9);

/// Gauss rule on the energy axis shared by every site of a field, with the
/// Fermi weight of each reservoir folded into its weights.
struct EnergyRule {
  std::vector<double> x;
  std::vector<double> w1;  // weight times f_1
  std::vector<double> w2;  // weight times f_2
  std::size_t size() const { return x.size(); }
};

struct EnergyRuleOptions {
  double radius = 1.0;        // largest |x - s| (plus contact spread) in the field
  int min_nodes = 0;          // bisect every panel until at least this many nodes
  double panel_phase = 3.0;   // radians of radius * wavenumber change per panel
  double edge_scale = 1e-9;   // innermost graded step at 0 and 2
  int bisections = 0;         // extra uniform refinements, for convergence checks
};
EnergyRule energy_rule(const ReservoirStates& states, const EnergyRuleOptions& opt);

struct FieldResult {
  std::vector<Channels> density;  // per site
  std::vector<Channels> current;  // per bond
};

/// Densities d_ac (by channel) at sites and stationary currents on bonds of
/// reservoir 2, integrated on one shared rule. Deterministic for any threads.
FieldResult evaluate_fields(const Junction& j, const GreenTable& table, const EnergyRule& rule,
                            std::span<const Site> sites, std::span<const Bond> bonds, int threads = 1);

/// Point-spectrum density d_p(x) at reservoir-2 sites.
std::vector<double> density_point(const Junction& j, const GreenTable& table, const ReservoirStates& states,
                                  const std::vector<BoundState>& bound, std::span<const Site> sites,
                                  double tol = 1e-10);

/// Displacements x - s for x in sites (or bond ends) and s in S2, together
/// with the junction displacements; the table a field needs.
std::vector<Displacement> field_displacements(const Junction& j, std::span<const Site> sites,
                                              std::span<const Bond> bonds = {});

}  // namespace ness
