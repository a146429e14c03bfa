#pragma once

#include <limits>

namespace ness {

inline constexpr double kInfiniteBeta = std::numeric_limits<double>::infinity();

/// Initial equilibrium of one reservoir: inverse temperature and chemical potential.
struct ReservoirState {
  double beta = kInfiniteBeta;
  double mu = 0.0;
};

/// Fermi function (1 + exp(beta (e - mu)))^{-1}; the exact step at beta = inf,
/// with value 1/2 at e = mu.
double fermi_weight(const ReservoirState& state, double e);

}  // namespace ness
