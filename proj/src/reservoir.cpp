#include "ness/reservoir.hpp"

#include <cmath>

namespace ness {

double fermi_weight(const ReservoirState& state, double e) {
  const double x = e - state.mu;
  if (x == 0.0) return 0.5;
  if (std::isinf(state.beta)) return x < 0.0 ? 1.0 : 0.0;
  const double a = state.beta * x;
  // Written to avoid overflow of exp for either sign of a.
  if (a > 0.0) {
    const double t = std::exp(-a);
    return t / (1.0 + t);
  }
  return 1.0 / (1.0 + std::exp(a));
}

}  // namespace ness
