#pragma once

// Second, independent route to g(z; m, n):
//   g(z; m, n) = i^{m+n+1} int_0^inf exp(-i t (2 - z)) J_m(t) J_n(t) dt,  Im z > 0,
// evaluated at z = e + i eps on a ladder of eps and extrapolated to eps -> 0.

#include <span>
#include <vector>

#include "ness/green.hpp"

namespace ness {

struct DampedOptions {
  double eps_max = 0.04;  // largest damping in the ladder
  int levels = 7;         // eps_k = eps_max / 2^k, k = 0..levels-1
  double decay = 36.0;    // integrate until eps_min * t = decay
  double panel = 2.0;     // width of each Gauss panel in t
};

/// Damped integral at z = e + i eps for every level of the ladder.
/// result[k][i] corresponds to eps_k and xs[i].
std::vector<std::vector<cplx>> green_damped_ladder(double e, std::span<const Displacement> xs,
                                                   const DampedOptions& opt = {});

/// g+(e; x) from the ladder by Neville extrapolation to eps = 0.
std::vector<cplx> green_damped(double e, std::span<const Displacement> xs, const DampedOptions& opt = {});

}  // namespace ness
