#pragma once

// Plain-text scenario configuration: one `key = value` per line, `#` starts a
// comment. Every key is optional; an empty document is the default
// two-contact junction at mu1 = 1.4, mu2 = 0.3, beta = inf.
//
//   mu1, mu2          chemical potentials in [0, 4]
//   beta1, beta2      inverse temperatures, > 0 or `inf`
//   t1, d1, t2, d2    two-contact junction S1 = {(0,0),(d1,0)}, S2 = {(0,0),(d2,0)}
//   contacts          explicit pairs `x1 x2 y1 y2 t; ...` (x in S1, y in S2);
//                     excludes t1, d1, t2, d2
//   window            `x1_min x1_max x2_min x2_max` in reservoir 2
//   energy            fixed energy for spectral fields (omit for integrated fields)
//   energy_nodes      minimum number of energy nodes for fields (0 = automatic)
//   tol               absolute tolerance of adaptive energy integrals
//   bound_tol         tolerance of bound-state spectral integrals
//   include_point     `true`/`false`: add the point-spectrum density to totals
//   outputs           comma list from density, current, point, spectral

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ness/observables.hpp"

namespace ness {

struct ContactPair {
  Site s1;
  Site s2;
  double t = 0.0;
};

struct Window {
  int x1_min = -10;
  int x1_max = 29;
  int x2_min = -19;
  int x2_max = 20;
};

struct ScenarioConfig {
  ReservoirStates states{ReservoirState{kInfiniteBeta, 1.4}, ReservoirState{kInfiniteBeta, 0.3}};
  double t1 = 1.0;
  int d1 = 1;
  double t2 = 1.0;
  int d2 = 20;
  std::vector<ContactPair> contacts;  // when non-empty, replaces the two-contact family
  Window window;
  std::optional<double> energy;
  int energy_nodes = 0;
  double tol = 1e-9;
  double bound_tol = 1e-10;
  bool include_point = true;
  std::vector<std::string> outputs{"density", "current"};
  std::set<std::string> keys;  // keys present in the document

  Junction junction() const;
  std::vector<Site> window_sites() const;
  /// Nearest-neighbour bonds inside the window, x before y lexicographically.
  std::vector<Bond> window_bonds() const;
  bool wants(std::string_view output) const;
};

/// Throws ConfigError naming the offending key.
ScenarioConfig parse_config(std::string_view text);
/// Reads and parses a file; IoError when it cannot be read.
ScenarioConfig load_config(const std::string& path);

}  // namespace ness
