#pragma once

// Scenario runs behind the command-line tool: figure presets and the
// green / scan / field / current products for a configuration.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ness/config.hpp"
#include "ness/output.hpp"

namespace ness {

struct RunOptions {
  std::string out_dir = ".";
  int threads = 1;
};

/// One panel of a figure preset.
struct PresetCase {
  std::string label;              // panel letter, or a short tag
  double t1 = 1.0;
  int d1 = 1;
  std::optional<double> energy;   // fixed energy; empty for energy-integrated products
  std::string channel;            // transmitted, reflected, total, density, spectral
};

struct Preset {
  std::string name;
  std::string description;
  std::vector<PresetCase> cases;
  std::vector<std::string> locked;  // config keys the preset fixes
};

const std::vector<Preset>& presets();
/// Throws ConfigError for an unknown name.
const Preset& find_preset(std::string_view name);

struct RunSummary {
  std::string scenario;
  Summary entries;
  std::vector<std::string> files;  // written, in order
};

/// Runs fig3..fig9 or custom. Keys locked by the preset and present in the
/// configuration raise ConfigError listing them.
RunSummary run_scenario(const ScenarioConfig& cfg, std::string_view preset, const RunOptions& opt);

/// g+(e; x) on a uniform energy grid, CSV e,re,im.
RunSummary run_green(const ScenarioConfig& cfg, Displacement x, double e_min, double e_max, int points,
                     const RunOptions& opt);
/// Bound states of the configured junction.
RunSummary run_scan(const ScenarioConfig& cfg, const RunOptions& opt);
/// Density and current fields over the window (spectral when cfg.energy is set).
RunSummary run_field(const ScenarioConfig& cfg, const RunOptions& opt);
/// Total current by both routes and j(e) samples.
RunSummary run_current(const ScenarioConfig& cfg, const RunOptions& opt);

}  // namespace ness
