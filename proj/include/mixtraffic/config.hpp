#pragma once

// Run configuration for the command-line workflows.
//
// A config file is a JSON object whose keys are a subset of the defaults
// returned by `default_config_json()`; unknown keys and type mismatches are
// rejected. Overrides use dotted paths, e.g. `sim.p=0.3` or
// `scenarios.mps=[4,6]`.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixtraffic/params.hpp"
#include "mixtraffic/sim.hpp"
#include "mixtraffic/stability.hpp"
#include "mixtraffic/topology.hpp"

namespace mixtraffic {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class OutputFormat { Csv, Json };

struct AnalyzeSettings {
  int n = 1000;
  double omega_lo = 1e-2;
  double omega_hi = 1e2;
  int n_freq = 2000;
  double critical_step = 0.1;
};

struct RunConfig {
  ModelParams params;
  AnalyzeSettings analyze;
  SimConfig sim;
  std::vector<Strategy> strategies;  // sorted, unique
  std::vector<double> penetration_rates;
  std::vector<int> mps;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir = "out";
  OutputFormat format = OutputFormat::Csv;
  int jobs = 0;  // 0 = hardware concurrency

  /// Canonical JSON form, output directory excluded.
  nlohmann::ordered_json to_json() const;
};

/// Calibrated defaults; `analyze` with no config reproduces the full
/// (topology, MPS, penetration) stability grid.
nlohmann::ordered_json default_config_json();

/// Validates `user` against the default schema and merges it over the
/// defaults. Throws ConfigError with the offending key path.
nlohmann::ordered_json merge_config(const nlohmann::ordered_json& user);

/// Applies one `dotted.key=value` override. The value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_override(nlohmann::ordered_json& config, const std::string& assignment);

/// Converts a merged JSON config into typed settings, checking value ranges.
RunConfig parse_config(const nlohmann::ordered_json& merged);

nlohmann::ordered_json load_config_file(const std::filesystem::path& path);

}  // namespace mixtraffic
