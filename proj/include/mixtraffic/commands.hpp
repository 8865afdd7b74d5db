#pragma once

// The three workflows behind the command-line tool. Each writes its files
// into `config.output_dir` and returns a process exit code.

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mixtraffic/config.hpp"
#include "mixtraffic/metrics.hpp"

namespace mixtraffic {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfigError = 2,
  kExitSynthesisFailure = 3,
  kExitCollision = 4,
};

struct VerdictRecord {
  Strategy strategy;
  double p;
  int m_max;
  int n;
  double peak_log_magnitude;
  double argmax_omega;
  bool stable;
};

struct CriticalRecord {
  Strategy strategy;
  int m_max;
  std::optional<double> critical_p;
};

struct AnalyzeResult {
  std::vector<VerdictRecord> verdicts;    // sorted by topology, M, p
  std::vector<CriticalRecord> critical;   // sorted by topology, M
};

struct SweepRun {
  Strategy strategy;
  int m_max;
  double p;
  std::uint64_t seed;
  std::string status;  // "ok", "collision" or "synthesis"
  MetricsReport metrics;
};

struct SweepCell {
  Strategy strategy;
  int m_max;
  double p;
  int seeds = 0;
  int failures = 0;
  double sd_mean, sd_min, sd_max;
  double mad_mean, mad_min, mad_max;
  double sd_normalized_mean, mad_normalized_mean;
};

struct SweepResult {
  std::vector<SweepRun> runs;    // sorted by topology, M, p, seed
  std::vector<SweepCell> cells;  // sorted by topology, M, p
};

/// Runs `task(i)` for i in [0, count) on up to `jobs` threads (0 = all cores).
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task);

/// Frequency-domain stability grid plus critical penetration per (topology, M).
AnalyzeResult analyze_grid(const RunConfig& config);

SweepResult run_sweep(const RunConfig& config);

SweepCell aggregate(const std::vector<SweepRun>& runs);

int cmd_analyze(const RunConfig& config, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_sweep(const RunConfig& config, std::ostream& log);

}  // namespace mixtraffic
