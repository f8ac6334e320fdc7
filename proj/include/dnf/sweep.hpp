#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dnf/protocol.hpp"

namespace dnf {

/// One or two scenario parameters, addressed by dotted config paths such as
/// "memory.kernel.c_inhibit", varied over a Cartesian grid of values.
struct SweepSpec {
  ExperimentScenario base;
  std::string parameter;
  std::vector<double> values;
  std::optional<std::string> parameter2;
  std::vector<double> values2;
  /// Replicate seeds; only used when base.noise.q > 0.
  std::vector<std::uint64_t> seeds;

  /// Rejects empty value lists and parameter paths that do not name a
  /// numeric field of the scenario schema.
  void validate() const;
};

struct SweepRow {
  double value = 0.0;
  std::optional<double> value2;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::array<TrialResult, 3> trials{};
  double x_diff = 0.0;

  const TrialResult& trial(BlockKind kind) const { return trials[static_cast<std::size_t>(kind)]; }
};

/// Seed statistics for one parameter combination.
struct SweepSummary {
  double value = 0.0;
  std::optional<double> value2;
  int completed = 0;
  double mean_shadowing_x = 0.0;
  double sd_shadowing_x = 0.0;
  double mean_post_x = 0.0;
  double sd_post_x = 0.0;
  double mean_x_diff = 0.0;
};

struct SweepResult {
  std::string parameter;
  std::optional<std::string> parameter2;
  std::vector<SweepRow> rows;  // specification order: value, value2, seed

  std::vector<SweepSummary> summarize() const;
};

/// Scenario with the parameter at `path` replaced by `value`.
ExperimentScenario with_parameter(const ExperimentScenario& scenario, const std::string& path, double value);

/// Runs every combination; failed combinations become rows with `ok == false`.
/// Rows are independent and spread over `jobs` worker threads.
SweepResult run_sweep(const SweepSpec& spec, int jobs = 1);

}  // namespace dnf
