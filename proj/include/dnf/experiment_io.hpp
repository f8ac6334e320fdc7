#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dnf/protocol.hpp"
#include "dnf/sweep.hpp"

namespace dnf {

inline constexpr int kConfigVersion = 1;

using json = nlohmann::ordered_json;

json scenario_to_json(const ExperimentScenario& scenario);
/// Strict: unknown keys and missing physics keys are ConfigErrors naming the dotted key path.
ExperimentScenario scenario_from_json(const json& doc);

struct ConfigDocument {
  ExperimentScenario scenario;
  std::optional<SweepSpec> sweep;
};

ConfigDocument parse_config(std::string_view text);
std::string dump_config(const ExperimentScenario& scenario, const std::optional<SweepSpec>& sweep = std::nullopt);

/// FNV-1a over the canonical config text, as 16 hex digits.
std::string config_hash(const ExperimentScenario& scenario);

struct ArchiveMetadata {
  std::string source;  // preset name or "config:<hash>"
  std::map<std::string, std::string> overrides;
  std::optional<std::string> timestamp;
};

struct BlockRecord {
  BlockKind block = BlockKind::baseline;
  double peak_t = 0.0;
  double peak_x = 0.0;
  double peak_u = 0.0;
};

/// In-memory form of a JSON result archive.
struct ResultArchive {
  ArchiveMetadata metadata;
  ExperimentScenario scenario;
  std::vector<BlockRecord> blocks;
  double x_diff = 0.0;
  Field final_memory;
};

enum class OutputFormat { csv, json };
enum class FieldLayer { planning, memory };

std::string format_number(double v);

std::string results_csv(const ExperimentResult& result);
std::string results_json(const ExperimentResult& result, const ExperimentScenario& scenario,
                         const ArchiveMetadata& metadata, bool include_frames = false);
ResultArchive read_results_json(std::string_view text);

std::string sweep_csv(const SweepResult& result);
std::string sweep_json(const SweepResult& result, const SweepSpec& spec, const ArchiveMetadata& metadata);

/// Long format: one (t, x, value) row per retained frame and grid point.
std::string trajectory_csv(const Trajectory& trajectory, const Grid& grid, FieldLayer which);

/// Throws std::runtime_error naming the path on failure.
void write_file(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace dnf
