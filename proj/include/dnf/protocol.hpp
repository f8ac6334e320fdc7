#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dnf/dynamics.hpp"

namespace dnf {

enum class BlockKind { baseline, shadowing, post };

inline constexpr std::array<BlockKind, 3> kBlockOrder{BlockKind::baseline, BlockKind::shadowing, BlockKind::post};

std::string_view to_string(BlockKind kind);
std::optional<BlockKind> parse_block_kind(std::string_view name);

struct ExperimentScenario {
  std::string name;  // preset name, empty for custom configs
  Grid grid{-10.0, 10.0, 401};
  PlanningParams planning;
  MemoryParams memory;
  NoiseSpec noise;
  GaussianInputSpec response_input;
  GaussianInputSpec auditory_input;
  GaussianInputSpec seed_input;
  double block_duration = 300.0;  // ms
  double dt = 0.5;                // ms
  int frame_stride = 4;           // steps between retained frames

  /// Checks every parameter invariant, tau_decay > tau_mem > tau, that all
  /// input centroids lie on the grid, and that dt divides the block duration.
  void validate() const;
  bool operator==(const ExperimentScenario&) const = default;
};

/// Built-in scenarios: "strut" (return to baseline) and "bath" (divergence).
ExperimentScenario strut_preset();
ExperimentScenario bath_preset();
std::vector<std::string> preset_names();
/// Throws ValidationError for an unknown name.
ExperimentScenario preset(std::string_view name);

struct PeakReadout {
  double t = 0.0;
  double x = 0.0;
  double u = 0.0;
  std::size_t frame = 0;
  int index = 0;
};

/// Global maximum of u over all retained frames; ties go to the earliest
/// frame, then the lowest x.
PeakReadout peak_readout(const Trajectory& trajectory, const Grid& grid);

struct TrialResult {
  BlockKind block = BlockKind::baseline;
  double peak_x = 0.0;
  double peak_t = 0.0;
  double peak_u = 0.0;
  std::optional<Trajectory> trajectory;
};

struct ExperimentResult {
  std::vector<TrialResult> trials;  // baseline, shadowing, post
  double x_diff = 0.0;              // post peak_x - shadowing peak_x
  Field seeded_memory;
  SystemState final_state;

  const TrialResult& trial(BlockKind kind) const;
};

struct RunOptions {
  bool keep_trajectories = false;
};

/// Drives the planning/memory pair through the block protocol of one scenario.
class Experiment {
public:
  explicit Experiment(ExperimentScenario scenario);

  const ExperimentScenario& scenario() const noexcept { return scenario_; }
  const FieldModel& model() const noexcept { return model_; }

  /// Inputs active in a block: response everywhere, auditory only while shadowing.
  BlockInputs block_inputs(BlockKind kind) const;

  /// u_mem after one block driven only by the seed input, starting from a flat zero memory.
  Field init_memory() const;

  /// Runs one block. The planning field restarts at rest (u = h); memory
  /// carries over from `state`. Returns the read-out and the end-of-block state.
  std::pair<TrialResult, SystemState> run_block(BlockKind kind, const SystemState& state,
                                                const RunOptions& options = {}) const;

  ExperimentResult run(const RunOptions& options = {}) const;

  /// Planning field at rest with the given memory.
  SystemState resting_state(Field u_mem) const;

private:
  NoiseSpec block_noise(int block_index) const;

  ExperimentScenario scenario_;
  FieldModel model_;
};

ExperimentResult run_experiment(const ExperimentScenario& scenario, const RunOptions& options = {});

}  // namespace dnf
