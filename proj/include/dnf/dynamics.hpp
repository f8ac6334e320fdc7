#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dnf/field_core.hpp"

namespace dnf {

struct PlanningParams {
  double tau = 25.0;  // ms
  double h = -2.0;    // resting level
  double c_memory = 0.0;
  double c_auditory = 0.0;
  double c_response = 0.0;
  KernelSpec kernel;
  SigmoidSpec sigmoid;

  void validate() const;
  bool operator==(const PlanningParams&) const = default;
};

/// The memory layer shares the planning field's sigmoid; `threshold` selects
/// between the Hebbian write branch (u > threshold) and passive decay.
struct MemoryParams {
  double tau_mem = 150.0;    // ms
  double tau_decay = 500.0;  // ms
  KernelSpec kernel;
  double threshold = 0.0;

  void validate() const;
  bool operator==(const MemoryParams&) const = default;
};

struct NoiseSpec {
  double q = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const NoiseSpec&) const = default;
};

struct SystemState {
  Field u;
  Field u_mem;
  double t = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> u_frames;
  std::vector<Field> u_mem_frames;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
};

/// Inputs held constant over one block, sampled on the grid.
struct BlockInputs {
  Field response;
  Field auditory;
};

struct IntegrationResult {
  Trajectory trajectory;
  SystemState final_state;
};

/// The coupled planning/memory field pair on a fixed grid. Kernels are
/// sampled and transformed once at construction.
class FieldModel {
public:
  FieldModel(Grid grid, PlanningParams planning, MemoryParams memory);

  const Grid& grid() const noexcept { return grid_; }
  const PlanningParams& planning() const noexcept { return planning_; }
  const MemoryParams& memory() const noexcept { return memory_; }

  /// (-u + h + c_mem u_mem + c_aud s_aud + c_resp s_resp + [k * g(u)] + noise) / tau
  Field planning_derivative(const SystemState& state, const BlockInputs& inputs,
                            std::span<const double> noise_term = {}) const;

  /// Hebbian write where u > threshold, passive decay elsewhere.
  Field memory_derivative(const SystemState& state) const;

  /// Both derivatives sharing one evaluation of g(u).
  void derivatives(std::span<const double> u, std::span<const double> u_mem, const BlockInputs& inputs,
                   std::span<const double> noise_term, std::span<double> du, std::span<double> du_mem) const;

  /// Advances the coupled system for `duration` ms with fixed step `dt`.
  /// q == 0 uses classical RK4; q > 0 uses Euler-Maruyama with spatially white
  /// noise scaled by q / sqrt(dt) inside the tau-divided right-hand side.
  /// The initial state and every `frame_stride`-th step (plus the last) are retained.
  IntegrationResult integrate(const SystemState& initial, const BlockInputs& inputs, const NoiseSpec& noise,
                              double duration, double dt, int frame_stride = 1) const;

private:
  void check_lengths(const SystemState& state) const;

  Grid grid_;
  PlanningParams planning_;
  MemoryParams memory_;
  Convolution planning_kernel_;
  Convolution memory_kernel_;
};

/// Number of fixed steps covering `duration`; rejects a dt that does not divide it.
long step_count(double duration, double dt);

}  // namespace dnf
