#include "dnf/protocol.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "dnf/errors.hpp"

namespace dnf {

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::baseline: return "baseline";
    case BlockKind::shadowing: return "shadowing";
    case BlockKind::post: return "post";
  }
  return "unknown";
}

std::optional<BlockKind> parse_block_kind(std::string_view name) {
  for (auto k : kBlockOrder)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

void ExperimentScenario::validate() const {
  planning.validate();
  memory.validate();
  noise.validate();
  if (!(memory.tau_mem > planning.tau))
    throw ValidationError("memory.tau_mem must exceed planning.tau (memory evolves slower than planning)");
  for (const auto* in : {&response_input, &auditory_input, &seed_input}) {
    in->validate();
    if (in->centroid < grid.lower() || in->centroid > grid.upper())
      throw ValidationError("input centroid lies outside the grid");
  }
  if (frame_stride < 1) throw ValidationError("frame_stride must be at least 1");
  step_count(block_duration, dt);
}

namespace {

// Parameters shared by both presets.
ExperimentScenario common_preset() {
  ExperimentScenario s;
  s.grid = Grid(-10.0, 10.0, 401);
  s.planning.tau = 25.0;
  s.planning.h = -2.0;
  s.planning.c_memory = 10.0;
  s.planning.c_auditory = 10.0;
  s.planning.c_response = 1.0;
  s.planning.kernel = KernelSpec{2.0, 0.2, 1.0, 2.0, 0.5};
  s.planning.sigmoid = SigmoidSpec{1.5, 0.0};
  s.memory.tau_mem = 150.0;
  s.memory.tau_decay = 500.0;
  s.memory.kernel = KernelSpec{2.0, 0.1, 1.0, 2.0, 0.0};
  s.memory.threshold = 0.0;
  // Noise-free runs are canonical; q = 3 reproduces the stochastic setting.
  s.noise = NoiseSpec{0.0, 0};
  s.response_input = GaussianInputSpec{10.0, 0.0, 0.5};
  s.seed_input = GaussianInputSpec{100.0, 0.0, 0.5};
  s.block_duration = 300.0;
  s.dt = 0.5;
  s.frame_stride = 4;
  return s;
}

}  // namespace

ExperimentScenario strut_preset() {
  auto s = common_preset();
  s.name = "strut";
  s.auditory_input = GaussianInputSpec{10.0, -1.4, 0.5};
  return s;
}

ExperimentScenario bath_preset() {
  auto s = common_preset();
  s.name = "bath";
  s.auditory_input = GaussianInputSpec{10.0, -1.2, 0.5};
  s.memory.kernel.c_inhibit = 1.8;
  s.memory.kernel.sigma_inhibit = 3.0;
  return s;
}

std::vector<std::string> preset_names() { return {"strut", "bath"}; }

ExperimentScenario preset(std::string_view name) {
  if (name == "strut") return strut_preset();
  if (name == "bath") return bath_preset();
  throw ValidationError("unknown preset '" + std::string(name) + "'");
}

PeakReadout peak_readout(const Trajectory& trajectory, const Grid& grid) {
  if (trajectory.empty()) throw ValidationError("peak read-out of an empty trajectory");
  PeakReadout best;
  bool found = false;
  for (std::size_t f = 0; f < trajectory.size(); ++f) {
    const Field& u = trajectory.u_frames[f];
    if (u.size() != static_cast<std::size_t>(grid.size()))
      throw ValidationError("trajectory frame does not match the grid");
    for (int j = 0; j < grid.size(); ++j) {
      const double v = u[static_cast<std::size_t>(j)];
      if (!found || v > best.u) {
        best = PeakReadout{trajectory.times[f], grid.at(j), v, f, j};
        found = true;
      }
    }
  }
  return best;
}

const TrialResult& ExperimentResult::trial(BlockKind kind) const {
  for (const auto& t : trials)
    if (t.block == kind) return t;
  throw std::out_of_range("experiment has no " + std::string(to_string(kind)) + " block");
}

Experiment::Experiment(ExperimentScenario scenario)
    : scenario_((scenario.validate(), std::move(scenario))),
      model_(scenario_.grid, scenario_.planning, scenario_.memory) {}

BlockInputs Experiment::block_inputs(BlockKind kind) const {
  BlockInputs in;
  in.response = sample_input(scenario_.response_input, scenario_.grid);
  if (kind == BlockKind::shadowing)
    in.auditory = sample_input(scenario_.auditory_input, scenario_.grid);
  else
    in.auditory.assign(static_cast<std::size_t>(scenario_.grid.size()), 0.0);
  return in;
}

SystemState Experiment::resting_state(Field u_mem) const {
  SystemState s;
  s.u.assign(static_cast<std::size_t>(scenario_.grid.size()), scenario_.planning.h);
  s.u_mem = std::move(u_mem);
  s.t = 0.0;
  return s;
}

NoiseSpec Experiment::block_noise(int block_index) const {
  NoiseSpec n = scenario_.noise;
  if (n.q > 0.0) {
    // Independent, reproducible stream per block.
    std::seed_seq seq{static_cast<std::uint32_t>(n.seed), static_cast<std::uint32_t>(n.seed >> 32),
                      static_cast<std::uint32_t>(block_index)};
    std::array<std::uint32_t, 2> words{};
    seq.generate(words.begin(), words.end());
    n.seed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  }
  return n;
}

Field Experiment::init_memory() const {
  BlockInputs in;
  in.response = sample_input(scenario_.seed_input, scenario_.grid);
  const auto zero = Field(static_cast<std::size_t>(scenario_.grid.size()), 0.0);
  auto r = model_.integrate(resting_state(zero), in, block_noise(0), scenario_.block_duration, scenario_.dt,
                            scenario_.frame_stride);
  return std::move(r.final_state.u_mem);
}

std::pair<TrialResult, SystemState> Experiment::run_block(BlockKind kind, const SystemState& state,
                                                          const RunOptions& options) const {
  const SystemState start = resting_state(state.u_mem);
  const int index = 1 + static_cast<int>(kind);
  auto r = model_.integrate(start, block_inputs(kind), block_noise(index), scenario_.block_duration,
                            scenario_.dt, scenario_.frame_stride);
  const auto peak = peak_readout(r.trajectory, scenario_.grid);
  TrialResult trial{kind, peak.x, peak.t, peak.u, std::nullopt};
  if (options.keep_trajectories) trial.trajectory = std::move(r.trajectory);
  return {std::move(trial), std::move(r.final_state)};
}

ExperimentResult Experiment::run(const RunOptions& options) const {
  ExperimentResult result;
  try {
    result.seeded_memory = init_memory();
  } catch (const IntegrationError& e) {
    throw IntegrationError(e.step(), "memory seeding: " + e.detail());
  }
  SystemState state = resting_state(result.seeded_memory);
  for (auto kind : kBlockOrder) {
    try {
      auto [trial, next] = run_block(kind, state, options);
      result.trials.push_back(std::move(trial));
      state = std::move(next);
    } catch (const IntegrationError& e) {
      throw IntegrationError(e.step(), std::string(to_string(kind)) + " block: " + e.detail());
    }
  }
  result.x_diff = result.trial(BlockKind::post).peak_x - result.trial(BlockKind::shadowing).peak_x;
  result.final_state = std::move(state);
  return result;
}

ExperimentResult run_experiment(const ExperimentScenario& scenario, const RunOptions& options) {
  return Experiment(scenario).run(options);
}

}  // namespace dnf
