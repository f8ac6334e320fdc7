#include "dnf/dynamics.hpp"

#include <cmath>
#include <random>
#include <string>

#include "dnf/errors.hpp"

namespace dnf {

namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

void PlanningParams::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("planning.tau must be positive");
  if (!std::isfinite(h)) throw ValidationError("planning.h must be finite");
  if (!(c_memory >= 0.0) || !(c_auditory >= 0.0) || !(c_response >= 0.0) || !std::isfinite(c_memory) ||
      !std::isfinite(c_auditory) || !std::isfinite(c_response))
    throw ValidationError("planning coupling strengths must be finite and non-negative");
  kernel.validate();
  sigmoid.validate();
}

void MemoryParams::validate() const {
  if (!(tau_mem > 0.0) || !std::isfinite(tau_mem)) throw ValidationError("memory.tau_mem must be positive");
  if (!(tau_decay > tau_mem) || !std::isfinite(tau_decay))
    throw ValidationError("memory.tau_decay must exceed memory.tau_mem (memory forms faster than it decays)");
  if (!std::isfinite(threshold)) throw ValidationError("memory.threshold must be finite");
  kernel.validate();
}

void NoiseSpec::validate() const {
  if (!(q >= 0.0) || !std::isfinite(q)) throw ValidationError("noise.q must be finite and non-negative");
}

long step_count(double duration, double dt) {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ValidationError("duration must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
  const double ratio = duration / dt;
  const long steps = std::lround(ratio);
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-6)
    throw ValidationError("dt must divide the block duration");
  return steps;
}

FieldModel::FieldModel(Grid grid, PlanningParams planning, MemoryParams memory)
    : grid_(grid),
      planning_((planning.validate(), planning)),
      memory_((memory.validate(), memory)),
      planning_kernel_(build_kernel(planning_.kernel, grid_)),
      memory_kernel_(build_kernel(memory_.kernel, grid_)) {}

void FieldModel::check_lengths(const SystemState& state) const {
  const auto n = static_cast<std::size_t>(grid_.size());
  if (state.u.size() != n || state.u_mem.size() != n)
    throw ValidationError("state vectors do not match the grid length");
}

void FieldModel::derivatives(std::span<const double> u, std::span<const double> u_mem, const BlockInputs& inputs,
                             std::span<const double> noise_term, std::span<double> du,
                             std::span<double> du_mem) const {
  const auto n = static_cast<std::size_t>(grid_.size());
  const Field gated = sigmoid_gate(u, planning_.sigmoid);
  Field interaction(n);
  planning_kernel_.apply(gated, interaction);

  const bool has_response = !inputs.response.empty();
  const bool has_auditory = !inputs.auditory.empty();
  const bool has_noise = !noise_term.empty();
  const auto& p = planning_;
  for (std::size_t j = 0; j < n; ++j) {
    double rhs = -u[j] + p.h + p.c_memory * u_mem[j] + interaction[j];
    if (has_auditory) rhs += p.c_auditory * inputs.auditory[j];
    if (has_response) rhs += p.c_response * inputs.response[j];
    if (has_noise) rhs += noise_term[j];
    du[j] = rhs / p.tau;
  }

  if (du_mem.empty()) return;
  Field trace(n);
  memory_kernel_.apply(gated, trace);
  for (std::size_t j = 0; j < n; ++j) {
    du_mem[j] = u[j] > memory_.threshold ? (-u_mem[j] + trace[j]) / memory_.tau_mem : -u_mem[j] / memory_.tau_decay;
  }
}

Field FieldModel::planning_derivative(const SystemState& state, const BlockInputs& inputs,
                                      std::span<const double> noise_term) const {
  check_lengths(state);
  Field du(state.u.size());
  derivatives(state.u, state.u_mem, inputs, noise_term, du, {});
  if (!all_finite(du)) throw IntegrationError(0, "non-finite planning derivative");
  return du;
}

Field FieldModel::memory_derivative(const SystemState& state) const {
  check_lengths(state);
  Field du(state.u.size()), dm(state.u.size());
  derivatives(state.u, state.u_mem, BlockInputs{}, {}, du, dm);
  if (!all_finite(dm)) throw IntegrationError(0, "non-finite memory derivative");
  return dm;
}

IntegrationResult FieldModel::integrate(const SystemState& initial, const BlockInputs& inputs,
                                        const NoiseSpec& noise, double duration, double dt,
                                        int frame_stride) const {
  check_lengths(initial);
  noise.validate();
  if (frame_stride < 1) throw ValidationError("frame stride must be at least 1");
  const auto n = static_cast<std::size_t>(grid_.size());
  if ((!inputs.response.empty() && inputs.response.size() != n) ||
      (!inputs.auditory.empty() && inputs.auditory.size() != n))
    throw ValidationError("block inputs do not match the grid length");
  const long steps = step_count(duration, dt);

  IntegrationResult result;
  SystemState s = initial;
  auto& traj = result.trajectory;
  auto keep = [&traj](const SystemState& st) {
    traj.times.push_back(st.t);
    traj.u_frames.push_back(st.u);
    traj.u_mem_frames.push_back(st.u_mem);
  };
  keep(s);

  if (noise.q > 0.0) {
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = noise.q / std::sqrt(dt);
    Field xi(n), du(n), dm(n);
    for (long step = 1; step <= steps; ++step) {
      for (auto& v : xi) v = scale * normal(rng);
      derivatives(s.u, s.u_mem, inputs, xi, du, dm);
      for (std::size_t j = 0; j < n; ++j) {
        s.u[j] += dt * du[j];
        s.u_mem[j] += dt * dm[j];
      }
      s.t = initial.t + static_cast<double>(step) * dt;
      if (!all_finite(s.u) || !all_finite(s.u_mem)) throw IntegrationError(step, "non-finite field value");
      if (step % frame_stride == 0 || step == steps) keep(s);
    }
  } else {
    Field k1u(n), k1m(n), k2u(n), k2m(n), k3u(n), k3m(n), k4u(n), k4m(n), tu(n), tm(n);
    auto stage = [&](const Field& bu, const Field& bm, double h) {
      for (std::size_t j = 0; j < n; ++j) {
        tu[j] = s.u[j] + h * bu[j];
        tm[j] = s.u_mem[j] + h * bm[j];
      }
    };
    for (long step = 1; step <= steps; ++step) {
      derivatives(s.u, s.u_mem, inputs, {}, k1u, k1m);
      stage(k1u, k1m, 0.5 * dt);
      derivatives(tu, tm, inputs, {}, k2u, k2m);
      stage(k2u, k2m, 0.5 * dt);
      derivatives(tu, tm, inputs, {}, k3u, k3m);
      stage(k3u, k3m, dt);
      derivatives(tu, tm, inputs, {}, k4u, k4m);
      for (std::size_t j = 0; j < n; ++j) {
        s.u[j] += dt / 6.0 * (k1u[j] + 2.0 * k2u[j] + 2.0 * k3u[j] + k4u[j]);
        s.u_mem[j] += dt / 6.0 * (k1m[j] + 2.0 * k2m[j] + 2.0 * k3m[j] + k4m[j]);
      }
      s.t = initial.t + static_cast<double>(step) * dt;
      if (!all_finite(s.u) || !all_finite(s.u_mem)) throw IntegrationError(step, "non-finite field value");
      if (step % frame_stride == 0 || step == steps) keep(s);
    }
  }
  result.final_state = std::move(s);
  return result;
}

}  // namespace dnf
