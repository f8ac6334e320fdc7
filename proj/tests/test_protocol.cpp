#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "dnf/errors.hpp"
#include "dnf/protocol.hpp"
#include "oracle.hpp"

using namespace dnf;

namespace {

Trajectory frames_of(std::vector<Field> frames) {
  Trajectory t;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    t.times.push_back(2.0 * static_cast<double>(f));
    t.u_mem_frames.push_back(Field(frames[f].size(), 0.0));
    t.u_frames.push_back(std::move(frames[f]));
  }
  return t;
}

}  // namespace

TEST_CASE("presets carry the published parameters") {
  const auto s = strut_preset();
  CHECK(s.grid == Grid(-10.0, 10.0, 401));
  CHECK(s.planning.kernel == KernelSpec{2.0, 0.2, 1.0, 2.0, 0.5});
  CHECK(s.memory.kernel == KernelSpec{2.0, 0.1, 1.0, 2.0, 0.0});
  CHECK(s.planning.tau == 25.0);
  CHECK(s.memory.tau_mem == 150.0);
  CHECK(s.memory.tau_decay == 500.0);
  CHECK(s.planning.c_memory == 10.0);
  CHECK(s.planning.c_auditory == 10.0);
  CHECK(s.planning.c_response == 1.0);
  CHECK(s.planning.h == -2.0);
  CHECK(s.planning.sigmoid == SigmoidSpec{1.5, 0.0});
  CHECK(s.response_input == GaussianInputSpec{10.0, 0.0, 0.5});
  CHECK(s.auditory_input == GaussianInputSpec{10.0, -1.4, 0.5});
  CHECK(s.seed_input == GaussianInputSpec{100.0, 0.0, 0.5});
  CHECK(s.block_duration == 300.0);

  const auto b = bath_preset();
  CHECK(b.auditory_input.centroid == -1.2);
  CHECK(b.memory.kernel == KernelSpec{2.0, 0.1, 1.8, 3.0, 0.0});
  CHECK(b.planning == s.planning);

  CHECK(preset("strut") == s);
  CHECK_THROWS_AS(preset("palm"), ValidationError);
}

TEST_CASE("scenario validation guards the timescale ordering and input coverage") {
  auto s = strut_preset();
  s.memory.tau_mem = 20.0;  // faster than planning
  CHECK_THROWS_AS(s.validate(), ValidationError);

  s = strut_preset();
  s.memory.tau_mem = 600.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);

  s = strut_preset();
  s.auditory_input.centroid = -12.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);

  s = strut_preset();
  s.dt = 0.7;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  CHECK_NOTHROW(strut_preset().validate());
}

TEST_CASE("peak read-out") {
  const Grid g(-5.0, 5.0, 101);
  SUBCASE("stationary bump") {
    const auto bump = sample_input({4.0, 1.3, 0.5}, g);
    const auto p = peak_readout(frames_of({bump, bump, bump}), g);
    CHECK(p.x == doctest::Approx(1.3));
    CHECK(p.t == 0.0);
  }
  SUBCASE("larger of two bumps") {
    const GaussianInputSpec a{3.0, -2.0, 0.5}, b{5.0, 2.0, 0.5};
    const std::vector<GaussianInputSpec> both{a, b};
    const auto p = peak_readout(frames_of({sample_inputs(both, g)}), g);
    CHECK(p.x == doctest::Approx(2.0));
    CHECK(p.u == doctest::Approx(5.0 + 3.0 * std::exp(-32.0)));
  }
  SUBCASE("growing bump peaks at the last frame") {
    std::vector<Field> fs;
    for (int f = 1; f <= 5; ++f) fs.push_back(sample_input({1.0 * f, -0.4, 0.5}, g));
    const auto p = peak_readout(frames_of(fs), g);
    CHECK(p.t == 8.0);
    CHECK(p.x == doctest::Approx(-0.4));
  }
  SUBCASE("ties go to the earliest frame, then the lowest x") {
    Field flat(101, 1.0);
    const auto p = peak_readout(frames_of({flat, flat}), g);
    CHECK(p.t == 0.0);
    CHECK(p.x == -5.0);
  }
  CHECK_THROWS_AS(peak_readout(Trajectory{}, g), ValidationError);
}

TEST_CASE("memory seeding") {
  const Experiment exp(strut_preset());
  const auto start = exp.resting_state(Field(401, 0.0));
  for (double v : start.u_mem) CHECK(v == 0.0);
  for (double v : start.u) CHECK(v == -2.0);

  const Field m1 = exp.init_memory();
  const Field m2 = exp.init_memory();
  CHECK(m1 == m2);

  // Every term is symmetric about x = 0, so the seeded trace must be too.
  for (std::size_t j = 0; j < 401; ++j) CHECK(std::abs(m1[j] - m1[400 - j]) < 1e-9);

  // The seed drives a broad supra-threshold plateau; the memory kernel's
  // surround inhibition leaves a trace with twin maxima at the plateau
  // edges and a shallower value at the centre.
  const auto top = std::max_element(m1.begin(), m1.end());
  const double x_top = std::abs(exp.scenario().grid.at(static_cast<int>(top - m1.begin())));
  MESSAGE("seeded memory: max " << *top << " at |x| = " << x_top << ", centre " << m1[200]);
  CHECK(*top > 0.0);
  CHECK(m1[200] > 0.0);
}

TEST_CASE("block inputs") {
  const Experiment exp(strut_preset());
  for (auto kind : {BlockKind::baseline, BlockKind::post}) {
    const auto in = exp.block_inputs(kind);
    for (double v : in.auditory) CHECK(v == 0.0);
    CHECK(in.response[200] == 10.0);
  }
  const auto shadow = exp.block_inputs(BlockKind::shadowing);
  CHECK(shadow.auditory[172] == 10.0);  // x = -1.4
  CHECK(shadow.response == exp.block_inputs(BlockKind::baseline).response);

  // With the auditory input present but the post block selected, the drive
  // term c_auditory * s_auditory is zero everywhere.
  const auto post = exp.block_inputs(BlockKind::post);
  for (double v : post.auditory) CHECK(exp.scenario().planning.c_auditory * v == 0.0);
}

TEST_CASE("baseline peak of the strut scenario sits at the memory centre") {
  const Experiment exp(strut_preset());
  const auto [trial, state] = exp.run_block(BlockKind::baseline, exp.resting_state(exp.init_memory()));
  CHECK(std::abs(trial.peak_x) <= 0.05);
  CHECK(trial.block == BlockKind::baseline);
}

TEST_CASE("memory is threaded through the blocks bit for bit") {
  const Experiment exp(strut_preset());
  const auto full = exp.run({true});

  SystemState state = exp.resting_state(exp.init_memory());
  CHECK(state.u_mem == full.seeded_memory);
  for (std::size_t b = 0; b < kBlockOrder.size(); ++b) {
    const Field entering = state.u_mem;
    auto [trial, next] = exp.run_block(kBlockOrder[b], state, {true});
    // The block starts from exactly the memory left by the previous one.
    CHECK(trial.trajectory->u_mem_frames.front() == entering);
    CHECK(trial.trajectory->u_frames.front() == Field(401, -2.0));
    CHECK(trial.peak_x == full.trials[b].peak_x);
    CHECK(trial.peak_u == full.trials[b].peak_u);
    state = std::move(next);
  }
  CHECK(state.u_mem == full.final_state.u_mem);
  CHECK(full.x_diff == full.trials[2].peak_x - full.trials[1].peak_x);
}

TEST_CASE("without auditory coupling shadowing repeats the baseline") {
  auto s = strut_preset();
  s.planning.c_auditory = 0.0;
  const auto r = run_experiment(s);
  CHECK(std::abs(r.trial(BlockKind::shadowing).peak_x - r.trial(BlockKind::baseline).peak_x) <= s.grid.dx());
}

TEST_CASE("auditory input never pushes the shadowing peak away from itself") {
  for (double p : {-0.5, -1.0, -2.0, -3.0}) {
    auto s = strut_preset();
    s.auditory_input.centroid = p;
    const auto r = run_experiment(s);
    CAPTURE(p);
    CHECK(r.trial(BlockKind::shadowing).peak_x <= r.trial(BlockKind::baseline).peak_x);
  }
}

TEST_CASE("deterministic experiments are bitwise reproducible") {
  const auto a = run_experiment(bath_preset());
  const auto b = run_experiment(bath_preset());
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.trials[i].peak_x == b.trials[i].peak_x);
    CHECK(a.trials[i].peak_u == b.trials[i].peak_u);
  }
  CHECK(a.final_state.u_mem == b.final_state.u_mem);

  // The seed is irrelevant without noise.
  auto s = bath_preset();
  s.noise.seed = 99;
  CHECK(run_experiment(s).final_state.u_mem == a.final_state.u_mem);
}

TEST_CASE("stochastic experiments depend on the seed only") {
  auto s = strut_preset();
  s.noise.q = 3.0;
  s.noise.seed = 17;
  const auto a = run_experiment(s);
  const auto b = run_experiment(s);
  CHECK(a.final_state.u_mem == b.final_state.u_mem);
  s.noise.seed = 18;
  CHECK(run_experiment(s).final_state.u_mem != a.final_state.u_mem);
}

TEST_CASE("integration failures name the block") {
  auto s = strut_preset();
  s.planning.c_response = 1e306;
  s.seed_input.amplitude = 1e10;
  try {
    run_experiment(s);
    FAIL("expected failure");
  } catch (const IntegrationError& e) {
    CHECK(std::string(e.what()).find("memory seeding") != std::string::npos);
  }
}
