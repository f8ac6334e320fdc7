#include "dnf/sweep.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "dnf/errors.hpp"
#include "dnf/experiment_io.hpp"

namespace dnf {

namespace {

json* resolve(json& doc, const std::string& path) {
  json* node = &doc;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty() || !node->is_object() || !node->contains(key)) return nullptr;
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return node;
}

void check_path(const ExperimentScenario& base, const std::string& path) {
  json doc = scenario_to_json(base);
  const json* leaf = resolve(doc, path);
  if (path == "version" || leaf == nullptr || !leaf->is_number())
    throw ConfigError(path, "sweep parameter does not name a numeric scenario field");
}

struct Job {
  double value;
  std::optional<double> value2;
  std::uint64_t seed;
};

}  // namespace

void SweepSpec::validate() const {
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  check_path(base, parameter);
  if (parameter2) {
    if (values2.empty()) throw ValidationError("sweep needs at least one value for the second parameter");
    check_path(base, *parameter2);
  }
}

ExperimentScenario with_parameter(const ExperimentScenario& scenario, const std::string& path, double value) {
  check_path(scenario, path);
  json doc = scenario_to_json(scenario);
  json& leaf = *resolve(doc, path);
  if (leaf.is_number_integer() || leaf.is_number_unsigned()) {
    if (value != std::floor(value)) throw ConfigError(path, "expects an integer value");
    leaf = static_cast<std::int64_t>(value);
  } else {
    leaf = value;
  }
  return scenario_from_json(doc);
}

SweepResult run_sweep(const SweepSpec& spec, int jobs) {
  spec.validate();

  std::vector<Job> plan;
  const bool stochastic = spec.base.noise.q > 0.0 && !spec.seeds.empty();
  const std::vector<std::uint64_t> seeds = stochastic ? spec.seeds : std::vector{spec.base.noise.seed};
  for (double v : spec.values) {
    const auto second = spec.parameter2 ? std::vector<std::optional<double>>(spec.values2.begin(), spec.values2.end())
                                        : std::vector<std::optional<double>>{std::nullopt};
    for (const auto& v2 : second)
      for (auto seed : seeds) plan.push_back(Job{v, v2, seed});
  }

  SweepResult result;
  result.parameter = spec.parameter;
  result.parameter2 = spec.parameter2;
  result.rows.resize(plan.size());

  auto run_row = [&](std::size_t i) {
    const Job& job = plan[i];
    SweepRow& row = result.rows[i];
    row.value = job.value;
    row.value2 = job.value2;
    row.seed = job.seed;
    try {
      ExperimentScenario s = with_parameter(spec.base, spec.parameter, job.value);
      if (job.value2) s = with_parameter(s, *spec.parameter2, *job.value2);
      s.noise.seed = job.seed;
      const auto r = run_experiment(s);
      for (std::size_t b = 0; b < r.trials.size(); ++b) row.trials[b] = r.trials[b];
      row.x_diff = r.x_diff;
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  };

  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || plan.size() < 2) {
    for (std::size_t i = 0; i < plan.size(); ++i) run_row(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, plan.size()); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < plan.size(); i = next++) run_row(i);
      });
    }
  }
  return result;
}

std::vector<SweepSummary> SweepResult::summarize() const {
  std::vector<SweepSummary> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t end = i;
    while (end < rows.size() && rows[end].value == rows[i].value && rows[end].value2 == rows[i].value2) ++end;

    SweepSummary s;
    s.value = rows[i].value;
    s.value2 = rows[i].value2;
    std::vector<double> shadow, post, diff;
    for (std::size_t k = i; k < end; ++k) {
      if (!rows[k].ok) continue;
      shadow.push_back(rows[k].trial(BlockKind::shadowing).peak_x);
      post.push_back(rows[k].trial(BlockKind::post).peak_x);
      diff.push_back(rows[k].x_diff);
    }
    auto mean = [](const std::vector<double>& v) {
      double acc = 0.0;
      for (double x : v) acc += x;
      return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
    };
    auto sd = [&](const std::vector<double>& v) {
      if (v.size() < 2) return 0.0;
      const double m = mean(v);
      double acc = 0.0;
      for (double x : v) acc += (x - m) * (x - m);
      return std::sqrt(acc / static_cast<double>(v.size() - 1));
    };
    s.completed = static_cast<int>(shadow.size());
    s.mean_shadowing_x = mean(shadow);
    s.sd_shadowing_x = sd(shadow);
    s.mean_post_x = mean(post);
    s.sd_post_x = sd(post);
    s.mean_x_diff = mean(diff);
    out.push_back(s);
    i = end;
  }
  return out;
}

}  // namespace dnf
