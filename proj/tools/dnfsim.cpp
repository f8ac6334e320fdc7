// Command-line driver for the planning/memory field accommodation model.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dnf/errors.hpp"
#include "dnf/experiment_io.hpp"
#include "dnf/protocol.hpp"
#include "dnf/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct SourceOptions {
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> q;
  std::optional<double> dt;
  std::optional<int> grid_points;
};

struct OutputOptions {
  std::string out;
  std::string format;
  bool no_timestamp = false;
};

void add_source_flags(CLI::App* cmd, SourceOptions& src) {
  auto* p = cmd->add_option("--preset", src.preset, "Built-in scenario (strut, bath)");
  auto* c = cmd->add_option("--config", src.config, "Scenario config file (JSON)")->check(CLI::ExistingFile);
  p->excludes(c);
  c->excludes(p);
  p->multi_option_policy(CLI::MultiOptionPolicy::Throw);
  c->multi_option_policy(CLI::MultiOptionPolicy::Throw);
  cmd->add_option("--seed", src.seed, "Noise seed (only affects runs with q > 0)");
  cmd->add_option("--q", src.q, "Noise strength")->check(CLI::NonNegativeNumber);
  cmd->add_option("--dt", src.dt, "Integration step in ms")->check(CLI::PositiveNumber);
  cmd->add_option("--grid-points", src.grid_points, "Number of grid points")->check(CLI::Range(3, 1000000));
}

void add_output_flags(CLI::App* cmd, OutputOptions& out, bool with_format) {
  cmd->add_option("--out", out.out, "Output path (stdout when omitted)");
  if (with_format)
    cmd->add_option("--format", out.format, "csv or json (default: from --out extension, else csv)")
        ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--no-timestamp", out.no_timestamp, "Omit the timestamp from JSON archives");
}

struct Loaded {
  dnf::ConfigDocument doc;
  dnf::ArchiveMetadata metadata;
};

Loaded load(const SourceOptions& src) {
  if (src.preset.empty() == src.config.empty())
    throw CLI::ValidationError("source", "exactly one of --preset or --config is required");
  Loaded l;
  if (!src.preset.empty()) {
    l.doc.scenario = dnf::preset(src.preset);
  } else {
    l.doc = dnf::parse_config(dnf::read_file(src.config));
  }
  auto& s = l.doc.scenario;
  auto& ov = l.metadata.overrides;
  if (src.seed) {
    s.noise.seed = *src.seed;
    ov["seed"] = std::to_string(*src.seed);
  }
  if (src.q) {
    s.noise.q = *src.q;
    ov["q"] = dnf::format_number(*src.q);
  }
  if (src.dt) {
    s.dt = *src.dt;
    ov["dt"] = dnf::format_number(*src.dt);
  }
  if (src.grid_points) {
    s.grid = dnf::Grid(s.grid.lower(), s.grid.upper(), *src.grid_points);
    ov["grid_points"] = std::to_string(*src.grid_points);
  }
  s.validate();
  if (l.doc.sweep) l.doc.sweep->base = s;
  l.metadata.source = !src.preset.empty() ? src.preset : "config:" + dnf::config_hash(s);
  return l;
}

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

dnf::OutputFormat resolve_format(const OutputOptions& out) {
  if (!out.format.empty()) return out.format == "json" ? dnf::OutputFormat::json : dnf::OutputFormat::csv;
  if (out.out.size() >= 5 && out.out.ends_with(".json")) return dnf::OutputFormat::json;
  return dnf::OutputFormat::csv;
}

void emit(const OutputOptions& out, const std::string& text) {
  if (out.out.empty() || out.out == "-")
    std::cout << text;
  else
    dnf::write_file(out.out, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-layer dynamic neural field model of phonetic accommodation"};
  app.require_subcommand(1);

  SourceOptions src;
  OutputOptions out;
  bool keep_frames = false;
  int jobs = 1;
  std::string sweep_param, sweep_param2;
  std::vector<double> sweep_values, sweep_values2;
  std::vector<std::uint64_t> sweep_seeds;
  std::string layer = "planning";
  std::string block = "shadowing";

  auto* simulate = app.add_subcommand("simulate", "Run one experiment (seeding, baseline, shadowing, post)");
  add_source_flags(simulate, src);
  add_output_flags(simulate, out, true);
  simulate->add_flag("--keep-frames", keep_frames, "Include retained field frames in JSON output");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  add_source_flags(sweep, src);
  add_output_flags(sweep, out, true);
  sweep->add_option("--param", sweep_param, "Dotted scenario path, e.g. memory.kernel.c_inhibit");
  sweep->add_option("--values", sweep_values, "Values for --param")->delimiter(',');
  sweep->add_option("--param2", sweep_param2, "Optional second dotted path");
  sweep->add_option("--values2", sweep_values2, "Values for --param2")->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "Replicate seeds (q > 0)")->delimiter(',');
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 1024));

  auto* export_traj = app.add_subcommand("export-trajectory", "Write one block's field frames as long-format CSV");
  add_source_flags(export_traj, src);
  add_output_flags(export_traj, out, false);
  export_traj->add_option("--which", layer, "planning or memory")->check(CLI::IsMember({"planning", "memory"}));
  export_traj->add_option("--block", block, "baseline, shadowing or post")
      ->check(CLI::IsMember({"baseline", "shadowing", "post"}));

  auto* validate = app.add_subcommand("validate", "Parse and check a config without running it");
  add_source_flags(validate, src);

  auto* presets = app.add_subcommand("presets", "List built-in scenarios with their parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (presets->parsed()) {
      for (const auto& name : dnf::preset_names()) {
        std::cout << "# " << name << "\n" << dnf::dump_config(dnf::preset(name));
      }
      return kExitOk;
    }

    Loaded loaded;
    try {
      loaded = load(src);
    } catch (const CLI::ValidationError& e) {
      std::cerr << "usage error: " << e.what() << "\n";
      return kExitUsage;
    }
    auto& scenario = loaded.doc.scenario;
    if (!out.no_timestamp) loaded.metadata.timestamp = timestamp_utc();

    if (validate->parsed()) {
      std::cout << "ok: " << (scenario.name.empty() ? src.config : scenario.name) << " (config "
                << dnf::config_hash(scenario) << ")\n";
      return kExitOk;
    }

    if (simulate->parsed()) {
      const auto result = dnf::run_experiment(scenario, dnf::RunOptions{keep_frames});
      if (resolve_format(out) == dnf::OutputFormat::json)
        emit(out, dnf::results_json(result, scenario, loaded.metadata, keep_frames));
      else
        emit(out, dnf::results_csv(result));
      return kExitOk;
    }

    if (export_traj->parsed()) {
      const auto kind = *dnf::parse_block_kind(block);
      const auto result = dnf::run_experiment(scenario, dnf::RunOptions{true});
      emit(out, dnf::trajectory_csv(*result.trial(kind).trajectory, scenario.grid,
                                    layer == "memory" ? dnf::FieldLayer::memory : dnf::FieldLayer::planning));
      return kExitOk;
    }

    if (sweep->parsed()) {
      dnf::SweepSpec spec;
      if (!sweep_param.empty()) {
        spec.base = scenario;
        spec.parameter = sweep_param;
        spec.values = sweep_values;
        if (!sweep_param2.empty()) {
          spec.parameter2 = sweep_param2;
          spec.values2 = sweep_values2;
        }
      } else if (loaded.doc.sweep) {
        spec = *loaded.doc.sweep;
      } else {
        std::cerr << "usage error: no sweep section in the config and no --param given\n";
        return kExitUsage;
      }
      if (!sweep_seeds.empty()) spec.seeds = sweep_seeds;
      spec.validate();
      const auto result = dnf::run_sweep(spec, jobs);
      if (resolve_format(out) == dnf::OutputFormat::json)
        emit(out, dnf::sweep_json(result, spec, loaded.metadata));
      else
        emit(out, dnf::sweep_csv(result));
      bool any_failed = false;
      for (const auto& row : result.rows) any_failed = any_failed || !row.ok;
      return any_failed ? kExitRuntime : kExitOk;
    }
  } catch (const dnf::ValidationError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
