#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <sstream>

#include "dnf/errors.hpp"
#include "dnf/experiment_io.hpp"

using namespace dnf;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

std::vector<double> split_numbers(const std::string& line) {
  std::vector<double> out;
  std::istringstream is(line);
  for (std::string cell; std::getline(is, cell, ',');) out.push_back(std::strtod(cell.c_str(), nullptr));
  return out;
}

std::string without_key(std::string text, const std::string& needle) {
  const auto pos = text.find(needle);
  REQUIRE(pos != std::string::npos);
  const auto end = text.find('\n', pos);
  text.erase(pos, end - pos + 1);
  return text;
}

}  // namespace

TEST_CASE("presets round-trip through the config format") {
  for (const auto& name : preset_names()) {
    const auto s = preset(name);
    const std::string text = dump_config(s);
    const auto doc = parse_config(text);
    CHECK(doc.scenario == s);
    CHECK_FALSE(doc.sweep.has_value());
    // Idempotent after one pass.
    CHECK(dump_config(doc.scenario) == text);
  }
}

TEST_CASE("missing physics keys are named") {
  const std::string text = dump_config(strut_preset());
  try {
    parse_config(without_key(text, "\"tau\": 25"));
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "planning.tau");
    CHECK(std::string(e.what()).find("tau") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(without_key(text, "\"c_inhibit\": 1.0")), ConfigError);
  CHECK_THROWS_AS(parse_config(without_key(text, "\"block_duration\"")), ConfigError);
}

TEST_CASE("defaults exist only for grid, dt and frame stride") {
  auto j = scenario_to_json(strut_preset());
  j.erase("grid");
  j.erase("dt");
  j.erase("frame_stride");
  const auto s = scenario_from_json(j);
  CHECK(s.grid == Grid(-10.0, 10.0, 401));
  CHECK(s.dt == 0.5);
  CHECK(s.frame_stride == 4);
}

TEST_CASE("config validation") {
  auto j = scenario_to_json(strut_preset());
  SUBCASE("timescale ordering") {
    j["memory"]["tau_mem"] = 600.0;
    CHECK_THROWS_AS(scenario_from_json(j), ValidationError);
  }
  SUBCASE("unknown keys") {
    j["planning"]["tua"] = 25.0;
    try {
      scenario_from_json(j);
      FAIL("expected a config error");
    } catch (const ConfigError& e) {
      CHECK(e.key() == "planning.tua");
    }
  }
  SUBCASE("wrong type") {
    j["planning"]["h"] = "low";
    CHECK_THROWS_AS(scenario_from_json(j), ConfigError);
  }
  SUBCASE("version") {
    j["version"] = 2;
    CHECK_THROWS_AS(scenario_from_json(j), ConfigError);
  }
  SUBCASE("range") {
    j["inputs"]["auditory"]["width"] = -0.5;
    CHECK_THROWS_AS(scenario_from_json(j), ValidationError);
  }
}

TEST_CASE("parse errors report the line") {
  const std::string text = "{\n  \"version\": 1,\n  \"grid\": {\n    \"lower\": -10,,\n  }\n}\n";
  try {
    parse_config(text);
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
}

TEST_CASE("comments are allowed in config files") {
  std::string text = dump_config(bath_preset());
  text.insert(text.find("\"planning\""), "// planning field\n  ");
  CHECK(parse_config(text).scenario == bath_preset());
}

TEST_CASE("sweep section") {
  std::string text = dump_config(bath_preset());
  text.insert(text.rfind('}'), ",\n  \"sweep\": {\"parameter\": \"memory.kernel.c_inhibit\", \"values\": [1.0, 1.4, 1.8]}\n");
  const auto doc = parse_config(text);
  REQUIRE(doc.sweep.has_value());
  CHECK(doc.sweep->parameter == "memory.kernel.c_inhibit");
  CHECK(doc.sweep->values == std::vector<double>{1.0, 1.4, 1.8});
  CHECK(doc.sweep->base == bath_preset());
  CHECK(dump_config(doc.scenario, doc.sweep) == dump_config(parse_config(dump_config(doc.scenario, doc.sweep)).scenario,
                                                            parse_config(dump_config(doc.scenario, doc.sweep)).sweep));

  std::string bad = dump_config(bath_preset());
  bad.insert(bad.rfind('}'), ",\n  \"sweep\": {\"parameter\": \"memory.kernel.c_inhbit\", \"values\": [1.0]}\n");
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
}

TEST_CASE("experiment CSV and JSON") {
  const auto s = strut_preset();
  const auto r = run_experiment(s);

  const auto csv = lines_of(results_csv(r));
  REQUIRE(csv.size() == 4);
  CHECK(csv[0] == "block,peak_t,peak_x,peak_u,x_diff");
  CHECK(csv[1].rfind("baseline,", 0) == 0);
  CHECK(csv[2].rfind("shadowing,", 0) == 0);
  CHECK(csv[3].rfind("post,", 0) == 0);
  const auto shadow = split_numbers(csv[2].substr(csv[2].find(',') + 1));
  CHECK(shadow[1] == r.trial(BlockKind::shadowing).peak_x);
  CHECK(shadow[2] == r.trial(BlockKind::shadowing).peak_u);

  ArchiveMetadata meta{"strut", {{"dt", "0.5"}}, std::nullopt};
  const auto archive = read_results_json(results_json(r, s, meta));
  CHECK(archive.metadata.source == "strut");
  CHECK(archive.metadata.overrides.at("dt") == "0.5");
  CHECK_FALSE(archive.metadata.timestamp.has_value());
  CHECK(archive.scenario == s);
  REQUIRE(archive.blocks.size() == 3);
  for (std::size_t b = 0; b < 3; ++b) {
    CHECK(archive.blocks[b].block == r.trials[b].block);
    CHECK(archive.blocks[b].peak_x == r.trials[b].peak_x);
    CHECK(archive.blocks[b].peak_t == r.trials[b].peak_t);
    CHECK(archive.blocks[b].peak_u == r.trials[b].peak_u);
  }
  CHECK(archive.x_diff == r.x_diff);
  CHECK(archive.final_memory == r.final_state.u_mem);

  // The archived config alone regenerates the run.
  const auto again = run_experiment(archive.scenario);
  CHECK(again.final_state.u_mem == r.final_state.u_mem);
}

TEST_CASE("numbers survive a text round trip") {
  for (double v : {0.1, -1.4000000000000004, 1.0 / 3.0, 6.02214076e23, -2.2250738585072014e-308})
    CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
}

TEST_CASE("sweep CSV keeps specification order") {
  SweepResult r;
  r.parameter = "memory.kernel.c_inhibit";
  for (double v : {1.8, 1.0, 1.4}) {
    SweepRow row;
    row.value = v;
    row.ok = true;
    r.rows.push_back(row);
  }
  SweepRow failed;
  failed.value = 9.0;
  failed.error = "tau, \"bad\"";
  r.rows.push_back(failed);
  const auto lines = lines_of(sweep_csv(r));
  REQUIRE(lines.size() == 5);
  CHECK(lines[0].rfind("memory.kernel.c_inhibit,seed,status", 0) == 0);
  CHECK(lines[1].rfind("1.8,", 0) == 0);
  CHECK(lines[2].rfind("1,", 0) == 0);
  CHECK(lines[3].rfind("1.3999999999999999,", 0) == 0);
  CHECK(lines[4] == "9,0,failed,,,,,\"tau, \"\"bad\"\"\"");
}

TEST_CASE("trajectory export") {
  const Grid g(0.0, 1.0, 5);
  Trajectory t;
  t.times = {0.0, 2.0};
  t.u_frames = {{1, 2, 3, 4, 5}, {0.1, 0.2, 0.3, 0.4, 1.0 / 3.0}};
  t.u_mem_frames = {{0, 0, 0, 0, 0}, {-1, -2, -3, -4, -5}};
  const auto lines = lines_of(trajectory_csv(t, g, FieldLayer::planning));
  REQUIRE(lines.size() == 11);
  CHECK(lines[0] == "t,x,value");
  for (std::size_t f = 0; f < 2; ++f)
    for (std::size_t j = 0; j < 5; ++j) {
      const auto row = split_numbers(lines[1 + f * 5 + j]);
      CHECK(row[0] == t.times[f]);
      CHECK(row[1] == g.at(static_cast<int>(j)));
      CHECK(row[2] == t.u_frames[f][j]);
    }
  const auto mem = lines_of(trajectory_csv(t, g, FieldLayer::memory));
  CHECK(split_numbers(mem[10])[2] == -5.0);
  CHECK_THROWS_AS(trajectory_csv(Trajectory{}, g, FieldLayer::memory), ValidationError);
}

// The published parameters put the strut auditory bump above threshold
// (see the acceptance report), which inverts this ordering; kept as a
// visible expected failure until the parameterization question is settled.
TEST_CASE("memory traces differ more between conditions for bath than strut" * doctest::may_fail()) {
  // Spread of the end-of-block memory traces across the three blocks, read
  // back from the exported CSVs.
  auto spread = [](const ExperimentScenario& s) {
    const auto r = run_experiment(s, {true});
    std::vector<std::vector<double>> ends;
    for (const auto& trial : r.trials) {
      const auto lines = lines_of(trajectory_csv(*trial.trajectory, s.grid, FieldLayer::memory));
      std::vector<double> last;
      for (std::size_t i = lines.size() - static_cast<std::size_t>(s.grid.size()); i < lines.size(); ++i)
        last.push_back(split_numbers(lines[i])[2]);
      ends.push_back(std::move(last));
    }
    double m = 0.0;
    for (std::size_t j = 0; j < ends[0].size(); ++j) {
      const double hi = std::max({ends[0][j], ends[1][j], ends[2][j]});
      const double lo = std::min({ends[0][j], ends[1][j], ends[2][j]});
      m = std::max(m, hi - lo);
    }
    return m;
  };
  const double strut = spread(strut_preset()), bath = spread(bath_preset());
  MESSAGE("memory condition spread: strut " << strut << ", bath " << bath);
  CHECK(bath > strut);
}

TEST_CASE("config hash is stable and sensitive") {
  CHECK(config_hash(strut_preset()) == config_hash(strut_preset()));
  CHECK(config_hash(strut_preset()) != config_hash(bath_preset()));
  CHECK(config_hash(strut_preset()).size() == 16);
}

TEST_CASE("file helpers report the path") {
  try {
    write_file("/nonexistent-dir/x.csv", "a");
    FAIL("expected failure");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/x.csv") != std::string::npos);
  }
  CHECK_THROWS_AS(read_file("/nonexistent-dir/x.csv"), std::runtime_error);
}
