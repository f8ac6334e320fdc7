#include "dnf/experiment_io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dnf/errors.hpp"

namespace dnf {

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

/// Walks one JSON object, recording which keys were consumed so leftovers
/// can be rejected.
class ObjectReader {
public:
  ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& raw(const std::string& key) {
    if (!node_.contains(key)) throw ConfigError(join(path_, key), "missing required key");
    used_.insert(key);
    return node_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(join(path_, key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(join(path_, key), "must be finite");
    return d;
  }

  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::int64_t integer(const std::string& key) {
    const json& v = raw(key);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15) return static_cast<std::int64_t>(d);
    }
    throw ConfigError(join(path_, key), "expected an integer");
  }

  std::int64_t integer_or(const std::string& key, std::int64_t fallback) {
    return has(key) ? integer(key) : fallback;
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(join(path_, key), "expected a string");
    return v.get<std::string>();
  }

  ObjectReader child(const std::string& key) { return ObjectReader(raw(key), join(path_, key)); }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(join(path_, key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(join(path_, key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, _] : node_.items())
      if (!used_.contains(key)) throw ConfigError(join(path_, key), "unknown key");
  }

  const std::string& path() const { return path_; }

private:
  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

json kernel_json(const KernelSpec& k) {
  return json{{"c_excite", k.c_excite},
              {"sigma_excite", k.sigma_excite},
              {"c_inhibit", k.c_inhibit},
              {"sigma_inhibit", k.sigma_inhibit},
              {"c_global", k.c_global}};
}

KernelSpec read_kernel(ObjectReader r) {
  KernelSpec k;
  k.c_excite = r.number("c_excite");
  k.sigma_excite = r.number("sigma_excite");
  k.c_inhibit = r.number("c_inhibit");
  k.sigma_inhibit = r.number("sigma_inhibit");
  k.c_global = r.number("c_global");
  r.finish();
  return k;
}

json input_json(const GaussianInputSpec& s) {
  return json{{"amplitude", s.amplitude}, {"centroid", s.centroid}, {"width", s.width}};
}

GaussianInputSpec read_input(ObjectReader r) {
  GaussianInputSpec s;
  s.amplitude = r.number("amplitude");
  s.centroid = r.number("centroid");
  s.width = r.number("width");
  r.finish();
  return s;
}

json grid_json(const Grid& g) { return json{{"lower", g.lower()}, {"upper", g.upper()}, {"points", g.size()}}; }

std::size_t line_of(std::string_view text, std::size_t byte) {
  const auto end = std::min(byte, text.size());
  std::size_t line = 1;
  for (std::size_t i = 0; i + 1 < end; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

json parse_json_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "parse error at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json sweep_section(const SweepSpec& sweep) {
  json s{{"parameter", sweep.parameter}, {"values", sweep.values}};
  if (sweep.parameter2) {
    s["parameter2"] = *sweep.parameter2;
    s["values2"] = sweep.values2;
  }
  if (!sweep.seeds.empty()) s["seeds"] = sweep.seeds;
  return s;
}

json metadata_json(const ArchiveMetadata& m, const ExperimentScenario& scenario) {
  json j{{"source", m.source},
         {"config_hash", config_hash(scenario)},
         {"seed", scenario.noise.seed},
         {"q", scenario.noise.q},
         {"dt", scenario.dt},
         {"frame_stride", scenario.frame_stride},
         {"grid", grid_json(scenario.grid)}};
  j["overrides"] = json::object();
  for (const auto& [k, v] : m.overrides) j["overrides"][k] = v;
  if (m.timestamp) j["timestamp"] = *m.timestamp;
  return j;
}

json frames_json(const Trajectory& t) {
  return json{{"t", t.times}, {"u", t.u_frames}, {"u_mem", t.u_mem_frames}};
}

}  // namespace

json scenario_to_json(const ExperimentScenario& s) {
  json doc;
  doc["version"] = kConfigVersion;
  if (!s.name.empty()) doc["name"] = s.name;
  doc["grid"] = grid_json(s.grid);
  doc["planning"] = json{{"tau", s.planning.tau},
                         {"h", s.planning.h},
                         {"c_memory", s.planning.c_memory},
                         {"c_auditory", s.planning.c_auditory},
                         {"c_response", s.planning.c_response},
                         {"kernel", kernel_json(s.planning.kernel)},
                         {"sigmoid", json{{"beta", s.planning.sigmoid.beta}, {"alpha", s.planning.sigmoid.alpha}}}};
  doc["memory"] = json{{"tau_mem", s.memory.tau_mem},
                       {"tau_decay", s.memory.tau_decay},
                       {"threshold", s.memory.threshold},
                       {"kernel", kernel_json(s.memory.kernel)}};
  doc["noise"] = json{{"q", s.noise.q}, {"seed", s.noise.seed}};
  doc["inputs"] = json{{"response", input_json(s.response_input)},
                       {"auditory", input_json(s.auditory_input)},
                       {"seed", input_json(s.seed_input)}};
  doc["block_duration"] = s.block_duration;
  doc["dt"] = s.dt;
  doc["frame_stride"] = s.frame_stride;
  return doc;
}

namespace {

ExperimentScenario read_scenario(ObjectReader& r) {
  const auto version = r.integer("version");
  if (version != kConfigVersion)
    throw ConfigError("version", "unsupported config version " + std::to_string(version));

  ExperimentScenario s;
  if (r.has("name")) s.name = r.string("name");

  double lower = -10.0, upper = 10.0;
  std::int64_t points = 401;
  if (r.has("grid")) {
    auto g = r.child("grid");
    lower = g.number_or("lower", lower);
    upper = g.number_or("upper", upper);
    points = g.integer_or("points", points);
    g.finish();
  }
  if (points < 3 || points > 1'000'000) throw ConfigError("grid.points", "must be between 3 and 1000000");
  try {
    s.grid = Grid(lower, upper, static_cast<int>(points));
  } catch (const ValidationError& e) {
    throw ConfigError("grid", e.what());
  }

  {
    auto p = r.child("planning");
    s.planning.tau = p.number("tau");
    s.planning.h = p.number("h");
    s.planning.c_memory = p.number("c_memory");
    s.planning.c_auditory = p.number("c_auditory");
    s.planning.c_response = p.number("c_response");
    s.planning.kernel = read_kernel(p.child("kernel"));
    auto sg = p.child("sigmoid");
    s.planning.sigmoid.beta = sg.number("beta");
    s.planning.sigmoid.alpha = sg.number("alpha");
    sg.finish();
    p.finish();
  }
  {
    auto m = r.child("memory");
    s.memory.tau_mem = m.number("tau_mem");
    s.memory.tau_decay = m.number("tau_decay");
    s.memory.threshold = m.number("threshold");
    s.memory.kernel = read_kernel(m.child("kernel"));
    m.finish();
  }
  {
    auto n = r.child("noise");
    s.noise.q = n.number("q");
    const auto seed = n.integer_or("seed", 0);
    if (seed < 0) throw ConfigError("noise.seed", "must be non-negative");
    s.noise.seed = static_cast<std::uint64_t>(seed);
    n.finish();
  }
  {
    auto in = r.child("inputs");
    s.response_input = read_input(in.child("response"));
    s.auditory_input = read_input(in.child("auditory"));
    s.seed_input = read_input(in.child("seed"));
    in.finish();
  }
  s.block_duration = r.number("block_duration");
  s.dt = r.number_or("dt", 0.5);
  const auto stride = r.integer_or("frame_stride", 4);
  if (stride < 1 || stride > 1'000'000) throw ConfigError("frame_stride", "must be a positive integer");
  s.frame_stride = static_cast<int>(stride);

  s.validate();
  return s;
}

}  // namespace

ExperimentScenario scenario_from_json(const json& doc) {
  ObjectReader r(doc, "");
  auto s = read_scenario(r);
  r.finish();
  return s;
}

ConfigDocument parse_config(std::string_view text) {
  const json doc = parse_json_text(text);
  ObjectReader r(doc, "");
  ConfigDocument out;
  out.scenario = read_scenario(r);
  if (r.has("sweep")) {
    auto sw = r.child("sweep");
    SweepSpec spec;
    spec.base = out.scenario;
    spec.parameter = sw.string("parameter");
    spec.values = sw.numbers("values");
    if (sw.has("parameter2")) {
      spec.parameter2 = sw.string("parameter2");
      spec.values2 = sw.numbers("values2");
    }
    if (sw.has("seeds")) {
      for (double v : sw.numbers("seeds")) {
        if (v < 0 || v != std::floor(v)) throw ConfigError("sweep.seeds", "seeds must be non-negative integers");
        spec.seeds.push_back(static_cast<std::uint64_t>(v));
      }
    }
    sw.finish();
    try {
      spec.validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ConfigError("sweep", e.what());
    }
    out.sweep = std::move(spec);
  }
  r.finish();
  return out;
}

std::string dump_config(const ExperimentScenario& scenario, const std::optional<SweepSpec>& sweep) {
  json doc = scenario_to_json(scenario);
  if (sweep) doc["sweep"] = sweep_section(*sweep);
  return doc.dump(2) + "\n";
}

std::string config_hash(const ExperimentScenario& scenario) {
  const std::string text = scenario_to_json(scenario).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string results_csv(const ExperimentResult& result) {
  std::string out = "block,peak_t,peak_x,peak_u,x_diff\n";
  for (const auto& t : result.trials) {
    out += std::string(to_string(t.block)) + "," + format_number(t.peak_t) + "," + format_number(t.peak_x) + "," +
           format_number(t.peak_u) + "," + format_number(result.x_diff) + "\n";
  }
  return out;
}

std::string results_json(const ExperimentResult& result, const ExperimentScenario& scenario,
                         const ArchiveMetadata& metadata, bool include_frames) {
  json doc;
  doc["format"] = "dnf-accommodation-result";
  doc["version"] = kConfigVersion;
  doc["metadata"] = metadata_json(metadata, scenario);
  doc["config"] = scenario_to_json(scenario);
  doc["blocks"] = json::array();
  for (const auto& t : result.trials) {
    doc["blocks"].push_back(
        json{{"block", to_string(t.block)}, {"peak_t", t.peak_t}, {"peak_x", t.peak_x}, {"peak_u", t.peak_u}});
  }
  doc["x_diff"] = result.x_diff;
  doc["final_memory"] = result.final_state.u_mem;
  if (include_frames) {
    json frames = json::object();
    frames["x"] = scenario.grid.points();
    for (const auto& t : result.trials)
      if (t.trajectory) frames[std::string(to_string(t.block))] = frames_json(*t.trajectory);
    doc["frames"] = std::move(frames);
  }
  return doc.dump(2) + "\n";
}

ResultArchive read_results_json(std::string_view text) {
  const json doc = parse_json_text(text);
  try {
    ResultArchive a;
    const auto& meta = doc.at("metadata");
    a.metadata.source = meta.at("source").get<std::string>();
    for (const auto& [k, v] : meta.at("overrides").items()) a.metadata.overrides[k] = v.get<std::string>();
    if (meta.contains("timestamp")) a.metadata.timestamp = meta.at("timestamp").get<std::string>();
    a.scenario = scenario_from_json(doc.at("config"));
    for (const auto& b : doc.at("blocks")) {
      const auto kind = parse_block_kind(b.at("block").get<std::string>());
      if (!kind) throw ConfigError("blocks", "unknown block name");
      a.blocks.push_back(BlockRecord{*kind, b.at("peak_t").get<double>(), b.at("peak_x").get<double>(),
                                     b.at("peak_u").get<double>()});
    }
    a.x_diff = doc.at("x_diff").get<double>();
    a.final_memory = doc.at("final_memory").get<Field>();
    return a;
  } catch (const json::exception& e) {
    throw ConfigError("", std::string("malformed result archive: ") + e.what());
  }
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = csv_field(result.parameter);
  if (result.parameter2) out += "," + csv_field(*result.parameter2);
  out += ",seed,status,baseline_peak_x,shadowing_peak_x,post_peak_x,x_diff,error\n";
  for (const auto& row : result.rows) {
    out += format_number(row.value);
    if (result.parameter2) out += "," + format_number(row.value2.value_or(0.0));
    out += "," + std::to_string(row.seed) + "," + (row.ok ? "ok" : "failed");
    if (row.ok) {
      out += "," + format_number(row.trial(BlockKind::baseline).peak_x) + "," +
             format_number(row.trial(BlockKind::shadowing).peak_x) + "," +
             format_number(row.trial(BlockKind::post).peak_x) + "," + format_number(row.x_diff) + ",";
    } else {
      out += ",,,,," + csv_field(row.error);
    }
    out += "\n";
  }
  return out;
}

std::string sweep_json(const SweepResult& result, const SweepSpec& spec, const ArchiveMetadata& metadata) {
  json doc;
  doc["format"] = "dnf-accommodation-sweep";
  doc["version"] = kConfigVersion;
  doc["metadata"] = metadata_json(metadata, spec.base);
  json config = scenario_to_json(spec.base);
  config["sweep"] = sweep_section(spec);
  doc["config"] = std::move(config);
  doc["rows"] = json::array();
  for (const auto& row : result.rows) {
    json r{{"value", row.value}};
    if (row.value2) r["value2"] = *row.value2;
    r["seed"] = row.seed;
    r["ok"] = row.ok;
    if (row.ok) {
      r["blocks"] = json::array();
      for (const auto& t : row.trials)
        r["blocks"].push_back(
            json{{"block", to_string(t.block)}, {"peak_t", t.peak_t}, {"peak_x", t.peak_x}, {"peak_u", t.peak_u}});
      r["x_diff"] = row.x_diff;
    } else {
      r["error"] = row.error;
    }
    doc["rows"].push_back(std::move(r));
  }
  doc["summary"] = json::array();
  for (const auto& s : result.summarize()) {
    json j{{"value", s.value}};
    if (s.value2) j["value2"] = *s.value2;
    j["completed"] = s.completed;
    j["mean_shadowing_peak_x"] = s.mean_shadowing_x;
    j["sd_shadowing_peak_x"] = s.sd_shadowing_x;
    j["mean_post_peak_x"] = s.mean_post_x;
    j["sd_post_peak_x"] = s.sd_post_x;
    j["mean_x_diff"] = s.mean_x_diff;
    doc["summary"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::string trajectory_csv(const Trajectory& trajectory, const Grid& grid, FieldLayer which) {
  if (trajectory.empty()) throw ValidationError("cannot export an empty trajectory");
  const auto& frames = which == FieldLayer::planning ? trajectory.u_frames : trajectory.u_mem_frames;
  std::string out = "t,x,value\n";
  const auto xs = grid.points();
  for (std::size_t f = 0; f < trajectory.size(); ++f) {
    if (frames[f].size() != xs.size()) throw ValidationError("trajectory frame does not match the grid");
    const std::string t = format_number(trajectory.times[f]);
    for (std::size_t j = 0; j < xs.size(); ++j)
      out += t + "," + format_number(xs[j]) + "," + format_number(frames[f][j]) + "\n";
  }
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!os) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace dnf
