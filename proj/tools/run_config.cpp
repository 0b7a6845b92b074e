#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "qc/error.hpp"
#include "qc/node_sim/rng.hpp"
#include "qc/node_sim/simulate.hpp"

namespace qc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ValidationError(where + "." + key, "unknown key");
  }
}

double number(const json& j, const std::string& key, const std::string& where) {
  if (!j[key].is_number()) throw ValidationError(where + "." + key, "must be a number");
  return j[key].get<double>();
}

Timestamp timestamp(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) throw ValidationError(where + "." + key, "missing ISO-8601 string");
  try {
    return parse_iso8601(j[key].get<std::string>());
  } catch (const ParseError& e) {
    throw ValidationError(where + "." + key, e.detail());
  }
}

std::pair<Timestamp, Timestamp> window_from(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where, "must be {\"from\": ..., \"to\": ...}");
  reject_unknown(j, {"from", "to"}, where);
  return {timestamp(j, "from", where), timestamp(j, "to", where)};
}

HourWindow hour_window(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError(where, "must be [start_hour, end_hour]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

fs::path resolve(const fs::path& base, const std::string& text) {
  fs::path p(text);
  return p.is_absolute() ? p : base / p;
}

AnalysisParams analysis_from(const json& j) {
  const std::string where = "analysis";
  if (!j.is_object()) throw ValidationError(where, "must be an object");
  reject_unknown(j,
                 {"k", "quorum", "overlap_window_s", "merge_gap_s", "day_window", "evening_window",
                  "utc_offset_minutes", "histogram_bin_width", "stat", "train"},
                 where);
  AnalysisParams a;
  if (j.contains("k")) a.k = number(j, "k", where);
  if (j.contains("quorum")) a.quorum = number(j, "quorum", where);
  if (j.contains("overlap_window_s")) {
    a.overlap_window = Millis{std::llround(number(j, "overlap_window_s", where) * 1000.0)};
  }
  if (j.contains("merge_gap_s")) a.merge_gap = Millis{std::llround(number(j, "merge_gap_s", where) * 1000.0)};
  if (j.contains("day_window")) a.day_window = hour_window(j["day_window"], where + ".day_window");
  if (j.contains("evening_window")) a.evening_window = hour_window(j["evening_window"], where + ".evening_window");
  if (j.contains("utc_offset_minutes")) {
    a.utc_offset_minutes = static_cast<int>(std::lround(number(j, "utc_offset_minutes", where)));
  }
  if (j.contains("histogram_bin_width")) a.histogram_bin_width = number(j, "histogram_bin_width", where);
  if (j.contains("stat")) {
    const auto s = j["stat"].is_string() ? j["stat"].get<std::string>() : std::string{};
    if (s == "mean") {
      a.stat = HourlyStat::mean;
    } else if (s == "median") {
      a.stat = HourlyStat::median;
    } else {
      throw ValidationError(where + ".stat", "must be \"mean\" or \"median\"");
    }
  }
  if (j.contains("train")) a.train_window = window_from(j["train"], where + ".train");
  return a;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void RunConfig::validate() const {
  if (!(analysis.k > 0) || !std::isfinite(analysis.k)) throw ValidationError("analysis.k", "must be > 0");
  if (!(analysis.quorum > 0 && analysis.quorum <= 1)) throw ValidationError("analysis.quorum", "must be in (0, 1]");
  if (analysis.overlap_window < Millis{0}) throw ValidationError("analysis.overlap_window_s", "must be >= 0");
  if (analysis.merge_gap && *analysis.merge_gap < Millis{0}) {
    throw ValidationError("analysis.merge_gap_s", "must be >= 0");
  }
  if (!(analysis.histogram_bin_width > 0)) throw ValidationError("analysis.histogram_bin_width", "must be > 0");
  if (std::abs(analysis.utc_offset_minutes) > 18 * 60) {
    throw ValidationError("analysis.utc_offset_minutes", "must be within +/-18 h");
  }
  for (const auto* w : {&analysis.day_window, &analysis.evening_window}) {
    if (!(w->start_hour >= 0 && w->start_hour <= 24 && w->end_hour >= 0 && w->end_hour <= 24)) {
      throw ValidationError("analysis.day_window", "hours must lie in [0, 24]");
    }
  }
  if (window && window->second <= window->first) throw ValidationError("window", "from must precede to");
  if (gateway.port < 0 || gateway.port > 65535) throw ValidationError("gateway.port", "must be in [0, 65535]");
  std::set<std::string> ids;
  for (const auto& node : fleet) {
    node.validate();
    if (!ids.insert(node.node_id).second) throw ValidationError("fleet", "duplicate node '" + node.node_id + "'");
  }
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ValidationError("config", "must be a JSON object");
  reject_unknown(j, {"archive", "output", "scenario", "window", "seed", "fleet", "analysis", "gateway", "description"},
                 "config");
  RunConfig c;
  c.archive = base_dir / c.archive;
  c.output = base_dir / c.output;
  if (j.contains("archive")) c.archive = resolve(base_dir, j["archive"].get<std::string>());
  if (j.contains("output")) c.output = resolve(base_dir, j["output"].get<std::string>());
  if (j.contains("scenario")) {
    const auto& s = j["scenario"];
    if (s.is_string()) {
      c.scenario = load_scenario(resolve(base_dir, s.get<std::string>()));
    } else {
      c.scenario = scenario_from_json(s);
    }
  }
  if (j.contains("window")) c.window = window_from(j["window"], "window");
  if (j.contains("fleet")) {
    if (!j["fleet"].is_array()) throw ValidationError("fleet", "must be an array");
    for (const auto& node : j["fleet"]) c.fleet.push_back(node_config_from_json(node));
  }
  if (j.contains("analysis")) c.analysis = analysis_from(j["analysis"]);
  if (j.contains("gateway")) {
    const auto& g = j["gateway"];
    reject_unknown(g, {"host", "port"}, "gateway");
    if (g.contains("host")) c.gateway.host = g["host"].get<std::string>();
    if (g.contains("port")) c.gateway.port = g["port"].get<int>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ValidationError("seed", "must be a non-negative integer");
    apply_seed(c, j["seed"].get<std::uint64_t>());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::storage, "cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw ValidationError("config", e.what());
  }
  try {
    return run_config_from_json(j, path.parent_path());
  } catch (const json::exception& e) {
    throw ValidationError("config", e.what());
  }
}

void apply_seed(RunConfig& config, std::uint64_t seed) {
  config.seed = seed;
  if (config.scenario) config.scenario->seed = seed;
  for (auto& node : config.fleet) node.rng_seed = hash_key(seed, fnv1a(node.node_id), 0, 0);
}

}  // namespace qc::cli
