#include "qc/gateway/gateway.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <set>

#include "qc/error.hpp"

namespace qc {

namespace fs = std::filesystem;

namespace {

double number_field(const nlohmann::json& j, const char* key, double fallback, bool required) {
  if (!j.contains(key)) {
    if (required) throw ValidationError(key, "missing");
    return fallback;
  }
  if (!j[key].is_number()) throw ValidationError(key, "must be a number");
  return j[key].get<double>();
}

}  // namespace

nlohmann::json registration_to_json(const NodeRegistration& reg) {
  nlohmann::json j{{"node_id", reg.node_id},
                   {"lat", reg.location.lat},
                   {"lon", reg.location.lon},
                   {"elevation_m", reg.location.elevation_m},
                   {"placement", std::string(to_string(reg.placement))},
                   {"registered_at", format_iso8601(reg.registered_at)}};
  if (reg.team_id) j["team_id"] = *reg.team_id;
  return j;
}

NodeRegistration registration_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("registration", "must be a JSON object");
  static const std::set<std::string> known{"node_id", "lat", "lon", "elevation_m", "placement", "registered_at", "team_id"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ValidationError(key, "unknown field");
  }
  NodeRegistration reg;
  if (!j.contains("node_id") || !j["node_id"].is_string()) throw ValidationError("node_id", "missing or not a string");
  reg.node_id = j["node_id"].get<std::string>();
  reg.location.lat = number_field(j, "lat", 0.0, true);
  reg.location.lon = number_field(j, "lon", 0.0, true);
  reg.location.elevation_m = number_field(j, "elevation_m", 0.0, false);
  if (j.contains("placement")) {
    if (!j["placement"].is_string()) throw ValidationError("placement", "must be a string");
    reg.placement = parse_placement(j["placement"].get<std::string>());
  }
  if (j.contains("registered_at")) {
    if (!j["registered_at"].is_string()) throw ValidationError("registered_at", "must be a string");
    try {
      reg.registered_at = parse_iso8601(j["registered_at"].get<std::string>());
    } catch (const ParseError& e) {
      throw ValidationError("registered_at", e.detail());
    }
  }
  if (j.contains("team_id")) {
    if (!j["team_id"].is_string()) throw ValidationError("team_id", "must be a string");
    reg.team_id = j["team_id"].get<std::string>();
  }
  return reg;
}

nlohmann::json comparison_to_json(const ComparisonResult& r) {
  nlohmann::json j{{"node_id", r.node_id},
                   {"metric", std::string(to_string(r.metric))},
                   {"from", format_iso8601(r.t0)},
                   {"to", format_iso8601(r.t1)},
                   {"node_mean", r.node_mean},
                   {"node_count", r.node_count},
                   {"neighborhood_count", r.neighborhood_count},
                   {"neighborhood_nodes", r.neighborhood_nodes},
                   {"outcome", r.lone_node() ? "lone-node" : "ok"}};
  j["neighborhood_mean"] = r.neighborhood_mean ? nlohmann::json(*r.neighborhood_mean) : nlohmann::json(nullptr);
  j["ratio"] = r.ratio ? nlohmann::json(*r.ratio) : nlohmann::json(nullptr);
  return j;
}

ComparisonResult comparison_from_json(const nlohmann::json& j) {
  ComparisonResult r;
  r.node_id = j.at("node_id").get<std::string>();
  r.metric = parse_metric(j.at("metric").get<std::string>());
  r.t0 = parse_iso8601(j.at("from").get<std::string>());
  r.t1 = parse_iso8601(j.at("to").get<std::string>());
  r.node_mean = j.at("node_mean").get<double>();
  r.node_count = j.at("node_count").get<std::size_t>();
  r.neighborhood_count = j.at("neighborhood_count").get<std::size_t>();
  r.neighborhood_nodes = j.at("neighborhood_nodes").get<std::vector<std::string>>();
  if (!j.at("neighborhood_mean").is_null()) r.neighborhood_mean = j["neighborhood_mean"].get<double>();
  if (!j.at("ratio").is_null()) r.ratio = j["ratio"].get<double>();
  return r;
}

Gateway::Gateway(fs::path root) : store_(root), registry_path_(store_.root() / ".registry.json") {
  std::error_code ec;
  if (!fs::exists(registry_path_, ec)) return;
  std::ifstream in(registry_path_);
  if (!in) throw Error(ErrorCode::storage, "cannot read " + registry_path_.string());
  nlohmann::json doc;
  try {
    in >> doc;
    for (const auto& entry : doc.at("nodes")) {
      auto reg = registration_from_json(entry);
      registry_.emplace(reg.node_id, std::move(reg));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::storage, "corrupt registry " + registry_path_.string() + ": " + e.what());
  }
}

void Gateway::save_registry() const {
  nlohmann::json doc{{"nodes", nlohmann::json::array()}};
  for (const auto& [_, reg] : registry_) doc["nodes"].push_back(registration_to_json(reg));
  const auto tmp = registry_path_.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << doc.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::storage, "cannot write " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, registry_path_, ec);
  if (ec) throw Error(ErrorCode::storage, "cannot replace " + registry_path_.string() + ": " + ec.message());
}

NodeRegistration Gateway::register_node(NodeRegistration reg) {
  if (!valid_node_id(reg.node_id)) {
    throw ValidationError("node_id", "must be 1-64 characters of [A-Za-z0-9._-] not starting with '.'");
  }
  const auto& loc = reg.location;
  if (!(loc.lat >= -90 && loc.lat <= 90 && loc.lon >= -180 && loc.lon <= 180) || !std::isfinite(loc.elevation_m)) {
    throw ValidationError("location", "latitude/longitude out of range");
  }
  if (reg.team_id && reg.team_id->empty()) throw ValidationError("team_id", "must not be empty");
  if (reg.registered_at == Timestamp{}) {
    reg.registered_at = std::chrono::time_point_cast<Millis>(std::chrono::system_clock::now());
  }
  std::unique_lock lock(mu_);
  if (registry_.contains(reg.node_id)) throw Error(ErrorCode::conflict, "node '" + reg.node_id + "' already registered");
  registry_.emplace(reg.node_id, reg);
  try {
    save_registry();
  } catch (...) {
    registry_.erase(reg.node_id);
    throw;
  }
  return reg;
}

IngestResult Gateway::ingest_batch(const std::string& node_id, std::span<const SampleRecord> records) {
  if (records.size() > kMaxBatch) {
    throw ValidationError("records", "batch of " + std::to_string(records.size()) + " exceeds the limit of " +
                                         std::to_string(kMaxBatch));
  }
  {
    std::shared_lock lock(mu_);
    if (!registry_.contains(node_id)) throw Error(ErrorCode::unknown_node, "node '" + node_id + "' is not registered");
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].node_id != node_id) {
      throw ValidationError("node_id", "record " + std::to_string(i) + " carries '" + records[i].node_id +
                                           "', batch is for '" + node_id + "'");
    }
  }
  const auto appended = store_.append(records);
  return {appended.added, appended.duplicates};
}

std::vector<SampleRecord> Gateway::query(std::span<const std::string> node_ids, Timestamp t0, Timestamp t1) const {
  return store_.query(node_ids, t0, t1);
}

ComparisonResult Gateway::compare(const std::string& node_id, Metric metric, Timestamp t0, Timestamp t1) const {
  if (t1 <= t0) throw Error(ErrorCode::invalid_range, "compare window needs from < to");
  std::vector<std::string> others;
  {
    std::shared_lock lock(mu_);
    if (!registry_.contains(node_id)) throw Error(ErrorCode::unknown_node, "node '" + node_id + "' is not registered");
    for (const auto& [id, _] : registry_) {
      if (id != node_id) others.push_back(id);
    }
  }

  ComparisonResult result;
  result.node_id = node_id;
  result.metric = metric;
  result.t0 = t0;
  result.t1 = t1;

  const std::string self[] = {node_id};
  double sum = 0.0;
  for (const auto& r : store_.query(self, t0, t1)) {
    if (!r.has(metric)) continue;
    sum += r.value(metric);
    ++result.node_count;
  }
  if (result.node_count == 0) {
    throw Error(ErrorCode::no_data, "no " + std::string(to_string(metric)) + " samples for '" + node_id + "' in window");
  }
  result.node_mean = sum / static_cast<double>(result.node_count);

  double other_sum = 0.0;
  for (const auto& r : store_.query(others, t0, t1)) {
    if (!r.has(metric)) continue;
    other_sum += r.value(metric);
    ++result.neighborhood_count;
    if (result.neighborhood_nodes.empty() || result.neighborhood_nodes.back() != r.node_id) {
      result.neighborhood_nodes.push_back(r.node_id);
    }
  }
  if (result.neighborhood_count > 0) {
    result.neighborhood_mean = other_sum / static_cast<double>(result.neighborhood_count);
    if (*result.neighborhood_mean != 0.0) result.ratio = result.node_mean / *result.neighborhood_mean;
  }
  return result;
}

std::vector<NodeRegistration> Gateway::nodes() const {
  std::shared_lock lock(mu_);
  std::vector<NodeRegistration> out;
  for (const auto& [_, reg] : registry_) out.push_back(reg);
  return out;
}

std::optional<NodeRegistration> Gateway::registration(const std::string& node_id) const {
  std::shared_lock lock(mu_);
  auto it = registry_.find(node_id);
  if (it == registry_.end()) return std::nullopt;
  return it->second;
}

}  // namespace qc
