#include "qc/store/record_json.hpp"

#include <cmath>

#include "qc/error.hpp"

namespace qc {

namespace {

constexpr std::string_view kMissingPrefix = "missing_channel:";

}  // namespace

nlohmann::json record_to_json(const SampleRecord& r) {
  nlohmann::json j;
  j["node_id"] = r.node_id;
  j["ts"] = format_iso8601(r.ts);
  for (auto m : kAllMetrics) {
    const auto key = std::string(to_string(m));
    if (r.has(m)) {
      j[key] = r.value(m);
    } else {
      j[key] = nullptr;
    }
  }
  auto flags = nlohmann::json::array();
  if (r.flags.clipped) flags.push_back("clipped");
  if (r.flags.contention_loss) flags.push_back("contention_loss");
  for (auto m : r.flags.missing) flags.push_back(std::string(kMissingPrefix) + std::string(to_string(m)));
  j["flags"] = std::move(flags);
  return j;
}

SampleRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("record", "must be a JSON object");
  SampleRecord r;
  if (!j.contains("node_id") || !j["node_id"].is_string()) throw ValidationError("node_id", "missing or not a string");
  r.node_id = j["node_id"].get<std::string>();
  if (!j.contains("ts") || !j["ts"].is_string()) throw ValidationError("ts", "missing or not a string");
  try {
    r.ts = parse_iso8601(j["ts"].get<std::string>());
  } catch (const Error& e) {
    throw ValidationError("ts", e.what());
  }
  if (j.contains("flags")) {
    const auto& flags = j["flags"];
    if (!flags.is_array()) throw ValidationError("flags", "must be an array");
    for (const auto& f : flags) {
      if (!f.is_string()) throw ValidationError("flags", "entries must be strings");
      const auto token = f.get<std::string>();
      if (token == "clipped") {
        r.flags.clipped = true;
      } else if (token == "contention_loss") {
        r.flags.contention_loss = true;
      } else if (std::string_view(token).starts_with(kMissingPrefix)) {
        auto metric = metric_from_string(std::string_view(token).substr(kMissingPrefix.size()));
        if (!metric) throw ValidationError("flags", "unknown channel in '" + token + "'");
        r.flags.missing.insert(*metric);
      } else {
        throw ValidationError("flags", "unknown flag '" + token + "'");
      }
    }
  }
  for (auto m : kAllMetrics) {
    const auto key = std::string(to_string(m));
    if (!j.contains(key) || j[key].is_null()) {
      r.value(m) = std::nan("");
      if (!r.flags.missing.contains(m)) throw ValidationError(key, "missing value without missing_channel flag");
    } else if (j[key].is_number()) {
      r.value(m) = j[key].get<double>();
    } else {
      throw ValidationError(key, "must be a number or null");
    }
  }
  validate(r);
  return r;
}

}  // namespace qc
