#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qc/node_sim/sensors.hpp"
#include "qc/store/record.hpp"
#include "qc/store/record_store.hpp"

namespace qc {

struct NodeRegistration {
  std::string node_id;
  GeoPoint location;
  Placement placement = Placement::ground;
  Timestamp registered_at{};
  std::optional<std::string> team_id;  // set for field-kit devices
};

nlohmann::json registration_to_json(const NodeRegistration& reg);
// registered_at is optional in the input and left at the epoch when absent.
NodeRegistration registration_from_json(const nlohmann::json& j);

struct IngestResult {
  std::size_t accepted = 0;
  std::size_t duplicates = 0;
};

struct ComparisonResult {
  std::string node_id;
  Metric metric = Metric::dust_p001cf;
  Timestamp t0{};
  Timestamp t1{};
  double node_mean = 0.0;
  std::optional<double> neighborhood_mean;  // empty for a lone node
  std::optional<double> ratio;              // empty unless neighborhood_mean != 0
  std::size_t node_count = 0;
  std::size_t neighborhood_count = 0;
  std::vector<std::string> neighborhood_nodes;  // other nodes contributing samples

  bool lone_node() const { return !neighborhood_mean.has_value(); }
};

nlohmann::json comparison_to_json(const ComparisonResult& result);
ComparisonResult comparison_from_json(const nlohmann::json& j);

// Registration, ingestion and comparison over one archive. The registry lives
// next to the partitions in <root>/.registry.json.
class Gateway {
 public:
  static constexpr std::size_t kMaxBatch = 10'000;

  explicit Gateway(std::filesystem::path root);

  // Fills registered_at with the current time when it is unset. Throws
  // ValidationError on a bad id or location, conflict on a repeated id.
  NodeRegistration register_node(NodeRegistration reg);

  // Throws unknown-node, ValidationError("node_id") for foreign records,
  // ValidationError("records") beyond kMaxBatch, and conflict from the store.
  IngestResult ingest_batch(const std::string& node_id, std::span<const SampleRecord> records);

  std::vector<SampleRecord> query(std::span<const std::string> node_ids, Timestamp t0, Timestamp t1) const;

  // Pooled means over raw records in [t0, t1). Samples missing the metric
  // are not counted. Throws unknown-node, invalid-range, and no-data when the
  // node has no samples. A node whose fleet contributes no other samples gets
  // a lone-node result rather than an exception.
  ComparisonResult compare(const std::string& node_id, Metric metric, Timestamp t0, Timestamp t1) const;

  std::vector<NodeRegistration> nodes() const;
  std::optional<NodeRegistration> registration(const std::string& node_id) const;

  RecordStore& store() { return store_; }

 private:
  void save_registry() const;

  RecordStore store_;
  std::filesystem::path registry_path_;
  mutable std::shared_mutex mu_;
  std::map<std::string, NodeRegistration> registry_;
};

}  // namespace qc
