#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qc/store/record.hpp"

namespace qc {

struct AppendResult {
  std::size_t added = 0;
  std::size_t duplicates = 0;
};

// Append-only archive laid out as <root>/<node_id>/<YYYY-MM-DD>.log, one
// encoded record per line, strictly increasing ts within each file.
//
// Appends are idempotent on (node_id, ts): an identical re-append is counted
// as a duplicate, a differing payload raises ErrorCode::conflict and the whole
// batch is rejected. Each partition has its own reader/writer lock; a batch
// holds every partition it touches for its duration, so readers never see a
// partially applied batch.
class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path root);
  ~RecordStore();

  RecordStore(const RecordStore&) = delete;
  RecordStore& operator=(const RecordStore&) = delete;

  const std::filesystem::path& root() const { return root_; }

  AppendResult append(std::span<const SampleRecord> records);

  // Records with ts in [t0, t1) for the listed nodes, sorted by (node_id, ts).
  // Unknown nodes contribute nothing.
  std::vector<SampleRecord> query(std::span<const std::string> node_ids, Timestamp t0, Timestamp t1) const;

  // Node directories present in the archive, sorted.
  std::vector<std::string> node_ids() const;

  // Earliest and latest stored ts for a node, if any.
  std::optional<std::pair<Timestamp, Timestamp>> extent(const std::string& node_id) const;

 private:
  struct PartitionKey {
    std::string node_id;
    std::string date;
    auto operator<=>(const PartitionKey&) const = default;
  };
  struct Partition;

  Partition& partition(const PartitionKey& key) const;
  void load(const PartitionKey& key, Partition& part) const;
  std::filesystem::path partition_path(const PartitionKey& key) const;
  std::vector<std::string> dates_for(const std::string& node_id) const;

  std::filesystem::path root_;
  mutable std::mutex registry_mu_;
  mutable std::map<PartitionKey, std::unique_ptr<Partition>> partitions_;
};

}  // namespace qc
