#include "qc/store/record_store.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "qc/error.hpp"
#include "qc/store/codec.hpp"

namespace qc {

namespace fs = std::filesystem;

struct RecordStore::Partition {
  std::shared_mutex mu;
  bool loaded = false;
  std::map<Timestamp, SampleRecord> rows;
};

RecordStore::RecordStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec || !fs::is_directory(root_)) {
    throw Error(ErrorCode::storage, "cannot create archive root " + root_.string() + ": " + ec.message());
  }
}

RecordStore::~RecordStore() = default;

fs::path RecordStore::partition_path(const PartitionKey& key) const {
  return root_ / key.node_id / (key.date + ".log");
}

RecordStore::Partition& RecordStore::partition(const PartitionKey& key) const {
  std::lock_guard lock(registry_mu_);
  auto& slot = partitions_[key];
  if (!slot) slot = std::make_unique<Partition>();
  return *slot;
}

void RecordStore::load(const PartitionKey& key, Partition& part) const {
  if (part.loaded) return;
  const auto path = partition_path(key);
  if (fs::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::storage, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::vector<SampleRecord> records;
    try {
      records = decode(buf.str());
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ": " + e.what());
    }
    for (auto& r : records) {
      if (r.node_id != key.node_id || format_date(r.ts) != key.date) {
        throw Error(ErrorCode::validation, path.string() + ": record " + format_iso8601(r.ts) + " of node '" +
                                               r.node_id + "' does not belong to this partition");
      }
      if (!part.rows.empty() && part.rows.rbegin()->first >= r.ts) {
        throw Error(ErrorCode::validation, path.string() + ": ts not strictly increasing at " + format_iso8601(r.ts));
      }
      const auto ts = r.ts;
      part.rows.emplace_hint(part.rows.end(), ts, std::move(r));
    }
  }
  part.loaded = true;
}

AppendResult RecordStore::append(std::span<const SampleRecord> records) {
  for (const auto& r : records) validate(r);

  std::map<PartitionKey, std::vector<const SampleRecord*>> groups;
  for (const auto& r : records) groups[PartitionKey{r.node_id, format_date(r.ts)}].push_back(&r);

  struct Pending {
    const PartitionKey* key;
    Partition* part;
    std::map<Timestamp, const SampleRecord*> fresh;
  };
  std::vector<Pending> pending;
  std::vector<std::unique_lock<std::shared_mutex>> locks;
  pending.reserve(groups.size());
  locks.reserve(groups.size());
  // groups is ordered, so locks are always taken in key order.
  for (auto& [key, group] : groups) {
    auto& part = partition(key);
    locks.emplace_back(part.mu);
    load(key, part);
    pending.push_back(Pending{&key, &part, {}});
  }

  AppendResult result;
  std::size_t gi = 0;
  for (auto& [key, group] : groups) {
    auto& p = pending[gi++];
    for (const auto* r : group) {
      const SampleRecord* existing = nullptr;
      if (auto it = p.part->rows.find(r->ts); it != p.part->rows.end()) {
        existing = &it->second;
      } else if (auto jt = p.fresh.find(r->ts); jt != p.fresh.end()) {
        existing = jt->second;
      }
      if (existing) {
        if (!existing->same_payload(*r)) {
          throw Error(ErrorCode::conflict,
                      "record (" + r->node_id + ", " + format_iso8601(r->ts) + ") already stored with different payload");
        }
        ++result.duplicates;
      } else {
        p.fresh.emplace(r->ts, r);
      }
    }
  }

  for (auto& p : pending) {
    if (p.fresh.empty()) continue;
    const auto path = partition_path(*p.key);
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::storage, "cannot create " + path.parent_path().string() + ": " + ec.message());

    const bool in_order = p.part->rows.empty() || p.fresh.begin()->first > p.part->rows.rbegin()->first;
    if (in_order) {
      std::string bytes;
      for (const auto& [ts, r] : p.fresh) {
        bytes += encode_line(*r);
        bytes += '\n';
      }
      std::ofstream out(path, std::ios::binary | std::ios::app);
      out << bytes;
      out.flush();
      if (!out) throw Error(ErrorCode::storage, "write failed: " + path.string());
      for (const auto& [ts, r] : p.fresh) p.part->rows.emplace_hint(p.part->rows.end(), ts, *r);
    } else {
      auto merged = p.part->rows;
      for (const auto& [ts, r] : p.fresh) merged.emplace(ts, *r);
      std::string bytes;
      for (const auto& [ts, r] : merged) {
        bytes += encode_line(r);
        bytes += '\n';
      }
      auto tmp = path;
      tmp += ".tmp";
      {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << bytes;
        out.flush();
        if (!out) throw Error(ErrorCode::storage, "write failed: " + tmp.string());
      }
      fs::rename(tmp, path, ec);
      if (ec) throw Error(ErrorCode::storage, "rename failed: " + path.string() + ": " + ec.message());
      p.part->rows = std::move(merged);
    }
    result.added += p.fresh.size();
  }
  return result;
}

std::vector<std::string> RecordStore::dates_for(const std::string& node_id) const {
  std::set<std::string> dates;
  if (!valid_node_id(node_id)) return {};
  const auto dir = root_ / node_id;
  std::error_code ec;
  if (fs::is_directory(dir, ec)) {
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
      const auto name = entry.path().filename().string();
      if (entry.is_regular_file() && name.size() == 14 && name.ends_with(".log")) dates.insert(name.substr(0, 10));
    }
  }
  return {dates.begin(), dates.end()};
}

std::vector<SampleRecord> RecordStore::query(std::span<const std::string> node_ids, Timestamp t0,
                                             Timestamp t1) const {
  if (t1 <= t0) throw Error(ErrorCode::invalid_range, "query window is empty: to <= from");
  std::set<std::string> nodes(node_ids.begin(), node_ids.end());
  const auto first_date = format_date(t0);
  const auto last_date = format_date(t1 - Millis{1});

  std::vector<SampleRecord> out;
  for (const auto& node : nodes) {
    for (const auto& date : dates_for(node)) {
      if (date < first_date || date > last_date) continue;
      const PartitionKey key{node, date};
      auto& part = partition(key);
      auto collect = [&] {
        auto it = part.rows.lower_bound(t0);
        const auto end = part.rows.lower_bound(t1);
        for (; it != end; ++it) out.push_back(it->second);
      };
      {
        std::shared_lock lock(part.mu);
        if (part.loaded) {
          collect();
          continue;
        }
      }
      std::unique_lock lock(part.mu);
      load(key, part);
      collect();
    }
  }
  return out;
}

std::vector<std::string> RecordStore::node_ids() const {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_, ec)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && valid_node_id(name)) ids.push_back(name);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::optional<std::pair<Timestamp, Timestamp>> RecordStore::extent(const std::string& node_id) const {
  const auto dates = dates_for(node_id);
  std::optional<Timestamp> first, last;
  for (const auto& date : dates) {
    const PartitionKey key{node_id, date};
    auto& part = partition(key);
    std::unique_lock lock(part.mu);
    load(key, part);
    if (part.rows.empty()) continue;
    if (!first) first = part.rows.begin()->first;
    last = part.rows.rbegin()->first;
  }
  if (!first) return std::nullopt;
  return std::pair{*first, *last};
}

}  // namespace qc
