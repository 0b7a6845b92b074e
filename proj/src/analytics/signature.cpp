#include "qc/analytics/signature.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qc/analytics/stats.hpp"
#include "qc/error.hpp"

namespace qc {

namespace {

void require_single_node(std::span<const SampleRecord> records, const std::string& node) {
  for (const auto& r : records) {
    if (r.node_id != node) {
      throw ValidationError("node_id", "expected records of node '" + node + "', got '" + r.node_id + "'");
    }
  }
}

Millis infer_interval(std::span<const SampleRecord> records) {
  std::optional<Millis> best;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto gap = records[i].ts - records[i - 1].ts;
    if (gap.count() > 0 && (!best || gap < *best)) best = gap;
  }
  return best.value_or(Millis{1});
}

}  // namespace

std::size_t Signature::populated() const {
  return static_cast<std::size_t>(std::count_if(buckets.begin(), buckets.end(), [](const auto& b) { return b.present(); }));
}

std::string_view to_string(Direction d) { return d == Direction::high ? "high" : "low"; }

Signature build_signature(std::span<const SampleRecord> records, Metric metric,
                          std::optional<std::pair<Timestamp, Timestamp>> window) {
  if (window && window->second <= window->first) throw Error(ErrorCode::invalid_range, "training window is empty");
  std::array<std::vector<double>, kHoursPerWeek> samples;
  std::array<std::set<Timestamp>, kHoursPerWeek> hours;
  std::optional<Timestamp> first, last;
  std::string node;
  for (const auto& r : records) {
    if (window && (r.ts < window->first || r.ts >= window->second)) continue;
    if (!r.has(metric)) continue;
    if (node.empty()) node = r.node_id;
    if (r.node_id != node) throw ValidationError("node_id", "signature expects one node");
    const auto b = static_cast<std::size_t>(hour_of_week(r.ts));
    samples[b].push_back(r.value(metric));
    hours[b].insert(floor_hour(r.ts));
    if (!first || r.ts < *first) first = r.ts;
    if (!last || r.ts > *last) last = r.ts;
  }
  if (!first) throw Error(ErrorCode::empty_signature, "no training samples for " + std::string(to_string(metric)));

  Signature sig;
  sig.node_id = node;
  sig.metric = metric;
  sig.train_start = window ? window->first : *first;
  sig.train_end = window ? window->second : *last + Millis{1};
  for (std::size_t b = 0; b < kHoursPerWeek; ++b) {
    auto& values = samples[b];
    if (values.empty()) continue;
    auto& bucket = sig.buckets[b];
    bucket.n = values.size();
    bucket.median = stats::median_inplace(values);
    bucket.mad = stats::mad(values, bucket.median);
    bucket.occurrences = hours[b].size();
    bucket.low_confidence = bucket.occurrences < 2;
  }
  return sig;
}

double robust_z(double value, const SignatureBucket& bucket) {
  const double epsilon = 1e-9 * std::max(1.0, std::abs(bucket.median));
  const double scale = std::max(stats::kMadToSigma * bucket.mad, epsilon);
  return (value - bucket.median) / scale;
}

DetectionReport detect_anomalies(std::span<const SampleRecord> records, const Signature& signature,
                                 const DetectorOptions& options) {
  if (!(options.k > 0.0)) throw Error(ErrorCode::invalid_parameter, "k must be > 0");
  DetectionReport report;
  if (records.empty()) return report;
  require_single_node(records, signature.node_id);
  if (!std::is_sorted(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.ts < b.ts; })) {
    throw ValidationError("ts", "records must be sorted by time");
  }
  const Millis interval = infer_interval(records);
  const Millis merge_gap = options.merge_gap.value_or(interval * 2);

  AnomalyEvent current;
  bool open = false;
  Timestamp last_flag{};
  auto close = [&] {
    if (!open) return;
    current.end = last_flag + interval;
    report.events.push_back(current);
    open = false;
  };

  for (const auto& r : records) {
    if (!r.has(signature.metric)) {
      ++report.skipped_missing_value;
      continue;
    }
    const auto& bucket = signature.buckets[static_cast<std::size_t>(hour_of_week(r.ts))];
    if (!bucket.present()) {
      ++report.skipped_absent_bucket;
      continue;
    }
    ++report.evaluated;
    if (bucket.low_confidence) ++report.low_confidence_samples;
    const double x = r.value(signature.metric);
    const double z = robust_z(x, bucket);
    if (!(std::abs(z) > options.k)) continue;

    const Direction dir = z > 0 ? Direction::high : Direction::low;
    if (open && (current.direction != dir || r.ts - last_flag > merge_gap)) close();
    if (!open) {
      current = AnomalyEvent{signature.node_id, signature.metric, r.ts, r.ts, z, x, r.ts, dir, 0};
      open = true;
    }
    ++current.samples;
    if (std::abs(z) > std::abs(current.peak_z)) {
      current.peak_z = z;
      current.peak_value = x;
      current.peak_ts = r.ts;
    }
    last_flag = r.ts;
  }
  close();
  return report;
}

}  // namespace qc
