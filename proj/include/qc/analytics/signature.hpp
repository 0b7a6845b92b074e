#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qc/store/record.hpp"

namespace qc {

inline constexpr std::size_t kHoursPerWeek = 168;

struct SignatureBucket {
  double median = 0.0;
  double mad = 0.0;
  std::size_t n = 0;            // training samples
  std::size_t occurrences = 0;  // distinct calendar hours contributing
  bool low_confidence = true;   // fewer than two occurrences

  bool present() const { return n > 0; }
};

// The "neighborhood pulse" of one node and metric: a robust baseline per
// hour-of-week (0 = Monday 00:00 UTC).
struct Signature {
  std::string node_id;
  Metric metric = Metric::dust_p001cf;
  Timestamp train_start{};
  Timestamp train_end{};
  std::array<SignatureBucket, kHoursPerWeek> buckets{};

  std::size_t populated() const;
};

// Uses records inside `window` when given (and records the window), otherwise
// every record; the window then spans first ts to last ts + 1 ms. Throws
// empty-signature when no usable sample remains.
Signature build_signature(std::span<const SampleRecord> records, Metric metric,
                          std::optional<std::pair<Timestamp, Timestamp>> window = std::nullopt);

enum class Direction { high, low };

std::string_view to_string(Direction d);

struct AnomalyEvent {
  std::string node_id;
  Metric metric = Metric::dust_p001cf;
  Timestamp start{};
  Timestamp end{};
  double peak_z = 0.0;
  double peak_value = 0.0;
  Timestamp peak_ts{};
  Direction direction = Direction::high;
  std::size_t samples = 0;  // flagged samples merged into the event
};

struct DetectorOptions {
  double k = 3.5;
  // Flagged samples closer than this merge; defaults to twice the sampling
  // interval inferred from the records.
  std::optional<Millis> merge_gap;
};

struct DetectionReport {
  std::vector<AnomalyEvent> events;
  std::size_t evaluated = 0;
  std::size_t skipped_absent_bucket = 0;
  std::size_t skipped_missing_value = 0;
  std::size_t low_confidence_samples = 0;
};

// Robust z = (x - median_b) / max(1.4826 * mad_b, 1e-9 * max(1, |median_b|)).
double robust_z(double value, const SignatureBucket& bucket);

// Flags |z| > k; runs of same-direction flags separated by at most merge_gap
// become one event [first flagged ts, last flagged ts + interval).
DetectionReport detect_anomalies(std::span<const SampleRecord> records, const Signature& signature,
                                 const DetectorOptions& options = {});

}  // namespace qc
