#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "qc/time.hpp"

namespace qc {

// Measured channels of a SampleRecord, in encoding order.
enum class Metric {
  temperature_c,
  humidity_pct,
  pressure_hpa,
  lpo_ratio_pct,
  dust_p001cf,
  noise_dbspl,
  lux_ch0,
  lux_ch1,
};

inline constexpr std::size_t kMetricCount = 8;
inline constexpr std::array<Metric, kMetricCount> kAllMetrics{
    Metric::temperature_c, Metric::humidity_pct, Metric::pressure_hpa, Metric::lpo_ratio_pct,
    Metric::dust_p001cf,   Metric::noise_dbspl,  Metric::lux_ch0,      Metric::lux_ch1};

std::string_view to_string(Metric metric);
std::optional<Metric> metric_from_string(std::string_view name);
// Throws ValidationError("metric") on an unknown name.
Metric parse_metric(std::string_view name);

struct QualityFlags {
  bool contention_loss = false;
  bool clipped = false;
  std::set<Metric> missing;  // channels with no reading; their values are NaN

  bool operator==(const QualityFlags&) const = default;
};

// One timestamped multi-sensor reading from one node. A missing channel holds
// NaN and is listed in flags.missing.
struct SampleRecord {
  std::string node_id;
  Timestamp ts{};
  double temperature_c = 0.0;
  double humidity_pct = 0.0;
  double pressure_hpa = 0.0;
  double lpo_ratio_pct = 0.0;
  double dust_p001cf = 0.0;
  double noise_dbspl = 0.0;
  double lux_ch0 = 0.0;
  double lux_ch1 = 0.0;
  QualityFlags flags;

  double value(Metric metric) const;
  double& value(Metric metric);
  bool has(Metric metric) const { return !std::isnan(value(metric)); }

  void mark_missing(Metric metric);

  // Field-for-field; NaN channels compare equal to NaN.
  bool operator==(const SampleRecord& other) const;

  // Same key (node_id, ts) and payload.
  bool same_payload(const SampleRecord& other) const { return *this == other; }
};

bool valid_node_id(std::string_view id);

// Throws ValidationError naming the first violated field.
void validate(const SampleRecord& record);

}  // namespace qc
