#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qc/store/record.hpp"

namespace qc {

enum class HourlyStat { mean, median };

struct HourlyPoint {
  Timestamp hour_start{};
  double value = 0.0;
  std::size_t n = 0;
};

// One node's metric bucketed into UTC calendar hours [h, h + 1h). Hours with
// no samples are absent.
struct HourlySeries {
  std::string node_id;
  Metric metric = Metric::dust_p001cf;
  std::vector<HourlyPoint> points;
};

// Records must belong to a single node (ValidationError("node_id") otherwise).
// Missing-channel samples are ignored. Empty input yields an empty series.
HourlySeries hourly_aggregate(std::span<const SampleRecord> records, Metric metric,
                              HourlyStat stat = HourlyStat::mean);

}  // namespace qc
