#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qc/analytics/hourly.hpp"

namespace qc {

// Local-time hour windows [start, end); end < start wraps past midnight.
struct HourWindow {
  double start_hour = 0.0;
  double end_hour = 0.0;

  bool contains(double hour) const;
};

struct DifferentialOptions {
  HourWindow day{8.0, 18.0};
  HourWindow evening{20.0, 6.0};
  int utc_offset_minutes = 0;
  double bin_width = 1.0;
  HourlyStat stat = HourlyStat::mean;
};

struct HourlyDiff {
  Timestamp hour_start{};
  double diff = 0.0;
};

struct BucketStats {
  std::size_t n = 0;
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;
};

// Bin i covers [lo, lo + width); bins are contiguous from the lowest to the
// highest populated one, aligned to multiples of the width.
struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

struct DifferentialResult {
  std::vector<HourlyDiff> diffs;
  std::optional<BucketStats> day;
  std::optional<BucketStats> evening;
  std::vector<HistogramBin> histogram;
  double bin_width = 1.0;
};

// diff_h = A_h - B_h over the hours both series share. Throws no-overlap when
// they share none.
DifferentialResult differential_distribution(const HourlySeries& a, const HourlySeries& b,
                                             const DifferentialOptions& options = {});

DifferentialResult differential_distribution(std::span<const SampleRecord> records_a,
                                             std::span<const SampleRecord> records_b, Metric metric,
                                             const DifferentialOptions& options = {});

}  // namespace qc
