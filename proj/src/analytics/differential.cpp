#include "qc/analytics/differential.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qc/analytics/stats.hpp"
#include "qc/error.hpp"

namespace qc {

namespace {

std::optional<BucketStats> summarize(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  BucketStats s;
  s.n = values.size();
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  s.median = stats::median_inplace(values);
  return s;
}

}  // namespace

bool HourWindow::contains(double hour) const {
  if (start_hour <= end_hour) return hour >= start_hour && hour < end_hour;
  return hour >= start_hour || hour < end_hour;
}

DifferentialResult differential_distribution(const HourlySeries& a, const HourlySeries& b,
                                             const DifferentialOptions& options) {
  if (!(options.bin_width > 0.0)) throw Error(ErrorCode::invalid_parameter, "histogram bin width must be > 0");
  std::map<Timestamp, double> b_by_hour;
  for (const auto& p : b.points) b_by_hour.emplace(p.hour_start, p.value);

  DifferentialResult res;
  res.bin_width = options.bin_width;
  std::vector<double> day;
  std::vector<double> evening;
  for (const auto& p : a.points) {
    auto it = b_by_hour.find(p.hour_start);
    if (it == b_by_hour.end()) continue;
    const double d = p.value - it->second;
    res.diffs.push_back({p.hour_start, d});
    const double h = local_hour(p.hour_start, options.utc_offset_minutes);
    if (options.day.contains(h)) day.push_back(d);
    if (options.evening.contains(h)) evening.push_back(d);
  }
  if (res.diffs.empty()) throw Error(ErrorCode::no_overlap, "the two series share no hour");

  res.day = summarize(std::move(day));
  res.evening = summarize(std::move(evening));

  std::map<long long, std::size_t> bins;
  for (const auto& d : res.diffs) ++bins[static_cast<long long>(std::floor(d.diff / options.bin_width))];
  const long long first = bins.begin()->first;
  const long long last = bins.rbegin()->first;
  if (last - first > 1'000'000) throw Error(ErrorCode::invalid_parameter, "histogram would need over 1e6 bins");
  for (long long i = first; i <= last; ++i) {
    auto it = bins.find(i);
    res.histogram.push_back({static_cast<double>(i) * options.bin_width, static_cast<double>(i + 1) * options.bin_width,
                             it == bins.end() ? 0 : it->second});
  }
  return res;
}

DifferentialResult differential_distribution(std::span<const SampleRecord> records_a,
                                             std::span<const SampleRecord> records_b, Metric metric,
                                             const DifferentialOptions& options) {
  return differential_distribution(hourly_aggregate(records_a, metric, options.stat),
                                   hourly_aggregate(records_b, metric, options.stat), options);
}

}  // namespace qc
