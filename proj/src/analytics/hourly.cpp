#include "qc/analytics/hourly.hpp"

#include <map>

#include "qc/analytics/stats.hpp"
#include "qc/error.hpp"

namespace qc {

HourlySeries hourly_aggregate(std::span<const SampleRecord> records, Metric metric, HourlyStat stat) {
  HourlySeries series;
  series.metric = metric;
  if (records.empty()) return series;
  series.node_id = records.front().node_id;

  std::map<Timestamp, std::vector<double>> buckets;
  for (const auto& r : records) {
    if (r.node_id != series.node_id) {
      throw ValidationError("node_id", "hourly_aggregate expects one node, got '" + series.node_id + "' and '" +
                                           r.node_id + "'");
    }
    if (!r.has(metric)) continue;
    buckets[floor_hour(r.ts)].push_back(r.value(metric));
  }
  series.points.reserve(buckets.size());
  for (auto& [hour, values] : buckets) {
    const double v = stat == HourlyStat::mean ? stats::mean(values) : stats::median_inplace(values);
    series.points.push_back({hour, v, values.size()});
  }
  return series;
}

}  // namespace qc
