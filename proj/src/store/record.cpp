#include "qc/store/record.hpp"

#include <limits>

#include "qc/error.hpp"

namespace qc {

namespace {

bool same_value(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return a == b && std::signbit(a) == std::signbit(b);
}

}  // namespace

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::temperature_c: return "temperature_c";
    case Metric::humidity_pct: return "humidity_pct";
    case Metric::pressure_hpa: return "pressure_hpa";
    case Metric::lpo_ratio_pct: return "lpo_ratio_pct";
    case Metric::dust_p001cf: return "dust_p001cf";
    case Metric::noise_dbspl: return "noise_dbspl";
    case Metric::lux_ch0: return "lux_ch0";
    case Metric::lux_ch1: return "lux_ch1";
  }
  return "unknown";
}

std::optional<Metric> metric_from_string(std::string_view name) {
  for (auto m : kAllMetrics) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

Metric parse_metric(std::string_view name) {
  if (auto m = metric_from_string(name)) return *m;
  throw ValidationError("metric", "unknown metric '" + std::string(name) + "'");
}

double SampleRecord::value(Metric metric) const {
  return const_cast<SampleRecord*>(this)->value(metric);
}

double& SampleRecord::value(Metric metric) {
  switch (metric) {
    case Metric::temperature_c: return temperature_c;
    case Metric::humidity_pct: return humidity_pct;
    case Metric::pressure_hpa: return pressure_hpa;
    case Metric::lpo_ratio_pct: return lpo_ratio_pct;
    case Metric::dust_p001cf: return dust_p001cf;
    case Metric::noise_dbspl: return noise_dbspl;
    case Metric::lux_ch0: return lux_ch0;
    case Metric::lux_ch1: return lux_ch1;
  }
  return temperature_c;
}

void SampleRecord::mark_missing(Metric metric) {
  value(metric) = std::numeric_limits<double>::quiet_NaN();
  flags.missing.insert(metric);
}

bool SampleRecord::operator==(const SampleRecord& other) const {
  if (node_id != other.node_id || ts != other.ts || flags != other.flags) return false;
  for (auto m : kAllMetrics) {
    if (!same_value(value(m), other.value(m))) return false;
  }
  return true;
}

bool valid_node_id(std::string_view id) {
  if (id.empty() || id.size() > 64 || id.front() == '.') return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

void validate(const SampleRecord& r) {
  if (!valid_node_id(r.node_id)) {
    throw ValidationError("node_id", "must be 1-64 chars of [A-Za-z0-9._-] not starting with '.'");
  }
  for (auto m : kAllMetrics) {
    const double v = r.value(m);
    const bool listed = r.flags.missing.contains(m);
    if (std::isnan(v) != listed) {
      throw ValidationError(std::string(to_string(m)), "NaN value and missing_channel flag must agree");
    }
    if (!listed && !std::isfinite(v)) throw ValidationError(std::string(to_string(m)), "must be finite");
  }
  auto in_unit_range = [&](Metric m) {
    const double v = r.value(m);
    if (r.has(m) && (v < 0.0 || v > 100.0)) {
      throw ValidationError(std::string(to_string(m)), "must lie in [0, 100]");
    }
  };
  auto non_negative = [&](Metric m) {
    if (r.has(m) && r.value(m) < 0.0) throw ValidationError(std::string(to_string(m)), "must be >= 0");
  };
  in_unit_range(Metric::humidity_pct);
  in_unit_range(Metric::lpo_ratio_pct);
  non_negative(Metric::dust_p001cf);
  non_negative(Metric::lux_ch0);
  non_negative(Metric::lux_ch1);
}

}  // namespace qc
