#include "qc/analytics/export.hpp"

#include <cmath>

#include "qc/error.hpp"
#include "qc/store/codec.hpp"

namespace qc::report {

namespace {

using nlohmann::json;

std::string num(double v) { return format_number(v); }

json stats_json(const std::optional<BucketStats>& s) {
  if (!s) return nullptr;
  return {{"n", s->n}, {"min", s->min}, {"max", s->max}, {"median", s->median}};
}

// JSON has no infinities; the perfect-fit sentinel travels as a string.
json finite_or_tag(double v) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return v;
}

}  // namespace

std::string hourly_csv(const HourlySeries& series) {
  std::string out = "hour_start,value,n\n";
  for (const auto& p : series.points) {
    out += format_iso8601(p.hour_start) + "," + num(p.value) + "," + std::to_string(p.n) + "\n";
  }
  return out;
}

json hourly_json(const HourlySeries& series) {
  json j{{"node_id", series.node_id}, {"metric", std::string(to_string(series.metric))}, {"hours", series.points.size()}};
  std::size_t samples = 0;
  for (const auto& p : series.points) samples += p.n;
  j["samples"] = samples;
  if (!series.points.empty()) {
    j["first_hour"] = format_iso8601(series.points.front().hour_start);
    j["last_hour"] = format_iso8601(series.points.back().hour_start);
  }
  return j;
}

std::string scatter_csv(std::string_view x_name, std::span<const double> x, std::string_view y_name,
                        std::span<const double> y) {
  std::string out = std::string(x_name) + "," + std::string(y_name) + "\n";
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) out += num(x[i]) + "," + num(y[i]) + "\n";
  return out;
}

json regression_json(const RegressionResult& r) {
  return {{"slope", r.slope},         {"intercept", r.intercept},
          {"r", r.r},                 {"r_squared", r.r_squared},
          {"t_stat", finite_or_tag(r.t_stat)}, {"p_value", r.p_value},
          {"n", r.n}};
}

std::string differential_csv(const DifferentialResult& result, const DifferentialOptions& options) {
  std::string out = "hour_start,diff,bucket\n";
  for (const auto& d : result.diffs) {
    const double h = local_hour(d.hour_start, options.utc_offset_minutes);
    const char* bucket = options.day.contains(h) ? "day" : options.evening.contains(h) ? "evening" : "other";
    out += format_iso8601(d.hour_start) + "," + num(d.diff) + "," + bucket + "\n";
  }
  return out;
}

std::string histogram_csv(const DifferentialResult& result) {
  std::string out = "lo,hi,count\n";
  for (const auto& b : result.histogram) out += num(b.lo) + "," + num(b.hi) + "," + std::to_string(b.count) + "\n";
  return out;
}

json differential_json(const DifferentialResult& result, const DifferentialOptions& options) {
  return {{"hours", result.diffs.size()},
          {"day", stats_json(result.day)},
          {"evening", stats_json(result.evening)},
          {"bin_width", result.bin_width},
          {"day_window", {options.day.start_hour, options.day.end_hour}},
          {"evening_window", {options.evening.start_hour, options.evening.end_hour}},
          {"utc_offset_minutes", options.utc_offset_minutes}};
}

std::string signature_csv(const Signature& s) {
  std::string out = "bucket,median,mad,n,occurrences,low_confidence\n";
  for (std::size_t b = 0; b < kHoursPerWeek; ++b) {
    const auto& k = s.buckets[b];
    if (!k.present()) continue;
    out += std::to_string(b) + "," + num(k.median) + "," + num(k.mad) + "," + std::to_string(k.n) + "," +
           std::to_string(k.occurrences) + "," + (k.low_confidence ? "true" : "false") + "\n";
  }
  return out;
}

json signature_json(const Signature& s) {
  json buckets = json::array();
  for (std::size_t b = 0; b < kHoursPerWeek; ++b) {
    const auto& k = s.buckets[b];
    if (!k.present()) continue;
    buckets.push_back({{"bucket", b},
                       {"median", k.median},
                       {"mad", k.mad},
                       {"n", k.n},
                       {"occurrences", k.occurrences},
                       {"low_confidence", k.low_confidence}});
  }
  return {{"node_id", s.node_id},
          {"metric", std::string(to_string(s.metric))},
          {"train_start", format_iso8601(s.train_start)},
          {"train_end", format_iso8601(s.train_end)},
          {"buckets", std::move(buckets)}};
}

Signature signature_from_json(const json& j) {
  try {
    Signature s;
    s.node_id = j.at("node_id").get<std::string>();
    s.metric = parse_metric(j.at("metric").get<std::string>());
    s.train_start = parse_iso8601(j.at("train_start").get<std::string>());
    s.train_end = parse_iso8601(j.at("train_end").get<std::string>());
    for (const auto& b : j.at("buckets")) {
      const auto index = b.at("bucket").get<std::size_t>();
      if (index >= kHoursPerWeek) throw ValidationError("buckets.bucket", "must be < 168");
      auto& k = s.buckets[index];
      k.median = b.at("median").get<double>();
      k.mad = b.at("mad").get<double>();
      k.n = b.at("n").get<std::size_t>();
      k.occurrences = b.at("occurrences").get<std::size_t>();
      k.low_confidence = b.at("low_confidence").get<bool>();
      if (k.mad < 0 || k.n == 0) throw ValidationError("buckets", "mad must be >= 0 and n >= 1");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("signature", e.what());
  }
}

std::string events_csv(std::span<const AnomalyEvent> events) {
  std::string out = "node_id,metric,start,end,direction,peak_z,peak_value,peak_ts,samples\n";
  for (const auto& e : events) {
    out += e.node_id + "," + std::string(to_string(e.metric)) + "," + format_iso8601(e.start) + "," +
           format_iso8601(e.end) + "," + std::string(to_string(e.direction)) + "," + num(e.peak_z) + "," +
           num(e.peak_value) + "," + format_iso8601(e.peak_ts) + "," + std::to_string(e.samples) + "\n";
  }
  return out;
}

json event_json(const AnomalyEvent& e) {
  return {{"node_id", e.node_id},
          {"metric", std::string(to_string(e.metric))},
          {"start", format_iso8601(e.start)},
          {"end", format_iso8601(e.end)},
          {"direction", std::string(to_string(e.direction))},
          {"peak_z", e.peak_z},
          {"peak_value", e.peak_value},
          {"peak_ts", format_iso8601(e.peak_ts)},
          {"samples", e.samples}};
}

json detection_json(const DetectionReport& report) {
  json events = json::array();
  for (const auto& e : report.events) events.push_back(event_json(e));
  return {{"events", std::move(events)},
          {"coverage",
           {{"evaluated", report.evaluated},
            {"skipped_absent_bucket", report.skipped_absent_bucket},
            {"skipped_missing_value", report.skipped_missing_value},
            {"low_confidence_samples", report.low_confidence_samples}}}};
}

std::string scoped_csv(std::span<const ScopedAnomaly> anomalies) {
  std::string out = "metric,start,end,scope,nodes\n";
  for (const auto& a : anomalies) {
    std::string nodes;
    for (const auto& n : a.nodes) nodes += (nodes.empty() ? "" : ";") + n;
    out += std::string(to_string(a.metric)) + "," + format_iso8601(a.start) + "," + format_iso8601(a.end) + "," +
           std::string(to_string(a.scope)) + "," + nodes + "\n";
  }
  return out;
}

json scoped_json(std::span<const ScopedAnomaly> anomalies) {
  json out = json::array();
  for (const auto& a : anomalies) {
    json events = json::array();
    for (const auto& e : a.events) events.push_back(event_json(e));
    out.push_back({{"metric", std::string(to_string(a.metric))},
                   {"start", format_iso8601(a.start)},
                   {"end", format_iso8601(a.end)},
                   {"scope", std::string(to_string(a.scope))},
                   {"nodes", a.nodes},
                   {"events", std::move(events)}});
  }
  return out;
}

}  // namespace qc::report
