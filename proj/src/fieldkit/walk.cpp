#include "qc/fieldkit/walk.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qc/analytics/regression.hpp"
#include "qc/error.hpp"
#include "qc/store/codec.hpp"

namespace qc {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view text, std::size_t line, const char* what) {
  text = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(text) + "'");
  }
  return v;
}

Timestamp parse_ts(std::string_view text, std::size_t line) {
  try {
    return parse_iso8601(trim(text));
  } catch (const ParseError& e) {
    throw ParseError(line, e.detail());
  }
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto cut = s.find(sep);
    out.push_back(s.substr(0, cut));
    if (cut == std::string_view::npos) break;
    s.remove_prefix(cut + 1);
  }
  return out;
}

}  // namespace

void WalkTrace::validate() const {
  if (team_id.empty()) throw ValidationError("team", "required");
  if (!valid_node_id(device.node_id)) throw ValidationError("device", "invalid device id");
  for (std::size_t i = 0; i < gps.size(); ++i) {
    if (!(gps[i].accuracy_m > 0)) throw ValidationError("gps.accuracy_m", "must be > 0");
    if (i > 0 && gps[i].ts <= gps[i - 1].ts) throw ValidationError("gps.ts", "must be strictly increasing");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].node_id != device.node_id) throw ValidationError("samples.node_id", "must equal the device id");
    if (i > 0 && samples[i].ts <= samples[i - 1].ts) throw ValidationError("samples.ts", "must be strictly increasing");
  }
}

WalkTrace parse_walk_session(std::string_view text) {
  enum class Section { header, gps, samples, annotations };
  WalkTrace trace;
  trace.device.suite.dust_min_particle_um = 1.0;
  Section section = Section::header;
  bool first_in_section = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const auto raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '[') {
      if (line == "[gps]") {
        section = Section::gps;
      } else if (line == "[samples]") {
        section = Section::samples;
      } else if (line == "[annotations]") {
        section = Section::annotations;
      } else {
        throw ParseError(line_no, "unknown section " + std::string(line));
      }
      first_in_section = true;
      continue;
    }
    const bool first = std::exchange(first_in_section, false);
    switch (section) {
      case Section::header: {
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) throw ParseError(line_no, "expected 'key: value'");
        const auto key = trim(line.substr(0, colon));
        const auto value = trim(line.substr(colon + 1));
        if (key == "team") {
          trace.team_id = std::string(value);
        } else if (key == "device") {
          trace.device.node_id = std::string(value);
        } else if (key == "particle_cutoff_um") {
          trace.device.suite.dust_min_particle_um = parse_double(value, line_no, "particle_cutoff_um");
        } else if (key == "clock_offset_ms") {
          trace.clock_offset = Millis{static_cast<std::int64_t>(parse_double(value, line_no, "clock_offset_ms"))};
        } else {
          throw ParseError(line_no, "unknown header key '" + std::string(key) + "'");
        }
        break;
      }
      case Section::gps: {
        if (first && line == "ts,lat,lon,accuracy_m") break;
        const auto f = split(line, ',');
        if (f.size() != 4) throw ParseError(line_no, "gps row needs ts,lat,lon,accuracy_m");
        trace.gps.push_back({parse_ts(f[0], line_no), parse_double(f[1], line_no, "lat"),
                             parse_double(f[2], line_no, "lon"), parse_double(f[3], line_no, "accuracy_m")});
        break;
      }
      case Section::samples: {
        if (first && line == kRecordHeader) break;
        try {
          trace.samples.push_back(decode_line(line, line_no));
        } catch (const ValidationError& e) {
          throw ParseError(line_no, e.what());
        }
        break;
      }
      case Section::annotations: {
        if (first && line == "ts,label") break;
        const auto comma = line.find(',');
        if (comma == std::string_view::npos) throw ParseError(line_no, "annotation row needs ts,label");
        trace.annotations.push_back({parse_ts(line.substr(0, comma), line_no), std::string(trim(line.substr(comma + 1)))});
        break;
      }
    }
  }
  if (trace.team_id.empty()) throw ParseError(line_no, "session has no 'team:' header");
  if (trace.device.node_id.empty()) throw ParseError(line_no, "session has no 'device:' header");
  std::sort(trace.annotations.begin(), trace.annotations.end(),
            [](const Annotation& a, const Annotation& b) { return a.ts < b.ts; });
  trace.validate();
  return trace;
}

WalkTrace load_walk_session(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::storage, "cannot open walk session " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_walk_session(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
}

std::string format_walk_session(const WalkTrace& trace) {
  std::string out = "team: " + trace.team_id + "\n";
  out += "device: " + trace.device.node_id + "\n";
  out += "particle_cutoff_um: " + format_number(trace.device.suite.dust_min_particle_um) + "\n";
  if (trace.clock_offset.count() != 0) out += "clock_offset_ms: " + std::to_string(trace.clock_offset.count()) + "\n";
  out += "[gps]\nts,lat,lon,accuracy_m\n";
  for (const auto& f : trace.gps) {
    out += format_iso8601(f.ts) + "," + format_number(f.lat) + "," + format_number(f.lon) + "," +
           format_number(f.accuracy_m) + "\n";
  }
  out += "[samples]\n";
  out += std::string(kRecordHeader) + "\n";
  out += encode(trace.samples);
  out += "[annotations]\nts,label\n";
  for (const auto& a : trace.annotations) out += format_iso8601(a.ts) + "," + a.label + "\n";
  return out;
}

std::optional<std::pair<double, double>> interpolate_position(std::span<const GpsFix> fixes, Timestamp t) {
  if (fixes.empty() || t < fixes.front().ts || t > fixes.back().ts) return std::nullopt;
  auto hi = std::lower_bound(fixes.begin(), fixes.end(), t, [](const GpsFix& f, Timestamp v) { return f.ts < v; });
  if (hi->ts == t) return std::pair{hi->lat, hi->lon};
  const auto lo = std::prev(hi);
  const double f = static_cast<double>((t - lo->ts).count()) / static_cast<double>((hi->ts - lo->ts).count());
  return std::pair{lo->lat + (hi->lat - lo->lat) * f, lo->lon + (hi->lon - lo->lon) * f};
}

AlignedTrace align(const WalkTrace& trace, const AlignOptions& options) {
  trace.validate();
  if (trace.gps.size() < 2) throw Error(ErrorCode::insufficient_gps, "alignment needs at least two GPS fixes");
  AlignedTrace out;
  out.team_id = trace.team_id;
  out.device_id = trace.device.node_id;
  out.annotations = trace.annotations;
  out.gps = trace.gps;
  for (const auto& s : trace.samples) {
    const Timestamp t = s.ts + trace.clock_offset;
    if (t < trace.gps.front().ts) {
      ++out.coverage.dropped_before;
      continue;
    }
    if (t > trace.gps.back().ts) {
      ++out.coverage.dropped_after;
      continue;
    }
    const auto pos = interpolate_position(trace.gps, t);
    AlignedSample a{s, pos->first, pos->second, {}};
    for (const auto& note : trace.annotations) {
      const auto delta = note.ts > t ? note.ts - t : t - note.ts;
      if (delta <= options.annotation_window) a.annotations.push_back(note);
    }
    out.samples.push_back(std::move(a));
  }
  out.coverage.aligned = out.samples.size();
  return out;
}

GeoJsonExport export_geojson(std::span<const AlignedTrace> traces) {
  GeoJsonExport result;
  json features = json::array();
  for (const auto& t : traces) {
    if (t.samples.size() < 2) {
      result.warnings.push_back("team '" + t.team_id + "' omitted: " + std::to_string(t.samples.size()) +
                                " aligned sample(s), a LineString needs two");
      continue;
    }
    json coords = json::array();
    for (const auto& s : t.samples) coords.push_back({s.lon, s.lat});
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", std::move(coords)}}},
                        {"properties",
                         {{"kind", "trajectory"},
                          {"team_id", t.team_id},
                          {"device_id", t.device_id},
                          {"start", format_iso8601(t.samples.front().record.ts)},
                          {"samples", t.samples.size()}}}});
    for (const auto& note : t.annotations) {
      const auto pos = interpolate_position(t.gps, note.ts);
      if (!pos) {
        result.warnings.push_back("team '" + t.team_id + "': annotation '" + note.label + "' at " +
                                  format_iso8601(note.ts) + " lies outside the GPS track");
        continue;
      }
      features.push_back({{"type", "Feature"},
                          {"geometry", {{"type", "Point"}, {"coordinates", {pos->second, pos->first}}}},
                          {"properties",
                           {{"kind", "annotation"},
                            {"team_id", t.team_id},
                            {"label", note.label},
                            {"ts", format_iso8601(note.ts)}}}});
    }
  }
  result.document = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
  return result;
}

json calibration_to_json(const CalibrationModel& m) {
  return {{"metric", std::string(to_string(m.metric))},
          {"gain", m.gain},
          {"offset", m.offset},
          {"r_squared", m.r_squared},
          {"n_pairs", m.n_pairs},
          {"pairing_tolerance_s", m.pairing_tolerance_s}};
}

CalibrationModel calibration_from_json(const json& j) {
  try {
    CalibrationModel m;
    m.metric = parse_metric(j.at("metric").get<std::string>());
    m.gain = j.at("gain").get<double>();
    m.offset = j.at("offset").get<double>();
    m.r_squared = j.value("r_squared", 1.0);
    m.n_pairs = j.value("n_pairs", std::size_t{2});
    m.pairing_tolerance_s = j.value("pairing_tolerance_s", 10.0);
    if (!std::isfinite(m.gain) || m.gain == 0.0) throw ValidationError("gain", "must be finite and nonzero");
    if (!std::isfinite(m.offset)) throw ValidationError("offset", "must be finite");
    return m;
  } catch (const json::exception& e) {
    throw ValidationError("calibration", e.what());
  }
}

std::vector<SeriesPoint> team_series(const WalkTrace& trace, Metric metric,
                                     const std::optional<CalibrationModel>& calibration) {
  if (calibration && calibration->metric != metric) {
    throw ValidationError("metric", "calibration is for " + std::string(to_string(calibration->metric)));
  }
  std::vector<SeriesPoint> out;
  if (trace.samples.empty()) return out;
  const Timestamp t0 = trace.samples.front().ts;
  for (const auto& s : trace.samples) {
    if (!s.has(metric)) continue;
    const double raw = s.value(metric);
    out.push_back({static_cast<double>((s.ts - t0).count()) / 1000.0, calibration ? calibration->apply(raw) : raw});
  }
  return out;
}

CalibrationModel fit_calibration(std::span<const SampleRecord> low_cost, std::span<const SampleRecord> reference,
                                 Metric metric, double pairing_tolerance_s) {
  if (!(pairing_tolerance_s >= 0)) throw Error(ErrorCode::invalid_parameter, "pairing tolerance must be >= 0");
  std::vector<const SampleRecord*> refs;
  for (const auto& r : reference) {
    if (r.has(metric)) refs.push_back(&r);
  }
  std::sort(refs.begin(), refs.end(), [](const auto* a, const auto* b) { return a->ts < b->ts; });
  const Millis tolerance{static_cast<std::int64_t>(std::llround(pairing_tolerance_s * 1000.0))};

  std::vector<double> x;
  std::vector<double> y;
  for (const auto& s : low_cost) {
    if (!s.has(metric) || refs.empty()) continue;
    auto it = std::lower_bound(refs.begin(), refs.end(), s.ts, [](const auto* r, Timestamp t) { return r->ts < t; });
    const SampleRecord* best = nullptr;
    Millis best_gap{};
    if (it != refs.end()) {
      best = *it;
      best_gap = (*it)->ts - s.ts;
    }
    if (it != refs.begin()) {
      const auto* prev = *std::prev(it);
      const auto gap = s.ts - prev->ts;
      if (!best || gap <= best_gap) {
        best = prev;
        best_gap = gap;
      }
    }
    if (best && best_gap <= tolerance) {
      x.push_back(s.value(metric));
      y.push_back(best->value(metric));
    }
  }
  if (x.size() < 2) {
    throw Error(ErrorCode::insufficient_pairs, "only " + std::to_string(x.size()) +
                                                   " low-cost sample(s) have a reference within tolerance");
  }
  const auto fit = fit_line(x, y);
  if (!std::isfinite(fit.slope) || fit.slope == 0.0) {
    throw ValidationError("gain", "reference does not vary with the low-cost signal");
  }
  return CalibrationModel{metric, fit.slope, fit.intercept, fit.r_squared, x.size(), pairing_tolerance_s};
}

std::vector<CalibratedSample> apply_calibration(const CalibrationModel& model, std::span<const SampleRecord> samples,
                                                Metric metric) {
  if (metric != model.metric) {
    throw ValidationError("metric", "model calibrates " + std::string(to_string(model.metric)) + ", not " +
                                        std::string(to_string(metric)));
  }
  std::vector<CalibratedSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    CalibratedSample c{s, s.value(metric)};
    if (s.has(metric)) c.record.value(metric) = model.apply(c.original);
    out.push_back(std::move(c));
  }
  return out;
}

std::string team_series_csv(std::span<const SeriesPoint> series) {
  std::string out = "elapsed_s,value\n";
  for (const auto& p : series) out += format_number(p.elapsed_s) + "," + format_number(p.value) + "\n";
  return out;
}

std::string aligned_csv(const AlignedTrace& trace) {
  std::string out = "ts,lat,lon";
  for (auto m : kAllMetrics) out += "," + std::string(to_string(m));
  out += ",annotations\n";
  for (const auto& s : trace.samples) {
    out += format_iso8601(s.record.ts) + "," + format_number(s.lat) + "," + format_number(s.lon);
    for (auto m : kAllMetrics) out += "," + (s.record.has(m) ? format_number(s.record.value(m)) : std::string());
    out += ",";
    for (std::size_t i = 0; i < s.annotations.size(); ++i) {
      std::string label = s.annotations[i].label;
      std::replace(label.begin(), label.end(), ',', ' ');
      std::replace(label.begin(), label.end(), ';', ' ');
      out += (i ? ";" : "") + label;
    }
    out += "\n";
  }
  return out;
}

}  // namespace qc
