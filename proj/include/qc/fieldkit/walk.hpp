#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qc/node_sim/sensors.hpp"
#include "qc/store/record.hpp"

namespace qc {

struct GpsFix {
  Timestamp ts{};
  double lat = 0.0;
  double lon = 0.0;
  double accuracy_m = 0.0;
};

struct Annotation {
  Timestamp ts{};
  std::string label;
};

// One team's citizen-science walk: the handheld device's record stream, the
// phone's GPS fixes and the observers' notes.
struct WalkTrace {
  std::string team_id;
  NodeConfig device;  // node_id names the device; suite.dust_min_particle_um its size cutoff
  Millis clock_offset{0};  // added to sample ts before alignment
  std::vector<GpsFix> gps;
  std::vector<SampleRecord> samples;
  std::vector<Annotation> annotations;

  // Strictly increasing ts in gps and samples, accuracy_m > 0, samples carry
  // the device id. Throws ValidationError.
  void validate() const;
};

// Walk session file, one per team:
//
//   # comment
//   team: <team id>
//   device: <device id>
//   particle_cutoff_um: 1.0        (optional)
//   clock_offset_ms: 0             (optional)
//   [gps]
//   ts,lat,lon,accuracy_m          (header row, optional)
//   2016-06-23T14:00:00.000Z,40.6775,-74.0098,4.5
//   [samples]
//   <archive record lines>
//   [annotations]
//   ts,label                       (header row, optional)
//   2016-06-23T14:03:10.000Z,truck passing
//
// Throws ParseError carrying the 1-based line number.
WalkTrace parse_walk_session(std::string_view text);
WalkTrace load_walk_session(const std::string& path);
std::string format_walk_session(const WalkTrace& trace);

struct AlignedSample {
  SampleRecord record;
  double lat = 0.0;
  double lon = 0.0;
  std::vector<Annotation> annotations;
};

struct AlignCoverage {
  std::size_t aligned = 0;
  std::size_t dropped_before = 0;
  std::size_t dropped_after = 0;
};

struct AlignedTrace {
  std::string team_id;
  std::string device_id;
  std::vector<AlignedSample> samples;
  std::vector<Annotation> annotations;
  std::vector<GpsFix> gps;
  AlignCoverage coverage;
};

struct AlignOptions {
  Millis annotation_window{30'000};
};

// Linear interpolation between bracketing fixes (exact at fix timestamps).
// Samples outside the fix envelope are dropped and counted. Throws
// insufficient-gps with fewer than two fixes.
AlignedTrace align(const WalkTrace& trace, const AlignOptions& options = {});

// Position at time t, or nullopt outside the fix envelope. fixes must be
// sorted by ts.
std::optional<std::pair<double, double>> interpolate_position(std::span<const GpsFix> fixes, Timestamp t);

struct GeoJsonExport {
  nlohmann::json document;
  std::vector<std::string> warnings;
};

// RFC 7946 FeatureCollection: one LineString per team ([lon, lat] positions in
// sample order, properties.team_id) and one Point per positioned annotation.
// Teams with fewer than two aligned samples are omitted with a warning.
GeoJsonExport export_geojson(std::span<const AlignedTrace> traces);

struct CalibrationModel {
  Metric metric = Metric::temperature_c;
  double gain = 1.0;
  double offset = 0.0;
  double r_squared = 1.0;
  std::size_t n_pairs = 0;
  double pairing_tolerance_s = 10.0;

  double apply(double value) const { return gain * value + offset; }
};

nlohmann::json calibration_to_json(const CalibrationModel& model);
CalibrationModel calibration_from_json(const nlohmann::json& j);

struct SeriesPoint {
  double elapsed_s = 0.0;
  double value = 0.0;
};

// Elapsed seconds from the first sample; samples missing the metric are
// skipped. Raw values unless a calibration is supplied.
std::vector<SeriesPoint> team_series(const WalkTrace& trace, Metric metric,
                                     const std::optional<CalibrationModel>& calibration = std::nullopt);

// Pairs each low-cost sample with the nearest reference sample within the
// tolerance, then fits reference = gain * low_cost + offset. Throws
// insufficient-pairs below two pairs and degenerate-predictor when the
// low-cost values do not vary.
CalibrationModel fit_calibration(std::span<const SampleRecord> low_cost, std::span<const SampleRecord> reference,
                                 Metric metric, double pairing_tolerance_s = 10.0);

struct CalibratedSample {
  SampleRecord record;    // metric replaced by gain * value + offset
  double original = 0.0;  // value before correction
};

// Throws ValidationError("metric") when metric differs from the model's.
std::vector<CalibratedSample> apply_calibration(const CalibrationModel& model, std::span<const SampleRecord> samples,
                                                Metric metric);

std::string team_series_csv(std::span<const SeriesPoint> series);
std::string aligned_csv(const AlignedTrace& trace);

}  // namespace qc
