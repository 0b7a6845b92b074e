#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qc/error.hpp"
#include "qc/fieldkit/walk.hpp"
#include "support.hpp"

using namespace qc;
using doctest::Approx;
using qc::test::at;
using qc::test::make_record;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::storage;
}

std::string fixture_path(const char* name) { return std::string(QC_SOURCE_DIR) + "/configs/walks/" + name; }

WalkTrace synthetic(const std::string& team, const std::string& device, int samples, double (*value)(int)) {
  WalkTrace t;
  t.team_id = team;
  t.device.node_id = device;
  const auto t0 = at("2016-06-23T14:00:00Z");
  for (int i = 0; i <= samples / 3 + 1; ++i) {
    t.gps.push_back({t0 + Millis{30000} * i, 40.67 + 1e-4 * i, -74.01 + 2e-4 * i, 4.0});
  }
  for (int i = 0; i < samples; ++i) {
    auto r = make_record(device, t0 + Millis{10000} * i);
    r.dust_p001cf = value(i);
    t.samples.push_back(r);
  }
  return t;
}

}  // namespace

TEST_CASE("alignment is exact at fixes and linear between them") {
  const auto trace = load_walk_session(fixture_path("align-fixture.txt"));
  CHECK(trace.team_id == "fixture");
  CHECK(trace.device.node_id == "kit-f");
  const auto aligned = align(trace);
  REQUIRE(aligned.samples.size() == 3);
  CHECK(aligned.samples[0].lat == 40.6770);
  CHECK(aligned.samples[0].lon == -74.0100);
  CHECK(aligned.samples[2].lat == 40.6790);
  CHECK(aligned.samples[2].lon == -74.0080);
  CHECK(std::abs(aligned.samples[1].lat - 40.6780) <= 1e-12);
  CHECK(std::abs(aligned.samples[1].lon - -74.0090) <= 1e-12);
  CHECK(aligned.samples[1].record.dust_p001cf == 320.0);
  CHECK(aligned.coverage.aligned == 3);
}

TEST_CASE("samples outside the GPS envelope are dropped") {
  auto trace = synthetic("t", "kit", 30, [](int i) { return 100.0 + i; });
  trace.gps.erase(trace.gps.begin());
  trace.gps.pop_back();
  trace.gps.pop_back();
  const auto aligned = align(trace);
  CHECK(aligned.coverage.dropped_before == 3);
  CHECK(aligned.coverage.dropped_after > 0);
  CHECK(aligned.coverage.aligned + aligned.coverage.dropped_before + aligned.coverage.dropped_after == 30);

  const auto fixes = trace.gps;
  CHECK_FALSE(interpolate_position(fixes, fixes.front().ts - Millis{1}));
  CHECK(interpolate_position(fixes, fixes.back().ts)->first == fixes.back().lat);

  trace.gps.resize(1);
  CHECK(code_of([&] { align(trace); }) == ErrorCode::insufficient_gps);
}

TEST_CASE("clock offset shifts samples before alignment") {
  auto trace = load_walk_session(fixture_path("align-fixture.txt"));
  trace.clock_offset = Millis{10000};
  const auto aligned = align(trace);
  REQUIRE(aligned.samples.size() == 2);
  CHECK(std::abs(aligned.samples[0].lat - 40.6780) <= 1e-12);
  CHECK(aligned.coverage.dropped_after == 1);
}

TEST_CASE("geojson export") {
  const auto a = align(load_walk_session(fixture_path("team-a.txt")));
  const auto b = align(load_walk_session(fixture_path("team-b.txt")));
  const std::vector<AlignedTrace> traces{a, b};
  const auto out = export_geojson(traces);
  CHECK(out.warnings.empty());
  const auto doc = nlohmann::json::parse(out.document.dump());
  CHECK(doc["type"] == "FeatureCollection");
  int lines = 0, points = 0;
  for (const auto& f : doc["features"]) {
    if (f["geometry"]["type"] == "LineString") {
      ++lines;
      const auto& trace = f["properties"]["team_id"] == a.team_id ? a : b;
      const auto& coords = f["geometry"]["coordinates"];
      REQUIRE(coords.size() == trace.samples.size());
      for (std::size_t i = 0; i < coords.size(); ++i) {
        CHECK(coords[i][0].get<double>() == trace.samples[i].lon);
        CHECK(coords[i][1].get<double>() == trace.samples[i].lat);
        CHECK(std::abs(coords[i][1].get<double>()) <= 90.0);
      }
    } else {
      CHECK(f["geometry"]["type"] == "Point");
      CHECK(f["geometry"]["coordinates"][0].get<double>() < -70.0);
      ++points;
    }
  }
  CHECK(lines == 2);
  CHECK(points == 3 + static_cast<int>(b.annotations.size()));

  AlignedTrace empty;
  empty.team_id = "ghost";
  const std::vector<AlignedTrace> only{empty};
  const auto skipped = export_geojson(only);
  CHECK(skipped.document["features"].empty());
  CHECK(skipped.warnings.size() == 1);
}

TEST_CASE("calibration recovers a known line") {
  auto low = synthetic("t", "kit", 60, [](int i) { return 200.0 + 7.0 * i + (i % 5) * 3.0; });
  auto ref = low.samples;
  for (auto& r : ref) {
    r.node_id = "ref";
    r.dust_p001cf = 1.5 * r.dust_p001cf + 2.0;
  }
  const auto model = fit_calibration(low.samples, ref, Metric::dust_p001cf);
  CHECK(std::abs(model.gain - 1.5) <= 1e-9);
  CHECK(std::abs(model.offset - 2.0) <= 1e-9);
  CHECK(model.n_pairs == 60);
  CHECK(model.r_squared == Approx(1.0));

  const auto corrected = apply_calibration(model, low.samples, Metric::dust_p001cf);
  std::vector<SampleRecord> fixed;
  for (const auto& c : corrected) fixed.push_back(c.record);
  CHECK(corrected[4].original == low.samples[4].dust_p001cf);
  const auto refit = fit_calibration(fixed, ref, Metric::dust_p001cf);
  CHECK(std::abs(refit.gain - 1.0) <= 1e-6);
  CHECK(std::abs(refit.offset) <= 1e-6);

  CHECK_THROWS_AS(apply_calibration(model, low.samples, Metric::temperature_c), ValidationError);
  const auto back = calibration_from_json(calibration_to_json(model));
  CHECK(back.gain == model.gain);
  CHECK(back.offset == model.offset);
  CHECK(back.metric == Metric::dust_p001cf);
}

TEST_CASE("calibration pairing") {
  auto low = synthetic("t", "kit", 20, [](int i) { return 100.0 + i; });
  auto ref = low.samples;
  for (auto& r : ref) {
    r.ts += Millis{3000};
    r.dust_p001cf = 2.0 * r.dust_p001cf;
  }
  CHECK(fit_calibration(low.samples, ref, Metric::dust_p001cf, 5.0).n_pairs == 20);
  CHECK(code_of([&] { fit_calibration(low.samples, ref, Metric::dust_p001cf, 2.0); }) ==
        ErrorCode::insufficient_pairs);
  auto flat = low.samples;
  for (auto& r : flat) r.dust_p001cf = 5.0;
  CHECK(code_of([&] { fit_calibration(flat, ref, Metric::dust_p001cf, 5.0); }) == ErrorCode::degenerate_predictor);
}

TEST_CASE("team series") {
  auto trace = synthetic("t", "kit", 10, [](int i) { return 10.0 * i; });
  trace.samples[3].mark_missing(Metric::dust_p001cf);
  const auto raw = team_series(trace, Metric::dust_p001cf);
  REQUIRE(raw.size() == 9);
  CHECK(raw[0].elapsed_s == 0.0);
  CHECK(raw[3].elapsed_s == 40.0);
  CHECK(raw[3].value == 40.0);
  CalibrationModel m;
  m.metric = Metric::dust_p001cf;
  m.gain = 2.0;
  m.offset = 1.0;
  CHECK(team_series(trace, Metric::dust_p001cf, m)[3].value == 81.0);
}

TEST_CASE("session format round trip and errors") {
  const auto trace = load_walk_session(fixture_path("team-a.txt"));
  CHECK(trace.annotations.size() == 3);
  const auto again = parse_walk_session(format_walk_session(trace));
  CHECK(again.team_id == trace.team_id);
  CHECK(again.device.node_id == trace.device.node_id);
  REQUIRE(again.samples.size() == trace.samples.size());
  for (std::size_t i = 0; i < again.samples.size(); ++i) CHECK(again.samples[i] == trace.samples[i]);
  REQUIRE(again.gps.size() == trace.gps.size());
  CHECK(again.gps.back().lat == trace.gps.back().lat);

  const std::string bad = "team: x\ndevice: kit\n[gps]\n2016-06-23T14:00:00Z,40.0,-74.0,5\n2016-06-23T14:00:05Z,forty,-74.0,5\n";
  try {
    parse_walk_session(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
  const std::string backwards =
      "team: x\ndevice: kit\n[gps]\n2016-06-23T14:00:05Z,40.0,-74.0,5\n2016-06-23T14:00:00Z,40.0,-74.0,5\n";
  CHECK_THROWS(parse_walk_session(backwards));
  CHECK_THROWS_AS(parse_walk_session("device: kit\n[gps]\n"), Error);
  const std::string foreign =
      "team: x\ndevice: kit\n[samples]\nother,2016-06-23T14:00:00.000Z,26,58,,,300,60,,,"
      "missing_channel:pressure_hpa;missing_channel:lpo_ratio_pct;missing_channel:lux_ch0;missing_channel:lux_ch1\n";
  CHECK_THROWS(parse_walk_session(foreign));
}
