// Acceptance run: one [PASS]/[FAIL] line per criterion, non-zero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "qc/analytics/differential.hpp"
#include "qc/analytics/regression.hpp"
#include "qc/analytics/scope.hpp"
#include "qc/analytics/signature.hpp"
#include "qc/analytics/stats.hpp"
#include "qc/error.hpp"
#include "qc/fieldkit/walk.hpp"
#include "qc/gateway/gateway.hpp"
#include "qc/gateway/http.hpp"
#include "qc/node_sim/scenario.hpp"
#include "qc/node_sim/sensors.hpp"
#include "qc/node_sim/simulate.hpp"
#include "qc/store/codec.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace qc;
using qc::test::at;

namespace {

const fs::path kSource = QC_SOURCE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::vector<NodeConfig> fleet_of(const fs::path& config) {
  std::vector<NodeConfig> out;
  const auto doc = read_json(config);
  for (const auto& entry : doc.at("fleet")) out.push_back(node_config_from_json(entry));
  return out;
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Redhook fleet over its eight days, shared by the count and heat-island checks.
std::map<std::string, std::vector<SampleRecord>>& redhook() {
  static std::map<std::string, std::vector<SampleRecord>> data = [] {
    const auto scenario = load_scenario(kSource / "configs/scenarios/redhook.json");
    std::map<std::string, std::vector<SampleRecord>> out;
    for (const auto& node : fleet_of(kSource / "configs/redhook.json")) {
      out[node.node_id] = simulate_node(node, scenario, at("2016-06-09"), at("2016-06-17"));
    }
    return out;
  }();
  return data;
}

Outcome record_count() {
  std::size_t total = 0, bad_hours = 0, hours = 0;
  for (const auto& [id, records] : redhook()) {
    total += records.size();
    std::map<Timestamp, std::size_t> per_hour;
    for (const auto& r : records) ++per_hour[floor_hour(r.ts)];
    hours += per_hour.size();
    for (const auto& [h, n] : per_hour) bad_hours += n != 720;
  }
  return {total == 552960 && hours == 4 * 192 && bad_hours == 0,
          fmt("records=%zu node-hours=%zu hours-not-720=%zu", total, hours, bad_hours)};
}

Outcome codec_round_trip() {
  std::mt19937_64 rng(1465430400);
  std::size_t mismatches = 0;
  const int n = 10000;
  std::vector<SampleRecord> batch;
  for (int i = 0; i < n; ++i) {
    batch.push_back(qc::test::random_record(rng));
    validate(batch.back());
  }
  const auto decoded = decode(encode(batch));
  if (decoded.size() != batch.size()) return {false, "decoded count differs"};
  for (int i = 0; i < n; ++i) mismatches += !qc::test::bitwise_equal(batch[i], decoded[i]);
  return {mismatches == 0, fmt("records=%d mismatches=%zu", n, mismatches)};
}

Outcome regression() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + trial * 7;
    std::normal_distribution<double> noise(0.0, 1.0 + trial);
    std::vector<double> x(n), y(n);
    const double a = u(rng), b = u(rng) / 5.0;
    for (int i = 0; i < n; ++i) {
      x[i] = u(rng);
      y[i] = a + b * x[i] + noise(rng);
    }
    // Normal equations by Cramer's rule in extended precision.
    long double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
      sx += x[i];
      sy += y[i];
      sxx += static_cast<long double>(x[i]) * x[i];
      sxy += static_cast<long double>(x[i]) * y[i];
    }
    const long double det = n * sxx - sx * sx;
    const double slope = static_cast<double>((n * sxy - sx * sy) / det);
    const double intercept = static_cast<double>((sxx * sy - sx * sxy) / det);
    const auto fit = ols(x, y);
    worst = std::max({worst, std::abs(fit.slope - slope) / std::max(1.0, std::abs(slope)),
                      std::abs(fit.intercept - intercept) / std::max(1.0, std::abs(intercept))});
  }

  // dust = 300 + 18 * humidity + noise; humidity swings diurnally (sd ~10).
  const auto scenario = scenario_from_json(nlohmann::json::parse(R"({
    "start": "2016-06-09T00:00:00Z", "end": "2016-06-16T00:00:00Z", "seed": 31,
    "sites": [{"name": "s", "lat": 40.68, "lon": -74.01, "metrics": {
      "temperature_c": 22, "pressure_hpa": 1013,
      "humidity_pct": {"mean": 60, "diurnal": {"amplitude": 14, "peak_hour": 5}},
      "dust_p001cf": {"mean": 300, "coupling": {"source": "humidity_pct", "gain": 18, "reference": 0}, "noise_sd": 50}}}]})"));
  NodeConfig node;
  node.node_id = "corr";
  node.rng_seed = 5;
  const auto records = simulate_node(node, scenario, at("2016-06-09"), at("2016-06-16"));
  std::vector<double> hum, dust;
  for (const auto& r : records) {
    hum.push_back(r.humidity_pct);
    dust.push_back(r.dust_p001cf);
  }
  const double snr = 18.0 * 14.0 / std::sqrt(2.0) / 50.0;
  const auto fit = ols(hum, dust);
  return {worst <= 1e-9 && snr >= 3.0 && fit.slope > 0.0 && fit.p_value < 0.01,
          fmt("oracle max rel err=%.2e; scenario snr=%.2f slope=%.3f p=%.3g", worst, snr, fit.slope, fit.p_value)};
}

Outcome bbq() {
  const auto scenario = load_scenario(kSource / "configs/scenarios/bbq.json");
  const auto t0 = at("2016-06-10"), t1 = at("2016-06-25");
  const auto train = std::pair{at("2016-06-11"), t1};
  const auto event0 = at("2016-06-10T19:00:00Z"), event1 = at("2016-06-10T22:00:00Z");
  std::map<std::string, std::vector<AnomalyEvent>> events;
  std::vector<std::string> fleet;
  for (const auto& node : fleet_of(kSource / "configs/bbq.json")) {
    fleet.push_back(node.node_id);
    const auto records = simulate_node(node, scenario, t0, t1);
    const auto sig = build_signature(records, Metric::dust_p001cf, train);
    events[node.node_id] = detect_anomalies(records, sig).events;
  }
  std::ostringstream detail;
  bool ok = true;
  for (const auto& id : fleet) detail << id << '=' << events[id].size() << ' ';
  for (const char* id : {"rh-ground", "rh-roof"}) {
    if (events[id].size() != 1) {
      ok = false;
      continue;
    }
    const auto& e = events[id][0];
    const auto overlap = std::min(e.end, event1) - std::max(e.start, event0);
    const double frac = static_cast<double>(overlap.count()) / static_cast<double>((event1 - event0).count());
    detail << id << " overlap=" << frac << ' ';
    ok = ok && frac >= 0.8;
  }
  ok = ok && events["rh-park"].empty() && events["rh-pier"].empty();
  if (ok) {
    const double roof = events["rh-roof"][0].peak_value, ground = events["rh-ground"][0].peak_value;
    detail << "peaks roof=" << roof << " ground=" << ground << ' ';
    ok = roof < ground;
  }
  const auto scoped = classify_scope(events, Metric::dust_p001cf, fleet);
  detail << "groups=" << scoped.size();
  if (scoped.size() == 1) detail << " scope=" << to_string(scoped[0].scope) << " nodes=" << scoped[0].nodes.size();
  ok = ok && scoped.size() == 1 && scoped[0].scope == Scope::localized && scoped[0].nodes.size() == 2;
  return {ok, detail.str()};
}

Outcome heat_island() {
  DifferentialOptions opt;
  opt.utc_offset_minutes = -240;
  const auto d = differential_distribution(redhook()["rh-roof"], redhook()["rh-ground"], Metric::temperature_c, opt);
  if (!d.day || !d.evening) return {false, "empty bucket"};
  return {d.day->max >= 17.0 && d.day->max <= 18.5 && std::abs(d.evening->median) < 1.0,
          fmt("day max=%.3f evening median=%.3f", d.day->max, d.evening->median)};
}

std::vector<SampleRecord> minute_series(std::size_t count, Timestamp t0, const std::function<double(Timestamp)>& f) {
  std::vector<SampleRecord> out;
  for (std::size_t i = 0; i < count; ++i) {
    auto r = qc::test::make_record("sig", t0 + Millis{60000} * static_cast<long>(i));
    r.dust_p001cf = f(r.ts);
    out.push_back(r);
  }
  return out;
}

Outcome signature_null_recall() {
  const auto t0 = at("2016-06-06");
  std::size_t null_events = 0;
  int recalled = 0;
  double worst = 1.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    std::mt19937_64 rng(seed * 7919);
    std::normal_distribution<double> noise(0.0, 1.0);
    auto level = [](Timestamp ts) { return 900.0 + 200.0 * std::sin(hour_of_week(ts) * 0.37); };
    const auto train = minute_series(14 * 1440, t0, [&](Timestamp ts) { return level(ts) + 40.0 * noise(rng); });
    const auto sig = build_signature(train, Metric::dust_p001cf);

    const auto p0 = t0 + 14 * kDay;
    const auto medians =
        minute_series(7 * 1440, p0, [&](Timestamp ts) { return sig.buckets[hour_of_week(ts)].median; });
    for (double k : {1e-6, 0.5, 1.0, 3.5, 7.0, 100.0}) {
      DetectorOptions o;
      o.k = k;
      null_events += detect_anomalies(medians, sig, o).events.size();
    }

    std::uniform_int_distribution<int> start(0, 7 * 1440 - 200), len(10, 180);
    std::uniform_real_distribution<double> extra(0.0, 5.0);
    const auto s0 = p0 + Millis{60000} * start(rng);
    const auto s1 = s0 + Millis{60000} * len(rng);
    const auto probe = minute_series(7 * 1440, p0, [&](Timestamp ts) {
      const auto& b = sig.buckets[hour_of_week(ts)];
      if (ts >= s0 && ts < s1) return b.median + (7.0 + extra(rng)) * stats::kMadToSigma * b.mad;
      return level(ts) + 40.0 * noise(rng);
    });
    Millis covered{0};
    for (const auto& e : detect_anomalies(probe, sig).events) {
      const auto lo = std::max(e.start, s0), hi = std::min(e.end, s1);
      if (hi > lo) covered += hi - lo;
    }
    const double frac = static_cast<double>(covered.count()) / static_cast<double>((s1 - s0).count());
    worst = std::min(worst, frac);
    recalled += frac >= 0.8;
  }
  return {null_events == 0 && recalled == 50,
          fmt("null events=%zu recalled=%d/50 worst coverage=%.3f", null_events, recalled, worst)};
}

Outcome gateway_idempotence() {
  qc::test::TempDir dir("acceptance-gw");
  Gateway gateway(dir.path());
  GatewayServer server(gateway);
  const int port = server.bind("127.0.0.1", 0);
  std::thread serving([&] { server.serve(); });
  server.wait_until_ready();

  NodeRegistration reg;
  reg.node_id = "idem";
  reg.location = {40.68, -74.01, 0.0};
  gateway.register_node(reg);
  std::vector<SampleRecord> batch;
  for (int i = 0; i < 720; ++i) batch.push_back(qc::test::make_record("idem", at("2016-06-10T15:00:00Z") + Millis{5000} * i));

  std::vector<IngestResult> results(8);
  std::vector<std::string> errors(8);
  std::vector<std::thread> clients;
  for (int i = 0; i < 8; ++i) {
    clients.emplace_back([&, i] {
      try {
        GatewayClient c("127.0.0.1", port);
        results[i] = c.ingest("idem", batch);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
  }
  for (auto& t : clients) t.join();
  server.stop();
  serving.join();

  std::size_t accepted = 0, failed = 0;
  for (int i = 0; i < 8; ++i) {
    accepted += results[i].accepted;
    failed += !errors[i].empty();
  }
  const auto ids = std::vector<std::string>{"idem"};
  const auto stored = gateway.query(ids, at("2016-06-10"), at("2016-06-11")).size();
  return {stored == 720 && accepted == 720 && failed == 0,
          fmt("stored=%zu accepted sum=%zu failed requests=%zu", stored, accepted, failed)};
}

Outcome calibration() {
  std::vector<SampleRecord> low, ref;
  for (int i = 0; i < 90; ++i) {
    auto r = qc::test::make_record("kit", at("2016-06-23T14:00:00Z") + Millis{10000} * i);
    r.dust_p001cf = 250.0 + 13.0 * i + 40.0 * std::sin(i * 0.7);
    low.push_back(r);
    r.node_id = "ref";
    r.dust_p001cf = 1.5 * r.dust_p001cf + 2.0;
    ref.push_back(r);
  }
  const auto model = fit_calibration(low, ref, Metric::dust_p001cf);
  std::vector<SampleRecord> corrected;
  for (const auto& c : apply_calibration(model, low, Metric::dust_p001cf)) corrected.push_back(c.record);
  const auto refit = fit_calibration(corrected, ref, Metric::dust_p001cf);
  const double e1 = std::max(std::abs(model.gain - 1.5), std::abs(model.offset - 2.0));
  const double e2 = std::max(std::abs(refit.gain - 1.0), std::abs(refit.offset));
  return {e1 <= 1e-9 && e2 <= 1e-6, fmt("fit err=%.2e refit err=%.2e", e1, e2)};
}

Outcome gps_alignment() {
  const auto trace = load_walk_session((kSource / "configs/walks/align-fixture.txt").string());
  const auto aligned = align(trace);
  if (aligned.samples.size() != 3) return {false, "expected 3 aligned samples"};
  const auto& s = aligned.samples;
  const bool ends = s[0].lat == trace.gps[0].lat && s[0].lon == trace.gps[0].lon && s[2].lat == trace.gps[1].lat &&
                    s[2].lon == trace.gps[1].lon;
  const double mid = std::max(std::abs(s[1].lat - 40.6780), std::abs(s[1].lon - -74.0090));

  const std::vector<AlignedTrace> traces{aligned};
  const auto doc = nlohmann::json::parse(export_geojson(traces).document.dump());
  bool order = false;
  for (const auto& f : doc["features"]) {
    if (f["geometry"]["type"] != "LineString") continue;
    const auto& c = f["geometry"]["coordinates"];
    order = c.size() == 3;
    for (std::size_t i = 0; order && i < 3; ++i) order = c[i][0] == s[i].lon && c[i][1] == s[i].lat;
  }
  return {ends && mid <= 1e-12 && order, fmt("endpoints %s midpoint err=%.1e lon-lat order %s", ends ? "exact" : "off",
                                              mid, order ? "ok" : "wrong")};
}

Outcome battery() {
  const double h = battery_life_hours(NodeConfig{}, 550.0);
  return {std::abs(h - 4.2308) <= 1e-3, fmt("%.4f h", h)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"record count: 4 nodes x 8 days at 5 s", record_count},
      {"codec round trip on 10^4 random records", codec_round_trip},
      {"regression oracle and dust-humidity significance", regression},
      {"barbecue event detection and scope", bbq},
      {"roof-ground temperature differential", heat_island},
      {"signature null and spike recall", signature_null_recall},
      {"gateway idempotence under 8 concurrent posts", gateway_idempotence},
      {"calibration fit and refit", calibration},
      {"GPS alignment and GeoJSON order", gps_alignment},
      {"battery life 550 mAh / 130 mA", battery},
  };
  int failed = 0, n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %d. %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
