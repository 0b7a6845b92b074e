#include "qc/node_sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>

#include "qc/error.hpp"
#include "qc/node_sim/rng.hpp"

namespace qc {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::array<double, 3> kDriftPeriodsH{7.0, 17.0, 41.0};

double pulse_value(const PulseTerm& p, double h) {
  auto one = [&](double x) {
    if (x <= p.start_hour || x >= p.end_hour) return 0.0;
    if (x <= p.peak_hour) {
      return p.amplitude * 0.5 * (1.0 - std::cos(std::numbers::pi * (x - p.start_hour) / (p.peak_hour - p.start_hour)));
    }
    return p.amplitude * 0.5 * (1.0 + std::cos(std::numbers::pi * (x - p.peak_hour) / (p.end_hour - p.peak_hour)));
  };
  return one(h) + one(h + 24.0);
}

double clamp_physical(Quantity q, double v) {
  switch (q) {
    case Quantity::humidity_pct: return std::clamp(v, 0.0, 100.0);
    case Quantity::dust_p001cf:
    case Quantity::illuminance: return std::max(v, 0.0);
    default: return v;
  }
}

// --- JSON helpers ---------------------------------------------------------

void reject_unknown(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError(std::string(where) + "." + key, "unknown key");
    }
  }
}

double number(const json& j, std::string_view key, std::string_view where, std::optional<double> fallback = {}) {
  const std::string k(key);
  if (!j.contains(k)) {
    if (fallback) return *fallback;
    throw ValidationError(std::string(where) + "." + k, "required");
  }
  if (!j[k].is_number()) throw ValidationError(std::string(where) + "." + k, "must be a number");
  return j[k].get<double>();
}

Timestamp timestamp(const json& j, std::string_view key, std::string_view where) {
  const std::string k(key);
  if (!j.contains(k) || !j[k].is_string()) throw ValidationError(std::string(where) + "." + k, "required ISO-8601 string");
  try {
    return parse_iso8601(j[k].get<std::string>());
  } catch (const Error& e) {
    throw ValidationError(std::string(where) + "." + k, e.what());
  }
}

std::vector<json> as_list(const json& j) {
  if (j.is_array()) return {j.begin(), j.end()};
  return {j};
}

Curve curve_from_json(const json& j, const std::string& where) {
  if (j.is_number()) {
    Curve flat;
    flat.mean = j.get<double>();
    return flat;
  }
  if (!j.is_object()) throw ValidationError(where, "curve must be a number or an object");
  reject_unknown(j, where, {"mean", "diurnal", "pulses", "weekend_offset", "coupling", "noise_sd", "drift"});
  Curve c;
  c.mean = number(j, "mean", where, 0.0);
  c.weekend_offset = number(j, "weekend_offset", where, 0.0);
  c.noise_sd = number(j, "noise_sd", where, 0.0);
  c.drift_amplitude = number(j, "drift", where, 0.0);
  if (c.noise_sd < 0 || c.drift_amplitude < 0) throw ValidationError(where, "noise_sd and drift must be >= 0");
  if (j.contains("diurnal")) {
    for (const auto& d : as_list(j["diurnal"])) {
      reject_unknown(d, where + ".diurnal", {"amplitude", "peak_hour"});
      c.diurnal.push_back({number(d, "amplitude", where + ".diurnal"), number(d, "peak_hour", where + ".diurnal")});
    }
  }
  if (j.contains("pulses")) {
    for (const auto& p : as_list(j["pulses"])) {
      const auto w = where + ".pulses";
      reject_unknown(p, w, {"amplitude", "start_hour", "peak_hour", "end_hour"});
      PulseTerm term{number(p, "amplitude", w), number(p, "start_hour", w), number(p, "peak_hour", w),
                     number(p, "end_hour", w)};
      if (!(term.start_hour >= 0 && term.start_hour < term.peak_hour && term.peak_hour < term.end_hour &&
            term.end_hour <= 48)) {
        throw ValidationError(w, "need 0 <= start_hour < peak_hour < end_hour <= 48");
      }
      c.pulses.push_back(term);
    }
  }
  if (j.contains("coupling")) {
    const auto& k = j["coupling"];
    const auto w = where + ".coupling";
    reject_unknown(k, w, {"source", "gain", "reference"});
    if (!k.contains("source") || !k["source"].is_string()) throw ValidationError(w + ".source", "required");
    c.coupling = Coupling{parse_quantity(k["source"].get<std::string>()), number(k, "gain", w),
                          number(k, "reference", w, 0.0)};
  }
  return c;
}

std::map<Quantity, Curve> curves_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where, "must be an object of quantity -> curve");
  std::map<Quantity, Curve> out;
  for (const auto& [key, value] : j.items()) {
    Quantity q;
    try {
      q = parse_quantity(key);
    } catch (const ValidationError&) {
      throw ValidationError(where + "." + key, "unknown quantity");
    }
    out[q] = curve_from_json(value, where + "." + key);
  }
  return out;
}

}  // namespace

std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::temperature_c: return "temperature_c";
    case Quantity::humidity_pct: return "humidity_pct";
    case Quantity::pressure_hpa: return "pressure_hpa";
    case Quantity::dust_p001cf: return "dust_p001cf";
    case Quantity::noise_dbspl: return "noise_dbspl";
    case Quantity::illuminance: return "illuminance";
  }
  return "unknown";
}

Quantity parse_quantity(std::string_view name) {
  for (auto q : kAllQuantities) {
    if (to_string(q) == name) return q;
  }
  throw ValidationError("quantity", "unknown quantity '" + std::string(name) + "'");
}

void Curve::merge(const Curve& over) {
  mean += over.mean;
  diurnal.insert(diurnal.end(), over.diurnal.begin(), over.diurnal.end());
  pulses.insert(pulses.end(), over.pulses.begin(), over.pulses.end());
  weekend_offset += over.weekend_offset;
  if (over.coupling) coupling = over.coupling;
  noise_sd = std::hypot(noise_sd, over.noise_sd);
  drift_amplitude += over.drift_amplitude;
}

bool ScenarioEvent::targets(const NodeConfig& node) const {
  if (std::find(node_ids.begin(), node_ids.end(), node.node_id) != node_ids.end()) return true;
  return center && distance_m(*center, node.location) <= radius_m;
}

double ScenarioEvent::weight(Timestamp t) const {
  if (t < start || t >= end) return 0.0;
  if (ramp.count() <= 0) return 1.0;
  const double ramp_ms = static_cast<double>(ramp.count());
  const double since = static_cast<double>((t - start).count());
  const double until = static_cast<double>((end - t).count());
  return std::min({1.0, since / ramp_ms, until / ramp_ms});
}

void EnvironmentScenario::validate() const {
  if (!(start < end)) throw Error(ErrorCode::invalid_range, "scenario start must precede end");
  if (sites.empty()) throw ValidationError("sites", "scenario needs at least one site");
  std::set<std::string> names;
  for (const auto& s : sites) {
    if (s.name.empty() || !names.insert(s.name).second) throw ValidationError("sites.name", "must be unique and non-empty");
  }
  for (const auto& e : events) {
    if (!(e.start < e.end) || e.start < start || e.end > end) {
      throw ValidationError("events", "event interval must be non-empty and inside the scenario range");
    }
    if (e.mode == EventMode::multiply && !(e.magnitude > 0)) {
      throw ValidationError("events.magnitude", "multiplicative magnitude must be > 0");
    }
    if (e.node_ids.empty() && !e.center) throw ValidationError("events", "event needs nodes or center/radius_m");
    if (e.center && !(e.radius_m >= 0)) throw ValidationError("events.radius_m", "must be >= 0");
    if (e.ramp.count() < 0) throw ValidationError("events.ramp_s", "must be >= 0");
  }
}

const Site& EnvironmentScenario::site_for(const NodeConfig& node) const {
  if (sites.empty()) throw Error(ErrorCode::uncovered_scenario, "scenario has no sites");
  if (!node.site.empty()) {
    for (const auto& s : sites) {
      if (s.name == node.site) return s;
    }
    throw Error(ErrorCode::uncovered_scenario, "scenario has no site named '" + node.site + "'");
  }
  const Site* best = &sites.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& s : sites) {
    const double d = distance_m(s.location, node.location);
    if (d < best_d) {
      best_d = d;
      best = &s;
    }
  }
  return *best;
}

GroundTruth::GroundTruth(const EnvironmentScenario& scenario, const NodeConfig& node)
    : scenario_(&scenario), placement_(node.placement) {
  const Site& site = scenario.site_for(node);
  site_index_ = static_cast<std::size_t>(&site - scenario.sites.data());
  for (const auto& [q, curve] : site.curves) curves_[static_cast<std::size_t>(q)] = curve;
  if (auto it = site.placement_overrides.find(node.placement); it != site.placement_overrides.end()) {
    for (const auto& [q, curve] : it->second) {
      auto& slot = curves_[static_cast<std::size_t>(q)];
      if (slot) {
        slot->merge(curve);
      } else {
        slot = curve;
      }
    }
  }
  for (auto q : kAllQuantities) {
    const auto& c = curves_[static_cast<std::size_t>(q)];
    if (!c || !c->coupling) continue;
    const auto& src = curves_[static_cast<std::size_t>(c->coupling->source)];
    if (c->coupling->source == q || !src || src->coupling) {
      throw ValidationError(std::string("sites.") + site.name + "." + std::string(to_string(q)) + ".coupling",
                            "source must be another uncoupled quantity defined at the site");
    }
  }
  for (const auto& e : scenario.events) {
    if (e.targets(node)) events_.push_back(&e);
  }
}

double GroundTruth::base_value(Quantity q, const Curve& curve, Timestamp t) const {
  const double h = local_hour(t, scenario_->utc_offset_minutes);
  double v = curve.mean;
  for (const auto& d : curve.diurnal) v += d.amplitude * std::cos(kTwoPi * (h - d.peak_hour) / 24.0);
  for (const auto& p : curve.pulses) v += pulse_value(p, h);
  if (curve.weekend_offset != 0.0 && local_weekday(t, scenario_->utc_offset_minutes) >= 6) v += curve.weekend_offset;
  const auto qi = static_cast<std::uint64_t>(q);
  if (curve.drift_amplitude > 0.0) {
    const double hours = static_cast<double>(epoch_ms(t)) / 3'600'000.0;
    double wander = 0.0;
    for (std::size_t k = 0; k < kDriftPeriodsH.size(); ++k) {
      const double phase = kTwoPi * unit_hash(scenario_->seed, site_index_, qi, 0xd71f7ULL + k);
      wander += std::sin(kTwoPi * hours / kDriftPeriodsH[k] + phase);
    }
    v += curve.drift_amplitude * wander / static_cast<double>(kDriftPeriodsH.size());
  }
  if (curve.noise_sd > 0.0) {
    const auto key = static_cast<std::uint64_t>(epoch_ms(t));
    v += curve.noise_sd *
         normal_hash(scenario_->seed, site_index_, (static_cast<std::uint64_t>(placement_) << 8) | qi, key);
  }
  return v;
}

TruthSample GroundTruth::at(Timestamp t) const {
  TruthSample out{};
  auto finish = [&](Quantity q, double v) {
    for (const auto* e : events_) {
      if (e->quantity != q) continue;
      const double w = e->weight(t);
      if (w == 0.0) continue;
      v = e->mode == EventMode::add ? v + w * e->magnitude : v * (1.0 + w * (e->magnitude - 1.0));
    }
    return clamp_physical(q, v);
  };
  // Uncoupled quantities first so couplings read their final values.
  for (int pass = 0; pass < 2; ++pass) {
    for (auto q : kAllQuantities) {
      const auto& curve = curves_[static_cast<std::size_t>(q)];
      if (!curve || curve->coupling.has_value() != (pass == 1)) continue;
      double v = base_value(q, *curve, t);
      if (curve->coupling) {
        v += curve->coupling->gain * (*out[static_cast<std::size_t>(curve->coupling->source)] - curve->coupling->reference);
      }
      out[static_cast<std::size_t>(q)] = finish(q, v);
    }
  }
  return out;
}

EnvironmentScenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("scenario", "must be a JSON object");
  reject_unknown(j, "scenario", {"start", "end", "utc_offset_minutes", "seed", "sites", "events", "description"});
  EnvironmentScenario s;
  s.start = timestamp(j, "start", "scenario");
  s.end = timestamp(j, "end", "scenario");
  s.utc_offset_minutes = static_cast<int>(number(j, "utc_offset_minutes", "scenario", 0.0));
  s.seed = j.contains("seed") ? j["seed"].get<std::uint64_t>() : 0;
  if (!j.contains("sites") || !j["sites"].is_array()) throw ValidationError("sites", "required array");
  for (const auto& sj : j["sites"]) {
    reject_unknown(sj, "sites", {"name", "lat", "lon", "elevation_m", "metrics", "placement"});
    Site site;
    if (!sj.contains("name") || !sj["name"].is_string()) throw ValidationError("sites.name", "required");
    site.name = sj["name"].get<std::string>();
    const auto where = "sites." + site.name;
    site.location = {number(sj, "lat", where), number(sj, "lon", where), number(sj, "elevation_m", where, 0.0)};
    if (sj.contains("metrics")) site.curves = curves_from_json(sj["metrics"], where + ".metrics");
    if (sj.contains("placement")) {
      for (const auto& [pname, pj] : sj["placement"].items()) {
        site.placement_overrides[parse_placement(pname)] = curves_from_json(pj, where + ".placement." + pname);
      }
    }
    s.sites.push_back(std::move(site));
  }
  if (j.contains("events")) {
    for (const auto& ej : j["events"]) {
      reject_unknown(ej, "events",
                     {"start", "end", "nodes", "center", "radius_m", "metric", "mode", "magnitude", "ramp_s", "label"});
      ScenarioEvent e;
      e.start = timestamp(ej, "start", "events");
      e.end = timestamp(ej, "end", "events");
      if (ej.contains("nodes")) e.node_ids = ej["nodes"].get<std::vector<std::string>>();
      if (ej.contains("center")) {
        e.center = GeoPoint{number(ej["center"], "lat", "events.center"), number(ej["center"], "lon", "events.center")};
        e.radius_m = number(ej, "radius_m", "events");
      }
      if (!ej.contains("metric") || !ej["metric"].is_string()) throw ValidationError("events.metric", "required");
      e.quantity = parse_quantity(ej["metric"].get<std::string>());
      const auto mode = ej.value("mode", std::string("add"));
      if (mode == "add") {
        e.mode = EventMode::add;
      } else if (mode == "multiply") {
        e.mode = EventMode::multiply;
      } else {
        throw ValidationError("events.mode", "expected add|multiply");
      }
      e.magnitude = number(ej, "magnitude", "events");
      e.ramp = Millis{static_cast<std::int64_t>(std::llround(number(ej, "ramp_s", "events", 0.0) * 1000.0))};
      s.events.push_back(std::move(e));
    }
  }
  s.validate();
  return s;
}

EnvironmentScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::storage, "cannot open scenario file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw ValidationError("scenario", e.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const json::exception& e) {
    throw ValidationError("scenario", e.what());
  }
}

}  // namespace qc
