#include <algorithm>

#include "qc/error.hpp"
#include "qc/node_sim/simulate.hpp"

namespace qc {

namespace {

using nlohmann::json;

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(key, "wrong type");
  }
}

SensorSuiteSpec suite_from_json(const json& j) {
  SensorSuiteSpec s;
  if (!j.is_object()) throw ValidationError("suite", "must be an object");
  read(j, "temp_accuracy_c", s.temp_accuracy_c);
  read(j, "humidity_accuracy_pct", s.humidity_accuracy_pct);
  read(j, "pressure_accuracy_hpa", s.pressure_accuracy_hpa);
  read(j, "mic_sensitivity_dbv", s.mic_sensitivity_dbv);
  read(j, "mic_band_hz", s.mic_band_hz);
  read(j, "mic_sample_rate_hz", s.mic_sample_rate_hz);
  read(j, "mic_preamp_gain", s.mic_preamp_gain);
  read(j, "smoothing_alpha", s.smoothing_alpha);
  read(j, "adc_bits", s.adc_bits);
  read(j, "adc_reference_v", s.adc_reference_v);
  read(j, "dust_min_particle_um", s.dust_min_particle_um);
  if (j.contains("lux_channels")) {
    const auto& lc = j["lux_channels"];
    if (!lc.is_array() || lc.size() != 2) throw ValidationError("suite.lux_channels", "need two bands");
    for (std::size_t i = 0; i < 2; ++i) {
      const auto band = lc[i].at("band_nm").get<std::array<double, 2>>();
      s.lux_channels[i] = {band[0], band[1]};
    }
  }
  if (j.contains("dust_curve")) {
    const auto c = j["dust_curve"].get<std::array<double, 4>>();
    s.dust_curve = {c[0], c[1], c[2], c[3]};
  }
  if (j.contains("loads")) {
    s.loads.clear();
    for (const auto& l : j["loads"]) {
      s.loads.push_back({l.at("name").get<std::string>(), l.at("current_ma").get<double>(), l.value("enabled", true)});
    }
  }
  if (j.contains("disabled_loads")) {
    for (const auto& name : j["disabled_loads"].get<std::vector<std::string>>()) {
      auto it = std::find_if(s.loads.begin(), s.loads.end(), [&](const PowerLoad& l) { return l.name == name; });
      if (it == s.loads.end()) throw ValidationError("suite.disabled_loads", "unknown load '" + name + "'");
      it->enabled = false;
    }
  }
  return s;
}

}  // namespace

NodeConfig node_config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("node", "must be an object");
  NodeConfig c;
  try {
    read(j, "node_id", c.node_id);
    read(j, "lat", c.location.lat);
    read(j, "lon", c.location.lon);
    read(j, "elevation_m", c.location.elevation_m);
    if (j.contains("placement")) c.placement = parse_placement(j["placement"].get<std::string>());
    if (j.contains("enclosure")) c.enclosure = parse_enclosure(j["enclosure"].get<std::string>());
    read(j, "sampling_interval_s", c.sampling_interval_s);
    read(j, "mcu_count", c.mcu_count);
    read(j, "rng_seed", c.rng_seed);
    read(j, "mic_duty_cycle", c.mic_duty_cycle);
    read(j, "ideal", c.ideal);
    read(j, "site", c.site);
    if (j.contains("suite")) c.suite = suite_from_json(j["suite"]);
  } catch (const json::exception& e) {
    throw ValidationError("node", e.what());
  }
  c.validate();
  return c;
}

json node_config_to_json(const NodeConfig& c) {
  json loads = json::array();
  for (const auto& l : c.suite.loads) loads.push_back({{"name", l.name}, {"current_ma", l.current_ma}, {"enabled", l.enabled}});
  return {
      {"node_id", c.node_id},
      {"lat", c.location.lat},
      {"lon", c.location.lon},
      {"elevation_m", c.location.elevation_m},
      {"placement", std::string(to_string(c.placement))},
      {"enclosure", std::string(to_string(c.enclosure))},
      {"sampling_interval_s", c.sampling_interval_s},
      {"mcu_count", c.mcu_count},
      {"rng_seed", c.rng_seed},
      {"mic_duty_cycle", c.mic_duty_cycle},
      {"ideal", c.ideal},
      {"site", c.site},
      {"suite", {{"loads", loads}}},
  };
}

}  // namespace qc
