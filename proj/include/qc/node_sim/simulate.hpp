#pragma once

#include <vector>

#include "json.hpp"
#include "qc/node_sim/scenario.hpp"
#include "qc/node_sim/sensors.hpp"
#include "qc/store/record.hpp"
#include "qc/time.hpp"

namespace qc {

// Emits floor((t1 - t0) / interval) records at t0, t0 + interval, ...
//
// Per sample: temperature, humidity and pressure get Gaussian error with
// sigma = accuracy / 2 (humidity clipped to [0, 100]); dust concentration is
// inverted to an LPO ratio, reduced by the contention undercount and mapped
// back through the curve; noise is converted to a microphone voltage,
// amplified, quantized by the ADC and smoothed; luminosity passes the
// enclosure. Quantities the scenario leaves undefined become missing channels.
//
// Throws invalid-range when t1 <= t0 and uncovered-scenario when the scenario
// does not span [t0, t1).
std::vector<SampleRecord> simulate_node(const NodeConfig& config, const EnvironmentScenario& scenario, Timestamp t0,
                                        Timestamp t1);

NodeConfig node_config_from_json(const nlohmann::json& j);
nlohmann::json node_config_to_json(const NodeConfig& config);

}  // namespace qc
