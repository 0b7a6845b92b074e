#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qc/node_sim/sensors.hpp"
#include "qc/time.hpp"

namespace qc {

// Physical quantities a scenario describes. The emulator turns them into the
// record's channels (dust concentration feeds both LPO and dust_p001cf,
// illuminance feeds both lux channels).
enum class Quantity { temperature_c, humidity_pct, pressure_hpa, dust_p001cf, noise_dbspl, illuminance };

inline constexpr std::size_t kQuantityCount = 6;
inline constexpr std::array<Quantity, kQuantityCount> kAllQuantities{
    Quantity::temperature_c, Quantity::humidity_pct, Quantity::pressure_hpa,
    Quantity::dust_p001cf,   Quantity::noise_dbspl,  Quantity::illuminance};

std::string_view to_string(Quantity q);
Quantity parse_quantity(std::string_view name);

// amplitude * cos(2*pi*(h - peak_hour)/24), h = local hour of day.
struct DiurnalTerm {
  double amplitude = 0.0;
  double peak_hour = 0.0;
};

// Raised-cosine bump: 0 before start_hour, rises to amplitude at peak_hour,
// falls back to 0 at end_hour. Hours may run past 24 to cross midnight.
struct PulseTerm {
  double amplitude = 0.0;
  double start_hour = 0.0;
  double peak_hour = 0.0;
  double end_hour = 0.0;
};

// value += gain * (source - reference)
struct Coupling {
  Quantity source = Quantity::humidity_pct;
  double gain = 0.0;
  double reference = 0.0;
};

// Sum of parametric components evaluated at local time.
struct Curve {
  double mean = 0.0;
  std::vector<DiurnalTerm> diurnal;
  std::vector<PulseTerm> pulses;
  double weekend_offset = 0.0;
  std::optional<Coupling> coupling;
  double noise_sd = 0.0;         // i.i.d. Gaussian process noise
  double drift_amplitude = 0.0;  // bounded multi-hour wander

  // Layers another curve on top: means and offsets add, term lists
  // concatenate, noise adds in quadrature, a present coupling replaces.
  void merge(const Curve& over);
};

struct Site {
  std::string name;
  GeoPoint location;
  std::map<Quantity, Curve> curves;
  std::map<Placement, std::map<Quantity, Curve>> placement_overrides;
};

enum class EventMode { add, multiply };

struct ScenarioEvent {
  Timestamp start{};
  Timestamp end{};
  std::vector<std::string> node_ids;  // explicit targets, or
  std::optional<GeoPoint> center;     // everything within radius_m of center
  double radius_m = 0.0;
  Quantity quantity = Quantity::dust_p001cf;
  EventMode mode = EventMode::add;
  double magnitude = 0.0;
  Millis ramp{0};  // linear onset/decay inside [start, end)

  bool targets(const NodeConfig& node) const;
  // 0 outside [start, end), 1 on the plateau.
  double weight(Timestamp t) const;
};

struct EnvironmentScenario {
  Timestamp start{};
  Timestamp end{};
  int utc_offset_minutes = 0;
  std::uint64_t seed = 0;
  std::vector<Site> sites;
  std::vector<ScenarioEvent> events;

  void validate() const;
  const Site& site_for(const NodeConfig& node) const;
};

using TruthSample = std::array<std::optional<double>, kQuantityCount>;

// The scenario's ground truth as one node experiences it: the node's site
// curves merged with its placement overrides, plus the events that target it.
class GroundTruth {
 public:
  GroundTruth(const EnvironmentScenario& scenario, const NodeConfig& node);

  TruthSample at(Timestamp t) const;

 private:
  double base_value(Quantity q, const Curve& curve, Timestamp t) const;

  const EnvironmentScenario* scenario_;
  std::size_t site_index_;
  Placement placement_;
  std::array<std::optional<Curve>, kQuantityCount> curves_;
  std::vector<const ScenarioEvent*> events_;
};

// Schema documented in docs/scenario.md.
EnvironmentScenario scenario_from_json(const nlohmann::json& j);
EnvironmentScenario load_scenario(const std::filesystem::path& path);

}  // namespace qc
