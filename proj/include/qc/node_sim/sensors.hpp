#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qc {

enum class Placement { roof, ground, indoor };
enum class Enclosure { bare, acrylic_top };

std::string_view to_string(Placement placement);
Placement parse_placement(std::string_view text);
std::string_view to_string(Enclosure enclosure);
Enclosure parse_enclosure(std::string_view text);

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  double elevation_m = 0.0;
};

// Great-circle distance in metres (elevation ignored).
double distance_m(const GeoPoint& a, const GeoPoint& b);

struct WavelengthBand {
  double lo_nm = 0.0;
  double hi_nm = 0.0;
};

struct PowerLoad {
  std::string name;
  double current_ma = 0.0;
  bool enabled = true;
};

// Replaceable LPO-to-concentration calibration curve:
// c(r) = c3*r^3 + c2*r^2 + c1*r + c0, r in percent LPO, c in particles/0.01 ft^3.
struct DustCurve {
  double c3 = 1.1;
  double c2 = -3.8;
  double c1 = 520.0;
  double c0 = 0.62;

  // Throws invalid-parameter unless the curve is strictly increasing on [0, 100].
  void validate() const;
};

struct SensorSuiteSpec {
  double temp_accuracy_c = 0.5;
  double humidity_accuracy_pct = 3.0;
  double pressure_accuracy_hpa = 1.0;

  double mic_sensitivity_dbv = -42.0;
  std::array<double, 2> mic_band_hz{100.0, 15000.0};
  double mic_sample_rate_hz = 60000.0;
  double mic_preamp_gain = 100.0;
  double smoothing_alpha = 0.2;

  int adc_bits = 10;
  double adc_reference_v = 3.3;

  std::array<WavelengthBand, 2> lux_channels{{{300.0, 1100.0}, {500.0, 1100.0}}};

  double dust_min_particle_um = 0.1;
  DustCurve dust_curve{};

  std::vector<PowerLoad> loads{{"dust", 90.0, true}, {"controller", 30.0, true}, {"sensors", 10.0, true}};

  void validate() const;

  // Share of channel 0's flat-spectrum response seen by channel 1.
  double lux_ch1_fraction() const;
};

struct NodeConfig {
  std::string node_id;
  GeoPoint location;
  Placement placement = Placement::ground;
  SensorSuiteSpec suite;
  int sampling_interval_s = 5;
  int mcu_count = 2;
  Enclosure enclosure = Enclosure::bare;
  std::uint64_t rng_seed = 0;
  // Fraction of time a single controller spends servicing the microphone.
  double mic_duty_cycle = 0.5;
  // Zero-noise mode: no Gaussian error, no ADC quantization, no smoothing.
  bool ideal = false;
  // Scenario site to draw ground truth from; empty selects the nearest site.
  std::string site;

  void validate() const;
};

inline constexpr double kAcrylicTransmission = 0.9;
inline constexpr double kReferenceSpl = 94.0;
inline constexpr double kDefaultBatteryMah = 550.0;

double lpo_to_concentration(double lpo_ratio_pct, const DustCurve& curve = {});
double concentration_to_lpo(double concentration, const DustCurve& curve = {});

double mic_rms_to_dbspl(double v_rms, double sensitivity_dbv);
double dbspl_to_mic_rms(double dbspl, double sensitivity_dbv);

// Exponential moving average, y0 = x0, yi = alpha*xi + (1-alpha)*y(i-1).
std::vector<double> smooth(std::span<const double> series, double alpha);

// Mid-tread reconstruction of an ideal ADC: the input is clamped to
// [0, reference), mapped to one of 2^bits codes and returned as the code's
// centre voltage.
double quantize_adc(double volts, int bits, double reference_v);

double battery_life_hours(const NodeConfig& config, double battery_mah = kDefaultBatteryMah);

struct ContentionReport {
  double lpo_undercount_fraction = 0.0;
};

ContentionReport contention_loss(const NodeConfig& config, double noise_duty_cycle);

}  // namespace qc
