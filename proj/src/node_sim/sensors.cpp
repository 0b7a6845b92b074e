#include "qc/node_sim/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qc/error.hpp"
#include "qc/store/record.hpp"

namespace qc {

std::string_view to_string(Placement placement) {
  switch (placement) {
    case Placement::roof: return "roof";
    case Placement::ground: return "ground";
    case Placement::indoor: return "indoor";
  }
  return "ground";
}

Placement parse_placement(std::string_view text) {
  if (text == "roof") return Placement::roof;
  if (text == "ground") return Placement::ground;
  if (text == "indoor") return Placement::indoor;
  throw ValidationError("placement", "expected roof|ground|indoor, got '" + std::string(text) + "'");
}

std::string_view to_string(Enclosure enclosure) {
  return enclosure == Enclosure::acrylic_top ? "acrylic_top" : "bare";
}

Enclosure parse_enclosure(std::string_view text) {
  if (text == "bare") return Enclosure::bare;
  if (text == "acrylic_top") return Enclosure::acrylic_top;
  throw ValidationError("enclosure", "expected bare|acrylic_top, got '" + std::string(text) + "'");
}

double distance_m(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kEarthRadiusM = 6371008.8;
  constexpr double kRad = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * kRad;
  const double dlon = (b.lon - a.lon) * kRad;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat * kRad) * std::cos(b.lat * kRad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

void DustCurve::validate() const {
  // c'(r) = 3*c3*r^2 + 2*c2*r + c1 must stay positive on [0, 100]; check the
  // endpoints and the vertex of the quadratic.
  auto slope = [&](double r) { return 3.0 * c3 * r * r + 2.0 * c2 * r + c1; };
  double lowest = std::min(slope(0.0), slope(100.0));
  if (c3 != 0.0) {
    const double vertex = -c2 / (3.0 * c3);
    if (vertex > 0.0 && vertex < 100.0) lowest = std::min(lowest, slope(vertex));
  }
  if (!(lowest > 0.0)) throw Error(ErrorCode::invalid_parameter, "dust curve is not strictly increasing on [0, 100]");
}

void SensorSuiteSpec::validate() const {
  if (!(temp_accuracy_c > 0 && humidity_accuracy_pct > 0 && pressure_accuracy_hpa > 0)) {
    throw ValidationError("suite.accuracy", "accuracy values must be > 0");
  }
  if (adc_bits <= 0 || adc_bits > 31) throw ValidationError("suite.adc_bits", "must be in [1, 31]");
  if (!(adc_reference_v > 0)) throw ValidationError("suite.adc_reference_v", "must be > 0");
  if (!(mic_band_hz[0] > 0 && mic_band_hz[1] > mic_band_hz[0])) {
    throw ValidationError("suite.mic_band_hz", "must be an increasing positive interval");
  }
  if (!(mic_sample_rate_hz > 2.0 * mic_band_hz[1])) {
    throw ValidationError("suite.mic_sample_rate_hz", "must exceed twice the upper band edge");
  }
  if (!(mic_preamp_gain > 0)) throw ValidationError("suite.mic_preamp_gain", "must be > 0");
  if (!(smoothing_alpha > 0 && smoothing_alpha <= 1)) {
    throw ValidationError("suite.smoothing_alpha", "must lie in (0, 1]");
  }
  for (const auto& band : lux_channels) {
    if (!(band.lo_nm > 0 && band.hi_nm > band.lo_nm)) {
      throw ValidationError("suite.lux_channels", "bands must be increasing positive intervals");
    }
  }
  if (lux_channels[1].lo_nm < lux_channels[0].lo_nm || lux_channels[1].hi_nm > lux_channels[0].hi_nm) {
    throw ValidationError("suite.lux_channels", "channel 1 band must lie inside channel 0 band");
  }
  for (const auto& load : loads) {
    if (!(load.current_ma >= 0)) throw ValidationError("suite.loads", "current draw must be >= 0");
  }
  dust_curve.validate();
}

double SensorSuiteSpec::lux_ch1_fraction() const {
  const auto& wide = lux_channels[0];
  const auto& narrow = lux_channels[1];
  return (narrow.hi_nm - narrow.lo_nm) / (wide.hi_nm - wide.lo_nm);
}

void NodeConfig::validate() const {
  if (!valid_node_id(node_id)) throw ValidationError("node_id", "must be 1-64 chars of [A-Za-z0-9._-]");
  if (sampling_interval_s < 1) throw ValidationError("sampling_interval_s", "must be >= 1");
  if (mcu_count != 1 && mcu_count != 2) throw ValidationError("mcu_count", "must be 1 or 2");
  if (!(mic_duty_cycle >= 0 && mic_duty_cycle <= 1)) throw ValidationError("mic_duty_cycle", "must lie in [0, 1]");
  if (!(location.lat >= -90 && location.lat <= 90 && location.lon >= -180 && location.lon <= 180)) {
    throw ValidationError("location", "latitude/longitude out of range");
  }
  suite.validate();
}

double lpo_to_concentration(double r, const DustCurve& curve) {
  if (!(r >= 0.0 && r <= 100.0)) throw Error(ErrorCode::out_of_range, "LPO ratio must lie in [0, 100]");
  return ((curve.c3 * r + curve.c2) * r + curve.c1) * r + curve.c0;
}

double concentration_to_lpo(double c, const DustCurve& curve) {
  const double c_min = lpo_to_concentration(0.0, curve);
  const double c_max = lpo_to_concentration(100.0, curve);
  if (!(c >= c_min && c <= c_max)) {
    throw Error(ErrorCode::out_of_range, "concentration outside the curve's range [c(0), c(100)]");
  }
  if (c == c_min) return 0.0;
  if (c == c_max) return 100.0;
  double lo = 0.0;
  double hi = 100.0;
  // Bisect until the bracket cannot shrink further in double precision.
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (lpo_to_concentration(mid, curve) < c) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double f_lo = c - lpo_to_concentration(lo, curve);
  const double f_hi = lpo_to_concentration(hi, curve) - c;
  return f_lo <= f_hi ? lo : hi;
}

double mic_rms_to_dbspl(double v_rms, double sensitivity_dbv) {
  if (!(v_rms > 0.0)) throw Error(ErrorCode::non_positive_signal, "microphone RMS voltage must be > 0");
  return kReferenceSpl + 20.0 * std::log10(v_rms / std::pow(10.0, sensitivity_dbv / 20.0));
}

double dbspl_to_mic_rms(double dbspl, double sensitivity_dbv) {
  return std::pow(10.0, sensitivity_dbv / 20.0) * std::pow(10.0, (dbspl - kReferenceSpl) / 20.0);
}

std::vector<double> smooth(std::span<const double> series, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::invalid_parameter, "alpha must lie in (0, 1]");
  if (series.empty()) throw Error(ErrorCode::empty_input, "cannot smooth an empty series");
  std::vector<double> out;
  out.reserve(series.size());
  out.push_back(series[0]);
  for (std::size_t i = 1; i < series.size(); ++i) out.push_back(alpha * series[i] + (1.0 - alpha) * out.back());
  return out;
}

double quantize_adc(double volts, int bits, double reference_v) {
  if (bits <= 0 || bits > 31 || !(reference_v > 0)) throw Error(ErrorCode::invalid_parameter, "bad ADC parameters");
  const double levels = std::ldexp(1.0, bits);
  const double lsb = reference_v / levels;
  const double code = std::clamp(std::floor(volts / lsb), 0.0, levels - 1.0);
  return (code + 0.5) * lsb;
}

double battery_life_hours(const NodeConfig& config, double battery_mah) {
  if (!(battery_mah > 0.0)) throw Error(ErrorCode::invalid_capacity, "battery capacity must be > 0 mAh");
  double draw = 0.0;
  for (const auto& load : config.suite.loads) {
    if (load.enabled) draw += load.current_ma;
  }
  if (!(draw > 0.0)) throw Error(ErrorCode::zero_draw, "no enabled load draws current");
  return battery_mah / draw;
}

ContentionReport contention_loss(const NodeConfig& config, double noise_duty_cycle) {
  if (!(noise_duty_cycle >= 0.0 && noise_duty_cycle <= 1.0)) {
    throw Error(ErrorCode::invalid_parameter, "noise duty cycle must lie in [0, 1]");
  }
  // A dedicated noise controller leaves the LPO interrupt undisturbed; a
  // single controller misses pulses while it samples the microphone.
  return ContentionReport{config.mcu_count == 2 ? 0.0 : noise_duty_cycle};
}

}  // namespace qc
