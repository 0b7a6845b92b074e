#include "qc/node_sim/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "qc/error.hpp"
#include "qc/node_sim/rng.hpp"

namespace qc {

namespace {

constexpr std::size_t idx(Quantity q) { return static_cast<std::size_t>(q); }

}  // namespace

std::vector<SampleRecord> simulate_node(const NodeConfig& config, const EnvironmentScenario& scenario, Timestamp t0,
                                        Timestamp t1) {
  config.validate();
  if (t1 <= t0) throw Error(ErrorCode::invalid_range, "simulation window is empty: to <= from");
  if (t0 < scenario.start || t1 > scenario.end) {
    throw Error(ErrorCode::uncovered_scenario, "scenario [" + format_iso8601(scenario.start) + ", " +
                                                   format_iso8601(scenario.end) + ") does not cover [" +
                                                   format_iso8601(t0) + ", " + format_iso8601(t1) + ")");
  }

  const GroundTruth truth(scenario, config);
  const auto& suite = config.suite;
  const Millis step{static_cast<std::int64_t>(config.sampling_interval_s) * 1000};
  const auto count = static_cast<std::size_t>((t1 - t0) / step);
  const double noise_scale = config.ideal ? 0.0 : 1.0;
  const double alpha = config.ideal ? 1.0 : suite.smoothing_alpha;
  const double undercount = contention_loss(config, config.mic_duty_cycle).lpo_undercount_fraction;
  const double c_min = lpo_to_concentration(0.0, suite.dust_curve);
  const double c_max = lpo_to_concentration(100.0, suite.dust_curve);
  const double enclosure = config.enclosure == Enclosure::acrylic_top ? kAcrylicTransmission : 1.0;
  const double ch1_fraction = suite.lux_ch1_fraction();

  NormalStream rng(config.rng_seed);
  std::vector<SampleRecord> out;
  out.reserve(count);
  std::optional<double> noise_state;

  for (std::size_t i = 0; i < count; ++i) {
    const Timestamp t = t0 + step * static_cast<std::int64_t>(i);
    const auto gt = truth.at(t);
    // Fixed draw order keeps the stream aligned whatever channels exist.
    const double e_temp = rng.next();
    const double e_hum = rng.next();
    const double e_pres = rng.next();

    SampleRecord r;
    r.node_id = config.node_id;
    r.ts = t;

    if (auto v = gt[idx(Quantity::temperature_c)]) {
      r.temperature_c = *v + noise_scale * (suite.temp_accuracy_c / 2.0) * e_temp;
    } else {
      r.mark_missing(Metric::temperature_c);
    }

    if (auto v = gt[idx(Quantity::humidity_pct)]) {
      const double raw = *v + noise_scale * (suite.humidity_accuracy_pct / 2.0) * e_hum;
      r.humidity_pct = std::clamp(raw, 0.0, 100.0);
      if (r.humidity_pct != raw) r.flags.clipped = true;
    } else {
      r.mark_missing(Metric::humidity_pct);
    }

    if (auto v = gt[idx(Quantity::pressure_hpa)]) {
      r.pressure_hpa = *v + noise_scale * (suite.pressure_accuracy_hpa / 2.0) * e_pres;
    } else {
      r.mark_missing(Metric::pressure_hpa);
    }

    if (auto v = gt[idx(Quantity::dust_p001cf)]) {
      double c = *v;
      if (c > c_max) {
        c = c_max;
        r.flags.clipped = true;
      }
      c = std::max(c, c_min);
      const double lpo = concentration_to_lpo(c, suite.dust_curve) * (1.0 - undercount);
      r.lpo_ratio_pct = lpo;
      r.dust_p001cf = lpo_to_concentration(lpo, suite.dust_curve);
      if (undercount > 0.0) r.flags.contention_loss = true;
    } else {
      r.mark_missing(Metric::lpo_ratio_pct);
      r.mark_missing(Metric::dust_p001cf);
    }

    if (auto v = gt[idx(Quantity::noise_dbspl)]) {
      double db = *v;
      if (!config.ideal) {
        const double amplified = dbspl_to_mic_rms(*v, suite.mic_sensitivity_dbv) * suite.mic_preamp_gain;
        if (amplified >= suite.adc_reference_v) r.flags.clipped = true;
        const double q = quantize_adc(amplified, suite.adc_bits, suite.adc_reference_v);
        db = mic_rms_to_dbspl(q / suite.mic_preamp_gain, suite.mic_sensitivity_dbv);
      }
      noise_state = noise_state ? alpha * db + (1.0 - alpha) * *noise_state : db;
      r.noise_dbspl = *noise_state;
    } else {
      r.mark_missing(Metric::noise_dbspl);
    }

    if (auto v = gt[idx(Quantity::illuminance)]) {
      r.lux_ch0 = *v * enclosure;
      r.lux_ch1 = r.lux_ch0 * ch1_fraction;
    } else {
      r.mark_missing(Metric::lux_ch0);
      r.mark_missing(Metric::lux_ch1);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace qc
