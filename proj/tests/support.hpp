#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include "qc/store/record.hpp"
#include "qc/time.hpp"

namespace qc::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("qc-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline SampleRecord make_record(const std::string& node, Timestamp ts, double base = 20.0) {
  SampleRecord r;
  r.node_id = node;
  r.ts = ts;
  r.value(Metric::temperature_c) = base;
  r.value(Metric::humidity_pct) = 60.0;
  r.value(Metric::pressure_hpa) = 1013.25;
  r.value(Metric::lpo_ratio_pct) = 1.5;
  r.value(Metric::dust_p001cf) = 780.0;
  r.value(Metric::noise_dbspl) = 61.0;
  r.value(Metric::lux_ch0) = 1200.0;
  r.value(Metric::lux_ch1) = 900.0;
  return r;
}

inline Timestamp at(const char* iso) { return parse_iso8601(iso); }

// Valid records with adversarial numbers: extreme exponents, negative zero,
// values that need all 17 significant digits, random missing channels.
inline SampleRecord random_record(std::mt19937_64& rng) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._-";
  std::uniform_int_distribution<int> len(1, 64);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  SampleRecord r;
  const int n = len(rng);
  r.node_id = std::string(1, alphabet[pick(rng) % 62]);
  while (static_cast<int>(r.node_id.size()) < n) r.node_id += alphabet[pick(rng)];

  std::uniform_int_distribution<std::int64_t> ms(-2'000'000'000'000LL, 4'000'000'000'000LL);
  r.ts = from_epoch_ms(ms(rng));

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> style(0, 5);
  auto free_value = [&]() {
    switch (style(rng)) {
      case 0: return -0.0;
      case 1: return std::ldexp(unit(rng) - 0.5, std::uniform_int_distribution<int>(-1070, 1000)(rng));
      case 2: return std::round(unit(rng) * 2000.0 - 1000.0) / 100.0;
      case 3: return std::numeric_limits<double>::denorm_min();
      default: return (unit(rng) - 0.5) * 1e6;
    }
  };
  auto bounded = [&](double hi) {
    switch (style(rng)) {
      case 0: return 0.0;
      case 1: return hi;
      case 2: return std::nextafter(hi, 0.0);
      default: return unit(rng) * hi;
    }
  };
  r.value(Metric::temperature_c) = free_value();
  r.value(Metric::humidity_pct) = bounded(100.0);
  r.value(Metric::pressure_hpa) = free_value();
  r.value(Metric::lpo_ratio_pct) = bounded(100.0);
  r.value(Metric::dust_p001cf) = bounded(1e7);
  r.value(Metric::noise_dbspl) = free_value();
  r.value(Metric::lux_ch0) = bounded(1e5);
  r.value(Metric::lux_ch1) = bounded(1e5);
  for (auto m : kAllMetrics) {
    if (unit(rng) < 0.15) r.mark_missing(m);
  }
  r.flags.clipped = unit(rng) < 0.3;
  r.flags.contention_loss = unit(rng) < 0.3;
  return r;
}

inline bool bitwise_equal(const SampleRecord& a, const SampleRecord& b) {
  if (a.node_id != b.node_id || a.ts != b.ts || a.flags.clipped != b.flags.clipped ||
      a.flags.contention_loss != b.flags.contention_loss || a.flags.missing != b.flags.missing) {
    return false;
  }
  for (auto m : kAllMetrics) {
    const double x = a.value(m), y = b.value(m);
    if (std::isnan(x) && std::isnan(y)) continue;
    if (x != y || std::signbit(x) != std::signbit(y)) return false;
  }
  return true;
}

}  // namespace qc::test
