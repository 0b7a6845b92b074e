#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qc {

// Portable random helpers. std::normal_distribution output differs between
// standard libraries, so Gaussian draws are built here from raw 64-bit words
// to keep emulator output identical across toolchains.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in (0, 1) from the top 53 bits; never returns 0.
constexpr double to_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double box_muller(double u1, double u2) {
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Stateless draws keyed on a tuple; used for scenario process noise so ground
// truth is a pure function of time.
constexpr std::uint64_t hash_key(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  return splitmix64(splitmix64(splitmix64(splitmix64(a) ^ b) ^ c) ^ d);
}

constexpr double unit_hash(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  return to_unit(hash_key(a, b, c, d));
}

inline double normal_hash(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  const auto h = hash_key(a, b, c, d);
  return box_muller(to_unit(h), to_unit(splitmix64(h)));
}

// Seeded sequential Gaussian stream for per-node sensor error.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    const double u1 = to_unit(engine_());
    const double u2 = to_unit(engine_());
    return box_muller(u1, u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qc
