#pragma once

// Reproducible random streams.
//
// Every stream is a std::mt19937_64 engine whose 64-bit seed is derived from
// a base seed and a tuple of stream identifiers through the SplitMix64
// finalizer. Standard normals are produced with the Box-Muller transform on
// 53-bit uniforms, so the output sequence depends only on the seed and not on
// the standard library implementation (std::normal_distribution is
// implementation-defined).

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace bqr {

/// SplitMix64 output function applied to a single 64-bit state.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed for the stream identified by `ids` under `base`.
/// Distinct id tuples give statistically independent streams.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> ids) noexcept {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t id : ids) {
    h = splitmix64(h ^ splitmix64(id + 0x632BE59BD9B4E019ULL));
  }
  return h;
}

/// Stream tags used by the observation model.
enum class Stream : std::uint64_t {
  terminal_errors = 1,
  source_paths = 2,
  coefficient_paths = 3,
};

class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on (0, 1], 53-bit resolution.
  double uniform_open0() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double standard_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open0();
    const double u2 = uniform_open0();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bqr
