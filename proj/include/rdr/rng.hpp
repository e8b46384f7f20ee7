#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace rdr {

/// Counter-based SplitMix64 stream. Draw k (0-based) is
/// mix(seed + (k + 1) * 0x9E3779B97F4A7C15), so a stream is fully described by
/// (seed, draw count) and reproduces bit-for-bit on every platform.
///
/// Normal variates use the Marsaglia polar method, which needs only log and
/// sqrt; std::normal_distribution is implementation-defined and would break
/// cross-platform reproducibility.
class SeededRng {
 public:
  using result_type = std::uint64_t;
  static constexpr std::string_view kAlgorithm = "splitmix64";

  explicit SeededRng(std::uint64_t seed) : seed_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    ++draws_;
    std::uint64_t z = seed_ + draws_ * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool coin() { return (next_u64() >> 63) != 0; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

 private:
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rdr
