#pragma once

#include <cmath>
#include <cstdint>

namespace momsens {

// SplitMix64 output function.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Counter-based stream keyed by (seed, stream1, stream2). Every draw is a pure
// function of the key and a local counter, so datasets are identical under any
// evaluation schedule: row i of a simulation uses stream (seed, i) regardless
// of which thread or order produced it.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream1 = 0,
                      std::uint64_t stream2 = 0) {
    key_ = mix64(seed + kGolden);
    key_ = mix64(key_ ^ (stream1 + 0xD1B54A32D192ED03ULL));
    key_ = mix64(key_ ^ (stream2 + 0x8CB92BA72F3D8DD7ULL));
  }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Standard normal via Box-Muller; the second member of each pair is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // Exponential with mean 1.
  double exponential() { return -std::log(uniform()); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace momsens
