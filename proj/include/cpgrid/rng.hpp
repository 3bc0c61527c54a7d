#pragma once

#include <cmath>
#include <cstdint>

namespace cpgrid {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// SplitMix64 stream: state advances by the golden-ratio increment
/// 0x9E3779B97F4A7C15 and each output is mix64(state).
///
/// Sub-stream i of a run seeded with s starts from state
///   mix64(s ^ mix64(i + 0x632BE59BD9B4E019)),
/// so samples can be generated independently and in any order.
///
/// Uniform doubles take the top 53 bits: (x >> 11) * 2^-53, in [0, 1).
/// Gaussian draws use the Marsaglia polar method; each accepted pair yields
/// two deviates, the second cached for the next call.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t state = 0) noexcept : state_(state) {}

  static constexpr SplitMix64 substream(std::uint64_t seed, std::uint64_t index) noexcept {
    return SplitMix64(mix64(seed ^ mix64(index + 0x632BE59BD9B4E019ULL)));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  double gaussian() noexcept {
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

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cpgrid
