#pragma once

#include <cstdint>
#include <limits>

namespace ibnr {

/// SplitMix64 output function (Steele, Lea & Flood 2014, Stafford mix 13).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based SplitMix64 stream. The n-th output is a pure function of
/// (key, n), so a stream can be re-created anywhere from its key alone.
/// Satisfies UniformRandomBitGenerator for use with <random> distributions.
class CounterRng {
public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

  constexpr explicit CounterRng(std::uint64_t key = 0) noexcept : key_(key) {}

  /// Independent substream for (seed, a, b, ...). Order of the ids matters.
  template <typename... Ids>
  static constexpr CounterRng substream(std::uint64_t seed, Ids... ids) noexcept {
    std::uint64_t key = splitmix64_mix(seed + golden_gamma);
    ((key = splitmix64_mix(key ^ splitmix64_mix(static_cast<std::uint64_t>(ids) + golden_gamma))), ...);
    return CounterRng(key);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return splitmix64_mix(key_ + counter_ * golden_gamma);
  }

  /// Uniform double on the open interval (0, 1).
  constexpr double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ibnr
