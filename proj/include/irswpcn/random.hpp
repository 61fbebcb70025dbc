// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random streams. Every stream is addressed by (seed, tag, index),
// so draws for one device never depend on how many other devices exist or on
// the order in which streams are consumed.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace irswpcn {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
  // FNV-1a
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// SplitMix64 stream. Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr RandomStream(std::uint64_t key) noexcept : key_(key) {}

  /// Derive an independent stream addressed by a tag and an index.
  static constexpr RandomStream derive(std::uint64_t seed, std::string_view tag,
                                       std::uint64_t index = 0) noexcept {
    return RandomStream(splitmix64(splitmix64(seed ^ hash_tag(tag)) + splitmix64(index + 1)));
  }

  constexpr RandomStream fork(std::string_view tag, std::uint64_t index = 0) const noexcept {
    return derive(key_, tag, index);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

  /// Uniform in [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one value per call, the sine branch is dropped).
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
  std::complex<double> complex_normal() noexcept {
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
  }

  /// Uniform phase on the unit circle.
  std::complex<double> unit_phase() noexcept { return std::polar(1.0, 2.0 * std::numbers::pi * uniform()); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace irswpcn
