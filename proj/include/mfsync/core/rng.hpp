#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace mfsync {

/// Counter-based generator: the i-th output of a stream is the SplitMix64
/// finalizer applied to key + (i+1)*golden_gamma. Streams are addressed by
/// key, so any (trial, edge, channel) tuple gets an independent sequence
/// without depending on the order in which other streams are consumed.
///
/// Satisfies UniformRandomBitGenerator. The floating-point helpers below are
/// implemented here rather than via <random> distributions so that streams are
/// reproducible across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

  explicit Rng(std::uint64_t key = 0) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  result_type operator()() noexcept {
    ++counter_;
    return mix(key_ + counter_ * golden_gamma);
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Child stream keyed by (this key, id); does not advance this generator.
  Rng stream(std::uint64_t id) const noexcept { return Rng(derive_key(key_, id)); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform angle on [0, 2pi).
  double angle() noexcept { return 2.0 * std::numbers::pi * uniform(); }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Standard normal via Box-Muller; consumes two draws per call.
  double normal() noexcept {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  static constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t id) noexcept {
    return mix(parent ^ mix(id + 0x632BE59BD9B4E019ULL));
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// FNV-1a over a tag, for naming sub-streams ("truth", "graph", ...).
constexpr std::uint64_t stream_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace mfsync
