#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace pcgswarm {

/// 64-bit finalizer from SplitMix64 (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// FNV-1a over a label, used to turn split labels into 64-bit keys.
constexpr std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Counter-based splittable random stream.
///
/// The n-th draw is mix64(seed + n * golden_gamma), so the output depends only
/// on (seed, counter) and is identical on every platform. Child streams are
/// derived from (seed, label) without touching the parent's counter, which
/// makes them independent of whatever the parent draws afterwards.
///
/// Satisfies std::uniform_random_bit_generator, but callers that need
/// cross-platform reproducibility should use the member distributions below
/// rather than <random> distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  constexpr RngStream() noexcept = default;
  constexpr explicit RngStream(std::uint64_t seed, std::uint64_t counter = 0) noexcept
      : seed_(seed), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept { return next_u64(); }

  constexpr std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(seed_ + counter_ * kGamma);
  }

  /// Uniform integer in [0, n). Rejection sampling, so no modulo bias.
  constexpr std::uint64_t uniform_below(std::uint64_t n) noexcept {
    if (n <= 1) return 0;
    const std::uint64_t limit = max() - (max() % n + 1) % n;
    std::uint64_t x = next_u64();
    while (x > limit) x = next_u64();
    return x % n;
  }

  /// Uniform integer in [lo, hi] (inclusive).
  constexpr std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(uniform_below(span));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  constexpr bool bernoulli(double p) noexcept { return uniform01() < p; }

  [[nodiscard]] constexpr RngStream split(std::uint64_t key) const noexcept {
    return RngStream(mix64(seed_ ^ mix64(key + kGamma)));
  }
  [[nodiscard]] constexpr RngStream split(std::string_view label) const noexcept {
    return split(hash_label(label));
  }
  [[nodiscard]] constexpr RngStream split(std::string_view label,
                                          std::uint64_t index) const noexcept {
    return split(label).split(index);
  }

  [[nodiscard]] constexpr std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }

  friend constexpr bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace pcgswarm
