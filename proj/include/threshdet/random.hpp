#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace threshdet {

/// Seedable random stream: xoshiro256++ state seeded through SplitMix64.
///
/// Stream derivation rule (fixed across releases, required for reproducible
/// parallel Monte Carlo): the four state words are four successive SplitMix64
/// outputs starting from
///
///     seed + 0x9E3779B97F4A7C15 * (stream_id + 1)   (mod 2^64)
///
/// so that (seed, stream_id) fully determines the stream and distinct
/// stream_ids give statistically independent sequences. Workers never share
/// a stream; each Monte Carlo trial owns stream_id == trial index.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream_id + 1);
    for (auto& word : state_) word = splitmix(z);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_open() noexcept { return 1.0 - uniform(); }

  /// Standard normal via Box-Muller; generates pairs and caches the spare.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t splitmix(std::uint64_t& z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    std::uint64_t x = z;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  static std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace threshdet
