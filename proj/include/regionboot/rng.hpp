#pragma once

// Counter-based random numbers for reproducible parallel Monte Carlo.
//
// Generator: Philox4x32-10 (Salmon et al., SC'11). A 64-bit key and a
// 128-bit counter map to four 32-bit outputs; the counter space gives a
// period of 2^128 blocks per key. Streams are split by counter words, not
// by sequential skipping:
//
//   key     = (master seed low 32, master seed high 32)
//   counter = (block low 32, block high 32, chunk index, stream index)
//
// The stream index encodes the bootstrap scale index (and a tag bit for
// nested levels), the chunk index names a fixed-size block of replicates.
// Any (seed, stream, chunk) triple therefore addresses the same draws no
// matter how chunks are scheduled across threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace regionboot {

using Philox4x32Block = std::array<std::uint32_t, 4>;

/// One Philox4x32-10 evaluation.
inline Philox4x32Block philox4x32_10(Philox4x32Block ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// SplitMix64 finalizer, used to derive keys for nested streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Sequential normal variates from one (seed, stream, chunk) substream.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint32_t stream, std::uint32_t chunk)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream),
        chunk_(chunk) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const Philox4x32Block r = philox4x32_10(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), chunk_, stream_},
        key_);
    ++block_;
    const double u1 = to_unit(r[0], r[1]);
    const double u2 = to_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  // 53-bit uniform in (0, 1).
  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_;
  std::uint32_t chunk_;
  std::uint64_t block_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace regionboot
