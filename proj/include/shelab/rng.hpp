#pragma once

// Counter-based random numbers: Philox-4x32 with 10 rounds.
//
// Every variate is addressed, not streamed: a stream is identified by a
// 64-bit key and a 64-bit substream word, and the i-th draw inside the stream
// is a pure function of (key, substream, i).  That makes every consumer
// reproducible regardless of evaluation order, thread count, or how many
// draws some other consumer took.  Streams for distinct purposes are derived
// from the user seed through a splitmix-style mixer together with a domain
// tag, so adding a new consumer never shifts anybody else's numbers.
//
// Gaussians come from Box-Muller applied to consecutive 53-bit uniforms of
// one 128-bit Philox block (two normals per block).

#include <array>
#include <cmath>
#include <cstdint>

namespace shelab {

namespace detail {

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                      std::uint32_t& lo) {
  const std::uint64_t p =
      static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b);
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace detail

// One 10-round Philox-4x32 block: 128-bit counter, 64-bit key, 128-bit output.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    detail::mulhilo32(kMul0, ctr[0], hi0, lo0);
    detail::mulhilo32(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

// splitmix64 finalizer; used to derive stream keys from (seed, tag, index).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Domain tags keep independent consumers of the same seed on disjoint keys.
namespace rng_domain {
inline constexpr std::uint64_t kNoise = 0x6e6f697365ull;        // path noise
inline constexpr std::uint64_t kBootstrap = 0x626f6f74ull;      // KDE bootstrap
inline constexpr std::uint64_t kEllipticity = 0x656c6c69ull;    // state sampling
inline constexpr std::uint64_t kSynthetic = 0x73796e74ull;      // test fixtures
}  // namespace rng_domain

inline std::uint64_t derive_stream_key(std::uint64_t seed, std::uint64_t domain,
                                       std::uint64_t index) {
  return mix64(mix64(mix64(seed) ^ domain) ^ index);
}

// A random-access stream of 64-bit words / uniforms / standard normals.
// Draw i is independent of all other draws and of access order.  The last
// generated block is cached so that sequential access costs one Philox call
// per two 64-bit words.
class CounterRng {
 public:
  CounterRng(std::uint64_t key, std::uint64_t substream)
      : key_{static_cast<std::uint32_t>(key),
             static_cast<std::uint32_t>(key >> 32)},
        sub_{static_cast<std::uint32_t>(substream),
             static_cast<std::uint32_t>(substream >> 32)} {}

  std::uint64_t u64_at(std::uint64_t i) const {
    const std::uint64_t block = i >> 1;
    refresh(block);
    return (i & 1u) ? word1_ : word0_;
  }

  // Open-interval uniform on (0,1): 53 significant bits, never 0 or 1.
  double uniform_at(std::uint64_t i) const {
    return (static_cast<double>(u64_at(i) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal; draws 2p and 2p+1 share the Box-Muller pair p.
  double normal_at(std::uint64_t i) const {
    const std::uint64_t pair = i >> 1;
    if (!have_pair_ || pair != pair_idx_) {
      const double u1 = uniform_at(2 * pair);
      const double u2 = uniform_at(2 * pair + 1);
      const double radius = std::sqrt(-2.0 * std::log(u1));
      const double angle = 2.0 * M_PI * u2;
      z0_ = radius * std::cos(angle);
      z1_ = radius * std::sin(angle);
      pair_idx_ = pair;
      have_pair_ = true;
    }
    return (i & 1u) ? z1_ : z0_;
  }

 private:
  void refresh(std::uint64_t block) const {
    if (have_block_ && block == block_idx_) return;
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block),
        static_cast<std::uint32_t>(block >> 32), sub_[0], sub_[1]};
    const std::array<std::uint32_t, 4> out = philox4x32(ctr, key_);
    word0_ = static_cast<std::uint64_t>(out[0]) |
             (static_cast<std::uint64_t>(out[1]) << 32);
    word1_ = static_cast<std::uint64_t>(out[2]) |
             (static_cast<std::uint64_t>(out[3]) << 32);
    block_idx_ = block;
    have_block_ = true;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> sub_;
  mutable std::uint64_t block_idx_ = 0;
  mutable std::uint64_t word0_ = 0, word1_ = 0;
  mutable bool have_block_ = false;
  mutable std::uint64_t pair_idx_ = 0;
  mutable double z0_ = 0.0, z1_ = 0.0;
  mutable bool have_pair_ = false;
};

// Substream word for time-stepped, multi-channel consumers: supports up to
// 2^48 steps and 65536 channels.
inline std::uint64_t substream_word(std::uint64_t step, std::uint64_t channel) {
  return (step << 16) | (channel & 0xFFFFull);
}

}  // namespace shelab
