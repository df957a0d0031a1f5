#pragma once

// Counter-based random number generation (Philox4x32-10).
//
// Every consumer owns an independent stream addressed by (master_seed, stream).
// Replicas and purposes never share a stream, so results are reproducible
// bit-for-bit regardless of scheduling or thread count, and any replica can be
// regenerated in isolation.

#include <array>
#include <cmath>
#include <cstdint>

namespace ltlab {

// Purpose tags keep streams of different consumers disjoint even when they
// share a replica index.
enum class StreamPurpose : std::uint64_t {
  Walk = 1,
  Gff = 2,
  GffRhs = 3,
  MuExponentials = 4,
  Brownian = 5,
  Tilt = 6,
  QBank = 7,
  Scratch = 8,
};

// stream id = purpose in the top 16 bits, replica (or a hash) in the low 48.
constexpr std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t replica) {
  return (static_cast<std::uint64_t>(purpose) << 48) | (replica & 0xFFFF'FFFF'FFFFull);
}

namespace detail {

struct Philox4x32State {
  std::array<std::uint32_t, 4> ctr;
  std::array<std::uint32_t, 2> key;
};

inline void philox4x32_10(Philox4x32State& s) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  std::uint32_t c0 = s.ctr[0], c1 = s.ctr[1], c2 = s.ctr[2], c3 = s.ctr[3];
  std::uint32_t k0 = s.key[0], k1 = s.key[1];
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2;
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t n0 = hi1 ^ c1 ^ k0;
    const std::uint32_t n1 = lo1;
    const std::uint32_t n2 = hi0 ^ c3 ^ k1;
    const std::uint32_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  s.ctr = {c0, c1, c2, c3};
}

}  // namespace detail

class Rng {
 public:
  Rng(std::uint64_t master_seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(master_seed),
             static_cast<std::uint32_t>(master_seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  Rng(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t replica)
      : Rng(master_seed, stream_id(purpose, replica)) {}

  std::uint32_t next_u32() {
    if (buf_pos_ == 4) refill();
    return buf_[buf_pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a logarithm argument.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), n >= 1. Rejection keeps it exactly uniform.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  double exponential(double mean) { return -mean * std::log(uniform_pos()); }

  // Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925287 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Poisson by inversion; intended for small means (used in test oracles).
  std::uint64_t poisson(double mean) {
    const double u = uniform();
    double p = std::exp(-mean);
    double cum = p;
    std::uint64_t k = 0;
    while (u > cum && k < 100000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cum += p;
    }
    return k;
  }

 private:
  void refill() {
    detail::Philox4x32State s;
    s.ctr = {static_cast<std::uint32_t>(block_),
             static_cast<std::uint32_t>(block_ >> 32), stream_lo_, stream_hi_};
    s.key = key_;
    detail::philox4x32_10(s);
    buf_ = s.ctr;
    buf_pos_ = 0;
    ++block_;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_lo_, stream_hi_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 4;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// 64-bit FNV-1a, used to derive deterministic stream ids from structured keys
// (for example quantized bank positions) and to checksum binary payloads.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace ltlab
