#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace jurysim {

// splitmix64 finalizer: bijective avalanche mix used to derive substream seeds.
constexpr std::uint64_t mix_bits(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic random stream with hierarchical substream derivation.
//
// child(tag) derives an independent stream from (seed, tag) alone -- never
// from engine state -- so sibling substreams are insensitive to how many
// draws their parent or siblings have made.  This is what makes per-round
// and per-agent streams reproducible in isolation.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Independent substream keyed by (seed, tag).
  RandomStream child(std::uint64_t tag) const {
    return RandomStream(mix_bits(seed_ ^ mix_bits(tag)));
  }

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // +1 with probability p, else -1.
  std::int8_t sign(double p) { return bernoulli(p) ? std::int8_t{1} : std::int8_t{-1}; }

  // Unbiased uniform integer in [0, n); Lemire's multiply-shift rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RandomStream::below: n must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t floor = (0 - n) % n;
      while (lo < floor) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace jurysim
