#pragma once

#include <cstdint>

namespace tvbeta {

// SplitMix64 (Steele, Lea and Flood 2014): a counter-based generator whose
// k-th output is a fixed mix of seed + k * golden, so a stream is fully
// determined by its seed on every platform and can be replayed in isolation.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

// Seeding scheme for replicate streams: replicate k under base seed s starts
// from one extra mixing round of s xor (odd constant * (k+1)), which keeps
// the streams decorrelated while replicate k stays reproducible on its own.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t k) {
  SplitMix64 mix(seed ^ (0xd1342543de82ef95ULL * (k + 1)));
  return SplitMix64(mix.next());
}

}  // namespace tvbeta
