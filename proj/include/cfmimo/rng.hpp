#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace cfmimo {

// Deterministic random source with named substreams. Substreams are derived
// by hashing (seed, path...) so independent pipeline stages and parallel
// workers can draw without sharing generator state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64();

  // Uniform on [0,1) with 53 mantissa bits.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer on [0,n).
  std::uint64_t uniform_int(std::uint64_t n);

  // Standard real Gaussian, Box-Muller with cached second draw.
  double normal();
  // Circularly symmetric complex Gaussian, unit total variance.
  std::complex<double> cnormal();

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

// SplitMix64 finalizer, used for seed derivation.
std::uint64_t mix64(std::uint64_t x);

}  // namespace cfmimo
