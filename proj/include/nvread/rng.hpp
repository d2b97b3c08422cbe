#pragma once

#include <cstdint>
#include <random>

namespace nvread {

// Deterministic stream derivation for (base seed, point, trial) tuples.
// Same inputs give the same stream on every platform.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a = 0, std::uint64_t b = 0);

// mt19937_64 plus hand-written output transforms. The std::*_distribution
// wrappers are implementation defined, so going through them would make
// traces differ between standard libraries; everything downstream assumes
// byte-identical output for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

  // Exact Poisson sampling: sequential inversion below kInversionCutoff,
  // transformed rejection above it. No Gaussian approximation anywhere.
  std::int64_t poisson(double mean);

  static constexpr double kInversionCutoff = 30.0;

 private:
  std::int64_t poisson_inversion(double mean);
  std::int64_t poisson_ptrs(double mean);

  std::mt19937_64 gen_;
};

}  // namespace nvread
