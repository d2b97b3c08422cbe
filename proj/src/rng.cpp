#include "nvread/rng.hpp"

#include <cmath>

#include "nvread/errors.hpp"
#include "nvread/numeric.hpp"

namespace nvread {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ (a + 0x9e3779b97f4a7c15ull));
  h = splitmix64(h ^ (b + 0x7f4a7c159e3779b9ull));
  return h;
}

std::int64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    fail(ErrorClass::invalid_parameter, "poisson mean must be finite and nonnegative");
  if (mean == 0.0) return 0;
  if (mean < kInversionCutoff) return poisson_inversion(mean);
  return poisson_ptrs(mean);
}

std::int64_t Rng::poisson_inversion(double mean) {
  const double u = uniform();
  double p = std::exp(-mean);
  double cum = p;
  std::int64_t k = 0;
  // Cap guards against u falling into the last ulp of the saturated CDF.
  const std::int64_t cap = std::int64_t(mean + 60.0 * std::sqrt(mean) + 120.0);
  while (u > cum && k < cap) {
    ++k;
    p *= mean / double(k);
    cum += p;
  }
  return k;
}

// Transformed rejection with squeeze (Hormann's PTRS), exact for mean >= 10.
std::int64_t Rng::poisson_ptrs(double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return std::int64_t(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const std::int64_t k = std::int64_t(kf);
    const double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
    const double rhs = kf * loglam - mean - log_factorial(k);
    if (lhs <= rhs) return k;
  }
}

}  // namespace nvread
