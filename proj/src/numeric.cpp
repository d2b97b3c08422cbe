#include "nvread/numeric.hpp"

#include <cmath>
#include <vector>

#include "nvread/errors.hpp"

namespace nvread {
namespace {

constexpr std::int64_t kTableSize = 1 << 16;

const std::vector<double>& factorial_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kTableSize);
    for (std::int64_t n = 0; n < kTableSize; ++n) t[n] = std::lgamma(double(n) + 1.0);
    return t;
  }();
  return table;
}

// Stirling series for ln Gamma(x); relative error far below 1e-15 for
// x >= 2^16, the only regime it is called in.
double stirling_lgamma(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = inv / 12.0;
  series -= inv * inv2 / 360.0;
  series += inv * inv2 * inv2 / 1260.0;
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * M_PI) + series;
}

}  // namespace

double log_factorial(std::int64_t n) {
  if (n < 0) fail(ErrorClass::invalid_parameter, "log_factorial of negative count");
  if (n < kTableSize) return factorial_table()[std::size_t(n)];
  return stirling_lgamma(double(n) + 1.0);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace nvread
