#pragma once

#include <cstdint>
#include <string_view>

namespace nvread {

// Phi^-1(0.95), used for two-sided 90% Gaussian intervals.
inline constexpr double kZ90 = 1.6448536269514722;

// ln(n!) with a cached table for small n and a Stirling series beyond it.
// Thread safe after first use; never touches the libm lgamma global state
// on the hot path.
double log_factorial(std::int64_t n);

// FNV-1a over bytes; used to fingerprint effective configurations.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace nvread
