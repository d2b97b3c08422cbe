#pragma once

namespace nvread {

// Prior over the spin projection rho on [0, 1]. The conjugate variant is the
// truncated Gaussian N(rho0, sigma0_sq); flat and Jeffreys need no
// parameters (Jeffreys takes its shape from the schedule at use time).
struct Prior {
  enum class Kind { flat, jeffreys, conjugate_gaussian };

  Kind kind = Kind::flat;
  double rho0 = 0.5;       // conjugate only
  double sigma0_sq = 1.0;  // conjugate only

  static Prior flat() { return {Kind::flat, 0.5, 1.0}; }
  static Prior jeffreys() { return {Kind::jeffreys, 0.5, 1.0}; }
  static Prior conjugate(double rho0, double sigma0_sq);
};

const char* prior_name(const Prior& p);

}  // namespace nvread
