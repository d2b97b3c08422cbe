#pragma once

#include <optional>
#include <string>

#include "nvread/priors.hpp"
#include "nvread/rates.hpp"

namespace nvread {

// Fisher information of the whole readout at spin projection rho:
// sum over bins of a_n^2 / (a_n*rho + b_n). Bins with a_n == 0 carry no
// information and are skipped; a bin with a_n != 0 but zero mean makes the
// information singular and is reported as an error.
double fisher_information(const ReadoutSchedule& sched, double rho);

// Cramer-Rao lower bound 1 / I(rho). Errors when I == 0.
double crlb(const ReadoutSchedule& sched, double rho);

// Variance of the photon-summation estimator,
// sum(a_n*rho + b_n) / (sum a_n)^2. Never below the CRLB; equal to it for a
// single bin or for bins with identical coefficients.
double ps_variance(const ReadoutSchedule& sched, double rho);

// Estimator variance under each prior. Flat and Jeffreys both reduce to the
// CRLB; the conjugate Gaussian tightens it to
// 1 / (I + 2/sigma0^2 + 1/(sigma0^4 * I)).
double prior_variance(const ReadoutSchedule& sched, double rho, const Prior& prior);

// How far the conjugate-prior variance sits below the CRLB:
// (1 - 1/(k+1)^2) * crlb with k = crlb / sigma0_sq. At k = 1 the conjugate
// variance is exactly a quarter of the CRLB.
double crlb_exceedance(double crlb_value, double sigma0_sq);

struct VarianceReport {
  double rho = 0.0;
  double fisher = 0.0;
  double crlb = 0.0;
  double ps = 0.0;
  double flat = 0.0;
  double jeffreys = 0.0;
  std::optional<double> sigma0_sq;   // set when a conjugate prior was given
  std::optional<double> conjugate;
  std::optional<double> k_ratio;     // crlb / sigma0_sq
  std::optional<double> exceedance;
};

VarianceReport variance_report(const ReadoutSchedule& sched, double rho,
                               std::optional<double> sigma0_sq = std::nullopt);

}  // namespace nvread
