#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "nvread/photon.hpp"
#include "nvread/priors.hpp"
#include "nvread/rates.hpp"

namespace nvread {

struct EstimateResult {
  double rho_e = 0.0;      // posterior mean, or raw inversion for PS
  double ci_low = 0.0;     // 90% interval, clamped to [0, 1]
  double ci_high = 1.0;
  int n_updates = 0;       // bins consumed
  bool out_of_range = false;  // PS only: raw estimate fell outside [0, 1]
};

// Discretized posterior over rho on [0, 1]. Weights are kept in log space;
// normalization means sum over k of exp(log_w_k) * quad_k == 1 with
// trapezoidal quadrature weights quad_k.
class Posterior {
 public:
  Posterior(std::vector<double> grid, std::vector<double> log_weights);

  std::size_t size() const { return grid_.size(); }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& log_weights() const { return log_w_; }
  std::vector<double>& log_weights() { return log_w_; }
  bool normalized() const { return normalized_; }
  double quad_weight(std::size_t k) const;

  // Rescales so the quadrature integral is one; returns the log of the
  // constant that was divided out. Errors when every weight underflowed.
  double normalize();

 private:
  std::vector<double> grid_;   // strictly increasing, spans [0, 1]
  std::vector<double> log_w_;  // log density values at grid points
  bool normalized_ = false;
};

// Uniform grid of k points on [0, 1] shaped by the prior. The Jeffreys
// prior is proportional to sqrt(I(rho)) and therefore needs the schedule;
// it is degenerate when the schedule carries no spin information.
Posterior posterior_init(const Prior& prior, int grid_points, const ReadoutSchedule& sched);

// One Bayes step with the count from bin n. Returns the log evidence of the
// observation under the pre-update posterior.
double posterior_update(Posterior& post, std::int64_t count, std::size_t n,
                        const ReadoutSchedule& sched);

// All bins in one pass: sums the log likelihoods and renormalizes once.
// Identical (to rounding) to applying posterior_update bin by bin.
void posterior_update_batch(Posterior& post, const FluorescenceTrace& trace,
                            const ReadoutSchedule& sched);

// Posterior mean of rho.
double posterior_estimate(const Posterior& post);

// Equal-tail interval from linear interpolation of the discrete CDF.
std::pair<double, double> confidence_interval(const Posterior& post, double level = 0.9);

// Full Bayesian pipeline: init, consume every bin, report mean and interval.
EstimateResult bayes_estimate(const FluorescenceTrace& trace, const ReadoutSchedule& sched,
                              const Prior& prior, int grid_points = 400);

// Photon summation: rho = (sum f - sum b) / sum a, interval from the
// Gaussian variance model. The raw value is preserved when it falls outside
// [0, 1]; out_of_range is set instead of clamping.
EstimateResult ps_estimate(const FluorescenceTrace& trace, const ReadoutSchedule& sched);

// One-shot linearized posterior-mean formulas. The likelihood is expanded
// around rho_lin; flat uses the plain weighted inversion, Jeffreys subtracts
// the half-count correction, conjugate blends in the Gaussian prior.
double closed_form_estimate(const FluorescenceTrace& trace, const ReadoutSchedule& sched,
                            const Prior& prior, double rho_lin);

// Default linearization: one fixed-point pass, expanding first around 0.5
// with the flat formula and then around that estimate.
double closed_form_estimate(const FluorescenceTrace& trace, const ReadoutSchedule& sched,
                            const Prior& prior);

}  // namespace nvread
