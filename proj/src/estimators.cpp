#include "nvread/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nvread/bounds.hpp"
#include "nvread/errors.hpp"
#include "nvread/numeric.hpp"

namespace nvread {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

Posterior::Posterior(std::vector<double> grid, std::vector<double> log_weights)
    : grid_(std::move(grid)), log_w_(std::move(log_weights)) {
  if (grid_.size() < 2) fail(ErrorClass::invalid_parameter, "posterior grid needs at least 2 points");
  if (grid_.size() != log_w_.size())
    fail(ErrorClass::invalid_parameter, "posterior grid and weights differ in length");
  double prev = -1.0;
  for (double g : grid_) {
    if (!std::isfinite(g) || g < 0.0 || g > 1.0)
      fail(ErrorClass::invalid_parameter, "posterior grid must lie in [0, 1]");
    if (g <= prev) fail(ErrorClass::invalid_parameter, "posterior grid must be strictly increasing");
    prev = g;
  }
  for (double lw : log_w_)
    if (std::isnan(lw) || lw == kInf)
      fail(ErrorClass::invalid_parameter, "posterior log weights must not be NaN or +inf");
}

double Posterior::quad_weight(std::size_t k) const {
  // Trapezoid rule on a possibly nonuniform grid.
  const std::size_t last = grid_.size() - 1;
  if (k == 0) return 0.5 * (grid_[1] - grid_[0]);
  if (k == last) return 0.5 * (grid_[last] - grid_[last - 1]);
  return 0.5 * (grid_[k + 1] - grid_[k - 1]);
}

double Posterior::normalize() {
  double peak = -kInf;
  for (double lw : log_w_) peak = std::max(peak, lw);
  if (peak == -kInf)
    fail(ErrorClass::weight_underflow, "all posterior weights vanished");

  double z = 0.0;
  for (std::size_t k = 0; k < log_w_.size(); ++k) {
    if (log_w_[k] == -kInf) continue;
    z += quad_weight(k) * std::exp(log_w_[k] - peak);
  }
  if (!(z > 0.0) || !std::isfinite(z))
    fail(ErrorClass::weight_underflow, "posterior normalization vanished");

  const double log_z = peak + std::log(z);
  for (double& lw : log_w_) lw -= log_z;
  normalized_ = true;
  return log_z;
}

Posterior posterior_init(const Prior& prior, int grid_points, const ReadoutSchedule& sched) {
  if (grid_points < 2) fail(ErrorClass::invalid_parameter, "need at least 2 grid points");
  std::vector<double> grid(static_cast<std::size_t>(grid_points));
  for (int k = 0; k < grid_points; ++k)
    grid[std::size_t(k)] = double(k) / double(grid_points - 1);

  std::vector<double> lw(grid.size(), 0.0);
  switch (prior.kind) {
    case Prior::Kind::flat:
      break;
    case Prior::Kind::conjugate_gaussian: {
      Prior::conjugate(prior.rho0, prior.sigma0_sq);  // re-validate parameters
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const double d = grid[k] - prior.rho0;
        lw[k] = -0.5 * d * d / prior.sigma0_sq;
      }
      break;
    }
    case Prior::Kind::jeffreys: {
      bool informative = false;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const double info = fisher_information(sched, grid[k]);
        if (info > 0.0) {
          informative = true;
          lw[k] = 0.5 * std::log(info);
        } else {
          lw[k] = -kInf;
        }
      }
      if (!informative)
        fail(ErrorClass::degenerate_prior,
             "Jeffreys prior is degenerate: schedule carries no spin information");
      break;
    }
  }

  Posterior post(std::move(grid), std::move(lw));
  post.normalize();
  return post;
}

double posterior_update(Posterior& post, std::int64_t count, std::size_t n,
                        const ReadoutSchedule& sched) {
  if (!post.normalized()) fail(ErrorClass::invalid_parameter, "posterior must be normalized");
  if (n >= sched.size()) fail(ErrorClass::out_of_range, "bin index past end of schedule");
  if (count < 0) fail(ErrorClass::invalid_parameter, "negative photon count");

  auto& lw = post.log_weights();
  const auto& grid = post.grid();
  const auto& c = sched.coeff(n);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (lw[k] == -kInf) continue;
    const double mean = std::max(c.a * grid[k] + c.b, 0.0);
    lw[k] += poisson_log_likelihood(count, mean);
  }
  return post.normalize();
}

void posterior_update_batch(Posterior& post, const FluorescenceTrace& trace,
                            const ReadoutSchedule& sched) {
  if (!post.normalized()) fail(ErrorClass::invalid_parameter, "posterior must be normalized");
  require_aligned(trace, sched);

  auto& lw = post.log_weights();
  const auto& grid = post.grid();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (lw[k] == -kInf) continue;
    double acc = 0.0;
    for (std::size_t n = 0; n < sched.size(); ++n) {
      const auto& c = sched.coeff(n);
      const double mean = std::max(c.a * grid[k] + c.b, 0.0);
      acc += poisson_log_likelihood(trace.counts[n], mean);
      if (acc == -kInf) break;
    }
    lw[k] += acc;
  }
  post.normalize();
}

double posterior_estimate(const Posterior& post) {
  if (!post.normalized()) fail(ErrorClass::invalid_parameter, "posterior must be normalized");
  double mean = 0.0;
  for (std::size_t k = 0; k < post.size(); ++k) {
    if (post.log_weights()[k] == -kInf) continue;
    mean += post.grid()[k] * std::exp(post.log_weights()[k]) * post.quad_weight(k);
  }
  return clamp01(mean);
}

std::pair<double, double> confidence_interval(const Posterior& post, double level) {
  if (!post.normalized()) fail(ErrorClass::invalid_parameter, "posterior must be normalized");
  if (!(level > 0.0) || !(level < 1.0))
    fail(ErrorClass::invalid_parameter, "interval level must lie in (0, 1)");

  const auto& grid = post.grid();
  const std::size_t n = grid.size();
  std::vector<double> density(n), cdf(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lw = post.log_weights()[k];
    density[k] = lw == -kInf ? 0.0 : std::exp(lw);
  }
  cdf[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k)
    cdf[k] = cdf[k - 1] + 0.5 * (density[k] + density[k - 1]) * (grid[k] - grid[k - 1]);
  const double total = cdf[n - 1];
  if (!(total > 0.0)) fail(ErrorClass::weight_underflow, "posterior mass vanished");
  for (double& c : cdf) c /= total;

  const auto quantile = [&](double q) {
    for (std::size_t k = 1; k < n; ++k) {
      if (cdf[k] >= q) {
        const double span = cdf[k] - cdf[k - 1];
        if (span <= 0.0) return grid[k - 1];
        const double frac = (q - cdf[k - 1]) / span;
        return grid[k - 1] + frac * (grid[k] - grid[k - 1]);
      }
    }
    return grid[n - 1];
  };

  const double lo = quantile(0.5 * (1.0 - level));
  const double hi = quantile(0.5 * (1.0 + level));
  return {clamp01(std::min(lo, hi)), clamp01(std::max(lo, hi))};
}

EstimateResult bayes_estimate(const FluorescenceTrace& trace, const ReadoutSchedule& sched,
                              const Prior& prior, int grid_points) {
  Posterior post = posterior_init(prior, grid_points, sched);
  posterior_update_batch(post, trace, sched);
  EstimateResult result;
  result.rho_e = posterior_estimate(post);
  std::tie(result.ci_low, result.ci_high) = confidence_interval(post);
  result.n_updates = int(sched.size());
  result.out_of_range = false;
  return result;
}

EstimateResult ps_estimate(const FluorescenceTrace& trace, const ReadoutSchedule& sched) {
  require_aligned(trace, sched);
  const double sum_a = sched.sum_a();
  if (sum_a == 0.0)
    fail(ErrorClass::degenerate_schedule, "photon summation undefined: slopes sum to zero");

  double total = 0.0;
  for (std::int64_t f : trace.counts) total += double(f);
  const double rho_raw = (total - sched.sum_b()) / sum_a;

  EstimateResult result;
  result.rho_e = rho_raw;
  result.out_of_range = rho_raw < 0.0 || rho_raw > 1.0;
  const double sigma = std::sqrt(ps_variance(sched, clamp01(rho_raw)));
  result.ci_low = clamp01(rho_raw - kZ90 * sigma);
  result.ci_high = clamp01(rho_raw + kZ90 * sigma);
  result.n_updates = int(sched.size());
  return result;
}

double closed_form_estimate(const FluorescenceTrace& trace, const ReadoutSchedule& sched,
                            const Prior& prior, double rho_lin) {
  require_aligned(trace, sched);
  if (!std::isfinite(rho_lin) || rho_lin < 0.0 || rho_lin > 1.0)
    fail(ErrorClass::invalid_parameter, "linearization point must lie in [0, 1]");

  const double correction = prior.kind == Prior::Kind::jeffreys ? 0.5 : 0.0;
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < sched.size(); ++n) {
    const auto& c = sched.coeff(n);
    if (c.a == 0.0) continue;
    const double d = c.a * rho_lin + c.b;
    if (d <= 0.0)
      fail(ErrorClass::singular_bin, "zero expected count at the linearization point");
    num += c.a * (double(trace.counts[n]) - c.b - correction) / d;
    den += c.a * c.a / d;
  }
  if (prior.kind == Prior::Kind::conjugate_gaussian) {
    Prior::conjugate(prior.rho0, prior.sigma0_sq);  // re-validate parameters
    num += prior.rho0 / prior.sigma0_sq;
    den += 1.0 / prior.sigma0_sq;
  }
  if (den <= 0.0)
    fail(ErrorClass::zero_information, "schedule carries no spin information");
  return num / den;
}

double closed_form_estimate(const FluorescenceTrace& trace, const ReadoutSchedule& sched,
                            const Prior& prior) {
  const double first = closed_form_estimate(trace, sched, Prior::flat(), 0.5);
  return closed_form_estimate(trace, sched, prior, clamp01(first));
}

}  // namespace nvread
