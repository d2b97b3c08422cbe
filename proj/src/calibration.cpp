#include "nvread/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nvread/errors.hpp"

namespace nvread {
namespace {

// Model counts per bin for a fully polarized spin (rho = 1) at pump power L.
std::vector<double> model_curve(const RateParameters& params, double L,
                                const FluorescenceTrace& trace) {
  RateParameters q = params;
  q.L = L;
  const ReadoutSchedule sched = fluorescence_coefficients(q, trace.times, trace.dt);
  std::vector<double> th(sched.size());
  for (std::size_t n = 0; n < sched.size(); ++n) th[n] = sched.expected_counts(n, 1.0);
  return th;
}

bool contained(const std::vector<double>& model, const FluorescenceTrace& trace, double margin) {
  for (std::size_t n = 0; n < model.size(); ++n) {
    const double bound = model[n] + margin * std::sqrt(std::max(model[n], 0.0));
    if (double(trace.counts[n]) > bound + 1e-9) return false;
  }
  return true;
}

}  // namespace

LambdaCalibration estimate_lambda(const FluorescenceTrace& reference, const RateParameters& params,
                                  double tail_fraction) {
  validate(params);
  if (params.L <= 0.0)
    fail(ErrorClass::invalid_parameter, "lambda calibration needs active pumping (L > 0)");
  if (!(tail_fraction > 0.0) || !(tail_fraction <= 1.0))
    fail(ErrorClass::invalid_parameter, "tail fraction must lie in (0, 1]");
  const std::size_t n = reference.counts.size();
  const std::size_t tail = std::max<std::size_t>(2, std::size_t(double(n) * tail_fraction));
  if (tail > n) fail(ErrorClass::invalid_parameter, "reference trace shorter than tail window");

  const std::size_t start = n - tail;
  double mean_t = 0.0, mean_f = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    mean_t += reference.times[i];
    mean_f += double(reference.counts[i]);
  }
  mean_t /= double(tail);
  mean_f /= double(tail);
  if (mean_f <= 0.0) fail(ErrorClass::zero_signal, "reference tail has no counts");

  double cov = 0.0, var_t = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    const double dt_i = reference.times[i] - mean_t;
    cov += dt_i * (double(reference.counts[i]) - mean_f);
    var_t += dt_i * dt_i;
  }
  if (var_t <= 0.0) fail(ErrorClass::invalid_parameter, "degenerate tail window");
  const double slope = cov / var_t;                        // counts per ns
  const double rel_slope_per_us = std::fabs(slope) * 1e3 / mean_f;
  if (rel_slope_per_us > 0.01)
    fail(ErrorClass::no_steady_state, "reference tail is still settling");

  const Vec5 ss = steady_state_populations(build_rate_matrix(params));
  const double excited = ss[2] + ss[3];
  if (excited <= 0.0) fail(ErrorClass::no_steady_state, "steady state has no excited population");

  LambdaCalibration cal;
  cal.tail_mean = mean_f;
  cal.tail_bins = tail;
  cal.lambda = mean_f / (excited * reference.dt);
  return cal;
}

PumpCalibration estimate_pump_power(const FluorescenceTrace& reference,
                                    const RateParameters& params, double l_init, double margin,
                                    double resolution) {
  validate(params);
  if (!(l_init > 0.0) || l_init > 1.0)
    fail(ErrorClass::invalid_parameter, "initial pump power must lie in (0, 1]");
  if (!(margin >= 0.0) || !std::isfinite(margin))
    fail(ErrorClass::invalid_parameter, "margin must be nonnegative");
  if (!(resolution > 0.0) || resolution > 0.1)
    fail(ErrorClass::invalid_parameter, "resolution must lie in (0, 0.1]");
  if (reference.counts.empty()) fail(ErrorClass::invalid_parameter, "empty reference trace");

  const auto fits = [&](double L) { return contained(model_curve(params, L, reference), reference, margin); };

  if (!fits(l_init))
    fail(ErrorClass::no_feasible_pumping,
         "observed transient exceeds the model envelope even at the initial pump power");

  // Coarse decreasing scan to bracket the feasibility edge, then bisection.
  const double step = std::max(resolution, 0.02);
  double lo = 0.0, hi = l_init;  // fits(hi) true; lo == 0 means edge not seen yet
  for (double L = l_init - step; L >= resolution; L -= step) {
    if (fits(L)) {
      hi = L;
    } else {
      lo = L;
      break;
    }
  }
  if (lo > 0.0) {
    while (hi - lo > resolution) {
      const double mid = 0.5 * (lo + hi);
      if (fits(mid)) hi = mid; else lo = mid;
    }
  }

  PumpCalibration cal;
  cal.L = hi;
  cal.margin = margin;
  const auto model = model_curve(params, hi, reference);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < model.size(); ++n) {
    const double denom = std::max(std::sqrt(std::max(model[n], 0.0)), 1e-12);
    worst = std::max(worst, (double(reference.counts[n]) - model[n]) / denom);
  }
  cal.max_residual = worst;
  return cal;
}

}  // namespace nvread
