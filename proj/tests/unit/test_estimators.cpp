#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "nvread/bounds.hpp"
#include "nvread/errors.hpp"
#include "nvread/estimators.hpp"
#include "nvread/photon.hpp"
#include "nvread/priors.hpp"
#include "nvread/rates.hpp"
#include "nvread/rng.hpp"

#include "../oracles.hpp"

using namespace nvread;

namespace {

ReadoutSchedule flat_bins(std::size_t n, double a, double b) {
  std::vector<double> times;
  std::vector<BinCoefficients> coeffs;
  for (std::size_t i = 0; i < n; ++i) {
    times.push_back(double(i + 1));
    coeffs.push_back({a, b});
  }
  return ReadoutSchedule(std::move(times), 1.0, std::move(coeffs));
}

FluorescenceTrace trace_with_counts(const ReadoutSchedule& sched,
                                    std::vector<std::int64_t> counts) {
  FluorescenceTrace t;
  t.times = sched.times();
  t.dt = sched.dt();
  t.counts = std::move(counts);
  return t;
}

}  // namespace

TEST_CASE("posterior grid spans the unit interval uniformly") {
  const ReadoutSchedule sched = flat_bins(3, 2.0, 1.0);
  const Posterior post = posterior_init(Prior::flat(), 5, sched);
  REQUIRE(post.size() == 5);
  CHECK(post.grid().front() == 0.0);
  CHECK(post.grid().back() == 1.0);
  CHECK(post.grid()[2] == doctest::Approx(0.5).epsilon(1e-15));
  // Flat prior: every grid point carries the same weight after normalizing.
  for (std::size_t k = 1; k < post.size(); ++k)
    CHECK(post.log_weights()[k] == doctest::Approx(post.log_weights()[0]).epsilon(1e-14));
  CHECK_THROWS_AS(posterior_init(Prior::flat(), 1, sched), Error);
}

TEST_CASE("normalized posterior integrates to one") {
  const ReadoutSchedule sched = flat_bins(3, 2.0, 1.0);
  for (auto prior : {Prior::flat(), Prior::jeffreys(), Prior::conjugate(0.3, 0.01)}) {
    const Posterior post = posterior_init(prior, 101, sched);
    double total = 0.0;
    for (std::size_t k = 0; k < post.size(); ++k)
      total += std::exp(post.log_weights()[k]) * post.quad_weight(k);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("posterior with no usable weight reports underflow") {
  std::vector<double> grid = {0.0, 0.5, 1.0};
  std::vector<double> lw(3, -std::numeric_limits<double>::infinity());
  Posterior post(std::move(grid), std::move(lw));
  try {
    post.normalize();
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.cls() == ErrorClass::weight_underflow);
  }
}

TEST_CASE("symmetric posterior has mean one half") {
  const ReadoutSchedule sched = flat_bins(3, 2.0, 1.0);
  const Posterior post = posterior_init(Prior::flat(), 401, sched);
  CHECK(posterior_estimate(post) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("narrow prior pins the posterior before any data") {
  const ReadoutSchedule sched = flat_bins(3, 2.0, 1.0);
  const Posterior post = posterior_init(Prior::conjugate(0.7, 1e-6), 801, sched);
  CHECK(posterior_estimate(post) == doctest::Approx(0.7).epsilon(1e-3));
}

TEST_CASE("credible interval of a gaussian prior matches the normal quantiles") {
  const ReadoutSchedule sched = flat_bins(3, 2.0, 1.0);
  const double sigma = 0.05;
  const Posterior post = posterior_init(Prior::conjugate(0.5, sigma * sigma), 401, sched);
  const auto [lo, hi] = confidence_interval(post, 0.9);
  const double z = oracles::gaussian_quantile(0.95);
  const double step = 1.0 / 400.0;
  CHECK(std::fabs(lo - (0.5 - z * sigma)) <= 2.0 * step);
  CHECK(std::fabs(hi - (0.5 + z * sigma)) <= 2.0 * step);
}

TEST_CASE("a pure-signal bin pushes the posterior mode to one") {
  const ReadoutSchedule sched = flat_bins(1, 10.0, 0.0);
  Posterior post = posterior_init(Prior::flat(), 201, sched);
  posterior_update(post, 10, 0, sched);
  const auto& lw = post.log_weights();
  const std::size_t mode =
      std::size_t(std::max_element(lw.begin(), lw.end()) - lw.begin());
  CHECK(post.grid()[mode] == 1.0);
  CHECK(posterior_estimate(post) < 1.0);
}

TEST_CASE("zero counts on a signal bin push the posterior toward zero") {
  const ReadoutSchedule sched = flat_bins(4, 20.0, 0.5);
  Posterior post = posterior_init(Prior::flat(), 401, sched);
  for (std::size_t n = 0; n < 4; ++n) posterior_update(post, 0, n, sched);
  CHECK(posterior_estimate(post) < 0.05);
}

TEST_CASE("bin order does not change the posterior") {
  const ReadoutSchedule sched = make_schedule(RateParameters{}, 60.0, 2.0);
  const FluorescenceTrace trace = sample_trace(sched, 0.35, 404);
  Posterior forward = posterior_init(Prior::flat(), 201, sched);
  for (std::size_t n = 0; n < sched.size(); ++n)
    posterior_update(forward, trace.counts[n], n, sched);
  Posterior backward = posterior_init(Prior::flat(), 201, sched);
  for (std::size_t n = sched.size(); n-- > 0;)
    posterior_update(backward, trace.counts[n], n, sched);
  CHECK(posterior_estimate(forward) ==
        doctest::Approx(posterior_estimate(backward)).epsilon(1e-12));
}

TEST_CASE("batch and sequential updates give the same posterior") {
  const ReadoutSchedule sched = make_schedule(RateParameters{}, 80.0, 2.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const double rho = double(seed) / 10.0;
    const FluorescenceTrace trace = sample_trace(sched, rho, mix_seed(808, seed, 0));
    for (auto prior : {Prior::flat(), Prior::conjugate(0.5, 0.01)}) {
      Posterior seq = posterior_init(prior, 301, sched);
      for (std::size_t n = 0; n < sched.size(); ++n)
        posterior_update(seq, trace.counts[n], n, sched);
      Posterior bat = posterior_init(prior, 301, sched);
      posterior_update_batch(bat, trace, sched);
      CHECK(std::fabs(posterior_estimate(seq) - posterior_estimate(bat)) <= 1e-9);
      const auto ci_s = confidence_interval(seq);
      const auto ci_b = confidence_interval(bat);
      CHECK(std::fabs(ci_s.first - ci_b.first) <= 1e-9);
      CHECK(std::fabs(ci_s.second - ci_b.second) <= 1e-9);
    }
  }
}

TEST_CASE("more data always tightens the credible interval") {
  const ReadoutSchedule sched = make_schedule(RateParameters{}, 200.0, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FluorescenceTrace trace = sample_trace(sched, 0.5, mix_seed(11, seed, 0));
    Posterior early = posterior_init(Prior::flat(), 201, sched);
    for (std::size_t n = 0; n < 20; ++n) posterior_update(early, trace.counts[n], n, sched);
    Posterior full = posterior_init(Prior::flat(), 201, sched);
    posterior_update_batch(full, trace, sched);
    const auto wide = confidence_interval(early);
    const auto tight = confidence_interval(full);
    CHECK(tight.second - tight.first < wide.second - wide.first);
  }
}

TEST_CASE("full pipeline reports the update count and a covering interval") {
  const ReadoutSchedule sched = make_schedule(RateParameters{}, 300.0, 1.0);
  const FluorescenceTrace trace = sample_trace(sched, 0.6, 2024);
  const EstimateResult est = bayes_estimate(trace, sched, Prior::flat(), 401);
  CHECK(est.n_updates == int(sched.size()));
  CHECK_FALSE(est.out_of_range);
  CHECK(est.ci_low < est.rho_e);
  CHECK(est.rho_e < est.ci_high);
  CHECK(std::fabs(est.rho_e - 0.6) < 0.15);
}

TEST_CASE("noise-free counts invert exactly under photon summation") {
  const ReadoutSchedule sched = flat_bins(4, 10.0, 5.0);
  const FluorescenceTrace trace = trace_with_counts(sched, {8, 8, 8, 8});
  const EstimateResult est = ps_estimate(trace, sched);
  CHECK(est.rho_e == doctest::Approx(0.3).epsilon(1e-15));
  CHECK_FALSE(est.out_of_range);
  // Interval matches the Gaussian quantile of the analytic variance.
  const double sigma = std::sqrt(ps_variance(sched, 0.3));
  const double z = oracles::gaussian_quantile(0.95);
  CHECK(est.ci_low == doctest::Approx(0.3 - z * sigma).epsilon(1e-9));
  CHECK(est.ci_high == doctest::Approx(0.3 + z * sigma).epsilon(1e-9));
}

TEST_CASE("photon summation keeps raw out-of-range estimates visible") {
  const ReadoutSchedule sched = flat_bins(4, 10.0, 5.0);
  const EstimateResult high = ps_estimate(trace_with_counts(sched, {100, 100, 100, 100}), sched);
  CHECK(high.out_of_range);
  CHECK(high.rho_e == doctest::Approx(9.5).epsilon(1e-12));
  CHECK(high.ci_low >= 0.0);
  CHECK(high.ci_high <= 1.0);
  const EstimateResult low = ps_estimate(trace_with_counts(sched, {0, 0, 0, 0}), sched);
  CHECK(low.out_of_range);
  CHECK(low.rho_e == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("photon summation refuses schedules without signal") {
  const ReadoutSchedule dark({1.0, 2.0}, 1.0, {{0.0, 3.0}, {0.0, 1.0}});
  const FluorescenceTrace trace = trace_with_counts(dark, {3, 1});
  CHECK_THROWS_AS(ps_estimate(trace, dark), Error);
}

TEST_CASE("photon summation scatter matches its analytic variance") {
  const ReadoutSchedule sched({1.0, 2.0, 3.0, 4.0, 5.0}, 1.0,
                              {{12.0, 3.0}, {8.0, 5.0}, {5.0, 6.0}, {3.0, 6.5}, {1.0, 7.0}});
  const double rho = 0.5;
  const int trials = 10000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < trials; ++i) {
    const FluorescenceTrace trace = sample_trace(sched, rho, mix_seed(31337, std::uint64_t(i), 0));
    const double e = ps_estimate(trace, sched).rho_e;
    sum += e;
    sumsq += e * e;
  }
  const double mean = sum / trials;
  const double var = sumsq / trials - mean * mean;
  CHECK(std::fabs(mean - rho) <= 5.0 * std::sqrt(ps_variance(sched, rho) / trials));
  CHECK(std::fabs(var - ps_variance(sched, rho)) <= 0.10 * ps_variance(sched, rho));
}

TEST_CASE("grid posterior width matches the analytic variance at matched prior width") {
  // Prior variance equal to the data variance doubles the information, so
  // the posterior variance is half the bound; check the interval width.
  const ReadoutSchedule sched = flat_bins(10, 30.0, 10.0);
  const double bound = crlb(sched, 0.5);
  const Prior prior = Prior::conjugate(0.5, bound);
  const double z = oracles::gaussian_quantile(0.95);
  const FluorescenceTrace trace = rounded_mean_trace(sched, 0.5);
  const EstimateResult est = bayes_estimate(trace, sched, prior, 801);
  const double want_half_width = z * std::sqrt(bound / 2.0);
  CHECK(std::fabs((est.ci_high - est.ci_low) / 2.0 - want_half_width) <=
        0.05 * want_half_width);
}

TEST_CASE("closed-form flat estimate inverts exact counts at any expansion point") {
  const ReadoutSchedule sched({1.0, 2.0}, 1.0, {{10.0, 5.0}, {4.0, 2.0}});
  const FluorescenceTrace trace = trace_with_counts(sched, {10, 4});  // rho = 0.5 exactly
  for (double lin : {0.1, 0.5, 0.9})
    CHECK(closed_form_estimate(trace, sched, Prior::flat(), lin) ==
          doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("closed-form estimates match their defining formulas") {
  const ReadoutSchedule sched({1.0, 2.0, 3.0}, 1.0, {{9.0, 4.0}, {6.0, 2.0}, {3.0, 7.0}});
  const FluorescenceTrace trace = trace_with_counts(sched, {11, 6, 9});
  const double lin = 0.4;
  double num_flat = 0.0, num_j = 0.0, den = 0.0;
  for (std::size_t n = 0; n < 3; ++n) {
    const double a = sched.expected_counts(n, 1.0) - sched.expected_counts(n, 0.0);
    const double b = sched.expected_counts(n, 0.0);
    const double d = a * lin + b;
    num_flat += a * (double(trace.counts[n]) - b) / d;
    num_j += a * (double(trace.counts[n]) - b - 0.5) / d;
    den += a * a / d;
  }
  CHECK(closed_form_estimate(trace, sched, Prior::flat(), lin) ==
        doctest::Approx(num_flat / den).epsilon(1e-14));
  CHECK(closed_form_estimate(trace, sched, Prior::jeffreys(), lin) ==
        doctest::Approx(num_j / den).epsilon(1e-14));
  const double s2 = 0.02, rho0 = 0.3;
  CHECK(closed_form_estimate(trace, sched, Prior::conjugate(rho0, s2), lin) ==
        doctest::Approx((num_flat + rho0 / s2) / (den + 1.0 / s2)).epsilon(1e-14));
}

TEST_CASE("wide gaussian priors reduce the closed form to the flat answer") {
  const ReadoutSchedule sched = flat_bins(6, 8.0, 3.0);
  const FluorescenceTrace trace = sample_trace(sched, 0.4, 17);
  const double flat = closed_form_estimate(trace, sched, Prior::flat(), 0.5);
  const double wide = closed_form_estimate(trace, sched, Prior::conjugate(0.9, 1e9), 0.5);
  CHECK(std::fabs(flat - wide) <= 1e-7);
  const double narrow = closed_form_estimate(trace, sched, Prior::conjugate(0.9, 1e-9), 0.5);
  CHECK(narrow == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("the self-consistent closed form lands near the grid posterior") {
  const ReadoutSchedule sched = make_schedule(RateParameters{}, 400.0, 2.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FluorescenceTrace trace = sample_trace(sched, 0.55, mix_seed(5150, seed, 0));
    const double direct = closed_form_estimate(trace, sched, Prior::flat());
    const double grid = bayes_estimate(trace, sched, Prior::flat(), 801).rho_e;
    CHECK(std::fabs(direct - grid) <= 3.0 / 800.0);
  }
}

TEST_CASE("closed form rejects a linearization that silences a bin") {
  const ReadoutSchedule sched({1.0}, 1.0, {{5.0, 0.0}});
  const FluorescenceTrace trace = trace_with_counts(sched, {2});
  try {
    closed_form_estimate(trace, sched, Prior::flat(), 0.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.cls() == ErrorClass::singular_bin);
  }
}
