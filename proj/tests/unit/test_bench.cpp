#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "nvread/bench.hpp"
#include "nvread/bounds.hpp"
#include "nvread/errors.hpp"
#include "nvread/rates.hpp"

using namespace nvread;

namespace {

SweepConfig small_sweep() {
  SweepConfig cfg;
  cfg.variable = SweepVariable::readout_time;
  cfg.values = {100.0, 300.0};
  cfg.trials = 20;
  cfg.true_rho = 0.5;
  cfg.base_seed = 7;
  cfg.dt = 2.0;
  cfg.readout_time = 300.0;
  cfg.grid_points = 100;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("sweep results are grouped by value and method") {
  const SweepConfig cfg = small_sweep();
  const SweepResult res = run_mse_sweep(cfg);
  REQUIRE(res.points.size() == cfg.values.size() * cfg.methods.size());
  CHECK(res.points[0].value == 100.0);
  CHECK(res.points[0].method == Method::ps);
  CHECK(res.points[1].method == Method::bayes_flat);
  CHECK(res.points[2].value == 300.0);
  for (const auto& pt : res.points) {
    CHECK(pt.trials_ok + pt.trials_failed == cfg.trials);
    CHECK(pt.mse >= 0.0);
    CHECK(pt.seed != 0);
  }
  // Paired traces: both methods at one value share the trace stream.
  CHECK(res.points[0].seed == res.points[1].seed);
  CHECK(res.points[0].seed != res.points[2].seed);
}

TEST_CASE("noise-free traces leave only integer-rounding error in the summation") {
  SweepConfig cfg = small_sweep();
  cfg.trace_mode = TraceMode::rounded_mean;
  cfg.methods = {Method::ps};
  const SweepResult res = run_mse_sweep(cfg);
  for (const auto& pt : res.points) {
    // Each bin mean is rounded by at most one half, so the inversion error
    // is bounded by 0.5 N / sum(a).
    const ReadoutSchedule sched = make_schedule(cfg.rates, pt.value, cfg.dt);
    const double worst = 0.5 * double(sched.size()) / sched.sum_a();
    CHECK(pt.mse <= worst * worst);
    CHECK(pt.std_err <= 1e-15);  // every trial sees the same trace
  }
}

TEST_CASE("adding methods does not change existing results") {
  SweepConfig lone = small_sweep();
  lone.methods = {Method::ps};
  SweepConfig both = small_sweep();
  both.methods = {Method::ps, Method::bayes_flat, Method::bayes_jeffreys};
  const SweepResult a = run_mse_sweep(lone);
  const SweepResult b = run_mse_sweep(both);
  REQUIRE(a.points.size() == 2);
  REQUIRE(b.points.size() == 6);
  for (std::size_t v = 0; v < 2; ++v) {
    CHECK(a.points[v].mse == b.points[v * 3].mse);
    CHECK(a.points[v].std_err == b.points[v * 3].std_err);
  }
}

TEST_CASE("the conjugate method uses the requested prior width") {
  SweepConfig cfg = small_sweep();
  cfg.methods = {Method::bayes_conjugate};
  cfg.conjugate_multiplier = 1.0;
  const SweepResult res = run_mse_sweep(cfg);
  // At matched width the estimator cannot be worse than the plain bound.
  const ReadoutSchedule sched = make_schedule(cfg.rates, 300.0, cfg.dt);
  CHECK(res.points[1].mse < crlb(sched, cfg.true_rho) * 1.5);
}

TEST_CASE("sweep validation rejects broken requests") {
  SweepConfig cfg = small_sweep();
  cfg.trials = 1;
  CHECK_THROWS_AS(run_mse_sweep(cfg), Error);
  cfg = small_sweep();
  cfg.values.clear();
  CHECK_THROWS_AS(run_mse_sweep(cfg), Error);
  cfg = small_sweep();
  cfg.methods.clear();
  CHECK_THROWS_AS(run_mse_sweep(cfg), Error);
  cfg = small_sweep();
  cfg.true_rho = 1.4;
  CHECK_THROWS_AS(run_mse_sweep(cfg), Error);
  cfg = small_sweep();
  cfg.variable = SweepVariable::dt;
  cfg.values = {3.0};  // not a whole multiple of the base width
  CHECK_THROWS_AS(run_mse_sweep(cfg), Error);
  cfg = small_sweep();
  cfg.variable = SweepVariable::grid_points;
  cfg.values = {10.5};
  CHECK_THROWS_AS(run_mse_sweep(cfg), Error);
}

TEST_CASE("coarser bins flip the comparison at some width") {
  SweepConfig cfg;
  cfg.variable = SweepVariable::dt;
  cfg.values = {1.0, 4.0, 16.0, 64.0, 128.0};
  cfg.trials = 60;
  cfg.base_seed = 5;
  cfg.dt = 1.0;
  cfg.readout_time = 512.0;
  cfg.grid_points = 100;
  const SweepResult res = run_mse_sweep(cfg);
  REQUIRE(res.dt_crossover.has_value());
  CHECK(*res.dt_crossover > 1.0);
  // Before the crossover the grid estimator is at least as good.
  for (std::size_t i = 0; i + 1 < res.points.size(); i += 2) {
    if (res.points[i].value < *res.dt_crossover)
      CHECK(res.points[i + 1].mse <= res.points[i].mse);
  }
}

TEST_CASE("the summation window optimum is detected as interior") {
  SweepConfig cfg;
  cfg.variable = SweepVariable::readout_time;
  cfg.values = {100.0, 300.0, 600.0, 1500.0};
  cfg.trials = 60;
  cfg.base_seed = 13;
  cfg.dt = 4.0;
  cfg.readout_time = 600.0;
  cfg.grid_points = 100;
  const SweepResult res = run_mse_sweep(cfg);
  REQUIRE(res.ps_min_value.has_value());
  CHECK(res.ps_min_interior);
  CHECK(*res.ps_min_value > 100.0);
  CHECK(*res.ps_min_value < 1500.0);
}

TEST_CASE("sweep files are written deterministically") {
  const SweepConfig cfg = small_sweep();
  const SweepResult res = run_mse_sweep(cfg);
  const auto dir = std::filesystem::temp_directory_path();
  const std::string p1 = (dir / "nvread_sweep_a.csv").string();
  const std::string p2 = (dir / "nvread_sweep_b.csv").string();
  write_sweep_csv(res, cfg, p1, {{"run", "one"}});
  write_sweep_csv(run_mse_sweep(cfg), cfg, p2, {{"run", "one"}});
  CHECK(slurp(p1) == slurp(p2));
  CHECK(slurp(p1).find("sweep_var,value,method,mse,stderr,trials,seed") != std::string::npos);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("the analytic window optimum matches a direct scan") {
  const RateParameters rates;
  const double dt = 5.0;
  const double t_max = 2000.0;
  const double best = optimal_ps_readout_time(rates, 0.5, dt, t_max);
  const ReadoutSchedule full = make_schedule(rates, t_max, dt);
  double best_scan = 0.0, best_var = 0.0;
  double sa = 0.0, sm = 0.0;
  for (std::size_t n = 0; n < full.size(); ++n) {
    sa += full.expected_counts(n, 1.0) - full.expected_counts(n, 0.0);
    sm += full.expected_counts(n, 0.5);
    if (sa <= 0.0) continue;
    const double var = sm / (sa * sa);
    if (best_scan == 0.0 || var < best_var) {
      best_var = var;
      best_scan = full.time(n);
    }
  }
  CHECK(best == doctest::Approx(best_scan).epsilon(1e-12));
  CHECK(best > dt);
  CHECK(best < t_max);
}

TEST_CASE("two identical groups give no discrimination signal") {
  SnrConfig cfg;
  cfg.trials = 40;
  cfg.seed = 3;
  cfg.dt = 2.0;
  cfg.readout_time = 200.0;
  cfg.grid_points = 100;
  cfg.t_mw_a = 0.0;
  cfg.t_mw_b = 0.0;
  const SnrResult res = run_snr_experiment(cfg);
  CHECK(res.rho_a == res.rho_b);
  CHECK(res.snr_ps < 1.0);
  CHECK(res.snr_bayes < 1.0);
  CHECK(res.trials_per_group == 20);
}

TEST_CASE("noise-free groups at different pulses give an infinite ratio") {
  SnrConfig cfg;
  cfg.trials = 8;
  cfg.seed = 3;
  cfg.dt = 2.0;
  cfg.readout_time = 200.0;
  cfg.grid_points = 100;
  cfg.trace_mode = TraceMode::rounded_mean;
  const SnrResult res = run_snr_experiment(cfg);
  CHECK(std::isinf(res.snr_ps));
  CHECK(res.rho_a > res.rho_b);
}

TEST_CASE("a pulsed group separates from the unpulsed group") {
  SnrConfig cfg;
  cfg.trials = 60;
  cfg.seed = 17;
  cfg.dt = 2.0;
  cfg.readout_time = 400.0;
  cfg.grid_points = 200;
  const SnrResult res = run_snr_experiment(cfg);
  CHECK(res.rho_a == 1.0);
  CHECK(res.rho_b < 0.2);
  CHECK(res.snr_ps > 3.0);
  CHECK(res.snr_bayes > res.snr_ps);
}

TEST_CASE("discrimination runs validate the trial count") {
  SnrConfig cfg;
  cfg.trials = 5;
  CHECK_THROWS_AS(run_snr_experiment(cfg), Error);
  cfg.trials = 2;
  CHECK_THROWS_AS(run_snr_experiment(cfg), Error);
}
