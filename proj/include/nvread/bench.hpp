#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nvread/estimators.hpp"
#include "nvread/rates.hpp"
#include "nvread/spin.hpp"

namespace nvread {

enum class Method { ps, bayes_flat, bayes_jeffreys, bayes_conjugate };
const char* method_name(Method m);

enum class SweepVariable { dt, grid_points, readout_time, pumping_rate };
const char* sweep_variable_name(SweepVariable v);

enum class TraceMode { poisson, rounded_mean };

// Monte-Carlo mean-squared-error sweep. Fairness rule: within one
// (point, trial) pair every method consumes the same simulated trace, and
// the trace seed depends only on (base_seed, point, trial), never on the
// method list. The dt sweep is special: photons are always sampled at the
// base dt; photon summation reads that fine trace while the Bayesian
// methods see the counts rebinned to the swept width and model them with
// coefficients evaluated at the coarse bin edges, which is exactly the
// fidelity loss a slower sampling clock inflicts on the model.
struct SweepConfig {
  SweepVariable variable = SweepVariable::readout_time;
  std::vector<double> values;      // dt ns / grid size / window ns / pump power
  int trials = 100;
  double true_rho = 0.5;
  std::vector<Method> methods{Method::ps, Method::bayes_flat};
  std::uint64_t base_seed = 1;
  RateParameters rates;
  double dt = 1.0;                 // base bin width, ns
  double readout_time = 600.0;     // base window, ns
  int grid_points = 400;
  double conjugate_multiplier = 1.0;  // sigma0^2 = multiplier * CRLB(true_rho)
  TraceMode trace_mode = TraceMode::poisson;
};

struct SweepPoint {
  double value = 0.0;
  Method method = Method::ps;
  double mse = 0.0;
  double std_err = 0.0;       // standard error of the MSE estimate
  int trials_ok = 0;
  int trials_failed = 0;
  std::uint64_t seed = 0;     // per-point stream seed
};

struct SweepResult {
  SweepVariable variable = SweepVariable::readout_time;
  std::vector<SweepPoint> points;            // grouped by value, then method
  std::optional<double> dt_crossover;        // dt sweep: first width where
                                             // Bayesian MSE exceeds PS MSE
  std::optional<double> ps_min_value;        // readout sweep: argmin of PS MSE
  bool ps_min_interior = false;
};

SweepResult run_mse_sweep(const SweepConfig& cfg);

void write_sweep_csv(const SweepResult& result, const SweepConfig& cfg, const std::string& path,
                     std::vector<std::pair<std::string, std::string>> comments = {});

// Readout window minimizing the analytic photon-summation variance, scanned
// over whole bins up to t_max.
double optimal_ps_readout_time(const RateParameters& rates, double rho, double dt, double t_max);

// Two-group discrimination experiment: group A after a pulse of t_mw_a,
// group B after t_mw_b (negative means a pi pulse). Signal is the distance
// between group means; noise is the pooled standard deviation.
struct SnrConfig {
  RateParameters rates;
  SpinParameters spin;
  double dt = 1.0;
  double readout_time = 600.0;
  int trials = 400;            // total, split evenly
  std::uint64_t seed = 1;
  double multiplier = 4.0;     // conjugate prior width factor
  int grid_points = 400;
  TraceMode trace_mode = TraceMode::poisson;
  double t_mw_a = 0.0;
  double t_mw_b = -1.0;
};

struct SnrResult {
  double snr_ps = 0.0;
  double snr_bayes = 0.0;
  double rho_a = 1.0;          // predicted projection per group
  double rho_b = 0.0;
  int trials_per_group = 0;
};

SnrResult run_snr_experiment(const SnrConfig& cfg);

}  // namespace nvread
