#include "nvread/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nvread/bounds.hpp"
#include "nvread/config.hpp"
#include "nvread/csv.hpp"
#include "nvread/errors.hpp"
#include "nvread/photon.hpp"
#include "nvread/rng.hpp"

namespace nvread {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PointSetup {
  ReadoutSchedule sample_sched;   // what the photons are drawn on
  ReadoutSchedule bayes_sched;    // what the Bayesian model assumes
  std::size_t rebin = 1;          // fine bins per Bayesian bin
  int grid_points = 400;
};

PointSetup setup_point(const SweepConfig& cfg, double value) {
  switch (cfg.variable) {
    case SweepVariable::dt: {
      const double ratio_real = value / cfg.dt;
      const auto ratio = std::size_t(std::llround(ratio_real));
      if (ratio < 1 || std::fabs(ratio_real - double(ratio)) > 1e-9)
        fail(ErrorClass::invalid_parameter,
             "swept dt must be an integer multiple of the base dt");
      const auto coarse_bins = std::size_t(std::floor(cfg.readout_time / value + 1e-9));
      if (coarse_bins == 0)
        fail(ErrorClass::degenerate_schedule, "swept dt exceeds the readout window");
      // Both estimators see the same truncated window.
      const double window = double(coarse_bins) * value;
      ReadoutSchedule fine = make_schedule(cfg.rates, window, cfg.dt);
      std::vector<double> coarse_times(coarse_bins);
      for (std::size_t j = 0; j < coarse_bins; ++j) coarse_times[j] = double(j + 1) * value;
      ReadoutSchedule coarse = fluorescence_coefficients(cfg.rates, std::move(coarse_times), value);
      return {std::move(fine), std::move(coarse), ratio, cfg.grid_points};
    }
    case SweepVariable::grid_points: {
      const int k = int(std::llround(value));
      if (k < 2 || std::fabs(value - double(k)) > 1e-9)
        fail(ErrorClass::invalid_parameter, "grid size must be an integer of at least 2");
      ReadoutSchedule sched = make_schedule(cfg.rates, cfg.readout_time, cfg.dt);
      return {sched, sched, 1, k};
    }
    case SweepVariable::readout_time: {
      ReadoutSchedule sched = make_schedule(cfg.rates, value, cfg.dt);
      return {sched, sched, 1, cfg.grid_points};
    }
    case SweepVariable::pumping_rate: {
      RateParameters rates = cfg.rates;
      rates.L = value;
      ReadoutSchedule sched = make_schedule(rates, cfg.readout_time, cfg.dt);
      return {sched, sched, 1, cfg.grid_points};
    }
  }
  fail(ErrorClass::invalid_parameter, "unknown sweep variable");
}

FluorescenceTrace rebin_trace(const FluorescenceTrace& fine, const ReadoutSchedule& coarse,
                              std::size_t ratio) {
  FluorescenceTrace out;
  out.times = coarse.times();
  out.dt = coarse.dt();
  out.seed = fine.seed;
  out.counts.resize(coarse.size());
  for (std::size_t j = 0; j < coarse.size(); ++j) {
    std::int64_t sum = 0;
    for (std::size_t i = j * ratio; i < (j + 1) * ratio; ++i) sum += fine.counts[i];
    out.counts[j] = sum;
  }
  return out;
}

struct Accumulator {
  std::vector<double> sq_errors;
  int failed = 0;
};

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::ps: return "ps";
    case Method::bayes_flat: return "bayes-flat";
    case Method::bayes_jeffreys: return "bayes-jeffreys";
    case Method::bayes_conjugate: return "bayes-conjugate";
  }
  return "unknown";
}

const char* sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::dt: return "dt";
    case SweepVariable::grid_points: return "grid_points";
    case SweepVariable::readout_time: return "readout_time";
    case SweepVariable::pumping_rate: return "pumping_rate";
  }
  return "unknown";
}

SweepResult run_mse_sweep(const SweepConfig& cfg) {
  if (cfg.values.empty()) fail(ErrorClass::invalid_parameter, "sweep needs at least one value");
  if (cfg.trials < 2) fail(ErrorClass::invalid_parameter, "sweep needs at least two trials");
  if (cfg.methods.empty()) fail(ErrorClass::invalid_parameter, "sweep needs at least one method");
  if (!std::isfinite(cfg.true_rho) || cfg.true_rho < 0.0 || cfg.true_rho > 1.0)
    fail(ErrorClass::invalid_parameter, "true rho must lie in [0, 1]");

  SweepResult result;
  result.variable = cfg.variable;

  for (std::size_t pi = 0; pi < cfg.values.size(); ++pi) {
    const double value = cfg.values[pi];
    const PointSetup setup = setup_point(cfg, value);

    Prior conjugate = Prior::flat();
    for (Method m : cfg.methods) {
      if (m == Method::bayes_conjugate) {
        conjugate = Prior::conjugate(
            cfg.true_rho, cfg.conjugate_multiplier * crlb(setup.bayes_sched, cfg.true_rho));
        break;
      }
    }

    std::vector<Accumulator> acc(cfg.methods.size());
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const std::uint64_t seed = mix_seed(cfg.base_seed, pi, std::uint64_t(trial));
      const FluorescenceTrace fine = cfg.trace_mode == TraceMode::poisson
                                         ? sample_trace(setup.sample_sched, cfg.true_rho, seed)
                                         : rounded_mean_trace(setup.sample_sched, cfg.true_rho);
      FluorescenceTrace coarse;
      if (setup.rebin > 1) coarse = rebin_trace(fine, setup.bayes_sched, setup.rebin);
      const FluorescenceTrace& bayes_trace = setup.rebin > 1 ? coarse : fine;

      for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        try {
          EstimateResult est;
          switch (cfg.methods[mi]) {
            case Method::ps:
              est = ps_estimate(fine, setup.sample_sched);
              break;
            case Method::bayes_flat:
              est = bayes_estimate(bayes_trace, setup.bayes_sched, Prior::flat(), setup.grid_points);
              break;
            case Method::bayes_jeffreys:
              est = bayes_estimate(bayes_trace, setup.bayes_sched, Prior::jeffreys(),
                                   setup.grid_points);
              break;
            case Method::bayes_conjugate:
              est = bayes_estimate(bayes_trace, setup.bayes_sched, conjugate, setup.grid_points);
              break;
          }
          const double err = est.rho_e - cfg.true_rho;
          acc[mi].sq_errors.push_back(err * err);
        } catch (const Error&) {
          ++acc[mi].failed;  // recorded per point, never fatal
        }
      }
    }

    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      SweepPoint pt;
      pt.value = value;
      pt.method = cfg.methods[mi];
      pt.seed = mix_seed(cfg.base_seed, pi, 0);
      pt.trials_ok = int(acc[mi].sq_errors.size());
      pt.trials_failed = acc[mi].failed;
      if (!acc[mi].sq_errors.empty()) {
        double mean = 0.0;
        for (double e : acc[mi].sq_errors) mean += e;
        mean /= double(acc[mi].sq_errors.size());
        double var = 0.0;
        for (double e : acc[mi].sq_errors) var += (e - mean) * (e - mean);
        const auto n = double(acc[mi].sq_errors.size());
        pt.mse = mean;
        pt.std_err = n > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
      }
      result.points.push_back(pt);
    }
  }

  // Ordered scan over values for the summary flags.
  std::vector<std::size_t> order(cfg.values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return cfg.values[a] < cfg.values[b]; });
  const auto point_of = [&](std::size_t pi, Method m) -> const SweepPoint* {
    for (const auto& pt : result.points)
      if (pt.value == cfg.values[pi] && pt.method == m && pt.trials_ok > 0) return &pt;
    return nullptr;
  };

  Method bayes_method = Method::ps;
  bool have_bayes = false;
  for (Method m : cfg.methods)
    if (m != Method::ps && !have_bayes) {
      bayes_method = m;
      have_bayes = true;
    }

  if (cfg.variable == SweepVariable::dt && have_bayes) {
    for (std::size_t pi : order) {
      const SweepPoint* ps = point_of(pi, Method::ps);
      const SweepPoint* bayes = point_of(pi, bayes_method);
      if (ps && bayes && bayes->mse > ps->mse) {
        result.dt_crossover = cfg.values[pi];
        break;
      }
    }
  }

  if (cfg.variable == SweepVariable::readout_time) {
    double best = kInf;
    std::size_t best_rank = 0;
    bool found = false;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      const SweepPoint* ps = point_of(order[rank], Method::ps);
      if (ps && ps->mse < best) {
        best = ps->mse;
        best_rank = rank;
        found = true;
      }
    }
    if (found) {
      result.ps_min_value = cfg.values[order[best_rank]];
      result.ps_min_interior = best_rank > 0 && best_rank + 1 < order.size();
    }
  }

  return result;
}

void write_sweep_csv(const SweepResult& result, const SweepConfig& cfg, const std::string& path,
                     std::vector<std::pair<std::string, std::string>> comments) {
  comments.emplace_back("sweep", sweep_variable_name(result.variable));
  comments.emplace_back("trials", std::to_string(cfg.trials));
  comments.emplace_back("true_rho", format_double(cfg.true_rho));
  comments.emplace_back("base_seed", std::to_string(cfg.base_seed));
  if (result.dt_crossover)
    comments.emplace_back("summary_dt_crossover", format_double(*result.dt_crossover));
  if (result.ps_min_value) {
    comments.emplace_back("summary_ps_min_value", format_double(*result.ps_min_value));
    comments.emplace_back("summary_ps_min_interior", result.ps_min_interior ? "1" : "0");
  }

  std::vector<std::vector<std::string>> rows;
  rows.reserve(result.points.size());
  for (const auto& pt : result.points) {
    rows.push_back({sweep_variable_name(result.variable), format_double(pt.value),
                    method_name(pt.method), format_double(pt.mse), format_double(pt.std_err),
                    std::to_string(pt.trials_ok), std::to_string(pt.seed)});
  }
  write_csv(path, comments, {"sweep_var", "value", "method", "mse", "stderr", "trials", "seed"},
            rows);
}

double optimal_ps_readout_time(const RateParameters& rates, double rho, double dt, double t_max) {
  const ReadoutSchedule sched = make_schedule(rates, t_max, dt);
  double sum_a = 0.0, sum_mean = 0.0;
  double best = kInf;
  double best_t = sched.time(sched.size() - 1);
  for (std::size_t n = 0; n < sched.size(); ++n) {
    sum_a += sched.coeff(n).a;
    sum_mean += sched.expected_counts(n, rho);
    if (sum_a == 0.0) continue;
    const double var = sum_mean / (sum_a * sum_a);
    if (var < best) {
      best = var;
      best_t = sched.time(n);
    }
  }
  if (best == kInf)
    fail(ErrorClass::degenerate_schedule, "photon summation undefined on every prefix");
  return best_t;
}

SnrResult run_snr_experiment(const SnrConfig& cfg) {
  if (cfg.trials < 4 || cfg.trials % 2 != 0)
    fail(ErrorClass::invalid_parameter, "need an even number of at least 4 trials");
  validate(cfg.spin);

  double t_b = cfg.t_mw_b;
  if (t_b < 0.0) {
    if (cfg.spin.omega <= 0.0)
      fail(ErrorClass::invalid_parameter, "pi pulse undefined without a Rabi frequency");
    t_b = M_PI / cfg.spin.omega;
  }

  const ReadoutSchedule sched = make_schedule(cfg.rates, cfg.readout_time, cfg.dt);
  const double t_groups[2] = {cfg.t_mw_a, t_b};

  SnrResult result;
  result.trials_per_group = cfg.trials / 2;
  double means[2][2] = {};  // [group][method: 0 = ps, 1 = bayes]
  double sqsum[2][2] = {};

  for (int g = 0; g < 2; ++g) {
    const double rho_g = rho_for_mw_time(cfg.spin, t_groups[g]);
    (g == 0 ? result.rho_a : result.rho_b) = rho_g;
    const Prior prior = conjugate_prior_for(cfg.spin, t_groups[g], sched, cfg.multiplier);

    for (int trial = 0; trial < result.trials_per_group; ++trial) {
      const std::uint64_t seed = mix_seed(cfg.seed, std::uint64_t(g), std::uint64_t(trial));
      const FluorescenceTrace trace = cfg.trace_mode == TraceMode::poisson
                                          ? sample_trace(sched, rho_g, seed)
                                          : rounded_mean_trace(sched, rho_g);
      const double est_ps = ps_estimate(trace, sched).rho_e;
      const double est_bayes = bayes_estimate(trace, sched, prior, cfg.grid_points).rho_e;
      means[g][0] += est_ps;
      means[g][1] += est_bayes;
      sqsum[g][0] += est_ps * est_ps;
      sqsum[g][1] += est_bayes * est_bayes;
    }
  }

  const auto n = double(result.trials_per_group);
  double snr[2];
  for (int m = 0; m < 2; ++m) {
    for (int g = 0; g < 2; ++g) means[g][m] /= n;
    const double var_a = std::max(0.0, sqsum[0][m] / n - means[0][m] * means[0][m]);
    const double var_b = std::max(0.0, sqsum[1][m] / n - means[1][m] * means[1][m]);
    const double pooled = std::sqrt(0.5 * (var_a + var_b) * n / std::max(1.0, n - 1.0));
    const double signal = std::fabs(means[0][m] - means[1][m]);
    snr[m] = pooled > 0.0 ? signal / pooled : (signal > 0.0 ? kInf : 0.0);
  }
  result.snr_ps = snr[0];
  result.snr_bayes = snr[1];
  return result;
}

}  // namespace nvread
