// Command-line front end. Parses flags, loads the config, calls the library
// and writes CSV; no numerical logic lives here. Every output file carries
// the tool version, the effective configuration, its hash and the seed, so
// a result can always be traced back to what produced it.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "nvread/bench.hpp"
#include "nvread/bounds.hpp"
#include "nvread/calibration.hpp"
#include "nvread/config.hpp"
#include "nvread/csv.hpp"
#include "nvread/errors.hpp"
#include "nvread/estimators.hpp"
#include "nvread/numeric.hpp"
#include "nvread/photon.hpp"
#include "nvread/spin.hpp"

namespace {

namespace fs = std::filesystem;
using namespace nvread;

int exit_code_for(ErrorClass c) {
  switch (c) {
    case ErrorClass::config_error:
    case ErrorClass::io_error:
      return 3;
    case ErrorClass::invalid_parameter:
      return 4;
    case ErrorClass::degenerate_schedule:
    case ErrorClass::degenerate_prior:
    case ErrorClass::zero_information:
    case ErrorClass::singular_bin:
      return 5;
    case ErrorClass::numerical_failure:
    case ErrorClass::weight_underflow:
    case ErrorClass::step_size_failure:
      return 6;
    case ErrorClass::no_steady_state:
    case ErrorClass::zero_signal:
    case ErrorClass::no_feasible_pumping:
      return 7;
    case ErrorClass::out_of_range:
      return 8;
  }
  return 9;
}

// Flags shared by every subcommand. Flag > config file > built-in default.
struct CommonFlags {
  std::string config_path;
  std::optional<double> dt;
  std::optional<double> readout_time;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "parameter file (key = value, rates in MHz)");
    dt_opt = cmd->add_option("--dt", dt_val, "bin width override, ns");
    window_opt = cmd->add_option("--readout-time", window_val, "readout window override, ns");
  }

  Config resolve() const {
    Config cfg = config_path.empty() ? default_config() : load_config(config_path);
    if (dt_opt && dt_opt->count()) cfg.dt = dt_val;
    if (window_opt && window_opt->count()) cfg.readout_time = window_val;
    if (!(cfg.dt > 0.0)) fail(ErrorClass::invalid_parameter, "dt must be positive");
    if (!(cfg.readout_time >= cfg.dt))
      fail(ErrorClass::degenerate_schedule, "readout window shorter than one bin");
    return cfg;
  }

 private:
  CLI::Option* dt_opt = nullptr;
  CLI::Option* window_opt = nullptr;
  double dt_val = 0.0;
  double window_val = 0.0;
};

std::vector<std::pair<std::string, std::string>> base_header(const Config& cfg) {
  std::vector<std::pair<std::string, std::string>> h;
  h.emplace_back("version", kVersion);
  h.emplace_back("config_hash", config_hash(cfg));
  for (auto& kv : config_echo(cfg)) h.push_back(std::move(kv));
  return h;
}

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> values;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorClass::invalid_parameter, "bad numeric value '" + item + "' in list");
    }
  }
  return values;
}

Method parse_method_token(const std::string& name) {
  if (name == "ps") return Method::ps;
  if (name == "bayes-flat") return Method::bayes_flat;
  if (name == "bayes-jeffreys") return Method::bayes_jeffreys;
  if (name == "bayes-conjugate") return Method::bayes_conjugate;
  fail(ErrorClass::invalid_parameter, "unknown method '" + name + "'");
}

Prior make_prior(const std::string& name, double rho0, std::optional<double> sigma0_sq,
                 double multiplier, const ReadoutSchedule& sched) {
  if (name == "flat") return Prior::flat();
  if (name == "jeffreys") return Prior::jeffreys();
  if (name == "conjugate") {
    const double s2 = sigma0_sq ? *sigma0_sq : multiplier * crlb(sched, rho0);
    return Prior::conjugate(rho0, s2);
  }
  fail(ErrorClass::invalid_parameter, "unknown prior '" + name + "'");
}

std::string flag_string(bool v) { return v ? "1" : "0"; }

// ---- simulate ----

struct SimulateCmd {
  CommonFlags common;
  double rho = 0.5;
  std::uint64_t seed = 1;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("simulate", "draw a Poisson fluorescence trace");
    common.attach(cmd);
    cmd->add_option("--rho", rho, "true spin projection")->capture_default_str();
    cmd->add_option("--seed", seed, "random stream seed")->capture_default_str();
    cmd->add_option("--out", out, "output trace CSV")->required();
    cmd->callback([this] { code = run(); });
  }

  int run() const {
    const Config cfg = common.resolve();
    const ReadoutSchedule sched = make_schedule(cfg.rates, cfg.readout_time, cfg.dt);
    const FluorescenceTrace trace = sample_trace(sched, rho, seed);
    auto header = base_header(cfg);
    header.emplace_back("rho", format_double(rho));
    write_trace_csv(trace, out, header);
    std::cout << "wrote " << out << " (" << trace.counts.size() << " bins)\n";
    return 0;
  }

  int code = 0;
};

// ---- estimate ----

struct EstimateCmd {
  CommonFlags common;
  std::string in, out;
  std::string method = "bayes";
  std::string prior_name = "flat";
  double rho0 = 0.5;
  std::optional<double> sigma0_sq;
  std::optional<double> multiplier;
  int grid_points = 400;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("estimate", "estimate rho from a recorded trace");
    common.attach(cmd);
    cmd->add_option("--in", in, "input trace CSV")->required();
    cmd->add_option("--out", out, "output CSV")->required();
    cmd->add_option("--method", method, "ps | bayes | closed-form")->capture_default_str();
    cmd->add_option("--prior", prior_name, "flat | jeffreys | conjugate")->capture_default_str();
    cmd->add_option("--rho0", rho0, "conjugate prior center")->capture_default_str();
    cmd->add_option("--sigma0-sq", sigma0_sq, "conjugate prior variance");
    cmd->add_option("--multiplier", multiplier, "conjugate variance = multiplier * CRLB(rho0)");
    cmd->add_option("--grid-points", grid_points, "posterior grid size")->capture_default_str();
    cmd->callback([this] { code = run(); });
  }

  int run() const {
    const Config cfg = common.resolve();
    const FluorescenceTrace trace = read_trace_csv(in);
    const ReadoutSchedule sched = fluorescence_coefficients(cfg.rates, trace.times, trace.dt);
    const double mult = multiplier ? *multiplier : cfg.prior_multiplier;
    const Prior prior = make_prior(prior_name, rho0, sigma0_sq, mult, sched);

    EstimateResult est;
    std::string ci_low = "", ci_high = "";
    if (method == "ps") {
      est = ps_estimate(trace, sched);
      ci_low = format_double(est.ci_low);
      ci_high = format_double(est.ci_high);
    } else if (method == "bayes") {
      est = bayes_estimate(trace, sched, prior, grid_points);
      ci_low = format_double(est.ci_low);
      ci_high = format_double(est.ci_high);
    } else if (method == "closed-form") {
      est.rho_e = closed_form_estimate(trace, sched, prior);
      est.n_updates = int(sched.size());
      est.out_of_range = est.rho_e < 0.0 || est.rho_e > 1.0;
    } else {
      fail(ErrorClass::invalid_parameter, "unknown method '" + method + "'");
    }

    auto header = base_header(cfg);
    header.emplace_back("trace", in);
    header.emplace_back("trace_seed", std::to_string(trace.seed));
    write_csv(out, header,
              {"method", "prior", "rho_e", "ci_low", "ci_high", "n_updates", "out_of_range"},
              {{method, prior_name, format_double(est.rho_e), ci_low, ci_high,
                std::to_string(est.n_updates), flag_string(est.out_of_range)}});
    std::cout << "rho_e = " << format_double(est.rho_e) << "\n";
    return 0;
  }

  int code = 0;
};

// ---- bounds ----

struct BoundsCmd {
  CommonFlags common;
  double rho = 0.5;
  std::optional<double> sigma0_sq;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("bounds", "analytic variance bounds at a given rho");
    common.attach(cmd);
    cmd->add_option("--rho", rho, "spin projection")->capture_default_str();
    cmd->add_option("--sigma0-sq", sigma0_sq, "conjugate prior variance");
    cmd->add_option("--out", out, "output CSV")->required();
    cmd->callback([this] { code = run(); });
  }

  int run() const {
    const Config cfg = common.resolve();
    const ReadoutSchedule sched = make_schedule(cfg.rates, cfg.readout_time, cfg.dt);
    const VarianceReport rep = variance_report(sched, rho, sigma0_sq);
    const auto opt = [](const std::optional<double>& v) {
      return v ? format_double(*v) : std::string();
    };
    write_csv(out, base_header(cfg),
              {"rho", "fisher", "crlb", "ps_variance", "flat_variance", "jeffreys_variance",
               "sigma0_sq", "conjugate_variance", "k_ratio", "exceedance"},
              {{format_double(rep.rho), format_double(rep.fisher), format_double(rep.crlb),
                format_double(rep.ps), format_double(rep.flat), format_double(rep.jeffreys),
                opt(rep.sigma0_sq), opt(rep.conjugate), opt(rep.k_ratio), opt(rep.exceedance)}});
    std::cout << "crlb = " << format_double(rep.crlb) << ", ps = " << format_double(rep.ps)
              << "\n";
    return 0;
  }

  int code = 0;
};

// ---- rabi ----

struct RabiCmd {
  CommonFlags common;
  std::optional<double> t_max;
  std::optional<double> t_step;
  std::optional<double> multiplier;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("rabi", "pulse-length scan of the predicted projection");
    common.attach(cmd);
    cmd->add_option("--tmax", t_max, "largest pulse length, ns (default two Rabi periods)");
    cmd->add_option("--tstep", t_step, "pulse length step, ns");
    cmd->add_option("--multiplier", multiplier, "conjugate prior width factor");
    cmd->add_option("--out", out, "output CSV")->required();
    cmd->callback([this] { code = run(); });
  }

  int run() const {
    const Config cfg = common.resolve();
    if (cfg.spin.omega <= 0.0)
      fail(ErrorClass::invalid_parameter, "rabi scan needs a positive Rabi frequency");
    const double period = 2.0 * M_PI / cfg.spin.omega;
    const double tmax = t_max ? *t_max : 2.0 * period;
    const double tstep = t_step ? *t_step : period / 50.0;
    if (!(tstep > 0.0) || !(tmax >= tstep))
      fail(ErrorClass::invalid_parameter, "pulse scan needs 0 < tstep <= tmax");
    const double mult = multiplier ? *multiplier : cfg.prior_multiplier;
    const ReadoutSchedule sched = make_schedule(cfg.rates, cfg.readout_time, cfg.dt);

    std::vector<std::vector<std::string>> rows;
    for (double t = 0.0; t <= tmax + 1e-9; t += tstep) {
      const Prior prior = conjugate_prior_for(cfg.spin, t, sched, mult);
      rows.push_back(
          {format_double(t), format_double(prior.rho0), format_double(prior.sigma0_sq)});
    }
    auto header = base_header(cfg);
    header.emplace_back("multiplier", format_double(mult));
    write_csv(out, header, {"t_mw_ns", "rho0", "sigma0_sq"}, rows);
    std::cout << "wrote " << rows.size() << " pulse lengths\n";
    return 0;
  }

  int code = 0;
};

// ---- calibrate ----

struct CalibrateCmd {
  CommonFlags common;
  std::string in, out;
  double margin = 3.0;
  double l_init = 1.0;
  double tail_fraction = 0.2;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("calibrate",
                                   "count scale and pump power from a polarized reference trace");
    common.attach(cmd);
    cmd->add_option("--in", in, "reference trace CSV (rho = 1, long enough to settle)")
        ->required();
    cmd->add_option("--out", out, "output CSV")->required();
    cmd->add_option("--margin", margin, "noise envelope width in model sigmas")
        ->capture_default_str();
    cmd->add_option("--l-init", l_init, "upper starting point of the pump scan")
        ->capture_default_str();
    cmd->add_option("--tail-fraction", tail_fraction, "steady-state tail window fraction")
        ->capture_default_str();
    cmd->callback([this] { code = run(); });
  }

  int run() const {
    const Config cfg = common.resolve();
    const FluorescenceTrace reference = read_trace_csv(in);
    const LambdaCalibration lam = estimate_lambda(reference, cfg.rates, tail_fraction);
    RateParameters with_lambda = cfg.rates;
    with_lambda.lambda = lam.lambda;
    const PumpCalibration pump = estimate_pump_power(reference, with_lambda, l_init, margin);

    auto header = base_header(cfg);
    header.emplace_back("reference", in);
    write_csv(out, header,
              {"lambda_per_ns", "lambda_mhz", "L", "tail_mean", "tail_bins", "margin",
               "max_residual"},
              {{format_double(lam.lambda), format_double(lam.lambda * 1e3),
                format_double(pump.L), format_double(lam.tail_mean),
                std::to_string(lam.tail_bins), format_double(pump.margin),
                format_double(pump.max_residual)}});
    std::cout << "lambda = " << format_double(lam.lambda * 1e3)
              << " MHz, L = " << format_double(pump.L) << "\n";
    return 0;
  }

  int code = 0;
};

// ---- bench ----

struct BenchCmd {
  CommonFlags common;
  std::string sweep;
  std::string values_text;
  std::string methods_text;
  int trials = 100;
  double rho = 0.5;
  std::uint64_t seed = 1;
  int grid_points = 400;
  std::optional<double> multiplier;
  std::string out_dir = ".";
  bool rounded = false;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("bench", "Monte-Carlo MSE sweeps and the two-group SNR run");
    common.attach(cmd);
    cmd->add_option("--sweep", sweep, "dt | grid_points | readout_time | pumping_rate | snr")
        ->required();
    cmd->add_option("--values", values_text, "comma-separated swept values");
    cmd->add_option("--methods", methods_text,
                    "comma-separated: ps,bayes-flat,bayes-jeffreys,bayes-conjugate");
    cmd->add_option("--trials", trials, "Monte-Carlo trials per point")->capture_default_str();
    cmd->add_option("--rho", rho, "true spin projection")->capture_default_str();
    cmd->add_option("--seed", seed, "base random seed")->capture_default_str();
    cmd->add_option("--grid-points", grid_points, "posterior grid size")->capture_default_str();
    cmd->add_option("--multiplier", multiplier, "conjugate prior width factor");
    cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
    cmd->add_flag("--rounded-means", rounded, "noise-free counts (rounded expected values)");
    cmd->callback([this] { code = run(); });
  }

  int run() const {
    const Config cfg = common.resolve();
    fs::create_directories(out_dir);
    if (sweep == "snr") return run_snr(cfg);
    return run_sweep(cfg);
  }

  int run_sweep(const Config& cfg) const {
    SweepConfig sc;
    if (sweep == "dt") sc.variable = SweepVariable::dt;
    else if (sweep == "grid_points") sc.variable = SweepVariable::grid_points;
    else if (sweep == "readout_time") sc.variable = SweepVariable::readout_time;
    else if (sweep == "pumping_rate") sc.variable = SweepVariable::pumping_rate;
    else fail(ErrorClass::invalid_parameter, "unknown sweep '" + sweep + "'");

    sc.rates = cfg.rates;
    sc.dt = cfg.dt;
    sc.readout_time = cfg.readout_time;
    sc.trials = trials;
    sc.true_rho = rho;
    sc.base_seed = seed;
    sc.grid_points = grid_points;
    sc.conjugate_multiplier = multiplier ? *multiplier : cfg.prior_multiplier;
    sc.trace_mode = rounded ? TraceMode::rounded_mean : TraceMode::poisson;
    if (!methods_text.empty()) {
      sc.methods.clear();
      std::istringstream ss(methods_text);
      std::string item;
      while (std::getline(ss, item, ',')) sc.methods.push_back(parse_method_token(item));
    }
    sc.values = values_text.empty() ? default_values(sc, cfg) : parse_value_list(values_text);

    const SweepResult result = run_mse_sweep(sc);

    auto comments = base_header(cfg);
    comments.emplace_back("seed", std::to_string(seed));
    std::string methods_echo;
    for (std::size_t i = 0; i < sc.methods.size(); ++i)
      methods_echo += std::string(i ? "," : "") + method_name(sc.methods[i]);
    comments.emplace_back("methods", methods_echo);
    std::string values_echo;
    for (std::size_t i = 0; i < sc.values.size(); ++i)
      values_echo += std::string(i ? "," : "") + format_double(sc.values[i]);
    comments.emplace_back("values", values_echo);

    // The run hash covers the full effective setup, not just the config file.
    std::string blob;
    for (const auto& [k, v] : comments) blob += k + "=" + v + "\n";
    blob += sweep + "/" + std::to_string(trials) + "/" + format_double(rho);
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", (unsigned long long)fnv1a64(blob));

    const std::string path = (fs::path(out_dir) / (sweep + "_" + hash + ".csv")).string();
    write_sweep_csv(result, sc, path, comments);
    std::cout << "wrote " << path << "\n";
    if (result.dt_crossover)
      std::cout << "dt crossover at " << format_double(*result.dt_crossover) << " ns\n";
    if (result.ps_min_value)
      std::cout << "ps minimum at " << format_double(*result.ps_min_value)
                << (result.ps_min_interior ? " ns (interior)\n" : " ns (edge)\n");
    return 0;
  }

  int run_snr(const Config& cfg) const {
    SnrConfig sc;
    sc.rates = cfg.rates;
    sc.spin = cfg.spin;
    sc.dt = cfg.dt;
    sc.readout_time = cfg.readout_time;
    sc.trials = trials;
    sc.seed = seed;
    sc.multiplier = multiplier ? *multiplier : cfg.prior_multiplier;
    sc.grid_points = grid_points;
    sc.trace_mode = rounded ? TraceMode::rounded_mean : TraceMode::poisson;
    const SnrResult result = run_snr_experiment(sc);

    auto comments = base_header(cfg);
    comments.emplace_back("seed", std::to_string(seed));
    comments.emplace_back("trials", std::to_string(trials));
    std::string blob;
    for (const auto& [k, v] : comments) blob += k + "=" + v + "\n";
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", (unsigned long long)fnv1a64(blob));
    const std::string path = (fs::path(out_dir) / ("snr_" + std::string(hash) + ".csv")).string();

    write_csv(path, comments, {"estimator", "snr", "rho_a", "rho_b", "trials_per_group"},
              {{"ps", format_double(result.snr_ps), format_double(result.rho_a),
                format_double(result.rho_b), std::to_string(result.trials_per_group)},
               {"bayes-conjugate", format_double(result.snr_bayes), format_double(result.rho_a),
                format_double(result.rho_b), std::to_string(result.trials_per_group)}});
    std::cout << "wrote " << path << "\n";
    std::cout << "snr ps = " << format_double(result.snr_ps)
              << ", bayes = " << format_double(result.snr_bayes) << "\n";
    return 0;
  }

  std::vector<double> default_values(const SweepConfig& sc, const Config& cfg) const {
    switch (sc.variable) {
      case SweepVariable::dt: {
        std::vector<double> v;
        for (double m : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) v.push_back(m * cfg.dt);
        return v;
      }
      case SweepVariable::grid_points:
        return {25, 50, 100, 200, 400, 800};
      case SweepVariable::readout_time: {
        const double t_star =
            optimal_ps_readout_time(sc.rates, sc.true_rho, cfg.dt, 4.0 * cfg.readout_time);
        std::vector<double> v;
        for (double f : {0.2, 0.35, 0.6, 1.0, 1.5, 2.2, 3.2, 4.5})
          v.push_back(std::max(cfg.dt, std::floor(f * t_star / cfg.dt) * cfg.dt));
        return v;
      }
      case SweepVariable::pumping_rate:
        return {0.1, 0.2, 0.3, 0.45, 0.6, 0.75, 0.9};
    }
    fail(ErrorClass::invalid_parameter, "unknown sweep variable");
  }

  int code = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian spin readout for NV-center fluorescence"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SimulateCmd simulate;
  EstimateCmd estimate;
  BoundsCmd bounds;
  RabiCmd rabi;
  CalibrateCmd calibrate;
  BenchCmd bench;

  simulate.attach(app);
  estimate.attach(app);
  bounds.attach(app);
  rabi.attach(app);
  calibrate.attach(app);
  bench.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.cls());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 9;
  }

  return simulate.code + estimate.code + bounds.code + rabi.code + calibrate.code + bench.code;
}
