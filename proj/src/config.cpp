#include "nvread/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "nvread/errors.hpp"
#include "nvread/numeric.hpp"

namespace nvread {
namespace {

constexpr double kMhzToPerNs = 1e-3;
constexpr double kTwoPi = 2.0 * M_PI;

double rad_per_ns_to_mhz(double w) { return w / (kTwoPi * kMhzToPerNs); }

}  // namespace

Config default_config() { return Config{}; }

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorClass::config_error, "cannot open config file " + path);

  std::map<std::string, double> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;  // blank line
    std::string eq;
    double value = 0.0;
    if (!(ls >> eq >> value) || eq != "=")
      fail(ErrorClass::config_error,
           path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    std::string extra;
    if (ls >> extra)
      fail(ErrorClass::config_error,
           path + ":" + std::to_string(lineno) + ": trailing text after value");
    if (!kv.emplace(key, value).second)
      fail(ErrorClass::config_error, path + ": duplicate key '" + key + "'");
  }

  Config cfg = default_config();
  const auto take = [&](const char* key, double& out, double scale) {
    auto it = kv.find(key);
    if (it != kv.end()) {
      out = it->second * scale;
      kv.erase(it);
    }
  };

  take("L", cfg.rates.L, 1.0);
  take("r", cfg.rates.r, kMhzToPerNs);
  take("r35", cfg.rates.r35, kMhzToPerNs);
  take("r45", cfg.rates.r45, kMhzToPerNs);
  take("r51", cfg.rates.r51, kMhzToPerNs);
  take("r52", cfg.rates.r52, kMhzToPerNs);
  take("r12", cfg.rates.r12, kMhzToPerNs);
  take("lambda", cfg.rates.lambda, kMhzToPerNs);
  take("dt", cfg.dt, 1.0);
  take("readout_time", cfg.readout_time, 1.0);
  take("rabi", cfg.spin.omega, kTwoPi * kMhzToPerNs);
  take("f_mw", cfg.spin.f_mw, kTwoPi * kMhzToPerNs);
  take("resonance", cfg.spin.resonance, kTwoPi * kMhzToPerNs);
  take("t2_star", cfg.spin.t2_star, 1.0);
  take("t1", cfg.spin.t1, 1.0);
  take("prior_multiplier", cfg.prior_multiplier, 1.0);

  if (!kv.empty())
    fail(ErrorClass::config_error, path + ": unknown key '" + kv.begin()->first + "'");

  validate(cfg.rates);
  if (!(cfg.dt > 0.0)) fail(ErrorClass::config_error, "dt must be positive");
  if (!(cfg.readout_time >= cfg.dt))
    fail(ErrorClass::config_error, "readout_time must cover at least one bin");
  validate(cfg.spin);
  if (!(cfg.prior_multiplier > 0.0))
    fail(ErrorClass::config_error, "prior_multiplier must be positive");
  return cfg;
}

std::vector<std::pair<std::string, std::string>> config_echo(const Config& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto add = [&](const char* key, double value) {
    out.emplace_back(key, format_double(value));
  };
  add("L", cfg.rates.L);
  add("r", cfg.rates.r / kMhzToPerNs);
  add("r35", cfg.rates.r35 / kMhzToPerNs);
  add("r45", cfg.rates.r45 / kMhzToPerNs);
  add("r51", cfg.rates.r51 / kMhzToPerNs);
  add("r52", cfg.rates.r52 / kMhzToPerNs);
  add("r12", cfg.rates.r12 / kMhzToPerNs);
  add("lambda", cfg.rates.lambda / kMhzToPerNs);
  add("dt", cfg.dt);
  add("readout_time", cfg.readout_time);
  add("rabi", rad_per_ns_to_mhz(cfg.spin.omega));
  add("f_mw", rad_per_ns_to_mhz(cfg.spin.f_mw));
  add("resonance", rad_per_ns_to_mhz(cfg.spin.resonance));
  add("t2_star", cfg.spin.t2_star);
  add("t1", cfg.spin.t1);
  add("prior_multiplier", cfg.prior_multiplier);
  return out;
}

std::string config_hash(const Config& cfg) {
  std::string text;
  for (const auto& [k, v] : config_echo(cfg)) {
    text += k;
    text += '=';
    text += v;
    text += '\n';
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)fnv1a64(text));
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace nvread
