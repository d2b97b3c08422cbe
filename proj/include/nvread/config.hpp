#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nvread/rates.hpp"
#include "nvread/spin.hpp"

namespace nvread {

inline constexpr const char* kVersion = "0.1.0";

// Working configuration. Internally everything is ns-based: rates in 1/ns,
// angular frequencies in rad/ns, times in ns. Config files speak MHz for
// rates and plain frequencies (converted on load) and ns for times.
struct Config {
  RateParameters rates;
  double dt = 1.0;              // bin width, ns
  double readout_time = 600.0;  // readout window, ns
  SpinParameters spin;
  double prior_multiplier = 4.0;
};

Config default_config();

// key = value lines, '#' comments. Rates and frequencies in MHz (lambda
// included), times in ns. Unknown keys are rejected so typos cannot be
// silently ignored; missing keys keep their defaults.
Config load_config(const std::string& path);

// Canonical echo of an effective configuration, one "key = value" pair per
// entry, in file units (MHz / ns). Used for output headers and hashing.
std::vector<std::pair<std::string, std::string>> config_echo(const Config& cfg);

// FNV-1a over the canonical echo, as fixed-width hex.
std::string config_hash(const Config& cfg);

std::string format_double(double v);  // shortest round-trip decimal (%.17g)

}  // namespace nvread
