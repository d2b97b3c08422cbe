#include "nvread/photon.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "nvread/errors.hpp"
#include "nvread/numeric.hpp"
#include "nvread/rng.hpp"

namespace nvread {

double poisson_log_likelihood(std::int64_t count, double mean) {
  if (count < 0) fail(ErrorClass::invalid_parameter, "negative photon count");
  if (!std::isfinite(mean) || mean < 0.0)
    fail(ErrorClass::invalid_parameter, "poisson mean must be finite and nonnegative");
  if (mean == 0.0) {
    return count == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  return double(count) * std::log(mean) - mean - log_factorial(count);
}

FluorescenceTrace sample_trace(const ReadoutSchedule& sched, double rho, std::uint64_t seed) {
  Rng rng(seed);
  FluorescenceTrace trace;
  trace.times = sched.times();
  trace.dt = sched.dt();
  trace.seed = seed;
  trace.counts.resize(sched.size());
  for (std::size_t n = 0; n < sched.size(); ++n)
    trace.counts[n] = rng.poisson(sched.expected_counts(n, rho));
  return trace;
}

FluorescenceTrace rounded_mean_trace(const ReadoutSchedule& sched, double rho) {
  FluorescenceTrace trace;
  trace.times = sched.times();
  trace.dt = sched.dt();
  trace.seed = 0;
  trace.counts.resize(sched.size());
  for (std::size_t n = 0; n < sched.size(); ++n)
    trace.counts[n] = std::llround(sched.expected_counts(n, rho));
  return trace;
}

void require_aligned(const FluorescenceTrace& trace, const ReadoutSchedule& sched) {
  if (trace.counts.size() != sched.size() || trace.times.size() != sched.size())
    fail(ErrorClass::invalid_parameter, "trace length does not match schedule");
  for (std::size_t n = 0; n < sched.size(); ++n) {
    if (std::fabs(trace.times[n] - sched.time(n)) > 1e-9)
      fail(ErrorClass::invalid_parameter, "trace bin times do not match schedule");
    if (trace.counts[n] < 0) fail(ErrorClass::invalid_parameter, "negative photon count");
  }
}

void write_trace_csv(const FluorescenceTrace& trace, const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& header) {
  std::ofstream out(path);
  if (!out) fail(ErrorClass::io_error, "cannot open " + path + " for writing");
  char buf[64];
  for (const auto& [k, v] : header) out << "# " << k << " = " << v << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", trace.dt);
  out << "# dt = " << buf << "\n";
  out << "# seed = " << trace.seed << "\n";
  out << "t_ns,f_count\n";
  for (std::size_t n = 0; n < trace.counts.size(); ++n) {
    std::snprintf(buf, sizeof buf, "%.17g", trace.times[n]);
    out << buf << "," << trace.counts[n] << "\n";
  }
  if (!out) fail(ErrorClass::io_error, "failed writing " + path);
}

FluorescenceTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorClass::io_error, "cannot open " + path);
  FluorescenceTrace trace;
  std::string line;
  bool saw_columns = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key, eq;
      ls >> key >> eq;
      if (eq == "=") {
        if (key == "dt") ls >> trace.dt;
        if (key == "seed") ls >> trace.seed;
      }
      continue;
    }
    if (!saw_columns) {
      if (line.rfind("t_ns", 0) != 0)
        fail(ErrorClass::io_error, path + " is not a trace file (bad column header)");
      saw_columns = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorClass::io_error, "malformed trace row in " + path);
    try {
      trace.times.push_back(std::stod(line.substr(0, comma)));
      trace.counts.push_back(std::stoll(line.substr(comma + 1)));
    } catch (const std::exception&) {
      fail(ErrorClass::io_error, "malformed trace row in " + path);
    }
  }
  if (trace.counts.empty()) fail(ErrorClass::io_error, path + " contains no bins");
  if (!(trace.dt > 0.0)) fail(ErrorClass::io_error, path + " is missing a positive dt header");
  return trace;
}

}  // namespace nvread
