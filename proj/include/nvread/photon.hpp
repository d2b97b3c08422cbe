#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nvread/rates.hpp"

namespace nvread {

// One recorded readout: integer photon counts per bin. Carries its own bin
// times so a trace file round-trips without the schedule that produced it;
// estimators re-derive coefficients from parameters plus these times.
struct FluorescenceTrace {
  std::vector<double> times;          // bin end times, ns
  double dt = 0.0;                    // bin width, ns
  std::uint64_t seed = 0;             // sampling seed, 0 when not simulated
  std::vector<std::int64_t> counts;   // photon counts, one per bin
};

// ln P(count | mean) for a Poisson bin. mean == 0 is a valid model limit:
// returns 0 for count == 0 and -inf otherwise.
double poisson_log_likelihood(std::int64_t count, double mean);

// Draw counts for every bin of the schedule at spin projection rho.
FluorescenceTrace sample_trace(const ReadoutSchedule& sched, double rho, std::uint64_t seed);

// Noise-free variant: counts are the expected values rounded to integers.
FluorescenceTrace rounded_mean_trace(const ReadoutSchedule& sched, double rho);

// Errors unless the trace was recorded on bins matching the schedule.
void require_aligned(const FluorescenceTrace& trace, const ReadoutSchedule& sched);

void write_trace_csv(const FluorescenceTrace& trace, const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& header = {});
FluorescenceTrace read_trace_csv(const std::string& path);

}  // namespace nvread
