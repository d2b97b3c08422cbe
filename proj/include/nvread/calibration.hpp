#pragma once

#include "nvread/photon.hpp"
#include "nvread/rates.hpp"

namespace nvread {

struct LambdaCalibration {
  double lambda = 0.0;      // counts per ns at unit excited population
  double tail_mean = 0.0;   // mean counts per bin over the tail window
  std::size_t tail_bins = 0;
};

// Count-rate scale from the steady-state tail of a long reference trace.
// The tail must actually be steady: a relative slope above 1% per us is
// rejected. params.lambda is ignored; only the rate structure matters.
LambdaCalibration estimate_lambda(const FluorescenceTrace& reference, const RateParameters& params,
                                  double tail_fraction = 0.2);

struct PumpCalibration {
  double L = 0.0;
  double margin = 0.0;
  double max_residual = 0.0;  // worst (observed - model) / sqrt(model), <= margin
};

// Smallest relative pump power whose rho = 1 model curve, padded by
// margin * sqrt(model counts), stays above the observed transient in every
// bin. Decreasing scan from l_init, then bisection to `resolution`.
// params.lambda must already be calibrated.
PumpCalibration estimate_pump_power(const FluorescenceTrace& reference,
                                    const RateParameters& params, double l_init = 1.0,
                                    double margin = 3.0, double resolution = 1e-3);

}  // namespace nvread
