#pragma once

#include <complex>

#include "nvread/priors.hpp"
#include "nvread/rates.hpp"

namespace nvread {

// Two-level ground-state manifold under microwave drive, rotating frame.
// Frequencies are angular (rad/ns), times in ns.
struct SpinParameters {
  double omega = 0.0321097;       // Rabi frequency
  double f_mw = 18.0327;          // drive frequency
  double resonance = 18.0327;     // gamma_e * B + D_gs
  double t2_star = 288.0;         // dephasing time
  double t1 = 1.03e6;             // longitudinal relaxation time
};

void validate(const SpinParameters& p);

struct SpinState {
  double p1 = 1.0;                    // population of |0>
  double p2 = 0.0;                    // population of |+-1>
  std::complex<double> p12{0.0, 0.0};
  std::complex<double> p21{0.0, 0.0};
};

// Fixed-step RK4 for the Bloch equations with dephasing (1/T2*) and
// relaxation (1/T1). The step resolves the fastest of T2*, T1 and the Rabi
// period; it is refined automatically if the trace or hermiticity drift
// check fails, and errors if refinement cannot fix it.
SpinState integrate_spin(const SpinParameters& p, const SpinState& init, double t_mw);

// Population of |0> after driving for t_mw from |0>, clipped to [0, 1].
// This is the spin projection the readout estimates.
double rho_for_mw_time(const SpinParameters& p, double t_mw);

// Prior for a readout that follows a microwave pulse of length t_mw:
// centered at the predicted projection, with variance multiplier * CRLB
// evaluated there. Multipliers of 3 to 5 keep the prior honest without
// washing it out.
Prior conjugate_prior_for(const SpinParameters& p, double t_mw, const ReadoutSchedule& sched,
                          double multiplier = 4.0);

}  // namespace nvread
