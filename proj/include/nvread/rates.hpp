#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace nvread {

using Mat5 = Eigen::Matrix<double, 5, 5>;
using Vec5 = Eigen::Matrix<double, 5, 1>;

// Level order everywhere: |g,0>, |g,+-1>, |e,0>, |e,+-1>, metastable singlet.
//
// All rates are in 1/ns. L is the dimensionless pump power relative to
// saturation, so the optical pumping rate is L*r. Defaults are a
// literature-derived working point (r anchored so that L*r = 40 MHz at
// L = 0.9, ISC and singlet rates in the commonly fitted ranges, lambda at an
// ensemble-like count scale); they are a plausible instrument, not a fit to
// any particular device, and every test that depends on rates sets its own.
struct RateParameters {
  double L = 0.3;          // relative pump power, (0, 1] when pumping
  double r = 0.0444444;    // radiative decay rate; also saturated pump rate
  double r35 = 0.008;      // ISC from |e,0>
  double r45 = 0.055;      // ISC from |e,+-1>
  double r51 = 0.003;      // singlet -> |g,0>
  double r52 = 0.0015;     // singlet -> |g,+-1>
  double r12 = 5e-7;       // ground-state spin relaxation
  double lambda = 50.0;    // detected counts per ns at unit excited population
};

void validate(const RateParameters& p);

// Generator of the rate equations. Columns sum to zero (probability
// conservation) and every off-diagonal entry is nonnegative.
Mat5 build_rate_matrix(const RateParameters& p);

// Initial populations for spin projection rho: (rho, 1-rho, 0, 0, 0).
Vec5 spin_population(double rho);

// exp(A) by scaling and squaring, Taylor series run to machine precision on
// the scaled matrix. Robust for any generator this model can produce.
Mat5 matrix_exponential(const Mat5& a);

// p(t) = exp(M t) p0. Validates that p0 is a distribution and that the
// output still sums to one.
Vec5 evolve_populations(const Mat5& m, const Vec5& p0, double t);

// Unique fixed point of M with unit total population. Errors when the
// kernel is not one-dimensional (e.g. no pumping and no spin mixing).
Vec5 steady_state_populations(const Mat5& m);

struct BinCoefficients {
  double a = 0.0;  // slope of the expected count in rho
  double b = 0.0;  // expected count at rho = 0
};

// Detection bins and their linear count model. The expected count in bin n
// is a_n*rho + b_n, built from the excited-state populations evaluated at
// the bin end time t_n and multiplied by dt; there is deliberately no
// intra-bin integration, matching how a sampling instrument tags each
// reading with its clock edge.
class ReadoutSchedule {
 public:
  ReadoutSchedule(std::vector<double> times, double dt, std::vector<BinCoefficients> coeffs);

  std::size_t size() const { return times_.size(); }
  double time(std::size_t n) const { return times_[n]; }
  const std::vector<double>& times() const { return times_; }
  double dt() const { return dt_; }
  const BinCoefficients& coeff(std::size_t n) const { return coeffs_[n]; }

  // a_n*rho + b_n; rho must be in [0, 1].
  double expected_counts(std::size_t n, double rho) const;

  double sum_a() const;
  double sum_b() const;

 private:
  std::vector<double> times_;           // bin end times, ns, strictly increasing
  double dt_ = 0.0;                     // bin width, ns
  std::vector<BinCoefficients> coeffs_;
};

// Bin end times dt, 2*dt, ..., up to and including readout_time.
std::vector<double> uniform_bin_times(double readout_time, double dt);

// Coefficients for arbitrary bin end times. Uses one matrix exponential per
// distinct time gap and propagates the two basis population vectors.
ReadoutSchedule fluorescence_coefficients(const RateParameters& p, std::vector<double> times,
                                          double dt);

inline ReadoutSchedule make_schedule(const RateParameters& p, double readout_time, double dt) {
  return fluorescence_coefficients(p, uniform_bin_times(readout_time, dt), dt);
}

}  // namespace nvread
