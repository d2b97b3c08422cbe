#include "nvread/rates.hpp"

#include <cmath>
#include <map>
#include <utility>

#include "nvread/errors.hpp"

namespace nvread {
namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) fail(ErrorClass::invalid_parameter, std::string(name) + " must be finite");
}

}  // namespace

void validate(const RateParameters& p) {
  require_finite(p.L, "L");
  if (p.L < 0.0 || p.L > 1.0) fail(ErrorClass::invalid_parameter, "L must lie in [0, 1]");
  const std::pair<double, const char*> rates[] = {
      {p.r, "r"},   {p.r35, "r35"}, {p.r45, "r45"},
      {p.r51, "r51"}, {p.r52, "r52"}, {p.r12, "r12"},
  };
  for (const auto& [v, name] : rates) {
    require_finite(v, name);
    if (v < 0.0) fail(ErrorClass::invalid_parameter, std::string(name) + " must be nonnegative");
  }
  require_finite(p.lambda, "lambda");
  if (p.lambda <= 0.0) fail(ErrorClass::invalid_parameter, "lambda must be positive");
}

Mat5 build_rate_matrix(const RateParameters& p) {
  validate(p);
  const double pump = p.L * p.r;
  Mat5 m;
  m << -(pump + p.r12), p.r12,           p.r,            0.0,            p.r51,
       p.r12,           -(pump + p.r12), 0.0,            p.r,            p.r52,
       pump,            0.0,             -(p.r + p.r35), 0.0,            0.0,
       0.0,             pump,            0.0,            -(p.r + p.r45), 0.0,
       0.0,             0.0,             p.r35,          p.r45,          -(p.r51 + p.r52);
  return m;
}

Vec5 spin_population(double rho) {
  if (!std::isfinite(rho) || rho < 0.0 || rho > 1.0)
    fail(ErrorClass::invalid_parameter, "rho must lie in [0, 1]");
  Vec5 p;
  p << rho, 1.0 - rho, 0.0, 0.0, 0.0;
  return p;
}

Mat5 matrix_exponential(const Mat5& a) {
  if (!a.allFinite()) fail(ErrorClass::invalid_parameter, "matrix exponential of non-finite matrix");

  // Scale so the 1-norm is at most 1/2, then square back up.
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = int(std::ceil(std::log2(norm / 0.5)));
  const Mat5 x = a / std::ldexp(1.0, squarings);

  Mat5 sum = Mat5::Identity();
  Mat5 term = Mat5::Identity();
  bool converged = false;
  for (int k = 1; k <= 64; ++k) {
    term = (term * x) / double(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-18 * sum.cwiseAbs().maxCoeff()) {
      converged = true;
      break;
    }
  }
  if (!converged)
    fail(ErrorClass::numerical_failure, "matrix exponential series did not converge");

  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

Vec5 evolve_populations(const Mat5& m, const Vec5& p0, double t) {
  if (!std::isfinite(t) || t < 0.0) fail(ErrorClass::invalid_parameter, "time must be nonnegative");
  if (!p0.allFinite()) fail(ErrorClass::invalid_parameter, "populations must be finite");
  if (std::fabs(p0.sum() - 1.0) > 1e-9)
    fail(ErrorClass::invalid_parameter, "populations must sum to one");
  if (p0.minCoeff() < -1e-9)
    fail(ErrorClass::invalid_parameter, "populations must be nonnegative");

  const Vec5 p = matrix_exponential(m * t) * p0;
  if (std::fabs(p.sum() - 1.0) > 1e-9)
    fail(ErrorClass::numerical_failure, "evolution lost probability beyond tolerance");
  return p;
}

Vec5 steady_state_populations(const Mat5& m) {
  // M p = 0 with sum(p) = 1: replace the last row (linearly dependent on the
  // others, columns of M sum to zero) by the normalization constraint.
  Mat5 a = m;
  a.row(4).setOnes();
  Vec5 rhs;
  rhs << 0.0, 0.0, 0.0, 0.0, 1.0;
  const Vec5 p = a.fullPivLu().solve(rhs);

  if (!p.allFinite() || (m * p).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + m.cwiseAbs().maxCoeff()) ||
      p.minCoeff() < -1e-9)
    fail(ErrorClass::no_steady_state, "rate matrix has no unique steady state");
  return p;
}

ReadoutSchedule::ReadoutSchedule(std::vector<double> times, double dt,
                                 std::vector<BinCoefficients> coeffs)
    : times_(std::move(times)), dt_(dt), coeffs_(std::move(coeffs)) {
  if (times_.empty()) fail(ErrorClass::degenerate_schedule, "schedule has no bins");
  if (times_.size() != coeffs_.size())
    fail(ErrorClass::invalid_parameter, "schedule times and coefficients differ in length");
  if (!(dt_ > 0.0) || !std::isfinite(dt_))
    fail(ErrorClass::invalid_parameter, "dt must be positive");
  double prev = -1.0;
  for (double t : times_) {
    if (!std::isfinite(t) || t < 0.0)
      fail(ErrorClass::invalid_parameter, "bin times must be nonnegative");
    if (t <= prev) fail(ErrorClass::invalid_parameter, "bin times must be strictly increasing");
    prev = t;
  }
  for (const auto& c : coeffs_) {
    if (!std::isfinite(c.a) || !std::isfinite(c.b))
      fail(ErrorClass::invalid_parameter, "bin coefficients must be finite");
    if (c.b < 0.0 || c.a + c.b < 0.0)
      fail(ErrorClass::invalid_parameter, "bin coefficients give a negative expected count");
  }
}

double ReadoutSchedule::expected_counts(std::size_t n, double rho) const {
  if (n >= coeffs_.size()) fail(ErrorClass::out_of_range, "bin index past end of schedule");
  if (!std::isfinite(rho) || rho < 0.0 || rho > 1.0)
    fail(ErrorClass::out_of_range, "rho must lie in [0, 1]");
  const auto& c = coeffs_[n];
  // a*rho + b can round a hair below zero when a < 0 and rho = 1.
  return std::max(c.a * rho + c.b, 0.0);
}

double ReadoutSchedule::sum_a() const {
  double s = 0.0;
  for (const auto& c : coeffs_) s += c.a;
  return s;
}

double ReadoutSchedule::sum_b() const {
  double s = 0.0;
  for (const auto& c : coeffs_) s += c.b;
  return s;
}

std::vector<double> uniform_bin_times(double readout_time, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorClass::invalid_parameter, "dt must be positive");
  if (!(readout_time >= dt) || !std::isfinite(readout_time))
    fail(ErrorClass::degenerate_schedule, "readout window shorter than one bin");
  const auto n = std::size_t(std::floor(readout_time / dt + 1e-9));
  std::vector<double> times(n);
  for (std::size_t i = 0; i < n; ++i) times[i] = double(i + 1) * dt;
  return times;
}

ReadoutSchedule fluorescence_coefficients(const RateParameters& p, std::vector<double> times,
                                          double dt) {
  validate(p);
  const Mat5 m = build_rate_matrix(p);

  // Propagate the two basis vectors (1,-1,0,0,0) and (0,1,0,0,0); the counts
  // in a bin are linear in rho, so these carry the whole model. One matrix
  // exponential per distinct time gap covers uniform grids with a single
  // factorization.
  Vec5 v_slope, v_base;
  v_slope << 1.0, -1.0, 0.0, 0.0, 0.0;
  v_base << 0.0, 1.0, 0.0, 0.0, 0.0;

  std::map<double, Mat5> step_cache;
  std::vector<BinCoefficients> coeffs;
  coeffs.reserve(times.size());
  double t_prev = 0.0;
  for (double t : times) {
    const double gap = t - t_prev;
    if (!(gap > 0.0)) fail(ErrorClass::invalid_parameter, "bin times must be strictly increasing");
    auto it = step_cache.find(gap);
    if (it == step_cache.end()) it = step_cache.emplace(gap, matrix_exponential(m * gap)).first;
    v_slope = it->second * v_slope;
    v_base = it->second * v_base;
    t_prev = t;

    double a = p.lambda * (v_slope[2] + v_slope[3]) * dt;
    double b = p.lambda * (v_base[2] + v_base[3]) * dt;
    // Both b and a+b are populations scaled by positive factors; clean up
    // the sub-epsilon negatives the squared exponentials can leave behind.
    const double tol = 1e-12 * p.lambda * dt;
    if (b < 0.0 && b > -tol) b = 0.0;
    if (a + b < 0.0 && a + b > -tol) a = -b;
    coeffs.push_back({a, b});
  }
  return ReadoutSchedule(std::move(times), dt, std::move(coeffs));
}

}  // namespace nvread
