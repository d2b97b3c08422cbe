#include "nvread/spin.hpp"

#include <algorithm>
#include <cmath>

#include "nvread/bounds.hpp"
#include "nvread/errors.hpp"

namespace nvread {
namespace {

using Cplx = std::complex<double>;

struct SpinVec {
  Cplx p12, p21, p1, p2;
};

SpinVec operator+(const SpinVec& x, const SpinVec& y) {
  return {x.p12 + y.p12, x.p21 + y.p21, x.p1 + y.p1, x.p2 + y.p2};
}
SpinVec operator*(double s, const SpinVec& x) { return {s * x.p12, s * x.p21, s * x.p1, s * x.p2}; }

// Bloch equations in the frame rotating at the drive frequency. The
// coherence pair stays mutually conjugate (so populations stay real): the
// detuning enters p12 and p21 with opposite signs.
SpinVec derivative(const SpinParameters& p, const SpinVec& y) {
  const Cplx i(0.0, 1.0);
  const double delta = p.f_mw - p.resonance;
  const Cplx half_rabi = 0.5 * i * p.omega;
  SpinVec d;
  d.p12 = -y.p12 / p.t2_star + i * delta * y.p12 + half_rabi * (y.p1 - y.p2);
  d.p21 = -y.p21 / p.t2_star - i * delta * y.p21 + half_rabi * (y.p2 - y.p1);
  d.p1 = half_rabi * (y.p12 - y.p21) - (y.p1 - y.p2) / p.t1;
  d.p2 = half_rabi * (y.p21 - y.p12) - (y.p2 - y.p1) / p.t1;
  return d;
}

SpinVec rk4_step(const SpinParameters& p, const SpinVec& y, double h) {
  const SpinVec k1 = derivative(p, y);
  const SpinVec k2 = derivative(p, y + 0.5 * h * k1);
  const SpinVec k3 = derivative(p, y + 0.5 * h * k2);
  const SpinVec k4 = derivative(p, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double invariant_drift(const SpinVec& y) {
  const double trace = std::fabs((y.p1 + y.p2).real() - 1.0);
  const double realness = std::max(std::fabs(y.p1.imag()), std::fabs(y.p2.imag()));
  const double hermiticity = std::abs(y.p21 - std::conj(y.p12));
  return std::max({trace, realness, hermiticity});
}

}  // namespace

void validate(const SpinParameters& p) {
  if (!std::isfinite(p.omega) || p.omega < 0.0)
    fail(ErrorClass::invalid_parameter, "Rabi frequency must be nonnegative");
  if (!std::isfinite(p.f_mw) || !std::isfinite(p.resonance))
    fail(ErrorClass::invalid_parameter, "drive and resonance frequencies must be finite");
  if (!(p.t2_star > 0.0) || !(p.t1 > 0.0))
    fail(ErrorClass::invalid_parameter, "relaxation times must be positive");
}

SpinState integrate_spin(const SpinParameters& p, const SpinState& init, double t_mw) {
  validate(p);
  if (!std::isfinite(t_mw) || t_mw < 0.0)
    fail(ErrorClass::invalid_parameter, "pulse length must be nonnegative");
  if (std::fabs(init.p1 + init.p2 - 1.0) > 1e-9)
    fail(ErrorClass::invalid_parameter, "initial populations must sum to one");
  if (std::abs(init.p21 - std::conj(init.p12)) > 1e-9)
    fail(ErrorClass::invalid_parameter, "initial coherences must be mutually conjugate");
  if (t_mw == 0.0) return init;

  double scale = std::min(p.t2_star, p.t1);
  if (p.omega > 0.0) scale = std::min(scale, 2.0 * M_PI / p.omega);
  const double h_target = scale / 1000.0;

  const double max_steps = 2e8;
  SpinVec y0{init.p12, init.p21, {init.p1, 0.0}, {init.p2, 0.0}};
  for (int refinement = 0; refinement < 3; ++refinement) {
    const double steps_needed = std::ceil(t_mw / h_target) * std::ldexp(1.0, 2 * refinement);
    if (steps_needed > max_steps)
      fail(ErrorClass::step_size_failure, "pulse requires too many integration steps");
    const auto n = std::max<long long>(1, (long long)(steps_needed));
    const double h = t_mw / double(n);

    SpinVec y = y0;
    for (long long s = 0; s < n; ++s) y = rk4_step(p, y, h);

    if (invariant_drift(y) <= 1e-6) {
      SpinState out;
      out.p1 = y.p1.real();
      out.p2 = y.p2.real();
      out.p12 = y.p12;
      out.p21 = y.p21;
      return out;
    }
  }
  fail(ErrorClass::step_size_failure, "integration drift persisted after refinement");
}

double rho_for_mw_time(const SpinParameters& p, double t_mw) {
  const SpinState s = integrate_spin(p, SpinState{}, t_mw);
  return std::min(1.0, std::max(0.0, s.p1));
}

Prior conjugate_prior_for(const SpinParameters& p, double t_mw, const ReadoutSchedule& sched,
                          double multiplier) {
  if (!(multiplier > 0.0) || !std::isfinite(multiplier))
    fail(ErrorClass::invalid_parameter, "prior variance multiplier must be positive");
  const double rho0 = rho_for_mw_time(p, t_mw);
  const double bound = crlb(sched, rho0);
  return Prior::conjugate(rho0, multiplier * bound);
}

}  // namespace nvread
