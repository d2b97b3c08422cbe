#include <cmath>
#include <complex>

#include "doctest.h"
#include "nvread/bounds.hpp"
#include "nvread/errors.hpp"
#include "nvread/rates.hpp"
#include "nvread/spin.hpp"

#include "../oracles.hpp"

using namespace nvread;

namespace {

SpinParameters ideal_drive() {
  SpinParameters p;
  p.omega = 0.0321097;
  p.f_mw = p.resonance;  // on resonance
  p.t2_star = 1e12;      // effectively no dephasing
  p.t1 = 1e15;           // effectively no relaxation
  return p;
}

}  // namespace

TEST_CASE("zero pulse length returns the initial state") {
  const SpinState init;
  const SpinState out = integrate_spin(SpinParameters{}, init, 0.0);
  CHECK(out.p1 == init.p1);
  CHECK(out.p2 == init.p2);
  CHECK(out.p12 == init.p12);
}

TEST_CASE("without drive the populations relax with the longitudinal time") {
  SpinParameters p;
  p.omega = 0.0;
  for (double t : {1e3, 3e4, 2e5}) {
    const SpinState out = integrate_spin(p, SpinState{}, t);
    CHECK(std::fabs(out.p1 - oracles::t1_decay_p1(t, p.t1)) <= 1e-6);
    CHECK(std::fabs(out.p1 + out.p2 - 1.0) <= 1e-9);
    CHECK(std::abs(out.p12) <= 1e-12);
  }
}

TEST_CASE("an ideal pi pulse empties the bright state") {
  const SpinParameters p = ideal_drive();
  const double t_pi = M_PI / p.omega;
  const SpinState out = integrate_spin(p, SpinState{}, t_pi);
  CHECK(std::fabs(out.p1) <= 1e-6);
  CHECK(std::fabs(out.p2 - 1.0) <= 1e-6);
}

TEST_CASE("ideal resonant driving follows the squared-cosine law") {
  const SpinParameters p = ideal_drive();
  const double period = 2.0 * M_PI / p.omega;
  for (double frac : {0.1, 0.25, 0.4, 0.75, 1.3, 1.8}) {
    const double t = frac * period;
    const SpinState out = integrate_spin(p, SpinState{}, t);
    CHECK(std::fabs(out.p1 - oracles::ideal_rabi_p1(p.omega, t)) <= 1e-8);
  }
}

TEST_CASE("dephasing damps the oscillation like a damped oscillator") {
  SpinParameters p = ideal_drive();
  p.t2_star = 288.0;
  for (double t : {50.0, 150.0, 300.0, 500.0}) {
    const SpinState out = integrate_spin(p, SpinState{}, t);
    CHECK(std::fabs(out.p1 - oracles::damped_rabi_p1(p.omega, p.t2_star, t)) <= 1e-6);
  }
}

TEST_CASE("integration preserves trace and hermiticity off resonance") {
  SpinParameters p;
  p.f_mw = p.resonance + 0.005;
  const SpinState out = integrate_spin(p, SpinState{}, 200.0);
  CHECK(std::fabs(out.p1 + out.p2 - 1.0) <= 1e-9);
  CHECK(std::abs(out.p21 - std::conj(out.p12)) <= 1e-9);
  CHECK(out.p1 >= -1e-12);
  CHECK(out.p2 >= -1e-12);
}

TEST_CASE("detuning to either side of resonance acts identically on populations") {
  for (double delta : {0.002, 0.01, 0.03}) {
    SpinParameters above;
    above.f_mw = above.resonance + delta;
    SpinParameters below;
    below.f_mw = below.resonance - delta;
    for (double t : {40.0, 150.0, 350.0}) {
      const SpinState up = integrate_spin(above, SpinState{}, t);
      const SpinState down = integrate_spin(below, SpinState{}, t);
      CHECK(std::fabs(up.p1 - down.p1) <= 1e-9);
    }
  }
}

TEST_CASE("off-resonant driving cannot fully invert the spin") {
  SpinParameters p = ideal_drive();
  p.f_mw = p.resonance + 2.0 * p.omega;  // strongly detuned
  double min_p1 = 1.0;
  for (double t = 0.0; t <= 200.0; t += 5.0)
    min_p1 = std::min(min_p1, integrate_spin(p, SpinState{}, t).p1);
  // Generalized flopping floor: 1 - omega^2 / (omega^2 + delta^2).
  CHECK(min_p1 >= 1.0 - 1.0 / 5.0 - 1e-6);
}

TEST_CASE("splitting a pulse in two reproduces the single pulse") {
  const SpinParameters p;  // realistic damping, on resonance
  for (double t : {80.0, 240.0, 600.0}) {
    const SpinState once = integrate_spin(p, SpinState{}, t);
    const SpinState half = integrate_spin(p, SpinState{}, 0.5 * t);
    const SpinState twice = integrate_spin(p, half, 0.5 * t);
    CHECK(std::fabs(once.p1 - twice.p1) <= 1e-8);
    CHECK(std::abs(once.p12 - twice.p12) <= 1e-8);
  }
}

TEST_CASE("pulse-length to projection map stays inside the unit interval") {
  const SpinParameters p;
  CHECK(rho_for_mw_time(p, 0.0) == 1.0);
  const double t_pi = M_PI / p.omega;
  CHECK(rho_for_mw_time(ideal_drive(), t_pi) <= 1e-6);
  for (double t = 0.0; t < 900.0; t += 37.0) {
    const double rho = rho_for_mw_time(p, t);
    CHECK(rho >= 0.0);
    CHECK(rho <= 1.0);
  }
}

TEST_CASE("predicted priors center on the pulse map and scale with the bound") {
  const SpinParameters sp;
  const ReadoutSchedule sched = make_schedule(RateParameters{}, 300.0, 2.0);
  for (double t : {0.0, 30.0, 97.0, 200.0}) {
    const Prior prior = conjugate_prior_for(sp, t, sched, 4.0);
    const double rho0 = rho_for_mw_time(sp, t);
    CHECK(prior.rho0 == doctest::Approx(rho0).epsilon(1e-12));
    CHECK(prior.sigma0_sq == doctest::Approx(4.0 * crlb(sched, rho0)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(conjugate_prior_for(sp, 10.0, sched, 0.0), Error);
  CHECK_THROWS_AS(conjugate_prior_for(sp, 10.0, sched, -2.0), Error);
}

TEST_CASE("spin integration validates parameters and states") {
  SpinParameters p;
  CHECK_THROWS_AS(integrate_spin(p, SpinState{}, -1.0), Error);
  p.t2_star = 0.0;
  CHECK_THROWS_AS(integrate_spin(p, SpinState{}, 1.0), Error);
  p = SpinParameters{};
  p.t1 = -5.0;
  CHECK_THROWS_AS(integrate_spin(p, SpinState{}, 1.0), Error);
  p = SpinParameters{};
  p.omega = -0.1;
  CHECK_THROWS_AS(integrate_spin(p, SpinState{}, 1.0), Error);
  SpinState bad;
  bad.p1 = 0.7;
  bad.p2 = 0.7;
  CHECK_THROWS_AS(integrate_spin(SpinParameters{}, bad, 1.0), Error);
  SpinState skew;
  skew.p1 = 0.5;
  skew.p2 = 0.5;
  skew.p12 = {0.1, 0.2};
  skew.p21 = {0.1, 0.2};  // not the conjugate
  CHECK_THROWS_AS(integrate_spin(SpinParameters{}, skew, 1.0), Error);
}
