#include "nvread/bounds.hpp"

#include <cmath>

#include "nvread/errors.hpp"

namespace nvread {

double fisher_information(const ReadoutSchedule& sched, double rho) {
  if (!std::isfinite(rho) || rho < 0.0 || rho > 1.0)
    fail(ErrorClass::out_of_range, "rho must lie in [0, 1]");
  double info = 0.0;
  for (std::size_t n = 0; n < sched.size(); ++n) {
    const auto& c = sched.coeff(n);
    if (c.a == 0.0) continue;
    const double mean = std::max(c.a * rho + c.b, 0.0);
    if (mean <= 0.0)
      fail(ErrorClass::singular_bin, "bin with zero mean but nonzero slope at this rho");
    info += c.a * c.a / mean;
  }
  return info;
}

double crlb(const ReadoutSchedule& sched, double rho) {
  const double info = fisher_information(sched, rho);
  if (info <= 0.0) fail(ErrorClass::zero_information, "schedule carries no spin information");
  return 1.0 / info;
}

double ps_variance(const ReadoutSchedule& sched, double rho) {
  if (!std::isfinite(rho) || rho < 0.0 || rho > 1.0)
    fail(ErrorClass::out_of_range, "rho must lie in [0, 1]");
  const double sum_a = sched.sum_a();
  if (sum_a == 0.0)
    fail(ErrorClass::degenerate_schedule, "photon summation undefined: slopes sum to zero");
  double total_mean = 0.0;
  for (std::size_t n = 0; n < sched.size(); ++n)
    total_mean += std::max(sched.coeff(n).a * rho + sched.coeff(n).b, 0.0);
  return total_mean / (sum_a * sum_a);
}

double prior_variance(const ReadoutSchedule& sched, double rho, const Prior& prior) {
  const double bound = crlb(sched, rho);
  switch (prior.kind) {
    case Prior::Kind::flat:
    case Prior::Kind::jeffreys:
      return bound;
    case Prior::Kind::conjugate_gaussian: {
      const double info = 1.0 / bound;
      const double s2 = prior.sigma0_sq;
      return 1.0 / (info + 2.0 / s2 + 1.0 / (s2 * s2 * info));
    }
  }
  fail(ErrorClass::invalid_parameter, "unknown prior kind");
}

double crlb_exceedance(double crlb_value, double sigma0_sq) {
  if (!(crlb_value > 0.0) || !std::isfinite(crlb_value))
    fail(ErrorClass::invalid_parameter, "crlb must be positive");
  if (!(sigma0_sq > 0.0) || !std::isfinite(sigma0_sq))
    fail(ErrorClass::degenerate_prior, "sigma0_sq must be positive");
  const double k = crlb_value / sigma0_sq;
  const double shrink = 1.0 + k;
  return (1.0 - 1.0 / (shrink * shrink)) * crlb_value;
}

VarianceReport variance_report(const ReadoutSchedule& sched, double rho,
                               std::optional<double> sigma0_sq) {
  VarianceReport rep;
  rep.rho = rho;
  rep.fisher = fisher_information(sched, rho);
  rep.crlb = crlb(sched, rho);
  rep.ps = ps_variance(sched, rho);
  rep.flat = prior_variance(sched, rho, Prior::flat());
  rep.jeffreys = prior_variance(sched, rho, Prior::jeffreys());
  if (sigma0_sq) {
    rep.sigma0_sq = *sigma0_sq;
    rep.conjugate = prior_variance(sched, rho, Prior::conjugate(rho, *sigma0_sq));
    rep.k_ratio = rep.crlb / *sigma0_sq;
    rep.exceedance = crlb_exceedance(rep.crlb, *sigma0_sq);
  }
  return rep;
}

}  // namespace nvread
