#include "nvread/priors.hpp"

#include <cmath>

#include "nvread/errors.hpp"

namespace nvread {

Prior Prior::conjugate(double rho0, double sigma0_sq) {
  if (!std::isfinite(rho0) || rho0 < 0.0 || rho0 > 1.0)
    fail(ErrorClass::degenerate_prior, "conjugate prior center must lie in [0, 1]");
  if (!std::isfinite(sigma0_sq) || sigma0_sq <= 0.0)
    fail(ErrorClass::degenerate_prior, "conjugate prior variance must be positive");
  return {Kind::conjugate_gaussian, rho0, sigma0_sq};
}

const char* prior_name(const Prior& p) {
  switch (p.kind) {
    case Prior::Kind::flat: return "flat";
    case Prior::Kind::jeffreys: return "jeffreys";
    case Prior::Kind::conjugate_gaussian: return "conjugate";
  }
  return "unknown";
}

}  // namespace nvread
