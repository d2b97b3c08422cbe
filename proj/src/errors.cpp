#include "nvread/errors.hpp"

namespace nvread {

const char* error_class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::invalid_parameter: return "invalid-parameter";
    case ErrorClass::config_error: return "config-error";
    case ErrorClass::io_error: return "io-error";
    case ErrorClass::degenerate_schedule: return "degenerate-schedule";
    case ErrorClass::degenerate_prior: return "degenerate-prior";
    case ErrorClass::zero_information: return "zero-information";
    case ErrorClass::singular_bin: return "singular-bin";
    case ErrorClass::weight_underflow: return "weight-underflow";
    case ErrorClass::numerical_failure: return "numerical-failure";
    case ErrorClass::out_of_range: return "out-of-range";
    case ErrorClass::no_steady_state: return "no-steady-state";
    case ErrorClass::zero_signal: return "zero-signal";
    case ErrorClass::no_feasible_pumping: return "no-feasible-pumping";
    case ErrorClass::step_size_failure: return "step-size-failure";
  }
  return "unknown";
}

Error::Error(ErrorClass c, const std::string& what)
    : std::runtime_error(std::string(error_class_name(c)) + ": " + what), cls_(c) {}

void fail(ErrorClass c, const std::string& what) { throw Error(c, what); }

}  // namespace nvread
