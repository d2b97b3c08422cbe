#pragma once

#include <stdexcept>
#include <string>

namespace nvread {

// Failure taxonomy for the whole library. Every class maps to one stable CLI
// exit code (see tools/nvread.cpp), so keep the order append-only.
enum class ErrorClass {
  invalid_parameter,
  config_error,
  io_error,
  degenerate_schedule,
  degenerate_prior,
  zero_information,
  singular_bin,
  weight_underflow,
  numerical_failure,
  out_of_range,
  no_steady_state,
  zero_signal,
  no_feasible_pumping,
  step_size_failure,
};

const char* error_class_name(ErrorClass c);

class Error : public std::runtime_error {
 public:
  Error(ErrorClass c, const std::string& what);
  ErrorClass cls() const { return cls_; }

 private:
  ErrorClass cls_;
};

[[noreturn]] void fail(ErrorClass c, const std::string& what);

}  // namespace nvread
