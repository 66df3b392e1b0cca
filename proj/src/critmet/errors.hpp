#ifndef CRITMET_ERRORS_HPP
#define CRITMET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace critmet {

enum class ErrorCode {
  ok = 0,
  invalid_argument,    // bad parameter / config
  invalid_state,       // non-finite or inconsistent state
  domain_error,        // input outside an operation's declared domain
  pole_error,          // evaluation at a tangent/log pole
  infeasible,          // no solution under the given constraints
  event_localization,  // step-size underflow while locating a control switch
  overflow_error,      // phase-space magnitude beyond double range policy
  truncation_error,    // Fock truncation health violated
  step_size_error,     // finite-difference / stepping accuracy not reached
  numeric_error,       // generic numerical failure
  io_error,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace critmet

#endif
