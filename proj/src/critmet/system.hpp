#ifndef CRITMET_SYSTEM_HPP
#define CRITMET_SYSTEM_HPP

#include <cmath>

#include "critmet/errors.hpp"

namespace critmet {

/// Mode frequency of the estimated oscillator. All rates in the equations of
/// motion are expressed through it and every result is reported at this
/// reference point; times are naturally quoted as the dimensionless omega*T.
struct SystemParams {
  double omega = 1.0;

  void validate() const {
    if (!(omega > 0.0) || !std::isfinite(omega))
      fail(ErrorCode::invalid_argument, "omega must be positive and finite");
  }
};

}  // namespace critmet

#endif
