#ifndef CRITMET_QFI_HPP
#define CRITMET_QFI_HPP

#include <complex>
#include <vector>

#include "critmet/dynamics.hpp"

namespace critmet {

/// QFI of a trajectory: value = 2 |integral of sinh(2r) e^{i theta} dt|^2,
/// with the triangle-inequality envelope 2 (integral of sinh(2r) dt)^2.
struct QfiResult {
  double value = 0.0;
  std::complex<double> j_final{0.0, 0.0};
  double envelope = 0.0;
  double T = 0.0;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  int points_used = 0;
};

/// QFI from the trajectory's integrated accumulators (not re-quadrature).
QfiResult qfi_from_trajectory(const Trajectory& traj);

/// Least-squares slope of ln F against ln T over the window [lo, hi].
FitResult fit_power_law(const std::vector<std::pair<double, double>>& points,
                        double window_lo, double window_hi);

/// Least-squares slope of ln F against T over the window [lo, hi].
FitResult fit_exponent(const std::vector<std::pair<double, double>>& points,
                       double window_lo, double window_hi);

}  // namespace critmet

#endif
