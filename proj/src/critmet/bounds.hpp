#ifndef CRITMET_BOUNDS_HPP
#define CRITMET_BOUNDS_HPP

#include <string>
#include <utility>
#include <vector>

#include "critmet/dynamics.hpp"

namespace critmet {

struct BoundReport {
  std::string kind;  // "quadratic" or "ceiling"
  int cycle = 0;
  double bound_value = 0.0;
  double observed_value = 0.0;
  double margin = 0.0;  // bound - observed, worst over the cycle
  bool satisfied = false;
};

/// Polynomial QFI envelope at fixed winding number:
/// 2 T^2 [2F1(1/2, -(n+1), 3/2, -omega^2 T^2/(n+1))]^2, evaluated as the
/// exact finite sum (the second parameter is a negative integer).
double qfi_poly_bound(double T, int n, double omega);

/// Leading T^(4n+6) coefficient of qfi_poly_bound, in two circulating
/// closed forms: the commonly quoted reduction and the direct expansion of
/// the polynomial's top term. They disagree in the omega power (only the
/// expanded form matches numeric coefficient extraction); both are
/// surfaced, not reconciled. Returns {quoted, expanded}.
std::pair<double, double> poly_bound_leading_coeff(int n, double omega);

/// Squeezing ceiling away from criticality: sinh 2r <= (1-eps_max/omega)^-(n+1).
double squeezing_cap(double eps_max, int n, double omega);

/// Per-cycle squeezing-growth checks on a recorded trajectory, one report per
/// (cycle, bound-form) pair with the worst sample margin in that cycle.
std::vector<BoundReport> cycle_growth_check(const Trajectory& traj,
                                           double eps_max, double omega);

std::string bound_reports_csv(const std::vector<BoundReport>& reports);

}  // namespace critmet

#endif
