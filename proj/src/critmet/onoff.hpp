#ifndef CRITMET_ONOFF_HPP
#define CRITMET_ONOFF_HPP

#include <vector>

#include "critmet/system.hpp"

namespace critmet {

/// A solved on-off protocol for given horizon T, winding number n and drive
/// ceiling eps_max: per-cycle switching angle phi_n, final-segment angle
/// tilde_phi_n, and the squeezing the protocol predicts in the
/// large-squeezing model.
struct OnOffSolution {
  int n = 0;
  double T = 0.0;
  double eps_max = 0.0;
  double phi_n = 0.0;        // rad; for n = 0 stored as pi (no full cycles)
  double tilde_phi_n = 0.0;  // rad, in [0, 2*pi)
  double r_pred = 0.0;
  bool feasible = false;
};

struct OptimizeResult {
  OnOffSolution best;
  std::vector<OnOffSolution> scan;  // one entry per n in [0, n_max]
  int tie_with = -1;  // second winding number if two tie in r_pred at 1e-9
};

/// Duration of a drive-on stage sweeping phase from 0 to `phi` at level
/// eps_max: integral of 1/(2(omega - eps_max sin^2(phi'/2))).
/// Reduces to tan(phi/2)/omega at eps_max = omega (pole at phi >= pi there).
double onoff_time_on(double phi, double eps_max, double omega);

/// Total protocol duration for n full cycles at angle phi_n plus the final
/// on-segment to tilde_phi.
double normalization_T(int n, double phi_n, double tilde_phi, double eps_max,
                       double omega);

/// Squeezing predicted by the large-r model for the same protocol.
double r_pred(int n, double phi_n, double tilde_phi, double eps_max,
              double omega);

/// Optimal protocol at fixed winding number, solving the joint stationarity
/// and normalization conditions including the final partial segment (the
/// segment drives the (n+1) ln(omega T) fixed-n squeezing growth);
/// feasible=false when the time budget cannot support n cycles on the
/// stationary branch.
OnOffSolution solve_fixed_n(double T, int n, double eps_max, double omega);

/// Maximize squeezing over the winding number. The n >= 1 candidates are
/// whole-cycle protocols (n identical on/off cycles filling the budget,
/// tilde_phi_n = 0), the family whose per-time rate the long-time analysis
/// optimizes; the n = 0 candidate is the single drive-on stage from
/// solve_fixed_n. Ties within 1e-9 resolve to the smaller n and are
/// reported via tie_with.
OptimizeResult optimize_n(double T, double eps_max, double omega, int n_max);

/// Root of tan(phi/2)(1 + ln cos(phi/2)) + pi - phi/2 = 0 in (2, pi);
/// the asymptotically optimal per-cycle switching angle.
double phi_star();

/// Exponential QFI rate Gamma(eps_max): 4 * max over phi in (0, pi] of the
/// per-time squeezing gain of the on-off family.
double gamma_exponent(double eps_max, double omega);

/// Asymptotic optimal winding number, ~0.1690 * omega * T.
double n_opt_asymptotic(double T, double omega);

}  // namespace critmet

#endif
