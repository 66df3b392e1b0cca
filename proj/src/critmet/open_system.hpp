#ifndef CRITMET_OPEN_SYSTEM_HPP
#define CRITMET_OPEN_SYSTEM_HPP

#include <string>
#include <vector>

#include "critmet/dynamics.hpp"
#include "critmet/schedule.hpp"
#include "critmet/system.hpp"

namespace critmet {

struct OpenParams {
  double gamma = 0.0;  // thermalization rate
  double nbar = 0.0;   // mean bath occupation

  void validate() const {
    if (!(gamma >= 0.0)) fail(ErrorCode::invalid_argument, "gamma must be >= 0");
    if (!(nbar >= 0.0)) fail(ErrorCode::invalid_argument, "nbar must be >= 0");
  }
};

/// Second moments of the dissipative Gaussian state with the derived
/// squeezed-thermal parameters (mu, r, phi) and the running integral of
/// sinh^2(2r) feeding the dissipative QFI bound.
struct CovarianceState {
  double t = 0.0;
  double vxx = 0.5;
  double vpp = 0.5;
  double vxp = 0.0;
  double mu = 0.5;
  double r = 0.0;
  double phi = 0.0;  // unwrapped
  double a_acc = 0.0;

  /// mu = sqrt(det V), cosh 2r = (vxx+vpp)/(2 mu); phi continued from
  /// phi_prev by principal-value unwrap. Forming sqrt(det V) loses half the
  /// mantissa once cosh 2r ~ 1/sqrt(eps_mach); the integrator instead
  /// carries mu as its own component and derives the state via
  /// from_carried_mu.
  static CovarianceState from_moments(double t, double vxx, double vpp,
                                      double vxp, double a_acc,
                                      double phi_prev);
  static CovarianceState from_carried_mu(double t, double vxx, double vpp,
                                         double vxp, double mu, double a_acc,
                                         double phi_prev);
};

struct CovRates {
  double vxx = 0.0, vpp = 0.0, vxp = 0.0;
};

/// Affine linear covariance flow of the thermal Lindblad dissipator plus the
/// quadratic Hamiltonian drive.
CovRates cov_rates(const CovarianceState& state, double eps,
                   const SystemParams& params, const OpenParams& open);

/// Rates of the equivalent (mu, r, phi) form; cross-check only, singular
/// near r = 0.
void murphi_rates(double mu, double r, double phi, double eps,
                  const SystemParams& params, const OpenParams& open,
                  double* dmu, double* dr, double* dphi);

/// Integrate the covariance flow from the vacuum over [0, T]; feedback
/// schedules switch on the phase extracted from the covariance.
std::vector<CovarianceState> integrate_open(const SystemParams& params,
                                            const OpenParams& open,
                                            const Schedule& schedule, double T,
                                            const IntegratorConfig& config);

/// Instantaneous squeezed-thermal QFI: (8 mu / (2 mu + 1)) sinh^2(2r).
double instantaneous_qfi(const CovarianceState& state);

/// Dissipative QFI upper bound 4 T * integral of sinh^2(2r).
double qfi_open_bound(const std::vector<CovarianceState>& states, double T);

std::string open_run_csv(const std::vector<CovarianceState>& states);

}  // namespace critmet

#endif
