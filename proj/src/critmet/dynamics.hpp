#ifndef CRITMET_DYNAMICS_HPP
#define CRITMET_DYNAMICS_HPP

#include <string>
#include <vector>

#include "critmet/schedule.hpp"
#include "critmet/system.hpp"

namespace critmet {

/// Phase-space state of the squeezed vacuum in the regular x-y chart
/// (x = sinh 2r cos phi, y = sinh 2r sin phi), with the gauge angle theta,
/// the continuously unwrapped phase, and the running QFI integrals.
struct PhaseState {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double phi_unwrapped = 0.0;
  double j_re = 0.0;    // integral of sinh(2r) cos(theta)
  double j_im = 0.0;    // integral of sinh(2r) sin(theta)
  double a_acc = 0.0;   // integral of sinh^2(2r)
  double env_acc = 0.0; // integral of sinh(2r), backs the QFI envelope
};

struct EomRates {
  double x = 0.0, y = 0.0, theta = 0.0, phi = 0.0;
  double j_re = 0.0, j_im = 0.0, a = 0.0, env = 0.0;
};

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 1e30;
  double output_stride = 0.0;  // 0: store every accepted step
  double phase_step_cap = 0.78539816339744830962;  // pi/4

  void validate() const;
};

struct Trajectory {
  SystemParams params;
  std::string schedule_id;
  std::vector<PhaseState> samples;
  PhaseState final;
  int winding = 0;
};

/// Right-hand side of the augmented equations of motion. Below the origin
/// ball (x^2+y^2 < 1e-12) the singular theta rate is replaced by its exact
/// limiting value omega - eps/2 and the phi rate is reported as zero (the
/// integrator freezes the unwrapped phase there).
EomRates eom_rates(const PhaseState& state, double eps,
                   const SystemParams& params);

/// Integrate from the vacuum under `schedule` over [0, T].
Trajectory integrate(const SystemParams& params, const Schedule& schedule,
                     double T, const IntegratorConfig& config);

/// Same, from an injected phase-space point (test and diagnostics entry).
Trajectory integrate_from(const SystemParams& params, const Schedule& schedule,
                          double T, const IntegratorConfig& config, double x0,
                          double y0, double theta0);

double squeezing_of(const PhaseState& state);

int winding_of(const Trajectory& traj);

/// CSV export: header t,x,y,theta,phi,r,j_re,j_im,a_acc with full
/// 17-significant-digit doubles.
std::string trajectory_csv(const Trajectory& traj);
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace critmet

#endif
