/* critmet — simulator and optimal-control toolkit for critical quantum
 * metrology of a single driven bosonic mode.
 *
 * C API over the C++ core: opaque handles, status-code returns, outputs via
 * pointers. All functions are thread-safe as long as distinct handles are
 * not shared between threads without synchronization; error messages are
 * thread-local (critmet_last_error).
 *
 * Conventions: omega is the mode frequency; control values eps are absolute
 * (same units as omega) and admissible in [0, omega]; times are in 1/omega
 * units when omega = 1.
 */
#ifndef CRITMET_H
#define CRITMET_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum critmet_status {
  CRITMET_OK = 0,
  CRITMET_ERR_INVALID_ARGUMENT = 1,
  CRITMET_ERR_INVALID_STATE = 2,
  CRITMET_ERR_DOMAIN = 3,
  CRITMET_ERR_POLE = 4,
  CRITMET_ERR_INFEASIBLE = 5,
  CRITMET_ERR_EVENT_LOCALIZATION = 6,
  CRITMET_ERR_OVERFLOW = 7,
  CRITMET_ERR_TRUNCATION = 8,
  CRITMET_ERR_STEP_SIZE = 9,
  CRITMET_ERR_NUMERIC = 10,
  CRITMET_ERR_IO = 11,
  CRITMET_ERR_INTERNAL = 12
} critmet_status;

/* Message for the most recent failing call on this thread. */
const char* critmet_last_error(void);

void critmet_version(int* major, int* minor, int* patch);

/* ------------------------------------------------------------ schedules */

typedef struct critmet_schedule critmet_schedule;

/* Parse the JSON literal format, e.g.
 *   {"kind":"onoff_feedback","phi_on":2.8,"eps_on":1.0}
 *   {"kind":"constant","eps":1.0}
 *   {"kind":"piecewise","segments":[[1.0,1.0],[2.0,0.0]]}
 *   {"kind":"ramp","eps_start":0,"eps_end":1,"T":5}
 * eps values in the document are in units of omega. */
critmet_status critmet_schedule_parse(const char* json, double omega,
                                      critmet_schedule** out);
critmet_status critmet_schedule_constant(double eps, double eps_max,
                                         critmet_schedule** out);
critmet_status critmet_schedule_ramp(double eps_start, double eps_end,
                                     double T, double eps_max,
                                     critmet_schedule** out);
/* segments: array of (duration, eps) pairs, length 2*n_segments. */
critmet_status critmet_schedule_piecewise(const double* durations,
                                          const double* eps, int n_segments,
                                          double eps_max,
                                          critmet_schedule** out);
critmet_status critmet_schedule_onoff_feedback(double phi_on, double eps_on,
                                               int cycle_cap /* <0: none */,
                                               critmet_schedule** out);
void critmet_schedule_free(critmet_schedule* s);

critmet_status critmet_schedule_eval(const critmet_schedule* s, double t,
                                     double phi_mod, double* eps);
critmet_status critmet_schedule_is_monotone(const critmet_schedule* s,
                                            int grid_points, int* monotone);
/* JSON text of the schedule; pointer owned by the handle, valid until the
 * next call on the same handle or free. */
const char* critmet_schedule_json(critmet_schedule* s);

/* --------------------------------------------------- on-off optimization */

typedef struct critmet_onoff_solution {
  int n;
  double T;
  double eps_max;
  double phi_n;
  double tilde_phi_n;
  double r_pred;
  int feasible;
} critmet_onoff_solution;

critmet_status critmet_onoff_solve(double T, int n, double eps_max,
                                   double omega, critmet_onoff_solution* out);
/* scan may be NULL (scan_cap 0); *scan_len receives min(n_max+1, scan_cap).
 * tie_n: -1 or the larger winding of an r_pred tie at 1e-9. */
critmet_status critmet_onoff_optimize(double T, double eps_max, double omega,
                                      int n_max, critmet_onoff_solution* best,
                                      critmet_onoff_solution* scan,
                                      int scan_cap, int* scan_len, int* tie_n);
critmet_status critmet_onoff_normalization_T(int n, double phi_n,
                                             double tilde_phi, double eps_max,
                                             double omega, double* T);
critmet_status critmet_onoff_r_pred(int n, double phi_n, double tilde_phi,
                                    double eps_max, double omega, double* r);
critmet_status critmet_phi_star(double* phi);
critmet_status critmet_gamma_exponent(double eps_max, double omega,
                                      double* gamma);
critmet_status critmet_n_opt_asymptotic(double T, double omega, double* n);

/* Programmed (piecewise) or feedback realization of a solved protocol. */
critmet_status critmet_schedule_from_onoff(const critmet_onoff_solution* sol,
                                           double omega,
                                           critmet_schedule** out);
critmet_status critmet_feedback_from_onoff(const critmet_onoff_solution* sol,
                                           critmet_schedule** out);

/* ------------------------------------------------------ closed dynamics */

typedef struct critmet_integrator_config {
  double rel_tol;
  double abs_tol;
  double max_step;
  double output_stride;   /* 0: store every accepted step */
  double phase_step_cap;  /* <= pi/4 */
} critmet_integrator_config;

void critmet_integrator_config_default(critmet_integrator_config* cfg);

typedef struct critmet_phase_state {
  double t, x, y, theta, phi, r, j_re, j_im, a_acc;
} critmet_phase_state;

typedef struct critmet_trajectory critmet_trajectory;

critmet_status critmet_integrate(double omega, const critmet_schedule* s,
                                 double T,
                                 const critmet_integrator_config* cfg,
                                 critmet_trajectory** out);
void critmet_trajectory_free(critmet_trajectory* t);
size_t critmet_trajectory_size(const critmet_trajectory* t);
critmet_status critmet_trajectory_sample(const critmet_trajectory* t,
                                         size_t index,
                                         critmet_phase_state* out);
critmet_status critmet_trajectory_final(const critmet_trajectory* t,
                                        critmet_phase_state* out);
int critmet_trajectory_winding(const critmet_trajectory* t);
/* CSV columns t,x,y,theta,phi,r,j_re,j_im,a_acc, 17 significant digits. */
critmet_status critmet_trajectory_write_csv(const critmet_trajectory* t,
                                            const char* path);

typedef struct critmet_qfi_result {
  double value;
  double envelope;
  double j_re, j_im;
  double T;
} critmet_qfi_result;

critmet_status critmet_trajectory_qfi(const critmet_trajectory* t,
                                      critmet_qfi_result* out);

/* ------------------------------------------------------------ bounds */

/* Polynomial QFI envelope at fixed winding number (exact finite sum). */
critmet_status critmet_qfi_poly_bound(double T, int n, double omega,
                                      double* bound);
/* Leading T^(4n+6) coefficient, quoted and expanded closed forms. */
critmet_status critmet_poly_bound_leading_coeff(int n, double omega,
                                                double* quoted_form,
                                                double* expanded_form);
/* Squeezing ceiling below the critical drive: (1 - eps_max/omega)^-(n+1). */
critmet_status critmet_squeezing_cap(double eps_max, int n, double omega,
                                     double* bound);

typedef struct critmet_bound_report {
  char kind[16];
  int cycle;
  double bound;
  double observed;
  double margin;
  int satisfied;
} critmet_bound_report;

/* reports may be NULL to query the count via *len only. */
critmet_status critmet_cycle_growth_check(const critmet_trajectory* t,
                                          double eps_max, double omega,
                                          critmet_bound_report* reports,
                                          int cap, int* len);

/* --------------------------------------------------------- open system */

typedef struct critmet_open_params {
  double gamma;
  double nbar;
} critmet_open_params;

typedef struct critmet_cov_state {
  double t, vxx, vpp, vxp, mu, r, phi, a_acc;
} critmet_cov_state;

typedef struct critmet_open_run critmet_open_run;

critmet_status critmet_integrate_open(double omega, critmet_open_params open,
                                      const critmet_schedule* s, double T,
                                      const critmet_integrator_config* cfg,
                                      critmet_open_run** out);
void critmet_open_run_free(critmet_open_run* r);
size_t critmet_open_run_size(const critmet_open_run* r);
critmet_status critmet_open_run_state(const critmet_open_run* r, size_t index,
                                      critmet_cov_state* out);
critmet_status critmet_open_run_qfi_bound(const critmet_open_run* r, double T,
                                          double* bound);
/* CSV columns t,vxx,vpp,vxp,mu,r,phi,qfi_bound_running. */
critmet_status critmet_open_run_write_csv(const critmet_open_run* r,
                                          const char* path);
critmet_status critmet_instantaneous_qfi(double mu, double r, double* f);

/* ---------------------------------------------------------- Fock oracle */

typedef struct critmet_oracle_report {
  double r_gauss, r_fock;
  double phi_gauss, phi_fock;
  double qfi_gauss, qfi_fock;
  double rel_r;
  double phi_diff;
  double rel_qfi;
} critmet_oracle_report;

/* Evolve the truncated number-basis oracle on a programmed schedule and
 * compare against the phase-space integrator. dim<=0 and dt<=0 and
 * delta_omega<=0 select defaults (257, 1e-3/omega, 1e-5*omega). */
critmet_status critmet_oracle_check(const critmet_schedule* s, double T,
                                    double omega, int dim, double dt,
                                    double delta_omega,
                                    critmet_oracle_report* out);
/* Finite-difference QFI from the oracle alone. */
critmet_status critmet_fock_qfi_fd(const critmet_schedule* s, double T,
                                   double omega, double delta_omega, int dim,
                                   double dt, double* f);

/* ---------------------------------------------------------------- fits */

typedef struct critmet_fit_result {
  double slope;
  double intercept;
  double residual_rms;
  double window_lo, window_hi;
  int points_used;
} critmet_fit_result;

critmet_status critmet_fit_power_law(const double* t, const double* f, int n,
                                     double window_lo, double window_hi,
                                     critmet_fit_result* out);
critmet_status critmet_fit_exponent(const double* t, const double* f, int n,
                                    double window_lo, double window_hi,
                                    critmet_fit_result* out);

#ifdef __cplusplus
}
#endif

#endif /* CRITMET_H */
