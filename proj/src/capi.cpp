#include "critmet.h"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "critmet/bounds.hpp"
#include "critmet/dynamics.hpp"
#include "critmet/fock.hpp"
#include "critmet/onoff.hpp"
#include "critmet/open_system.hpp"
#include "critmet/qfi.hpp"
#include "critmet/schedule.hpp"
#include "critmet/textio.hpp"

namespace {

thread_local std::string g_last_error;

critmet_status status_of(critmet::ErrorCode c) {
  using critmet::ErrorCode;
  switch (c) {
    case ErrorCode::ok: return CRITMET_OK;
    case ErrorCode::invalid_argument: return CRITMET_ERR_INVALID_ARGUMENT;
    case ErrorCode::invalid_state: return CRITMET_ERR_INVALID_STATE;
    case ErrorCode::domain_error: return CRITMET_ERR_DOMAIN;
    case ErrorCode::pole_error: return CRITMET_ERR_POLE;
    case ErrorCode::infeasible: return CRITMET_ERR_INFEASIBLE;
    case ErrorCode::event_localization: return CRITMET_ERR_EVENT_LOCALIZATION;
    case ErrorCode::overflow_error: return CRITMET_ERR_OVERFLOW;
    case ErrorCode::truncation_error: return CRITMET_ERR_TRUNCATION;
    case ErrorCode::step_size_error: return CRITMET_ERR_STEP_SIZE;
    case ErrorCode::numeric_error: return CRITMET_ERR_NUMERIC;
    case ErrorCode::io_error: return CRITMET_ERR_IO;
  }
  return CRITMET_ERR_INTERNAL;
}

template <class F>
critmet_status guarded(F&& f) {
  try {
    f();
    return CRITMET_OK;
  } catch (const critmet::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CRITMET_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CRITMET_ERR_INTERNAL;
  }
}

critmet_status require(bool cond, const char* msg) {
  if (cond) return CRITMET_OK;
  g_last_error = msg;
  return CRITMET_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct critmet_schedule {
  critmet::Schedule impl;
  std::string json_cache;
};

struct critmet_trajectory {
  critmet::Trajectory impl;
};

struct critmet_open_run {
  std::vector<critmet::CovarianceState> states;
};

namespace {

critmet_onoff_solution to_c(const critmet::OnOffSolution& s) {
  return {s.n, s.T, s.eps_max, s.phi_n, s.tilde_phi_n, s.r_pred,
          s.feasible ? 1 : 0};
}

critmet::OnOffSolution from_c(const critmet_onoff_solution& s) {
  critmet::OnOffSolution out;
  out.n = s.n;
  out.T = s.T;
  out.eps_max = s.eps_max;
  out.phi_n = s.phi_n;
  out.tilde_phi_n = s.tilde_phi_n;
  out.r_pred = s.r_pred;
  out.feasible = s.feasible != 0;
  return out;
}

critmet_phase_state to_c(const critmet::PhaseState& s) {
  return {s.t,   s.x,    s.y,    s.theta, s.phi_unwrapped,
          critmet::squeezing_of(s), s.j_re, s.j_im, s.a_acc};
}

critmet_cov_state to_c(const critmet::CovarianceState& s) {
  return {s.t, s.vxx, s.vpp, s.vxp, s.mu, s.r, s.phi, s.a_acc};
}

critmet::IntegratorConfig from_c(const critmet_integrator_config* cfg) {
  critmet::IntegratorConfig out;
  if (cfg) {
    out.rel_tol = cfg->rel_tol;
    out.abs_tol = cfg->abs_tol;
    out.max_step = cfg->max_step;
    out.output_stride = cfg->output_stride;
    out.phase_step_cap = cfg->phase_step_cap;
  }
  return out;
}

critmet_fit_result to_c(const critmet::FitResult& f) {
  return {f.slope, f.intercept, f.residual_rms,
          f.window_lo, f.window_hi, f.points_used};
}

}  // namespace

extern "C" {

const char* critmet_last_error(void) { return g_last_error.c_str(); }

void critmet_version(int* major, int* minor, int* patch) {
  if (major) *major = 0;
  if (minor) *minor = 1;
  if (patch) *patch = 0;
}

critmet_status critmet_schedule_parse(const char* json, double omega,
                                      critmet_schedule** out) {
  if (auto s = require(json && out, "null argument")) return s;
  return guarded([&] {
    *out = new critmet_schedule{critmet::Schedule::from_json(json, omega), {}};
  });
}

critmet_status critmet_schedule_constant(double eps, double eps_max,
                                         critmet_schedule** out) {
  if (auto s = require(out != nullptr, "null out")) return s;
  return guarded([&] {
    *out = new critmet_schedule{
        critmet::Schedule(critmet::Constant{eps}, eps_max), {}};
  });
}

critmet_status critmet_schedule_ramp(double eps_start, double eps_end,
                                     double T, double eps_max,
                                     critmet_schedule** out) {
  if (auto s = require(out != nullptr, "null out")) return s;
  return guarded([&] {
    *out = new critmet_schedule{
        critmet::Schedule(critmet::LinearRamp{eps_start, eps_end, T}, eps_max),
        {}};
  });
}

critmet_status critmet_schedule_piecewise(const double* durations,
                                          const double* eps, int n_segments,
                                          double eps_max,
                                          critmet_schedule** out) {
  if (auto s = require(durations && eps && out && n_segments > 0,
                       "null array or nonpositive segment count"))
    return s;
  return guarded([&] {
    critmet::PiecewiseConstant p;
    for (int i = 0; i < n_segments; ++i)
      p.segments.emplace_back(durations[i], eps[i]);
    *out = new critmet_schedule{critmet::Schedule(std::move(p), eps_max), {}};
  });
}

critmet_status critmet_schedule_onoff_feedback(double phi_on, double eps_on,
                                               int cycle_cap,
                                               critmet_schedule** out) {
  if (auto s = require(out != nullptr, "null out")) return s;
  return guarded([&] {
    critmet::PhaseFeedbackOnOff f;
    f.phi_on = phi_on;
    f.eps_on = eps_on;
    if (cycle_cap >= 0) f.cycle_cap = cycle_cap;
    *out = new critmet_schedule{critmet::Schedule(std::move(f), eps_on), {}};
  });
}

void critmet_schedule_free(critmet_schedule* s) { delete s; }

critmet_status critmet_schedule_eval(const critmet_schedule* s, double t,
                                     double phi_mod, double* eps) {
  if (auto st = require(s && eps, "null argument")) return st;
  return guarded([&] { *eps = s->impl.eval(t, phi_mod); });
}

critmet_status critmet_schedule_is_monotone(const critmet_schedule* s,
                                            int grid_points, int* monotone) {
  if (auto st = require(s && monotone, "null argument")) return st;
  return guarded([&] { *monotone = s->impl.is_monotone(grid_points) ? 1 : 0; });
}

const char* critmet_schedule_json(critmet_schedule* s) {
  if (!s) return "";
  s->json_cache = s->impl.to_json();
  return s->json_cache.c_str();
}

critmet_status critmet_onoff_solve(double T, int n, double eps_max,
                                   double omega, critmet_onoff_solution* out) {
  if (auto s = require(out != nullptr, "null out")) return s;
  return guarded([&] { *out = to_c(critmet::solve_fixed_n(T, n, eps_max, omega)); });
}

critmet_status critmet_onoff_optimize(double T, double eps_max, double omega,
                                      int n_max, critmet_onoff_solution* best,
                                      critmet_onoff_solution* scan,
                                      int scan_cap, int* scan_len,
                                      int* tie_n) {
  if (auto s = require(best != nullptr, "null best")) return s;
  return guarded([&] {
    critmet::OptimizeResult res = critmet::optimize_n(T, eps_max, omega, n_max);
    *best = to_c(res.best);
    int m = 0;
    if (scan && scan_cap > 0) {
      m = std::min<int>(scan_cap, static_cast<int>(res.scan.size()));
      for (int i = 0; i < m; ++i) scan[i] = to_c(res.scan[i]);
    }
    if (scan_len) *scan_len = m;
    if (tie_n) *tie_n = res.tie_with;
  });
}

critmet_status critmet_onoff_normalization_T(int n, double phi_n,
                                             double tilde_phi, double eps_max,
                                             double omega, double* T) {
  if (auto s = require(T != nullptr, "null out")) return s;
  return guarded(
      [&] { *T = critmet::normalization_T(n, phi_n, tilde_phi, eps_max, omega); });
}

critmet_status critmet_onoff_r_pred(int n, double phi_n, double tilde_phi,
                                    double eps_max, double omega, double* r) {
  if (auto s = require(r != nullptr, "null out")) return s;
  return guarded(
      [&] { *r = critmet::r_pred(n, phi_n, tilde_phi, eps_max, omega); });
}

critmet_status critmet_phi_star(double* phi) {
  if (auto s = require(phi != nullptr, "null out")) return s;
  return guarded([&] { *phi = critmet::phi_star(); });
}

critmet_status critmet_gamma_exponent(double eps_max, double omega,
                                      double* gamma) {
  if (auto s = require(gamma != nullptr, "null out")) return s;
  return guarded([&] { *gamma = critmet::gamma_exponent(eps_max, omega); });
}

critmet_status critmet_n_opt_asymptotic(double T, double omega, double* n) {
  if (auto s = require(n != nullptr, "null out")) return s;
  return guarded([&] { *n = critmet::n_opt_asymptotic(T, omega); });
}

critmet_status critmet_schedule_from_onoff(const critmet_onoff_solution* sol,
                                           double omega,
                                           critmet_schedule** out) {
  if (auto s = require(sol && out, "null argument")) return s;
  return guarded([&] {
    *out = new critmet_schedule{
        critmet::schedule_from_onoff_solution(from_c(*sol), omega), {}};
  });
}

critmet_status critmet_feedback_from_onoff(const critmet_onoff_solution* sol,
                                           critmet_schedule** out) {
  if (auto s = require(sol && out, "null argument")) return s;
  return guarded([&] {
    *out = new critmet_schedule{
        critmet::feedback_from_onoff_solution(from_c(*sol)), {}};
  });
}

void critmet_integrator_config_default(critmet_integrator_config* cfg) {
  if (!cfg) return;
  critmet::IntegratorConfig d;
  cfg->rel_tol = d.rel_tol;
  cfg->abs_tol = d.abs_tol;
  cfg->max_step = d.max_step;
  cfg->output_stride = d.output_stride;
  cfg->phase_step_cap = d.phase_step_cap;
}

critmet_status critmet_integrate(double omega, const critmet_schedule* s,
                                 double T,
                                 const critmet_integrator_config* cfg,
                                 critmet_trajectory** out) {
  if (auto st = require(s && out, "null argument")) return st;
  return guarded([&] {
    *out = new critmet_trajectory{critmet::integrate(
        critmet::SystemParams{omega}, s->impl, T, from_c(cfg))};
  });
}

void critmet_trajectory_free(critmet_trajectory* t) { delete t; }

size_t critmet_trajectory_size(const critmet_trajectory* t) {
  return t ? t->impl.samples.size() : 0;
}

critmet_status critmet_trajectory_sample(const critmet_trajectory* t,
                                         size_t index,
                                         critmet_phase_state* out) {
  if (auto st = require(t && out, "null argument")) return st;
  if (auto st = require(index < t->impl.samples.size(), "index out of range"))
    return st;
  return guarded([&] { *out = to_c(t->impl.samples[index]); });
}

critmet_status critmet_trajectory_final(const critmet_trajectory* t,
                                        critmet_phase_state* out) {
  if (auto st = require(t && out, "null argument")) return st;
  return guarded([&] { *out = to_c(t->impl.final); });
}

int critmet_trajectory_winding(const critmet_trajectory* t) {
  return t ? t->impl.winding : 0;
}

critmet_status critmet_trajectory_write_csv(const critmet_trajectory* t,
                                            const char* path) {
  if (auto st = require(t && path, "null argument")) return st;
  return guarded([&] { critmet::write_trajectory_csv(t->impl, path); });
}

critmet_status critmet_trajectory_qfi(const critmet_trajectory* t,
                                      critmet_qfi_result* out) {
  if (auto st = require(t && out, "null argument")) return st;
  return guarded([&] {
    critmet::QfiResult q = critmet::qfi_from_trajectory(t->impl);
    *out = {q.value, q.envelope, q.j_final.real(), q.j_final.imag(), q.T};
  });
}

critmet_status critmet_qfi_poly_bound(double T, int n, double omega,
                                       double* bound) {
  if (auto st = require(bound != nullptr, "null out")) return st;
  return guarded([&] { *bound = critmet::qfi_poly_bound(T, n, omega); });
}

critmet_status critmet_poly_bound_leading_coeff(int n, double omega,
                                          double* quoted_form,
                                          double* expanded_form) {
  if (auto st = require(quoted_form && expanded_form, "null out")) return st;
  return guarded([&] {
    auto [p, d] = critmet::poly_bound_leading_coeff(n, omega);
    *quoted_form = p;
    *expanded_form = d;
  });
}

critmet_status critmet_squeezing_cap(double eps_max, int n, double omega,
                                  double* bound) {
  if (auto st = require(bound != nullptr, "null out")) return st;
  return guarded([&] { *bound = critmet::squeezing_cap(eps_max, n, omega); });
}

critmet_status critmet_cycle_growth_check(const critmet_trajectory* t,
                                         double eps_max, double omega,
                                         critmet_bound_report* reports,
                                         int cap, int* len) {
  if (auto st = require(t && len, "null argument")) return st;
  return guarded([&] {
    auto reps = critmet::cycle_growth_check(t->impl, eps_max, omega);
    int m = static_cast<int>(reps.size());
    if (reports && cap > 0) {
      m = std::min(m, cap);
      for (int i = 0; i < m; ++i) {
        critmet_bound_report& r = reports[i];
        std::snprintf(r.kind, sizeof(r.kind), "%s", reps[i].kind.c_str());
        r.cycle = reps[i].cycle;
        r.bound = reps[i].bound_value;
        r.observed = reps[i].observed_value;
        r.margin = reps[i].margin;
        r.satisfied = reps[i].satisfied ? 1 : 0;
      }
    } else {
      m = static_cast<int>(reps.size());
    }
    *len = m;
  });
}

critmet_status critmet_integrate_open(double omega, critmet_open_params open,
                                      const critmet_schedule* s, double T,
                                      const critmet_integrator_config* cfg,
                                      critmet_open_run** out) {
  if (auto st = require(s && out, "null argument")) return st;
  return guarded([&] {
    *out = new critmet_open_run{critmet::integrate_open(
        critmet::SystemParams{omega}, critmet::OpenParams{open.gamma, open.nbar},
        s->impl, T, from_c(cfg))};
  });
}

void critmet_open_run_free(critmet_open_run* r) { delete r; }

size_t critmet_open_run_size(const critmet_open_run* r) {
  return r ? r->states.size() : 0;
}

critmet_status critmet_open_run_state(const critmet_open_run* r, size_t index,
                                      critmet_cov_state* out) {
  if (auto st = require(r && out, "null argument")) return st;
  if (auto st = require(index < r->states.size(), "index out of range"))
    return st;
  return guarded([&] { *out = to_c(r->states[index]); });
}

critmet_status critmet_open_run_qfi_bound(const critmet_open_run* r, double T,
                                          double* bound) {
  if (auto st = require(r && bound, "null argument")) return st;
  return guarded([&] { *bound = critmet::qfi_open_bound(r->states, T); });
}

critmet_status critmet_open_run_write_csv(const critmet_open_run* r,
                                          const char* path) {
  if (auto st = require(r && path, "null argument")) return st;
  return guarded([&] {
    critmet::write_file_atomic(path, critmet::open_run_csv(r->states));
  });
}

critmet_status critmet_instantaneous_qfi(double mu, double r, double* f) {
  if (auto st = require(f != nullptr, "null out")) return st;
  return guarded([&] {
    critmet::CovarianceState s;
    s.mu = mu;
    s.r = r;
    *f = critmet::instantaneous_qfi(s);
  });
}

critmet_status critmet_oracle_check(const critmet_schedule* s, double T,
                                    double omega, int dim, double dt,
                                    double delta_omega,
                                    critmet_oracle_report* out) {
  if (auto st = require(s && out, "null argument")) return st;
  return guarded([&] {
    critmet::OracleComparison c = critmet::oracle_check(
        s->impl, T, critmet::SystemParams{omega}, dim, dt, delta_omega);
    *out = {c.r_gauss, c.r_fock, c.phi_gauss, c.phi_fock,
            c.qfi_gauss, c.qfi_fock, c.rel_r, c.phi_diff, c.rel_qfi};
  });
}

critmet_status critmet_fock_qfi_fd(const critmet_schedule* s, double T,
                                   double omega, double delta_omega, int dim,
                                   double dt, double* f) {
  if (auto st = require(s && f, "null argument")) return st;
  return guarded([&] {
    *f = critmet::qfi_fd(s->impl, T, critmet::SystemParams{omega}, delta_omega,
                         dim, dt);
  });
}

critmet_status critmet_fit_power_law(const double* t, const double* f, int n,
                                     double window_lo, double window_hi,
                                     critmet_fit_result* out) {
  if (auto st = require(t && f && out && n > 0, "null array or empty data"))
    return st;
  return guarded([&] {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back(t[i], f[i]);
    *out = to_c(critmet::fit_power_law(pts, window_lo, window_hi));
  });
}

critmet_status critmet_fit_exponent(const double* t, const double* f, int n,
                                    double window_lo, double window_hi,
                                    critmet_fit_result* out) {
  if (auto st = require(t && f && out && n > 0, "null array or empty data"))
    return st;
  return guarded([&] {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back(t[i], f[i]);
    *out = to_c(critmet::fit_exponent(pts, window_lo, window_hi));
  });
}

}  // extern "C"
