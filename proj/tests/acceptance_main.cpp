// Acceptance suite: one line per criterion, [PASS]/[FAIL] with the measured
// numbers. Returns the number of failed criteria.
//
//   acceptance                 run everything
//   acceptance --skip <id>     skip criteria by id
//   acceptance --only <id>     run a single criterion
//
// Criterion ids: phi_star gamma optimal_winding poly_scaling exp_scaling
// subcritical_exp oracle monotone bounds transition open_gamma1e6
// open_gamma02 open_gamma06 desk_scale_exclusion

#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "critmet/bounds.hpp"
#include "critmet/dynamics.hpp"
#include "critmet/fock.hpp"
#include "critmet/onoff.hpp"
#include "critmet/open_system.hpp"
#include "critmet/qfi.hpp"
#include "critmet/random_schedules.hpp"
#include "critmet/rootfind.hpp"
#include "critmet/schedule.hpp"

using namespace critmet;

namespace {

constexpr double kPi = 3.14159265358979323846;
const SystemParams kSys{1.0};

IntegratorConfig cfg_for(double T, int samples = 256) {
  IntegratorConfig c;
  c.rel_tol = 1e-10;
  c.abs_tol = 1e-12;
  c.output_stride = T / samples;
  return c;
}

Trajectory run_feedback(const OnOffSolution& sol, double T, int samples = 256) {
  return integrate(kSys, feedback_from_onoff_solution(sol), T,
                   cfg_for(T, samples));
}

std::vector<std::pair<double, double>> sweep_optimal(double lo, double hi,
                                                     int points,
                                                     double eps_max) {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < points; ++i) {
    double T = lo + (hi - lo) * i / (points - 1);
    int n_max = static_cast<int>(std::ceil(0.25 * T)) + 3;
    OptimizeResult res = optimize_n(T, eps_max, 1.0, n_max);
    Trajectory traj = run_feedback(res.best, T);
    pts.emplace_back(T, qfi_from_trajectory(traj).value);
  }
  return pts;
}

std::vector<std::pair<double, double>> sweep_open(double lo, double hi,
                                                  int points, double gamma) {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < points; ++i) {
    double T = lo + (hi - lo) * i / (points - 1);
    int n_max = static_cast<int>(std::ceil(0.25 * T)) + 3;
    OptimizeResult res = optimize_n(T, 1.0, 1.0, n_max);
    Schedule sched = schedule_from_onoff_solution(res.best, 1.0);
    auto run = integrate_open(kSys, OpenParams{gamma, 0.0}, sched, T,
                              cfg_for(T, 128));
    pts.emplace_back(T, qfi_open_bound(run, T));
  }
  return pts;
}

struct Criterion {
  std::string id;
  std::string label;
  std::function<bool(std::ostream&)> body;
};

// ------------------------------------------------------------ criteria

bool c_phi_star(std::ostream& out) {
  double ps = phi_star();
  out << "phi* = " << ps << " (target 2.664 +- 0.005)";
  return std::abs(ps - 2.664) <= 0.005;
}

bool c_gamma(std::ostream& out) {
  double g1 = gamma_exponent(1.0, 1.0);
  bool ok = std::abs(g1 - 0.9745) <= 0.0005;
  double g0 = gamma_exponent(0.0, 1.0);
  ok = ok && g0 == 0.0;
  double prev = g0;
  bool increasing = true;
  for (int i = 1; i <= 20; ++i) {
    double e = 0.05 + 0.95 * (i - 1) / 19.0;
    double g = gamma_exponent(e, 1.0);
    if (!(g > prev)) increasing = false;
    prev = g;
  }
  out << "Gamma(1) = " << g1 << ", Gamma(0) = " << g0
      << ", strictly increasing on 20-point grid: "
      << (increasing ? "yes" : "no");
  return ok && increasing;
}

bool c_optimal_winding(std::ostream& out) {
  bool ok = true;
  for (double T : {40.0, 60.0, 80.0}) {
    int n_max = static_cast<int>(std::ceil(0.25 * T)) + 3;
    OptimizeResult res = optimize_n(T, 1.0, 1.0, n_max);
    double n_density = res.best.n / T;
    double r_density = res.best.r_pred / T;
    bool ok_n = std::abs(n_density - 0.169) <= 0.009;
    bool ok_r = std::abs(r_density - 0.2436) <= 0.005;
    out << "wT=" << T << ": n/wT=" << n_density << (ok_n ? "" : " [out]")
        << " r/wT=" << r_density << (ok_r ? "" : " [out]") << "; ";
    ok = ok && ok_n && ok_r;
  }
  out << "(targets 0.169 +- 0.009, 0.2436 +- 0.005)";
  return ok;
}

bool c_poly_scaling(std::ostream& out) {
  bool ok = true;
  const double tol[3] = {0.3, 0.4, 0.5};
  for (int n = 0; n <= 2; ++n) {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 12; ++i) {
      double T = 100.0 * std::pow(10.0, i / 11.0);
      OnOffSolution sol = solve_fixed_n(T, n, 1.0, 1.0);
      Trajectory traj = run_feedback(sol, T);
      pts.emplace_back(T, qfi_from_trajectory(traj).value);
    }
    FitResult fit = fit_power_law(pts, 99.0, 1001.0);
    double target = 4.0 * n + 6.0;
    bool ok_n = std::abs(fit.slope - target) <= tol[n];
    out << "n=" << n << ": slope=" << fit.slope << " (target " << target
        << " +- " << tol[n] << ")" << (ok_n ? "" : " [out]") << "; ";
    ok = ok && ok_n;
  }
  return ok;
}

bool c_exp_scaling(std::ostream& out) {
  auto pts = sweep_optimal(30.0, 70.0, 21, 1.0);
  FitResult fit = fit_exponent(pts, 29.0, 71.0);
  out << "d lnF/dT = " << fit.slope << " over wT in [30,70] (target 0.9745 "
      << "+- 5%)";
  return std::abs(fit.slope / 0.9745 - 1.0) <= 0.05;
}

bool c_subcritical_exp(std::ostream& out) {
  double target = gamma_exponent(0.7, 1.0);
  auto pts = sweep_optimal(30.0, 70.0, 21, 0.7);
  FitResult fit = fit_exponent(pts, 29.0, 71.0);
  out << "d lnF/dT = " << fit.slope << " vs Gamma(0.7) = " << target
      << " (+- 7%)";
  return std::abs(fit.slope / target - 1.0) <= 0.07;
}

bool c_oracle(std::ostream& out) {
  std::mt19937_64 rng(99173);
  int checked = 0, attempts = 0;
  double worst = 0.0;
  while (checked < 20 && attempts < 1000) {
    ++attempts;
    auto draw = random_admissible_schedule(rng, 1.0, 1.0, 5.0);
    IntegratorConfig probe = cfg_for(draw.T, 1);
    Trajectory t = integrate(kSys, draw.schedule, draw.T, probe);
    double r_final = squeezing_of(t.final);
    if (r_final < 0.1 || r_final > 2.0) continue;
    OracleComparison c =
        oracle_check(draw.schedule, draw.T, kSys, 257, 1e-3, 1e-5);
    worst = std::max({worst, c.rel_r, c.phi_diff, c.rel_qfi});
    ++checked;
  }
  out << checked << " schedules, worst deviation " << worst
      << " (tolerance 1e-3)";
  return checked == 20 && worst < 1e-3;
}

bool c_monotone(std::ostream& out) {
  std::mt19937_64 rng(31337);
  int nonzero = 0;
  for (int i = 0; i < 200; ++i) {
    auto draw = random_monotone_schedule(rng, 1.0, 20.0);
    Trajectory t = integrate(kSys, draw.schedule, draw.T, cfg_for(draw.T, 64));
    if (t.winding != 0) ++nonzero;
  }
  out << "200 monotone schedules, " << nonzero << " with nonzero winding";
  return nonzero == 0;
}

bool c_bounds(std::ostream& out) {
  int poly_viol = 0, cycle_viol = 0, cap_viol = 0;
  double worst_cycle = 1e300, worst_cap = 1e300;

  std::mt19937_64 rng(20240809);
  for (int i = 0; i < 100; ++i) {
    auto draw = random_admissible_schedule(rng, 1.0, 1.0, 20.0);
    Trajectory t = integrate(kSys, draw.schedule, draw.T, cfg_for(draw.T, 512));
    QfiResult q = qfi_from_trajectory(t);
    double bound = qfi_poly_bound(draw.T, t.winding, 1.0);
    if (q.value > bound * (1.0 + 1e-9)) ++poly_viol;
    for (auto& rep : cycle_growth_check(t, 1.0, 1.0)) {
      worst_cycle = std::min(worst_cycle, rep.margin);
      if (!rep.satisfied) ++cycle_viol;
    }
  }

  // per-cycle checks on representative sweep runs
  for (int n = 0; n <= 2; ++n) {
    for (double T : {100.0, 300.0, 1000.0}) {
      OnOffSolution sol = solve_fixed_n(T, n, 1.0, 1.0);
      Trajectory t = run_feedback(sol, T, 512);
      QfiResult q = qfi_from_trajectory(t);
      if (q.value > qfi_poly_bound(T, t.winding, 1.0) * (1.0 + 1e-9))
        ++poly_viol;
      for (auto& rep : cycle_growth_check(t, 1.0, 1.0)) {
        worst_cycle = std::min(worst_cycle, rep.margin);
        if (!rep.satisfied) ++cycle_viol;
      }
    }
  }
  for (double T : {40.0, 60.0}) {
    OptimizeResult res = optimize_n(T, 1.0, 1.0, 25);
    Trajectory t = run_feedback(res.best, T, 512);
    for (auto& rep : cycle_growth_check(t, 1.0, 1.0)) {
      worst_cycle = std::min(worst_cycle, rep.margin);
      if (!rep.satisfied) ++cycle_viol;
    }
  }

  // squeezing-cap margins on feasible fixed-n runs at eps_max = 0.7
  const std::pair<int, double> runs[] = {{0, 4.0}, {1, 8.0}, {2, 12.0},
                                         {3, 14.0}};
  for (auto& [n, T] : runs) {
    OnOffSolution sol = solve_fixed_n(T, n, 0.7, 1.0);
    if (!sol.feasible) {
      ++cap_viol;
      continue;
    }
    Trajectory t = run_feedback(sol, T, 512);
    for (auto& s : t.samples) {
      int w = static_cast<int>(std::floor(s.phi_unwrapped / (2 * kPi) + 1e-12));
      double margin = squeezing_cap(0.7, w, 1.0) - std::hypot(s.x, s.y);
      worst_cap = std::min(worst_cap, margin);
      if (margin < 0.0) ++cap_viol;
    }
    // the ceiling form is active below the critical drive
    for (auto& rep : cycle_growth_check(t, 0.7, 1.0)) {
      worst_cycle = std::min(worst_cycle, rep.margin);
      if (!rep.satisfied) ++cycle_viol;
    }
  }

  out << "poly-bound violations " << poly_viol << ", cycle-growth violations " << cycle_viol
      << " (worst margin " << worst_cycle << "), cap violations " << cap_viol
      << " (worst margin " << worst_cap << ")";
  return poly_viol == 0 && cycle_viol == 0 && cap_viol == 0;
}

bool c_transition(std::ostream& out) {
  // First crossing of the n=1 and n=2 fixed-winding branches: the optimal
  // total phase jumps by ~2*pi while the branch maximum is continuous.
  auto gap = [](double T) {
    return solve_fixed_n(T, 2, 1.0, 1.0).r_pred -
           solve_fixed_n(T, 1, 1.0, 1.0).r_pred;
  };
  double lo = 9.2, hi = 30.0;  // n=2 feasible from ~9.07; gap < 0 there
  if (!(gap(lo) < 0.0 && gap(hi) > 0.0)) {
    out << "bracket failure for the branch crossing";
    return false;
  }
  double t_c = brent_root(gap, lo, hi, 1e-12);
  OnOffSolution s1 = solve_fixed_n(t_c, 1, 1.0, 1.0);
  OnOffSolution s2 = solve_fixed_n(t_c, 2, 1.0, 1.0);
  double phi1 = 2 * kPi + s1.tilde_phi_n;
  double phi2 = 4 * kPi + s2.tilde_phi_n;
  double jump = phi2 - phi1;
  double r_gap = std::abs(s2.r_pred - s1.r_pred);
  out << "T_c = " << t_c << ", Phi jump = " << jump << " (>= pi/2), max-r gap "
      << r_gap << " (<= 1e-6)";
  return jump >= 0.5 * kPi && r_gap <= 1e-6;
}

bool c_open_gamma1e6(std::ostream& out) {
  auto pts = sweep_open(12.0, 28.0, 9, 1e-6);
  FitResult fit = fit_exponent(pts, 11.0, 29.0);
  double target = gamma_exponent(1.0, 1.0);
  out << "gamma=1e-6: slope " << fit.slope << " vs Gamma = " << target
      << " (+- 10%, effectively closed window wT <= 40)";
  return std::abs(fit.slope / target - 1.0) <= 0.10;
}

bool c_open_gamma02(std::ostream& out) {
  auto pts = sweep_open(40.0, 90.0, 11, 0.2);
  FitResult fit = fit_exponent(pts, 39.0, 91.0);
  double target = gamma_exponent(1.0, 1.0) / 2.0 - 0.2;
  out << "gamma=0.2: slope " << fit.slope << " vs Gamma/2 - gamma = " << target
      << " (+- 10%)";
  return std::abs(fit.slope / target - 1.0) <= 0.10;
}

bool c_open_gamma06(std::ostream& out) {
  auto pts = sweep_open(40.0, 90.0, 11, 0.6);
  FitResult fit = fit_exponent(pts, 39.0, 91.0);
  double target = gamma_exponent(1.0, 1.0) / 2.0 - 0.6;
  out << "gamma=0.6: slope " << fit.slope << " vs Gamma/2 - gamma = " << target
      << " (+- 10%). The dissipative QFI bound 4T*int sinh^2(2r) is "
      << "monotone increasing in T, so its fitted growth exponent cannot be "
      << "negative; the e^{(Gamma/2-gamma) wT} envelope stops describing the "
      << "bound once gamma exceeds Gamma/2.";
  return std::abs(fit.slope / target - 1.0) <= 0.10;
}

bool c_desk_scale(std::ostream& out) {
  out << "exact QFI magnitudes beyond wT ~ 120 exceed double range by design; "
      << "covered by the winding-density and exponent criteria (3 and 5) and "
      << "the linear growth of predicted squeezing";
  // Spot-check the stand-ins: r_pred growth is linear and the exponent
  // criteria above run at desk scale.
  double r40 = optimize_n(40.0, 1.0, 1.0, 14).best.r_pred;
  double r80 = optimize_n(80.0, 1.0, 1.0, 24).best.r_pred;
  return std::abs((r80 - r40) / 40.0 - 0.2436) < 0.01;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> skip, only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--skip") == 0 && i + 1 < argc)
      skip.insert(argv[++i]);
    else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc)
      only.insert(argv[++i]);
  }

  std::vector<Criterion> criteria = {
      {"phi_star", "criterion 1 (phi* root)", c_phi_star},
      {"gamma", "criterion 2 (exponential rate Gamma)", c_gamma},
      {"optimal_winding", "criterion 3 (optimal winding coefficient)",
       c_optimal_winding},
      {"poly_scaling", "criterion 4 (T^{4n+6} polynomial scaling)",
       c_poly_scaling},
      {"exp_scaling", "criterion 5 (exponential scaling at the ceiling)",
       c_exp_scaling},
      {"subcritical_exp", "criterion 6 (sub-critical exponential)",
       c_subcritical_exp},
      {"oracle", "criterion 7 (oracle equivalence)", c_oracle},
      {"monotone", "criterion 8 (monotone no-go)", c_monotone},
      {"bounds", "criterion 9 (bound audits)", c_bounds},
      {"transition", "criterion 10 (first-order transition)", c_transition},
      {"open_gamma1e6", "criterion 11a (open system, gamma = 1e-6)",
       c_open_gamma1e6},
      {"open_gamma02", "criterion 11b (open system, gamma = 0.2)",
       c_open_gamma02},
      {"open_gamma06", "criterion 11c (open system, gamma = 0.6)",
       c_open_gamma06},
      {"desk_scale_exclusion", "criterion 12 (desk-scale exclusion)",
       c_desk_scale},
  };

  int failures = 0;
  for (auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    if (skip.count(c.id)) {
      std::cout << "[SKIP] " << c.label << " (run with --only " << c.id
                << ")\n";
      continue;
    }
    std::ostringstream detail;
    bool ok = false;
    try {
      ok = c.body(detail);
    } catch (const std::exception& e) {
      detail << " exception: " << e.what();
    }
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << c.label << ": "
              << detail.str() << "\n";
    if (!ok) ++failures;
  }
  return failures;
}
