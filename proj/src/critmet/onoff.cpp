#include "critmet/onoff.hpp"

#include <algorithm>
#include <cmath>

#include "critmet/rootfind.hpp"

namespace critmet {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_eps_max(double eps_max, double omega) {
  if (!(eps_max >= 0.0) || !(eps_max <= omega))
    fail(ErrorCode::invalid_argument, "eps_max must lie in [0, omega]");
}

// -0.5 * ln(1 - (eps/omega) sin^2(phi/2)): squeezing gained while driving
// at eps from phase 0 to phi. Pole at eps = omega, phi = pi.
double r_gain(double phi, double eps_max, double omega) {
  double ratio = eps_max / omega;
  double s2 = std::sin(0.5 * phi);
  double arg = -ratio * s2 * s2;
  if (arg <= -1.0)
    fail(ErrorCode::pole_error, "r_pred: log pole at eps_max=omega, phi=pi");
  return -0.5 * std::log1p(arg);
}

}  // namespace

double onoff_time_on(double phi, double eps_max, double omega) {
  SystemParams{omega}.validate();
  check_eps_max(eps_max, omega);
  if (!(phi >= 0.0) || !(phi < 2.0 * kPi + 1e-12))
    fail(ErrorCode::domain_error, "onoff_time_on: phi outside [0, 2*pi)");
  if (phi == 0.0) return 0.0;
  double s = std::sqrt(1.0 - eps_max / omega);
  if (s == 0.0) {
    if (phi >= kPi)
      fail(ErrorCode::pole_error,
           "onoff_time_on: tangent pole at eps_max=omega, phi>=pi");
    return std::tan(0.5 * phi) / omega;
  }
  // atan2 form continues arctan(s*tan(phi/2)) across phi = pi.
  return std::atan2(s * std::sin(0.5 * phi), std::cos(0.5 * phi)) / (omega * s);
}

double normalization_T(int n, double phi_n, double tilde_phi, double eps_max,
                       double omega) {
  SystemParams{omega}.validate();
  check_eps_max(eps_max, omega);
  if (n < 0) fail(ErrorCode::invalid_argument, "normalization_T: n < 0");
  if (!(tilde_phi >= 0.0) || !(tilde_phi < 2.0 * kPi + 1e-12))
    fail(ErrorCode::domain_error, "normalization_T: tilde_phi outside [0,2pi)");
  double total = onoff_time_on(tilde_phi, eps_max, omega);
  if (n > 0) {
    if (!(phi_n > 0.0) || !(phi_n < kPi + 1e-12))
      fail(ErrorCode::domain_error, "normalization_T: phi_n outside (0, pi)");
    total += n * (onoff_time_on(phi_n, eps_max, omega) +
                  (kPi - 0.5 * phi_n) / omega);
  }
  return total;
}

double r_pred(int n, double phi_n, double tilde_phi, double eps_max,
              double omega) {
  SystemParams{omega}.validate();
  check_eps_max(eps_max, omega);
  if (n < 0) fail(ErrorCode::invalid_argument, "r_pred: n < 0");
  double r = r_gain(tilde_phi, eps_max, omega);
  if (n > 0) r += n * r_gain(phi_n, eps_max, omega);
  return r;
}

namespace {

// Stationary-branch solve at the critical ceiling eps_max = omega, in the
// variable u = tan(phi_n/2) >= 2 where sin(tilde) = 2/u has the interior
// solution tilde = pi - asin(2/u).
OnOffSolution solve_critical(double T, int n, double omega) {
  OnOffSolution sol;
  sol.n = n;
  sol.T = T;
  sol.eps_max = omega;
  const double wT = omega * T;
  if (n == 0) {
    sol.phi_n = kPi;
    sol.tilde_phi_n = 2.0 * std::atan(wT);
    sol.r_pred = 0.5 * std::log1p(wT * wT);
    sol.feasible = true;
    return sol;
  }
  auto tan_half_tilde = [](double u) {
    double q = std::sqrt(std::max(0.0, 1.0 - 4.0 / (u * u)));
    return 0.5 * u * (1.0 + q);
  };
  auto budget = [&](double u) {
    return n * (u + kPi - std::atan(u)) + tan_half_tilde(u) - wT;
  };
  if (budget(2.0) > 0.0) {
    sol.feasible = false;
    sol.phi_n = 2.0 * std::atan(2.0);
    sol.tilde_phi_n = 0.5 * kPi;
    sol.r_pred = 0.0;
    return sol;
  }
  double u_hi = std::max(4.0, wT);
  while (budget(u_hi) < 0.0) u_hi *= 2.0;
  double u = brent_root(budget, 2.0, u_hi, 0.0);
  sol.phi_n = 2.0 * std::atan(u);
  sol.tilde_phi_n = kPi - std::asin(std::min(1.0, 2.0 / u));
  sol.r_pred = r_pred(n, sol.phi_n, sol.tilde_phi_n, omega, omega);
  sol.feasible = true;
  return sol;
}

// Sub-critical ceiling: no closed-form stationarity for the final segment,
// so optimize over phi_n with the final angle fixed by the residual budget.
OnOffSolution solve_subcritical(double T, int n, double eps_max, double omega) {
  OnOffSolution sol;
  sol.n = n;
  sol.T = T;
  sol.eps_max = eps_max;
  const double s = std::sqrt(1.0 - eps_max / omega);
  const double t_on_max = kPi / (omega * s);  // phi -> 2*pi limit

  auto tilde_from_residual = [&](double res) {
    double a = omega * s * res;
    return 2.0 * std::atan2(std::sin(a), s * std::cos(a));
  };

  if (n == 0) {
    if (!(T < t_on_max * (1.0 - 1e-12))) {
      sol.feasible = false;
      sol.phi_n = kPi;
      return sol;
    }
    sol.phi_n = kPi;
    sol.tilde_phi_n = tilde_from_residual(T);
    sol.r_pred = r_pred(0, kPi, sol.tilde_phi_n, eps_max, omega);
    sol.feasible = true;
    return sol;
  }

  auto cycle_time = [&](double phi) {
    return onoff_time_on(phi, eps_max, omega) + (kPi - 0.5 * phi) / omega;
  };
  auto residual = [&](double phi) { return T - n * cycle_time(phi); };

  const double phi_min = 1e-9;
  if (residual(phi_min) < 0.0) {  // even zero-angle cycles exceed the budget
    sol.feasible = false;
    sol.phi_n = phi_min;
    return sol;
  }
  double phi_hi = kPi;
  if (residual(kPi) < 0.0)
    phi_hi = brent_root(residual, phi_min, kPi, 1e-13);
  double phi_lo = phi_min;
  const double res_cap = t_on_max * (1.0 - 1e-12);
  if (residual(phi_min) > res_cap) {
    if (residual(phi_hi) > res_cap) {
      sol.feasible = false;  // leftover time cannot fit in one final segment
      sol.phi_n = phi_hi;
      return sol;
    }
    phi_lo = brent_root([&](double p) { return residual(p) - res_cap; },
                        phi_min, phi_hi, 1e-13);
  }

  auto objective = [&](double phi) {
    double res = std::clamp(residual(phi), 0.0, res_cap);
    return r_pred(n, phi, tilde_from_residual(res), eps_max, omega);
  };
  double guess = scan_argmax(objective, phi_lo, phi_hi, 256);
  double span = (phi_hi - phi_lo) / 256.0;
  auto [phi_best, r_best] =
      golden_max(objective, std::max(phi_lo, guess - 2 * span),
                 std::min(phi_hi, guess + 2 * span), 1e-12);
  sol.phi_n = phi_best;
  sol.tilde_phi_n =
      tilde_from_residual(std::clamp(residual(phi_best), 0.0, res_cap));
  sol.r_pred = r_best;
  sol.feasible = true;
  return sol;
}

}  // namespace

OnOffSolution solve_fixed_n(double T, int n, double eps_max, double omega) {
  SystemParams{omega}.validate();
  check_eps_max(eps_max, omega);
  if (!(T > 0.0)) fail(ErrorCode::invalid_argument, "solve_fixed_n: T <= 0");
  if (n < 0) fail(ErrorCode::invalid_argument, "solve_fixed_n: n < 0");

  OnOffSolution sol = (eps_max == omega) ? solve_critical(T, n, omega)
                                         : solve_subcritical(T, n, eps_max, omega);
  if (sol.feasible) {
    double t_check =
        normalization_T(sol.n, sol.phi_n, sol.tilde_phi_n, eps_max, omega);
    if (std::abs(t_check - T) > 1e-9 * std::max(1.0, T))
      fail(ErrorCode::numeric_error,
           "solve_fixed_n: normalization residual exceeds 1e-9");
  }
  return sol;
}

namespace {

double cycle_time(double phi, double eps_max, double omega) {
  return onoff_time_on(phi, eps_max, omega) + (kPi - 0.5 * phi) / omega;
}

// Repeated-cycle protocol with no final partial segment: n identical
// on/off cycles at threshold phi consume the whole budget. This is the
// family the winding-number optimization ranges over; the per-winding
// contribution of a final partial cycle vanishes relative to n ~ omega*T
// cycles, and the ranking over n is what survives the long-time limit.
OnOffSolution solve_pure_cycles(double T, int n, double eps_max,
                                double omega) {
  OnOffSolution sol;
  sol.n = n;
  sol.T = T;
  sol.eps_max = eps_max;
  sol.tilde_phi_n = 0.0;
  const double target = T / n;
  const double phi_min = 1e-9;
  const double phi_max = kPi * (1.0 - 1e-12);
  if (target <= cycle_time(phi_min, eps_max, omega) ||
      (eps_max < omega && target > cycle_time(phi_max, eps_max, omega))) {
    sol.feasible = false;
    sol.phi_n = phi_min;
    return sol;
  }
  double hi = phi_max;
  if (eps_max == omega) {
    // tan pole at pi: bring the upper bracket down to a finite budget
    while (cycle_time(hi, eps_max, omega) > 10.0 * target)
      hi = kPi - 2.0 * (kPi - hi);
  }
  sol.phi_n = brent_root(
      [&](double p) { return cycle_time(p, eps_max, omega) - target; },
      phi_min, hi, 0.0);
  sol.r_pred = n * r_gain(sol.phi_n, eps_max, omega);
  sol.feasible = true;
  return sol;
}

}  // namespace

OptimizeResult optimize_n(double T, double eps_max, double omega, int n_max) {
  if (n_max < 0) fail(ErrorCode::invalid_argument, "optimize_n: n_max < 0");
  OptimizeResult out;
  bool have_best = false;
  for (int n = 0; n <= n_max; ++n) {
    OnOffSolution sol = (n == 0) ? solve_fixed_n(T, 0, eps_max, omega)
                                 : solve_pure_cycles(T, n, eps_max, omega);
    out.scan.push_back(sol);
    if (!sol.feasible) continue;
    if (!have_best) {
      out.best = sol;
      have_best = true;
      continue;
    }
    double diff = sol.r_pred - out.best.r_pred;
    if (std::abs(diff) <= 1e-9) {
      out.tie_with = sol.n;  // keep the smaller winding number
    } else if (diff > 0.0) {
      out.best = sol;
      out.tie_with = -1;
    }
  }
  if (!have_best) out.best = out.scan.empty() ? OnOffSolution{} : out.scan[0];
  return out;
}

double phi_star() {
  static const double value = [] {
    auto f = [](double phi) {
      double h = 0.5 * phi;
      return std::tan(h) * (1.0 + std::log(std::cos(h))) + kPi - h;
    };
    return brent_root(f, 2.0, kPi - 1e-9, 1e-12);
  }();
  return value;
}

double gamma_exponent(double eps_max, double omega) {
  SystemParams{omega}.validate();
  check_eps_max(eps_max, omega);
  double ratio = eps_max / omega;
  if (ratio == 0.0) return 0.0;

  const double hi = (ratio == 1.0) ? kPi - 1e-7 : kPi;
  auto val = [&](double phi) {
    return r_gain(phi, eps_max, omega) /
           (omega * onoff_time_on(phi, eps_max, omega) + kPi - 0.5 * phi);
  };
  double guess = scan_argmax(val, 1e-6, hi, 2000);
  double cell = (hi - 1e-6) / 2000.0;
  auto [phi_m, v] = golden_max(val, std::max(1e-6, guess - 2 * cell),
                               std::min(hi, guess + 2 * cell), 1e-12);
  (void)phi_m;
  double best = std::max(v, val(hi));
  return 4.0 * best;
}

double n_opt_asymptotic(double T, double omega) {
  SystemParams{omega}.validate();
  if (!(T >= 0.0)) fail(ErrorCode::invalid_argument, "n_opt_asymptotic: T < 0");
  double ps = phi_star();
  return omega * T / (std::tan(0.5 * ps) + kPi - 0.5 * ps);
}

}  // namespace critmet
