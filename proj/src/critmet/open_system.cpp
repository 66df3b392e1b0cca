#include "critmet/open_system.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "critmet/textio.hpp"

namespace critmet {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kPhaseBall = 1e-12;  // on sinh^2(2r)

double wrap_to_pi(double a) {
  a = std::fmod(a, kTwoPi);
  if (a > kPi) a -= kTwoPi;
  if (a <= -kPi) a += kTwoPi;
  return a;
}

double phi_mod_2pi(double phi) {
  double m = std::fmod(phi, kTwoPi);
  if (m < 0.0) m += kTwoPi;
  if (m >= kTwoPi) m = 0.0;
  return m;
}

// State: vxx, vpp, vxp, mu, a_acc. The purity mu is carried as a redundant
// component with its own (non-stiff) rate: forming sqrt(det V) from the
// moments cancels catastrophically once cosh 2r approaches 1/sqrt(eps_mach),
// while the integrated mu stays well conditioned and is exactly constant at
// gamma = 0.
using Vec5 = std::array<double, 5>;

// sinh^2(2r) from the moments and the carried mu.
double sinh2_2r(const Vec5& v) {
  double num = 0.25 * (v[1] - v[0]) * (v[1] - v[0]) + v[2] * v[2];
  return num / (v[3] * v[3]);
}

Vec5 rhs(const Vec5& v, double eps, double omega, double gamma, double drive) {
  Vec5 d;
  d[0] = -gamma * v[0] + 2.0 * omega * v[2] + drive;
  d[1] = -gamma * v[1] + (2.0 * eps - 2.0 * omega) * v[2] + drive;
  d[2] = (eps - omega) * v[0] + omega * v[1] - gamma * v[2];
  double cosh2r = 0.5 * (v[0] + v[1]) / v[3];
  d[3] = -gamma * v[3] + cosh2r * drive;
  d[4] = sinh2_2r(v);
  return d;
}

struct StepResult {
  Vec5 y;
  double err;
};

StepResult dp45_step(const Vec5& u, double t, double h, double eps0,
                     bool ramp, double ramp_rate, double omega, double gamma,
                     double drive, double rel_tol, double abs_tol) {
  auto eps_at = [&](double tau) {
    return ramp ? eps0 + ramp_rate * (tau - t) : eps0;
  };
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695,
                          e4 = 393.0 / 640, e5 = -92097.0 / 339200,
                          e6 = 187.0 / 2100, e7 = 1.0 / 40;
  auto f = [&](const Vec5& v, double tau) {
    return rhs(v, eps_at(tau), omega, gamma, drive);
  };
  Vec5 k1 = f(u, t), s;
  for (int i = 0; i < 5; ++i) s[i] = u[i] + h * a21 * k1[i];
  Vec5 k2 = f(s, t + c2 * h);
  for (int i = 0; i < 5; ++i) s[i] = u[i] + h * (a31 * k1[i] + a32 * k2[i]);
  Vec5 k3 = f(s, t + c3 * h);
  for (int i = 0; i < 5; ++i)
    s[i] = u[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  Vec5 k4 = f(s, t + c4 * h);
  for (int i = 0; i < 5; ++i)
    s[i] = u[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  Vec5 k5 = f(s, t + c5 * h);
  for (int i = 0; i < 5; ++i)
    s[i] = u[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                       a65 * k5[i]);
  Vec5 k6 = f(s, t + h);
  Vec5 y5;
  for (int i = 0; i < 5; ++i)
    y5[i] = u[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                        b6 * k6[i]);
  Vec5 k7 = f(y5, t + h);
  double err = 0.0;
  for (int i = 0; i < 5; ++i) {
    double y4 = u[i] + h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                            e6 * k6[i] + e7 * k7[i]);
    double sc = abs_tol + rel_tol * std::max(std::abs(u[i]), std::abs(y5[i]));
    double d = (y5[i] - y4) / sc;
    err += d * d;
  }
  return {y5, std::sqrt(err / 5.0)};
}

}  // namespace

CovarianceState CovarianceState::from_carried_mu(double t, double vxx,
                                                 double vpp, double vxp,
                                                 double mu, double a_acc,
                                                 double phi_prev) {
  if (!(vxx > 0.0) || !(vpp > 0.0))
    fail(ErrorCode::invalid_state, "covariance diagonal must stay positive");
  if (!(mu >= 0.5 * (1.0 - 1e-9)))
    fail(ErrorCode::invalid_state, "covariance purity mu must stay >= 1/2");
  CovarianceState s;
  s.t = t;
  s.vxx = vxx;
  s.vpp = vpp;
  s.vxp = vxp;
  s.mu = mu;
  double cx = 0.5 * (vpp - vxx) / mu;  // sinh 2r cos phi
  double cy = vxp / mu;                // sinh 2r sin phi
  double sh = std::hypot(cx, cy);
  s.r = 0.5 * std::asinh(sh);
  if (sh * sh < kPhaseBall) {
    s.phi = phi_prev;
  } else {
    double raw = std::atan2(cy, cx);
    double delta = wrap_to_pi(raw - phi_prev);
    if (delta > kPi - 0.2) delta -= kTwoPi;
    s.phi = phi_prev + delta;
  }
  s.a_acc = a_acc;
  return s;
}

CovarianceState CovarianceState::from_moments(double t, double vxx, double vpp,
                                              double vxp, double a_acc,
                                              double phi_prev) {
  if (!(vxx > 0.0) || !(vpp > 0.0))
    fail(ErrorCode::invalid_state, "covariance diagonal must stay positive");
  double det = vxx * vpp - vxp * vxp;
  if (!(det > 0.0))
    fail(ErrorCode::invalid_state, "covariance determinant must stay positive");
  return from_carried_mu(t, vxx, vpp, vxp, std::sqrt(det), a_acc, phi_prev);
}

CovRates cov_rates(const CovarianceState& state, double eps,
                   const SystemParams& params, const OpenParams& open) {
  params.validate();
  open.validate();
  if (!(eps >= 0.0) || !(eps <= params.omega * (1.0 + 1e-12)))
    fail(ErrorCode::invalid_argument, "cov_rates: eps outside [0, omega]");
  double drive = open.gamma * (2.0 * open.nbar + 1.0) / 2.0;
  Vec5 v{state.vxx, state.vpp, state.vxp, state.mu, state.a_acc};
  Vec5 d = rhs(v, eps, params.omega, open.gamma, drive);
  return {d[0], d[1], d[2]};
}

void murphi_rates(double mu, double r, double phi, double eps,
                  const SystemParams& params, const OpenParams& open,
                  double* dmu, double* dr, double* dphi) {
  params.validate();
  open.validate();
  if (!(mu > 0.0) || !(r > 0.0))
    fail(ErrorCode::domain_error, "murphi_rates: requires mu > 0 and r > 0");
  double n0 = open.nbar;
  double g = open.gamma;
  *dmu = -g * mu + g * std::cosh(2 * r) * (2 * n0 + 1) / 2.0;
  *dr = 0.5 * eps * std::sin(phi) -
        g * std::sinh(2 * r) * (2 * n0 + 1) / (4.0 * mu);
  *dphi = 2.0 * params.omega -
          eps * (1.0 - std::cos(phi) / std::tanh(2 * r));
}

std::vector<CovarianceState> integrate_open(const SystemParams& params,
                                            const OpenParams& open,
                                            const Schedule& schedule, double T,
                                            const IntegratorConfig& config) {
  params.validate();
  open.validate();
  config.validate();
  if (!(T > 0.0)) fail(ErrorCode::invalid_argument, "integrate_open: T <= 0");
  if (schedule.eps_max() > params.omega * (1.0 + 1e-12))
    fail(ErrorCode::domain_error,
         "integrate_open: schedule ceiling violates the symmetric phase "
         "0 <= eps <= omega");
  if (schedule.horizon() < T * (1.0 - 1e-12))
    fail(ErrorCode::domain_error,
         "integrate_open: schedule horizon shorter than T");

  const double omega = params.omega;
  const double drive = open.gamma * (2.0 * open.nbar + 1.0) / 2.0;
  bool ramp = false;
  double ramp_rate = 0.0;
  if (auto* lr = std::get_if<LinearRamp>(&schedule.variant())) {
    ramp = true;
    ramp_rate = (lr->eps_end - lr->eps_start) / lr->T;
  }

  std::vector<double> edges = schedule.breakpoints();
  edges.push_back(T);
  std::sort(edges.begin(), edges.end());

  std::vector<CovarianceState> out;
  CovarianceState cur;  // vacuum
  out.push_back(cur);

  const bool feedback = schedule.is_feedback();
  auto control_at = [&](const CovarianceState& s) {
    return schedule.eval(std::min(s.t, T), phi_mod_2pi(s.phi),
                         static_cast<int>(std::floor(s.phi / kTwoPi + 1e-12)));
  };
  double eps_cur = control_at(cur);
  double h = std::min({0.01 / omega, T / 16.0, config.max_step});
  double next_output = (config.output_stride > 0.0)
                           ? config.output_stride
                           : std::numeric_limits<double>::infinity();
  size_t edge_idx = 0;
  const double t_tol =
      std::max(config.rel_tol * T,
               64.0 * std::numeric_limits<double>::epsilon() * T);
  long reject_streak = 0;

  auto advance = [&](const CovarianceState& from, double hh,
                     CovarianceState& to) {
    Vec5 u{from.vxx, from.vpp, from.vxp, from.mu, from.a_acc};
    double e0 = ramp ? schedule.eval(from.t, 0.0) : eps_cur;
    StepResult res = dp45_step(u, from.t, hh, e0, ramp, ramp_rate, omega,
                               open.gamma, drive, config.rel_tol,
                               config.abs_tol);
    for (double v : res.y)
      if (!std::isfinite(v))
        fail(ErrorCode::overflow_error, "integrate_open: non-finite moments");
    to = CovarianceState::from_carried_mu(from.t + hh, res.y[0], res.y[1],
                                          res.y[2], res.y[3], res.y[4],
                                          from.phi);
    return res.err;
  };

  while (cur.t < T * (1.0 - 1e-15)) {
    while (edge_idx < edges.size() && edges[edge_idx] <= cur.t * (1.0 + 1e-15))
      ++edge_idx;
    double t_edge = (edge_idx < edges.size()) ? edges[edge_idx] : T;
    double t_stop = std::min({t_edge, next_output, T});
    if (!feedback) eps_cur = control_at(cur);

    double sh2 = std::sinh(2.0 * cur.r);
    if (sh2 * sh2 >= kPhaseBall) {
      // phase-rate cap as in the closed-system integrator
      double coth = 1.0 / std::tanh(2.0 * cur.r);
      double phidot = std::abs(2.0 * omega -
                               eps_cur * (1.0 - coth * std::cos(cur.phi)));
      if (phidot > 0.0) h = std::min(h, config.phase_step_cap / phidot);
    } else if (eps_cur > 0.0) {
      h = std::min(h, 1e-5 / eps_cur);
    }
    h = std::min({h, config.max_step, t_stop - cur.t});
    if (!(h > 0.0)) {
      ++edge_idx;
      continue;
    }

    CovarianceState nxt;
    double err = advance(cur, h, nxt);
    bool accept = err <= 1.0;
    if (accept && std::abs(nxt.phi - cur.phi) > config.phase_step_cap * 1.25 &&
        std::sinh(2 * cur.r) > 1e-6 && std::sinh(2 * nxt.r) > 1e-6)
      accept = false;
    if (!accept) {
      if (++reject_streak > 200 ||
          h < 1e3 * std::numeric_limits<double>::epsilon() * std::max(1.0, cur.t))
        fail(ErrorCode::event_localization,
             "integrate_open: step-size underflow");
      h *= 0.5;
      continue;
    }
    reject_streak = 0;

    if (feedback) {
      double eps_new = control_at(nxt);
      if (eps_new != eps_cur) {
        double lo = 0.0, hi = h;
        CovarianceState probe;
        int guard = 0;
        while (hi - lo > t_tol && ++guard < 200) {
          double mid = 0.5 * (lo + hi);
          advance(cur, mid, probe);
          if (control_at(probe) != eps_cur)
            hi = mid;
          else
            lo = mid;
        }
        advance(cur, hi, nxt);
        cur = nxt;
        eps_cur = control_at(cur);
        if (config.output_stride <= 0.0) out.push_back(cur);
        continue;
      }
    }

    cur = nxt;
    double grow = (err > 1e-12) ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::clamp(grow, 0.2, 5.0);

    if (config.output_stride > 0.0) {
      if (cur.t >= next_output * (1.0 - 1e-12)) {
        out.push_back(cur);
        while (next_output <= cur.t * (1.0 + 1e-12))
          next_output += config.output_stride;
      }
    } else {
      out.push_back(cur);
    }
  }
  if (out.back().t < cur.t || out.back().t < T * (1.0 - 1e-12)) out.push_back(cur);
  return out;
}

double instantaneous_qfi(const CovarianceState& state) {
  if (!(state.mu >= 0.5 * (1.0 - 1e-9)))
    fail(ErrorCode::invalid_state, "instantaneous_qfi: mu below 1/2");
  double sh = std::sinh(2.0 * state.r);
  return 8.0 * state.mu / (2.0 * state.mu + 1.0) * sh * sh;
}

double qfi_open_bound(const std::vector<CovarianceState>& states, double T) {
  if (states.empty())
    fail(ErrorCode::invalid_argument, "qfi_open_bound: empty run");
  if (std::abs(states.back().t - T) > 1e-6 * std::max(1.0, T))
    fail(ErrorCode::invalid_argument, "qfi_open_bound: states do not span [0,T]");
  return 4.0 * T * states.back().a_acc;
}

std::string open_run_csv(const std::vector<CovarianceState>& states) {
  std::ostringstream out;
  out << "t,vxx,vpp,vxp,mu,r,phi,qfi_bound_running\n";
  for (const auto& s : states) {
    out << format_g17(s.t) << ',' << format_g17(s.vxx) << ','
        << format_g17(s.vpp) << ',' << format_g17(s.vxp) << ','
        << format_g17(s.mu) << ',' << format_g17(s.r) << ','
        << format_g17(s.phi) << ',' << format_g17(4.0 * s.t * s.a_acc) << '\n';
  }
  return out.str();
}

}  // namespace critmet
