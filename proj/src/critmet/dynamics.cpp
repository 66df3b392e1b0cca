#include "critmet/dynamics.hpp"

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
constexpr double kOriginBall = 1e-12;  // threshold on x^2 + y^2
// The equations of motion square the phase-space magnitude, so the usable
// range ends near sqrt(DBL_MAX) ~ 1.3e154; error out with headroom.
constexpr double kOverflowLimit = 1e150;

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

int winding_from_phi(double phi) {
  return static_cast<int>(std::floor(phi / kTwoPi + 1e-12));
}

using Vec7 = std::array<double, 7>;  // x, y, theta, j_re, j_im, a, env

Vec7 rhs(double x, double y, double theta, double eps, double omega) {
  double q = x * x + y * y;
  double w = std::sqrt(1.0 + q);
  double s2r = std::sqrt(q);
  Vec7 d;
  d[0] = -(2.0 * omega - eps) * y;
  d[1] = (2.0 * omega - eps) * x + eps * w;
  d[2] = (q < kOriginBall) ? (omega - 0.5 * eps) : (-eps * x / q);
  d[3] = s2r * std::cos(theta);
  d[4] = s2r * std::sin(theta);
  d[5] = q;
  d[6] = s2r;
  return d;
}

// Dormand-Prince 5(4) with the FSAL stage dropped (rates are cheap here).
struct Dp45Result {
  Vec7 y;
  double err;  // scaled RMS error estimate
};

Dp45Result dp45_step(const Vec7& u, double t, double h, double eps_a,
                     bool ramp, double t_ramp0, double ramp_rate, double omega,
                     double rel_tol, double abs_tol) {
  // eps(t) inside the step: constant (eps_a) unless a ramp is active.
  auto eps_at = [&](double tau) {
    if (!ramp) return eps_a;
    return eps_a + ramp_rate * (tau - t_ramp0);
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

  auto f = [&](const Vec7& v, double tau) {
    return rhs(v[0], v[1], v[2], eps_at(tau), omega);
  };
  Vec7 k1 = f(u, t);
  Vec7 s;
  for (int i = 0; i < 7; ++i) s[i] = u[i] + h * a21 * k1[i];
  Vec7 k2 = f(s, t + c2 * h);
  for (int i = 0; i < 7; ++i) s[i] = u[i] + h * (a31 * k1[i] + a32 * k2[i]);
  Vec7 k3 = f(s, t + c3 * h);
  for (int i = 0; i < 7; ++i)
    s[i] = u[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  Vec7 k4 = f(s, t + c4 * h);
  for (int i = 0; i < 7; ++i)
    s[i] = u[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  Vec7 k5 = f(s, t + c5 * h);
  for (int i = 0; i < 7; ++i)
    s[i] = u[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                       a65 * k5[i]);
  Vec7 k6 = f(s, t + h);
  Vec7 y5;
  for (int i = 0; i < 7; ++i)
    y5[i] = u[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                        b6 * k6[i]);
  Vec7 k7 = f(y5, t + h);
  double err = 0.0;
  for (int i = 0; i < 7; ++i) {
    double y4 = u[i] + h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                            e6 * k6[i] + e7 * k7[i]);
    double sc = abs_tol + rel_tol * std::max(std::abs(u[i]), std::abs(y5[i]));
    double d = (y5[i] - y4) / sc;
    err += d * d;
  }
  return {y5, std::sqrt(err / 7.0)};
}

struct StepperState {
  double t = 0.0;
  Vec7 u{};
  double phi = 0.0;
  bool frozen = true;  // phase undefined below the origin ball
};

class Integrator {
 public:
  Integrator(const SystemParams& params, const Schedule& schedule, double T,
             const IntegratorConfig& cfg)
      : params_(params), schedule_(schedule), T_(T), cfg_(cfg) {}

  Trajectory run(const StepperState& init);

 private:
  double control_at(const StepperState& s) const {
    return schedule_.eval(std::min(s.t, T_), phi_mod_2pi(s.phi),
                          winding_from_phi(s.phi));
  }

  // One raw step of size h from `from` under the currently held control;
  // updates phase unwrap / freeze bookkeeping. Returns scaled error.
  double advance(const StepperState& from, double h, double eps_held,
                 StepperState& out) const;

  void check_finite(const StepperState& s) const;

  SystemParams params_;
  const Schedule& schedule_;
  double T_;
  IntegratorConfig cfg_;
  bool ramp_active_ = false;
  double ramp_rate_ = 0.0;
};

double Integrator::advance(const StepperState& from, double h, double eps_held,
                           StepperState& out) const {
  double eps0 = eps_held;
  double rr = 0.0;
  bool ramp = ramp_active_;
  if (ramp) {
    eps0 = schedule_.eval(from.t, 0.0);
    rr = ramp_rate_;
  }
  Dp45Result res = dp45_step(from.u, from.t, h, eps0, ramp, from.t, rr,
                             params_.omega, cfg_.rel_tol, cfg_.abs_tol);
  out.t = from.t + h;
  out.u = res.y;
  double q = out.u[0] * out.u[0] + out.u[1] * out.u[1];
  if (q < kOriginBall) {
    out.frozen = true;
    out.phi = from.phi;
  } else {
    double raw = std::atan2(out.u[1], out.u[0]);
    double delta = wrap_to_pi(raw - from.phi);
    if (from.frozen && delta > kPi - 0.2) {
      // Near-antipodal exit from the origin ball: the trajectory passed the
      // vacuum on the x<0 side, which continues the phase downward.
      delta -= kTwoPi;
    }
    out.frozen = false;
    out.phi = from.phi + delta;
  }
  return res.err;
}

void Integrator::check_finite(const StepperState& s) const {
  for (double v : s.u)
    if (!std::isfinite(v))
      fail(ErrorCode::invalid_state, "integrate: non-finite state component");
  double mag = std::hypot(s.u[0], s.u[1]);
  if (mag > kOverflowLimit)
    fail(ErrorCode::overflow_error,
         "integrate: sinh(2r) beyond the double-range policy (1e150)");
}

Trajectory Integrator::run(const StepperState& init) {
  params_.validate();
  cfg_.validate();
  if (!(T_ > 0.0)) fail(ErrorCode::invalid_argument, "integrate: T <= 0");
  if (schedule_.eps_max() > params_.omega * (1.0 + 1e-12))
    fail(ErrorCode::domain_error,
         "integrate: schedule ceiling violates the symmetric phase "
         "0 <= eps <= omega");
  if (schedule_.horizon() < T_ * (1.0 - 1e-12))
    fail(ErrorCode::domain_error, "integrate: schedule horizon shorter than T");

  if (auto* r = std::get_if<LinearRamp>(&schedule_.variant())) {
    ramp_active_ = true;
    ramp_rate_ = (r->eps_end - r->eps_start) / r->T;
  }

  // Hard edges: programmed discontinuities and the horizon itself.
  std::vector<double> edges = schedule_.breakpoints();
  edges.push_back(T_);
  std::sort(edges.begin(), edges.end());

  Trajectory traj;
  traj.params = params_;
  traj.schedule_id = schedule_.to_json();

  StepperState cur = init;
  auto to_sample = [&](const StepperState& s) {
    PhaseState p;
    p.t = s.t;
    p.x = s.u[0];
    p.y = s.u[1];
    p.theta = s.u[2];
    p.phi_unwrapped = s.phi;
    p.j_re = s.u[3];
    p.j_im = s.u[4];
    p.a_acc = s.u[5];
    p.env_acc = s.u[6];
    return p;
  };
  traj.samples.push_back(to_sample(cur));

  double next_output = (cfg_.output_stride > 0.0)
                           ? cfg_.output_stride
                           : std::numeric_limits<double>::infinity();
  size_t edge_idx = 0;
  double eps_cur = control_at(cur);
  double h = std::min({0.01 / params_.omega, T_ / 16.0, cfg_.max_step});
  const double t_tol = std::max(cfg_.rel_tol * T_,
                                64.0 * std::numeric_limits<double>::epsilon() * T_);
  const bool feedback = schedule_.is_feedback();
  long reject_streak = 0;

  while (cur.t < T_ * (1.0 - 1e-15) && cur.t < T_) {
    check_finite(cur);
    while (edge_idx < edges.size() && edges[edge_idx] <= cur.t * (1.0 + 1e-15))
      ++edge_idx;
    double t_edge = (edge_idx < edges.size()) ? edges[edge_idx] : T_;
    double t_stop = std::min({t_edge, next_output, T_});
    // programmed controls change only at edges, where steps stop exactly;
    // feedback controls are held between localized switches
    if (!feedback) eps_cur = control_at(cur);

    // Phase-rate step cap keeps per-step |delta phi| below the unwrap limit.
    double q = cur.u[0] * cur.u[0] + cur.u[1] * cur.u[1];
    if (q >= kOriginBall) {
      EomRates rates = eom_rates(to_sample(cur), eps_cur, params_);
      double phidot = std::abs(rates.phi);
      if (phidot > 0.0) h = std::min(h, cfg_.phase_step_cap / phidot);
      if (feedback) {
        // approach a switching threshold slowly enough to not overshoot far
        double pm = phi_mod_2pi(cur.phi);
        auto& fb = std::get<PhaseFeedbackOnOff>(schedule_.variant());
        double d1 = std::abs(wrap_to_pi(pm - fb.phi_on));
        double d2 = std::min(pm, kTwoPi - pm);
        double dmin = std::min(d1, d2);
        if (dmin < 0.3 && phidot > 0.0)
          h = std::min(h, std::max(0.05, dmin) / phidot);
      }
    } else if (eps_cur > 0.0) {
      // leave the origin ball gently so the exit angle is well defined
      h = std::min(h, 1e-5 / eps_cur);
    }
    h = std::min({h, cfg_.max_step, t_stop - cur.t});
    if (!(h > 0.0)) {
      ++edge_idx;
      continue;
    }

    StepperState nxt;
    double err = advance(cur, h, eps_cur, nxt);

    bool accept = err <= 1.0;
    if (accept && !cur.frozen && !nxt.frozen) {
      if (std::abs(nxt.phi - cur.phi) > cfg_.phase_step_cap * 1.25)
        accept = false;  // unwrap ambiguity guard
    }
    if (!accept) {
      if (++reject_streak > 200 ||
          h < 1e3 * std::numeric_limits<double>::epsilon() * std::max(1.0, cur.t))
        fail(ErrorCode::event_localization,
             "integrate: step-size underflow (rejection cascade)");
      h *= 0.5;
      continue;
    }
    reject_streak = 0;

    if (feedback) {
      double eps_new = control_at(nxt);
      if (eps_new != eps_cur) {
        // Bisect the switch time inside this step, then restart there.
        double lo = 0.0, hi = h;
        StepperState probe;
        int guard = 0;
        while (hi - lo > t_tol && ++guard < 200) {
          double mid = 0.5 * (lo + hi);
          advance(cur, mid, eps_cur, probe);
          if (control_at(probe) != eps_cur)
            hi = mid;
          else
            lo = mid;
        }
        advance(cur, hi, eps_cur, nxt);
        check_finite(nxt);
        cur = nxt;
        eps_cur = control_at(cur);
        if (cfg_.output_stride <= 0.0) traj.samples.push_back(to_sample(cur));
        continue;
      }
    }

    check_finite(nxt);
    cur = nxt;

    // grow the step (PI-free controller, conservative bounds)
    double grow = (err > 1e-12) ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::clamp(grow, 0.2, 5.0);

    if (cfg_.output_stride > 0.0) {
      if (cur.t >= next_output * (1.0 - 1e-12)) {
        traj.samples.push_back(to_sample(cur));
        while (next_output <= cur.t * (1.0 + 1e-12)) next_output += cfg_.output_stride;
      }
    } else {
      traj.samples.push_back(to_sample(cur));
    }
  }

  if (traj.samples.back().t < cur.t || traj.samples.back().t < T_ * (1.0 - 1e-12))
    traj.samples.push_back(to_sample(cur));
  traj.final = traj.samples.back();
  traj.winding = winding_from_phi(traj.final.phi_unwrapped);
  return traj;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    fail(ErrorCode::invalid_argument, "integrator tolerances must be > 0");
  if (!(phase_step_cap > 0.0) || phase_step_cap > kPi / 4.0 + 1e-15)
    fail(ErrorCode::invalid_argument,
         "phase_step_cap must lie in (0, pi/4] for unambiguous unwrapping");
  if (!(max_step > 0.0))
    fail(ErrorCode::invalid_argument, "max_step must be > 0");
  if (output_stride < 0.0)
    fail(ErrorCode::invalid_argument, "output_stride must be >= 0");
}

EomRates eom_rates(const PhaseState& state, double eps,
                   const SystemParams& params) {
  params.validate();
  if (!std::isfinite(state.x) || !std::isfinite(state.y) ||
      !std::isfinite(state.theta))
    fail(ErrorCode::invalid_state, "eom_rates: non-finite state");
  if (!(eps >= 0.0) || !(eps <= params.omega * (1.0 + 1e-12)))
    fail(ErrorCode::invalid_argument, "eom_rates: eps outside [0, omega]");
  Vec7 d = rhs(state.x, state.y, state.theta, eps, params.omega);
  EomRates r;
  r.x = d[0];
  r.y = d[1];
  r.theta = d[2];
  r.j_re = d[3];
  r.j_im = d[4];
  r.a = d[5];
  r.env = d[6];
  double q = state.x * state.x + state.y * state.y;
  if (q < kOriginBall) {
    r.phi = 0.0;  // frozen inside the origin ball
  } else {
    double w = std::sqrt(1.0 + q);
    r.phi = (2.0 * params.omega - eps) + eps * state.x * w / q;
  }
  return r;
}

Trajectory integrate(const SystemParams& params, const Schedule& schedule,
                     double T, const IntegratorConfig& config) {
  StepperState init;
  init.t = 0.0;
  init.u = {0, 0, 0, 0, 0, 0, 0};
  init.phi = 0.0;
  init.frozen = true;
  Integrator ig(params, schedule, T, config);
  return ig.run(init);
}

Trajectory integrate_from(const SystemParams& params, const Schedule& schedule,
                          double T, const IntegratorConfig& config, double x0,
                          double y0, double theta0) {
  StepperState init;
  init.t = 0.0;
  init.u = {x0, y0, theta0, 0, 0, 0, 0};
  double q = x0 * x0 + y0 * y0;
  init.frozen = q < kOriginBall;
  init.phi = init.frozen ? 0.0 : std::atan2(y0, x0);
  Integrator ig(params, schedule, T, config);
  return ig.run(init);
}

double squeezing_of(const PhaseState& state) {
  if (!std::isfinite(state.x) || !std::isfinite(state.y))
    fail(ErrorCode::invalid_state, "squeezing_of: non-finite state");
  return 0.5 * std::asinh(std::hypot(state.x, state.y));
}

int winding_of(const Trajectory& traj) {
  return winding_from_phi(traj.final.phi_unwrapped);
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  out << "t,x,y,theta,phi,r,j_re,j_im,a_acc\n";
  for (const auto& s : traj.samples) {
    out << format_g17(s.t) << ',' << format_g17(s.x) << ',' << format_g17(s.y)
        << ',' << format_g17(s.theta) << ',' << format_g17(s.phi_unwrapped)
        << ',' << format_g17(squeezing_of(s)) << ',' << format_g17(s.j_re)
        << ',' << format_g17(s.j_im) << ',' << format_g17(s.a_acc) << '\n';
  }
  return out.str();
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  write_file_atomic(path, trajectory_csv(traj));
}

}  // namespace critmet
