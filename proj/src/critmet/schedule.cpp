#include "critmet/schedule.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace critmet {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

Schedule::Schedule(Variant v, double eps_max)
    : variant_(std::move(v)), eps_max_(eps_max) {
  if (!(eps_max_ >= 0.0) || !std::isfinite(eps_max_))
    fail(ErrorCode::invalid_argument, "schedule eps_max must be >= 0");
  auto check_eps = [&](double e, const char* who) {
    if (!(e >= 0.0) || !(e <= eps_max_ + 1e-12))
      fail(ErrorCode::invalid_argument,
           std::string(who) + ": eps outside [0, eps_max]");
  };
  if (auto* c = std::get_if<Constant>(&variant_)) {
    check_eps(c->eps, "Constant");
  } else if (auto* p = std::get_if<PiecewiseConstant>(&variant_)) {
    if (p->segments.empty())
      fail(ErrorCode::invalid_argument, "PiecewiseConstant: no segments");
    for (auto& [dur, eps] : p->segments) {
      if (!(dur > 0.0))
        fail(ErrorCode::invalid_argument,
             "PiecewiseConstant: segment durations must be > 0");
      check_eps(eps, "PiecewiseConstant");
    }
  } else if (auto* r = std::get_if<LinearRamp>(&variant_)) {
    if (!(r->T > 0.0))
      fail(ErrorCode::invalid_argument, "LinearRamp: T must be > 0");
    check_eps(r->eps_start, "LinearRamp");
    check_eps(r->eps_end, "LinearRamp");
  } else if (auto* f = std::get_if<PhaseFeedbackOnOff>(&variant_)) {
    if (!(f->phi_on > 0.0) || !(f->phi_on < kTwoPi))
      fail(ErrorCode::invalid_argument,
           "PhaseFeedbackOnOff: phi_on must lie in (0, 2*pi)");
    check_eps(f->eps_on, "PhaseFeedbackOnOff");
    if (f->cycle_cap && *f->cycle_cap < 0)
      fail(ErrorCode::invalid_argument, "PhaseFeedbackOnOff: cycle_cap < 0");
  }
}

double Schedule::eval(double t, double phi_mod) const {
  return eval(t, phi_mod, 0);
}

double Schedule::eval(double t, double phi_mod, int winding) const {
  if (!(t >= -1e-12))
    fail(ErrorCode::domain_error, "schedule eval: t < 0");
  if (std::holds_alternative<PhaseFeedbackOnOff>(variant_)) {
    if (!(phi_mod >= 0.0) || !(phi_mod < kTwoPi + 1e-12))
      fail(ErrorCode::domain_error, "schedule eval: phi_mod outside [0, 2*pi)");
  }
  if (auto* c = std::get_if<Constant>(&variant_)) return c->eps;
  if (auto* p = std::get_if<PiecewiseConstant>(&variant_)) {
    double acc = 0.0;
    for (auto& [dur, eps] : p->segments) {
      acc += dur;
      if (t < acc) return eps;
    }
    if (t <= acc * (1.0 + 1e-12) + 1e-12) return p->segments.back().second;
    fail(ErrorCode::domain_error, "schedule eval: t beyond horizon");
  }
  if (auto* r = std::get_if<LinearRamp>(&variant_)) {
    if (t > r->T * (1.0 + 1e-12) + 1e-12)
      fail(ErrorCode::domain_error, "schedule eval: t beyond ramp horizon");
    double f = std::clamp(t / r->T, 0.0, 1.0);
    return r->eps_start + (r->eps_end - r->eps_start) * f;
  }
  auto& fb = std::get<PhaseFeedbackOnOff>(variant_);
  if (fb.cycle_cap && winding >= *fb.cycle_cap) return 0.0;
  return (phi_mod < fb.phi_on) ? fb.eps_on : 0.0;
}

bool Schedule::is_monotone(int grid_points) const {
  if (grid_points < 2)
    fail(ErrorCode::invalid_argument, "is_monotone: need >= 2 grid points");
  if (is_feedback()) return false;
  double h = horizon();
  if (!std::isfinite(h)) h = 1.0;  // constants: any span works
  double prev = eval(0.0, 0.0);
  for (int i = 1; i < grid_points; ++i) {
    double t = h * static_cast<double>(i) / (grid_points - 1);
    double e = eval(std::min(t, h), 0.0);
    if (e < prev - 1e-12) return false;
    prev = e;
  }
  return true;
}

bool Schedule::is_feedback() const {
  return std::holds_alternative<PhaseFeedbackOnOff>(variant_);
}

double Schedule::horizon() const {
  if (auto* p = std::get_if<PiecewiseConstant>(&variant_)) {
    double acc = 0.0;
    for (auto& [dur, eps] : p->segments) acc += dur;
    return acc;
  }
  if (auto* r = std::get_if<LinearRamp>(&variant_)) return r->T;
  return std::numeric_limits<double>::infinity();
}

std::vector<double> Schedule::breakpoints() const {
  std::vector<double> out;
  if (auto* p = std::get_if<PiecewiseConstant>(&variant_)) {
    double acc = 0.0;
    for (size_t i = 0; i + 1 < p->segments.size(); ++i) {
      acc += p->segments[i].first;
      out.push_back(acc);
    }
  }
  return out;
}

std::string Schedule::to_json() const {
  nlohmann::json j;
  if (auto* c = std::get_if<Constant>(&variant_)) {
    j["kind"] = "constant";
    j["eps"] = c->eps;
  } else if (auto* p = std::get_if<PiecewiseConstant>(&variant_)) {
    j["kind"] = "piecewise";
    auto segs = nlohmann::json::array();
    for (auto& [dur, eps] : p->segments) segs.push_back({dur, eps});
    j["segments"] = segs;
  } else if (auto* r = std::get_if<LinearRamp>(&variant_)) {
    j["kind"] = "ramp";
    j["eps_start"] = r->eps_start;
    j["eps_end"] = r->eps_end;
    j["T"] = r->T;
  } else if (auto* f = std::get_if<PhaseFeedbackOnOff>(&variant_)) {
    j["kind"] = "onoff_feedback";
    j["phi_on"] = f->phi_on;
    j["eps_on"] = f->eps_on;
    if (f->cycle_cap) j["cycle_cap"] = *f->cycle_cap;
  }
  j["eps_max"] = eps_max_;
  return j.dump();
}

Schedule Schedule::from_json(const std::string& text, double omega) {
  SystemParams{omega}.validate();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::invalid_argument,
         std::string("schedule JSON parse error: ") + e.what());
  }
  try {
    std::string kind = j.at("kind").get<std::string>();
    Variant v;
    double default_max = 0.0;
    if (kind == "constant") {
      Constant c{j.at("eps").get<double>() * omega};
      default_max = c.eps;
      v = c;
    } else if (kind == "piecewise") {
      PiecewiseConstant p;
      for (auto& seg : j.at("segments")) {
        double dur = seg.at(0).get<double>();
        double eps = seg.at(1).get<double>() * omega;
        p.segments.emplace_back(dur, eps);
        default_max = std::max(default_max, eps);
      }
      v = p;
    } else if (kind == "ramp") {
      LinearRamp r{j.at("eps_start").get<double>() * omega,
                   j.at("eps_end").get<double>() * omega,
                   j.at("T").get<double>()};
      default_max = std::max(r.eps_start, r.eps_end);
      v = r;
    } else if (kind == "onoff_feedback") {
      PhaseFeedbackOnOff f;
      f.phi_on = j.at("phi_on").get<double>();
      f.eps_on = j.at("eps_on").get<double>() * omega;
      if (j.contains("cycle_cap")) f.cycle_cap = j["cycle_cap"].get<int>();
      default_max = f.eps_on;
      v = f;
    } else {
      fail(ErrorCode::invalid_argument, "unknown schedule kind: " + kind);
    }
    double eps_max =
        j.contains("eps_max") ? j["eps_max"].get<double>() * omega : default_max;
    return Schedule(std::move(v), eps_max);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::invalid_argument,
         std::string("schedule JSON field error: ") + e.what());
  }
}

Schedule schedule_from_onoff_solution(const OnOffSolution& sol, double omega) {
  SystemParams{omega}.validate();
  if (!sol.feasible)
    fail(ErrorCode::infeasible,
         "schedule_from_onoff_solution: solution is infeasible");
  PiecewiseConstant p;
  if (sol.n > 0) {
    double t_on = onoff_time_on(sol.phi_n, sol.eps_max, omega);
    double t_off = (kPi - 0.5 * sol.phi_n) / omega;
    for (int k = 0; k < sol.n; ++k) {
      p.segments.emplace_back(t_on, sol.eps_max);
      p.segments.emplace_back(t_off, 0.0);
    }
  }
  double t_final = onoff_time_on(sol.tilde_phi_n, sol.eps_max, omega);
  if (t_final > 0.0) p.segments.emplace_back(t_final, sol.eps_max);
  if (p.segments.empty())
    fail(ErrorCode::infeasible,
         "schedule_from_onoff_solution: empty protocol (T = 0)");
  double total = 0.0;
  for (auto& [dur, eps] : p.segments) total += dur;
  if (std::abs(total - sol.T) > 1e-9 * std::max(1.0, sol.T))
    fail(ErrorCode::numeric_error,
         "schedule_from_onoff_solution: duration mismatch beyond 1e-9");
  return Schedule(std::move(p), sol.eps_max);
}

Schedule feedback_from_onoff_solution(const OnOffSolution& sol) {
  if (!sol.feasible)
    fail(ErrorCode::infeasible,
         "feedback_from_onoff_solution: solution is infeasible");
  PhaseFeedbackOnOff f;
  f.phi_on = sol.phi_n;
  f.eps_on = sol.eps_max;
  return Schedule(std::move(f), sol.eps_max);
}

}  // namespace critmet
