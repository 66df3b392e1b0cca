#ifndef CRITMET_SCHEDULE_HPP
#define CRITMET_SCHEDULE_HPP

#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "critmet/onoff.hpp"
#include "critmet/system.hpp"

namespace critmet {

/// Control laws eps(t). Time-programmed variants ignore the phase argument;
/// the feedback variant ignores time and switches on the current phi mod 2pi.
struct Constant {
  double eps = 0.0;
};

struct PiecewiseConstant {
  std::vector<std::pair<double, double>> segments;  // (duration, eps)
};

struct LinearRamp {
  double eps_start = 0.0;
  double eps_end = 0.0;
  double T = 0.0;
};

struct PhaseFeedbackOnOff {
  double phi_on = 0.0;   // drive on while phi mod 2pi in [0, phi_on)
  double eps_on = 0.0;
  std::optional<int> cycle_cap;  // if set, drive forced off once winding >= cap
};

class Schedule {
 public:
  using Variant =
      std::variant<Constant, PiecewiseConstant, LinearRamp, PhaseFeedbackOnOff>;

  Schedule(Variant v, double eps_max);

  /// Control value at (t, phi mod 2pi). Total and pure on its domain;
  /// t outside a programmed horizon is a domain error.
  double eval(double t, double phi_mod) const;

  /// Same rule, with the winding number available so a feedback cycle_cap
  /// can be honoured. Time-programmed variants ignore `winding`.
  double eval(double t, double phi_mod, int winding) const;

  /// Grid-based non-decreasing check for time-programmed schedules over
  /// [0, horizon]; feedback schedules are non-monotone by construction.
  bool is_monotone(int grid_points) const;

  bool is_feedback() const;
  double eps_max() const { return eps_max_; }

  /// Finite horizon for PiecewiseConstant/LinearRamp; infinity otherwise.
  double horizon() const;

  /// Times in (0, horizon) where a programmed control value jumps; the
  /// integrator restarts there to keep full order across discontinuities.
  std::vector<double> breakpoints() const;

  const Variant& variant() const { return variant_; }

  std::string to_json() const;
  /// Parse the JSON literal format; eps values in the document are in units
  /// of omega and scaled to absolute values here.
  static Schedule from_json(const std::string& text, double omega);

 private:
  Variant variant_;
  double eps_max_;
};

/// Lay out a solved on-off protocol as explicit (duration, eps) segments:
/// n repetitions of on/off followed by the final on-segment; total duration
/// equals sol.T to 1e-9 relative.
Schedule schedule_from_onoff_solution(const OnOffSolution& sol, double omega);

/// Feedback realization of the same protocol: threshold at sol.phi_n,
/// terminated by the caller at t = sol.T.
Schedule feedback_from_onoff_solution(const OnOffSolution& sol);

}  // namespace critmet

#endif
