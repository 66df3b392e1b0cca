#ifndef CRITMET_RANDOM_SCHEDULES_HPP
#define CRITMET_RANDOM_SCHEDULES_HPP

#include <random>

#include "critmet/schedule.hpp"

namespace critmet {

/// Random admissible time-programmed schedule: piecewise-constant levels in
/// [0, eps_max], 1..6 segments, total duration drawn in (0.2, T_max].
struct RandomScheduleDraw {
  Schedule schedule;
  double T;
};

RandomScheduleDraw random_admissible_schedule(std::mt19937_64& rng,
                                              double omega, double eps_max,
                                              double T_max);

/// Random monotone non-decreasing schedule: sorted piecewise-constant
/// levels or an upward ramp, levels in [0, omega].
RandomScheduleDraw random_monotone_schedule(std::mt19937_64& rng, double omega,
                                            double T_max);

}  // namespace critmet

#endif
