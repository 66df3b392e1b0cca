#include "critmet/random_schedules.hpp"

#include <algorithm>

namespace critmet {

RandomScheduleDraw random_admissible_schedule(std::mt19937_64& rng,
                                              double omega, double eps_max,
                                              double T_max) {
  (void)omega;
  std::uniform_int_distribution<int> nseg(1, 6);
  std::uniform_real_distribution<double> ulevel(0.0, eps_max);
  std::uniform_real_distribution<double> utime(0.2, T_max);
  double T = utime(rng);
  int k = nseg(rng);
  std::vector<double> weights(k);
  std::uniform_real_distribution<double> uw(0.05, 1.0);
  double wsum = 0.0;
  for (auto& w : weights) {
    w = uw(rng);
    wsum += w;
  }
  PiecewiseConstant p;
  for (int i = 0; i < k; ++i)
    p.segments.emplace_back(T * weights[i] / wsum, ulevel(rng));
  return {Schedule(std::move(p), eps_max), T};
}

RandomScheduleDraw random_monotone_schedule(std::mt19937_64& rng, double omega,
                                            double T_max) {
  std::uniform_real_distribution<double> ulevel(0.0, omega);
  std::uniform_real_distribution<double> utime(1.0, T_max);
  std::bernoulli_distribution use_ramp(0.5);
  double T = utime(rng);
  if (use_ramp(rng)) {
    double a = ulevel(rng), b = ulevel(rng);
    if (a > b) std::swap(a, b);
    return {Schedule(LinearRamp{a, b, T}, omega), T};
  }
  std::uniform_int_distribution<int> nseg(1, 6);
  int k = nseg(rng);
  std::vector<double> levels(k);
  for (auto& l : levels) l = ulevel(rng);
  std::sort(levels.begin(), levels.end());
  std::vector<double> weights(k);
  std::uniform_real_distribution<double> uw(0.05, 1.0);
  double wsum = 0.0;
  for (auto& w : weights) {
    w = uw(rng);
    wsum += w;
  }
  PiecewiseConstant p;
  for (int i = 0; i < k; ++i)
    p.segments.emplace_back(T * weights[i] / wsum, levels[i]);
  return {Schedule(std::move(p), omega), T};
}

}  // namespace critmet
