#include "critmet/qfi.hpp"

#include <cmath>

#include "critmet/errors.hpp"

namespace critmet {

QfiResult qfi_from_trajectory(const Trajectory& traj) {
  if (traj.samples.empty())
    fail(ErrorCode::invalid_argument, "qfi_from_trajectory: empty trajectory");
  const PhaseState& f = traj.final;
  QfiResult res;
  res.j_final = {f.j_re, f.j_im};
  res.value = 2.0 * std::norm(res.j_final);
  res.envelope = 2.0 * f.env_acc * f.env_acc;
  res.T = f.t;
  return res;
}

namespace {

FitResult fit_line(const std::vector<std::pair<double, double>>& points,
                   double lo, double hi, bool log_x) {
  if (!(hi > lo))
    fail(ErrorCode::domain_error, "fit: degenerate window");
  std::vector<std::pair<double, double>> sel;
  for (auto& [t, f] : points) {
    if (t < lo || t > hi) continue;
    if (!(f > 0.0))
      fail(ErrorCode::domain_error, "fit: nonpositive F value in window");
    if (!(t > 0.0) && log_x)
      fail(ErrorCode::domain_error, "fit: nonpositive T with log abscissa");
    sel.emplace_back(log_x ? std::log(t) : t, std::log(f));
  }
  if (sel.size() < 5)
    fail(ErrorCode::domain_error, "fit: fewer than 5 points in window");
  double sx = 0, sy = 0;
  for (auto& [x, y] : sel) { sx += x; sy += y; }
  double mx = sx / sel.size(), my = sy / sel.size();
  double sxx = 0, sxy = 0;
  for (auto& [x, y] : sel) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) fail(ErrorCode::domain_error, "fit: abscissa has no spread");
  FitResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss = 0;
  for (auto& [x, y] : sel) {
    double e = y - (r.intercept + r.slope * x);
    ss += e * e;
  }
  r.residual_rms = std::sqrt(ss / sel.size());
  r.window_lo = lo;
  r.window_hi = hi;
  r.points_used = static_cast<int>(sel.size());
  return r;
}

}  // namespace

FitResult fit_power_law(const std::vector<std::pair<double, double>>& points,
                        double window_lo, double window_hi) {
  return fit_line(points, window_lo, window_hi, /*log_x=*/true);
}

FitResult fit_exponent(const std::vector<std::pair<double, double>>& points,
                       double window_lo, double window_hi) {
  return fit_line(points, window_lo, window_hi, /*log_x=*/false);
}

}  // namespace critmet
