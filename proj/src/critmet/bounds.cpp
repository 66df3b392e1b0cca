#include "critmet/bounds.hpp"

#include <cmath>
#include <sstream>

#include "critmet/textio.hpp"

namespace critmet {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

double cosh2r_of(const PhaseState& s) {
  return std::sqrt(1.0 + s.x * s.x + s.y * s.y);
}
}  // namespace

double qfi_poly_bound(double T, int n, double omega) {
  if (n < 0) fail(ErrorCode::invalid_argument, "qfi_poly_bound: n < 0");
  if (!(T > 0.0)) fail(ErrorCode::invalid_argument, "qfi_poly_bound: T <= 0");
  SystemParams{omega}.validate();
  const int m = n + 1;
  const double z = omega * omega * T * T / m;
  double sum = 0.0;
  double binom = 1.0;  // C(m, k)
  double zk = 1.0;
  for (int k = 0; k <= m; ++k) {
    sum += binom * zk / (2 * k + 1);
    binom *= static_cast<double>(m - k) / (k + 1);
    zk *= z;
  }
  return 2.0 * T * T * sum * sum;
}

std::pair<double, double> poly_bound_leading_coeff(int n, double omega) {
  if (n < 0) fail(ErrorCode::invalid_argument, "poly_bound_leading_coeff: n < 0");
  SystemParams{omega}.validate();
  const double m = n + 1.0;
  const double denom_sq = (2.0 * n + 3.0) * (2.0 * n + 3.0);
  double quoted = 2.0 * std::pow(omega, 4 * n + 2) /
                 (denom_sq * std::pow(m, 2 * n + 1));
  double expanded = 2.0 * std::pow(omega, 4 * n + 4) /
                   (denom_sq * std::pow(m, 2 * n + 2));
  return {quoted, expanded};
}

double squeezing_cap(double eps_max, int n, double omega) {
  SystemParams{omega}.validate();
  if (n < 0) fail(ErrorCode::invalid_argument, "squeezing_cap: n < 0");
  if (!(eps_max >= 0.0) || eps_max >= omega)
    fail(ErrorCode::domain_error,
         "squeezing_cap: requires 0 <= eps_max < omega (void at criticality)");
  return std::pow(1.0 - eps_max / omega, -(n + 1.0));
}

std::vector<BoundReport> cycle_growth_check(const Trajectory& traj,
                                           double eps_max, double omega) {
  SystemParams{omega}.validate();
  if (traj.samples.size() < 2)
    fail(ErrorCode::invalid_argument, "cycle_growth_check: need >= 2 samples");

  // Crossing times t_k where the unwrapped phase passes 2*k*pi, located on
  // the stored grid by linear interpolation.
  struct Anchor {
    double t;
    double cosh2r;
  };
  std::vector<Anchor> anchors;
  anchors.push_back({traj.samples.front().t, cosh2r_of(traj.samples.front())});
  int k = 1;
  for (size_t i = 1; i < traj.samples.size(); ++i) {
    const auto& a = traj.samples[i - 1];
    const auto& b = traj.samples[i];
    while (a.phi_unwrapped < k * kTwoPi && b.phi_unwrapped >= k * kTwoPi) {
      double f = (k * kTwoPi - a.phi_unwrapped) /
                 (b.phi_unwrapped - a.phi_unwrapped);
      double t = a.t + f * (b.t - a.t);
      double c = cosh2r_of(a) + f * (cosh2r_of(b) - cosh2r_of(a));
      anchors.push_back({t, c});
      ++k;
    }
  }

  std::vector<BoundReport> reports;
  const bool subcritical = eps_max < omega;
  for (size_t cyc = 0; cyc < anchors.size(); ++cyc) {
    double t_k = anchors[cyc].t;
    double c_k = anchors[cyc].cosh2r;
    double t_end = (cyc + 1 < anchors.size()) ? anchors[cyc + 1].t
                                              : traj.samples.back().t;
    BoundReport l1;
    l1.kind = "quadratic";
    l1.cycle = static_cast<int>(cyc);
    l1.margin = std::numeric_limits<double>::infinity();
    BoundReport l2 = l1;
    l2.kind = "ceiling";
    bool any = false;
    for (const auto& s : traj.samples) {
      if (s.t < t_k || s.t > t_end) continue;
      any = true;
      double delta = s.t - t_k;
      double obs = cosh2r_of(s);
      double b1 = (omega * omega * delta * delta + 1.0) * c_k;
      if (b1 - obs < l1.margin) {
        l1.margin = b1 - obs;
        l1.bound_value = b1;
        l1.observed_value = obs;
      }
      if (subcritical) {
        double b2 = c_k / (1.0 - eps_max / omega);
        if (b2 - obs < l2.margin) {
          l2.margin = b2 - obs;
          l2.bound_value = b2;
          l2.observed_value = obs;
        }
      }
    }
    if (!any) continue;
    l1.satisfied = l1.margin >= -1e-9 * std::abs(l1.bound_value);
    reports.push_back(l1);
    if (subcritical) {
      l2.satisfied = l2.margin >= -1e-9 * std::abs(l2.bound_value);
      reports.push_back(l2);
    }
  }
  return reports;
}

std::string bound_reports_csv(const std::vector<BoundReport>& reports) {
  std::ostringstream out;
  out << "kind,cycle,bound,observed,margin,satisfied\n";
  for (const auto& r : reports) {
    out << r.kind << ',' << r.cycle << ',' << format_shortest(r.bound_value)
        << ',' << format_shortest(r.observed_value) << ','
        << format_shortest(r.margin) << ',' << (r.satisfied ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace critmet
