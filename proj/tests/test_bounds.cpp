#include <doctest.h>

#include <cmath>
#include <random>

#include "critmet/bounds.hpp"
#include "critmet/qfi.hpp"
#include "critmet/random_schedules.hpp"

using namespace critmet;

namespace {

// Independent quadrature for the polynomial envelope:
// 2 (integral_0^T (1 + w^2 v^2/(n+1))^{n+1} dv)^2 by Simpson.
double poly_bound_quadrature(double T, int n, double omega) {
  auto f = [&](double v) {
    return std::pow(1.0 + omega * omega * v * v / (n + 1), n + 1);
  };
  const int m = 20000;
  double h = T / m;
  double acc = f(0.0) + f(T);
  for (int i = 1; i < m; ++i) acc += f(i * h) * ((i % 2) ? 4.0 : 2.0);
  double integral = acc * h / 3.0;
  return 2.0 * integral * integral;
}

IntegratorConfig cfg_of(double T) {
  IntegratorConfig c;
  c.rel_tol = 1e-10;
  c.abs_tol = 1e-12;
  c.output_stride = T / 512;
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("bounds");

TEST_CASE("qfi_poly_bound: closed values and quadrature oracle") {
  CHECK(qfi_poly_bound(1.0, 0, 1.0) == doctest::Approx(32.0 / 9).epsilon(1e-14));
  CHECK(qfi_poly_bound(1e-4, 0, 1.0) ==
        doctest::Approx(2e-8).epsilon(1e-6));  // -> 2 T^2
  for (int n : {0, 1, 2, 3}) {
    double got = qfi_poly_bound(2.5, n, 1.3);
    double want = poly_bound_quadrature(2.5, n, 1.3);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("qfi_poly_bound: monotone in T and in n") {
  double prev = 0.0;
  for (double T = 0.5; T < 8.0; T += 0.5) {
    double b = qfi_poly_bound(T, 1, 1.0);
    CHECK(b > prev);
    prev = b;
  }
  for (int n = 0; n < 6; ++n)
    CHECK(qfi_poly_bound(3.0, n + 1, 1.0) > qfi_poly_bound(3.0, n, 1.0));
}

TEST_CASE("poly_bound_leading_coeff: derived form matches numeric extraction") {
  for (double omega : {1.0, 2.0}) {
    for (int n = 0; n <= 4; ++n) {
      auto [quoted, expanded] = poly_bound_leading_coeff(n, omega);
      double T = 1e5 / omega;
      double extracted =
          qfi_poly_bound(T, n, omega) / std::pow(T, 4 * n + 6);
      CHECK(expanded == doctest::Approx(extracted).epsilon(1e-6));
      if (n == 0 && omega == 1.0)
        CHECK(quoted == doctest::Approx(expanded).epsilon(1e-12));
    }
  }
  // the two printed forms disagree in the omega power: report, not reconcile
  auto [quoted_w2, expanded_w2] = poly_bound_leading_coeff(0, 2.0);
  CHECK(quoted_w2 == doctest::Approx(8.0 / 9));
  CHECK(expanded_w2 == doctest::Approx(32.0 / 9));
}

TEST_CASE("squeezing_cap values and domain") {
  CHECK(squeezing_cap(0.5, 0, 1.0) == doctest::Approx(2.0));
  CHECK(squeezing_cap(0.0, 7, 1.0) == doctest::Approx(1.0));
  CHECK(squeezing_cap(0.7, 3, 1.0) ==
        doctest::Approx(std::pow(10.0 / 3.0, 4)).epsilon(1e-12));
  CHECK_THROWS_AS((void)squeezing_cap(1.0, 0, 1.0), Error);
  CHECK_THROWS_AS((void)squeezing_cap(1.5, 0, 1.0), Error);
}

TEST_CASE("polynomial envelope property: random admissible runs stay under") {
  SystemParams p{1.0};
  std::mt19937_64 rng(99);
  for (int i = 0; i < 20; ++i) {
    auto draw = random_admissible_schedule(rng, 1.0, 1.0, 20.0);
    Trajectory t = integrate(p, draw.schedule, draw.T, cfg_of(draw.T));
    QfiResult q = qfi_from_trajectory(t);
    double bound = qfi_poly_bound(draw.T, t.winding, 1.0);
    CHECK(q.value <= bound * (1.0 + 1e-9));
  }
}

TEST_CASE("squeezing-cap property: sub-ceiling runs stay under") {
  SystemParams p{1.0};
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 15; ++i) {
    auto draw = random_admissible_schedule(rng, 1.0, 0.7, 16.0);
    Trajectory t = integrate(p, draw.schedule, draw.T, cfg_of(draw.T));
    for (auto& s : t.samples) {
      int w = static_cast<int>(
          std::floor(s.phi_unwrapped / (2 * 3.14159265358979324) + 1e-12));
      double cap = squeezing_cap(0.7, w, 1.0);
      CHECK(std::hypot(s.x, s.y) <= cap * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("cycle_growth_check: free rotation and quench are satisfied") {
  SystemParams p{1.0};
  Schedule quench(Constant{1.0}, 1.0);
  Trajectory tq = integrate(p, quench, 3.0, cfg_of(3.0));
  auto reports = cycle_growth_check(tq, 1.0, 1.0);
  REQUIRE(!reports.empty());
  for (auto& r : reports) {
    CHECK(r.kind == "quadratic");  // no ceiling form at the critical ceiling
    CHECK(r.satisfied);
    CHECK(r.margin >= 0.0);
  }

  Schedule sub(Constant{0.5}, 1.0);
  Trajectory ts = integrate(p, sub, 9.0, cfg_of(9.0));
  auto rs = cycle_growth_check(ts, 0.5, 1.0);
  bool saw_ceiling = false;
  for (auto& r : rs) {
    CHECK(r.satisfied);
    if (r.kind == "ceiling") saw_ceiling = true;
  }
  CHECK(saw_ceiling);
}

TEST_CASE("cycle_growth_check: free rotation margins are the quadratic term") {
  SystemParams p{1.0};
  Schedule free(Constant{0.0}, 1.0);
  double r0 = 0.6;
  double T = 8.0;
  Trajectory t = integrate_from(p, free, T, cfg_of(T), std::sinh(2 * r0), 0.0,
                                0.0);
  REQUIRE(t.winding >= 2);
  auto reports = cycle_growth_check(t, 1.0, 1.0);
  REQUIRE(reports.size() >= 2);
  double stride = T / 512;
  for (auto& r : reports) {
    CHECK(r.satisfied);
    // with constant r the margin is the pure quadratic term omega^2 dt^2
    // cosh 2r0, smallest at the first stored sample after the anchor
    CHECK(r.margin >= -1e-9 * r.bound_value);
    CHECK(r.margin <= 4.0 * stride * stride * r.bound_value + 1e-9);
  }
}

TEST_CASE("envelope grows at most quadratically once r saturates") {
  // Constant sub-ceiling drive: winding stays 0, sinh 2r is bounded by the
  // squeezing cap, so the envelope 2 (int sinh 2r)^2 scales like T^2.
  SystemParams p{1.0};
  Schedule s(Constant{0.5}, 1.0);
  std::vector<std::pair<double, double>> pts;
  for (double T : {50.0, 80.0, 120.0, 160.0, 200.0}) {
    Trajectory t = integrate(p, s, T, cfg_of(T));
    CHECK(t.winding == 0);
    double cap = squeezing_cap(0.5, t.winding, 1.0);
    for (auto& st : t.samples)
      CHECK(std::hypot(st.x, st.y) <= cap * (1.0 + 1e-9));
    pts.emplace_back(T, qfi_from_trajectory(t).envelope);
  }
  FitResult fit = fit_power_law(pts, 49.0, 201.0);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("cycle_growth_check: optimal on-off protocol, every cycle") {
  SystemParams p{1.0};
  double T = 60.0;
  OptimizeResult res = optimize_n(T, 1.0, 1.0, 20);
  Schedule fb = feedback_from_onoff_solution(res.best);
  Trajectory t = integrate(p, fb, T, cfg_of(T));
  auto reports = cycle_growth_check(t, 1.0, 1.0);
  CHECK(reports.size() >= static_cast<size_t>(res.best.n));
  for (auto& r : reports) CHECK(r.satisfied);
}

TEST_CASE("bound report CSV header") {
  std::vector<BoundReport> reps(1);
  reps[0].kind = "quadratic";
  std::string csv = bound_reports_csv(reps);
  CHECK(csv.rfind("kind,cycle,bound,observed,margin,satisfied\n", 0) == 0);
}

TEST_SUITE_END();
