#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "critmet/dynamics.hpp"
#include "critmet/random_schedules.hpp"

using namespace critmet;

namespace {

constexpr double kPi = 3.14159265358979323846;

IntegratorConfig fine_config(double T, int samples = 256) {
  IntegratorConfig c;
  c.rel_tol = 1e-11;
  c.abs_tol = 1e-13;
  c.output_stride = T / samples;
  return c;
}

// Closed-form critical quench (eps = omega = 1) from the vacuum:
//   y = t, x = -t^2/2, cosh 2r = 1 + t^2/2, theta = atan(t/2),
//   J = (t^2/2, t^3/6), A = t^3/3 + t^5/20, E = (4/3)((1+t^2/4)^{3/2} - 1).
struct QuenchRef {
  double x, y, theta, phi, j_re, j_im, a, env;
};
QuenchRef quench_ref(double t) {
  QuenchRef q;
  q.x = -0.5 * t * t;
  q.y = t;
  q.theta = std::atan(0.5 * t);
  q.phi = std::atan2(q.y, q.x);
  q.j_re = 0.5 * t * t;
  q.j_im = t * t * t / 6.0;
  q.a = t * t * t / 3.0 + std::pow(t, 5) / 20.0;
  q.env = 4.0 / 3.0 * (std::pow(1.0 + 0.25 * t * t, 1.5) - 1.0);
  return q;
}

}  // namespace

TEST_SUITE_BEGIN("dynamics");

TEST_CASE("eom_rates: vacuum fixed point and drive direction") {
  SystemParams p{1.0};
  PhaseState vac;
  EomRates r0 = eom_rates(vac, 0.0, p);
  CHECK(r0.x == 0.0);
  CHECK(r0.y == 0.0);
  CHECK(r0.theta == doctest::Approx(1.0));  // limit value omega - eps/2
  CHECK(r0.j_re == 0.0);
  CHECK(r0.a == 0.0);

  EomRates r1 = eom_rates(vac, 1.0, p);
  CHECK(r1.x == 0.0);
  CHECK(r1.y == doctest::Approx(1.0));  // growth along +y
  CHECK(r1.theta == doctest::Approx(0.5));
}

TEST_CASE("eom_rates: generic point") {
  SystemParams p{1.0};
  PhaseState s;
  s.x = 3.0;
  s.y = 4.0;
  s.theta = 0.5;
  EomRates r = eom_rates(s, 0.5, p);
  CHECK(r.x == doctest::Approx(-6.0));
  CHECK(r.y == doctest::Approx(1.5 * 3.0 + 0.5 * std::sqrt(26.0)));
  CHECK(r.theta == doctest::Approx(-0.06));
  CHECK(r.j_re == doctest::Approx(5.0 * std::cos(0.5)));
  CHECK(r.j_im == doctest::Approx(5.0 * std::sin(0.5)));
  CHECK(r.a == doctest::Approx(25.0));
  // Eq.-of-motion phase rate equals the coth form
  double coth = std::sqrt(26.0) / 5.0;
  CHECK(r.phi == doctest::Approx(2.0 - 0.5 * (1.0 - coth * 0.6)));

  PhaseState bad = s;
  bad.x = std::nan("");
  CHECK_THROWS_AS((void)eom_rates(bad, 0.5, p), Error);
}

TEST_CASE("squeezing_of") {
  CHECK(squeezing_of(PhaseState{}) == doctest::Approx(0.0));
  PhaseState a;
  a.x = std::sinh(2.0);
  CHECK(squeezing_of(a) == doctest::Approx(1.0).epsilon(1e-12));
  PhaseState b;
  b.x = 3.0;
  b.y = 4.0;
  CHECK(squeezing_of(b) == doctest::Approx(1.1562191).epsilon(1e-6));
}

TEST_CASE("vacuum is stationary under zero drive") {
  SystemParams p{1.0};
  Schedule s(Constant{0.0}, 1.0);
  Trajectory t = integrate(p, s, 5.0, fine_config(5.0));
  CHECK(t.final.x == doctest::Approx(0.0));
  CHECK(t.final.y == doctest::Approx(0.0));
  CHECK(t.final.j_re == doctest::Approx(0.0));
  CHECK(t.final.a_acc == doctest::Approx(0.0));
  CHECK(t.winding == 0);
  CHECK(t.samples.front().t == doctest::Approx(0.0));
}

TEST_CASE("critical quench matches the closed form") {
  SystemParams p{1.0};
  Schedule s(Constant{1.0}, 1.0);
  double T = 3.0;
  Trajectory t = integrate(p, s, T, fine_config(T));
  QuenchRef q = quench_ref(T);
  CHECK(t.final.x == doctest::Approx(q.x).epsilon(1e-9));
  CHECK(t.final.y == doctest::Approx(q.y).epsilon(1e-9));
  CHECK(t.final.theta == doctest::Approx(q.theta).epsilon(1e-9));
  CHECK(t.final.phi_unwrapped == doctest::Approx(q.phi).epsilon(1e-9));
  CHECK(t.final.j_re == doctest::Approx(q.j_re).epsilon(1e-9));
  CHECK(t.final.j_im == doctest::Approx(q.j_im).epsilon(1e-9));
  CHECK(t.final.a_acc == doctest::Approx(q.a).epsilon(1e-9));
  CHECK(t.final.env_acc == doctest::Approx(q.env).epsilon(1e-9));
  CHECK(t.winding == 0);

  // interior samples too
  for (size_t i = 1; i < t.samples.size(); i += 40) {
    QuenchRef qi = quench_ref(t.samples[i].t);
    CHECK(t.samples[i].x == doctest::Approx(qi.x).epsilon(1e-8));
    CHECK(t.samples[i].y == doctest::Approx(qi.y).epsilon(1e-8));
  }
}

TEST_CASE("free rotation of an injected state: constant r, phase 2 omega t") {
  SystemParams p{1.0};
  Schedule s(Constant{0.0}, 1.0);
  double r0 = 0.8;
  double x0 = std::sinh(2.0 * r0);
  double T = 3.0 * kPi + 0.1;
  Trajectory t = integrate_from(p, s, T, fine_config(T), x0, 0.0, 0.0);
  CHECK(squeezing_of(t.final) == doctest::Approx(r0).epsilon(1e-10));
  CHECK(t.final.phi_unwrapped == doctest::Approx(2.0 * T).epsilon(1e-9));
  CHECK(t.winding == 3);
  // per-unit-time drift of r below 1e-10
  double drift = std::abs(squeezing_of(t.final) - r0) / T;
  CHECK(drift < 1e-10);
}

TEST_CASE("sub-critical quench breathes through the vacuum with winding 0") {
  SystemParams p{1.0};
  double eps = 0.5;
  Schedule s(Constant{eps}, 1.0);
  double omega_n = 2.0 * std::sqrt(1.0 - eps);  // breathing frequency
  double T = 9.0;                               // ~4 recurrences
  Trajectory t = integrate(p, s, T, fine_config(T, 1024));
  CHECK(t.winding == 0);
  for (size_t i = 0; i < t.samples.size(); i += 25) {
    double tt = t.samples[i].t;
    double w_ref = 1.0 + eps * eps / (omega_n * omega_n) *
                             (1.0 - std::cos(omega_n * tt));
    double w = std::sqrt(1.0 + t.samples[i].x * t.samples[i].x +
                         t.samples[i].y * t.samples[i].y);
    CHECK(w == doctest::Approx(w_ref).epsilon(1e-7));
  }
}

TEST_CASE("winding_of floors the final unwrapped phase") {
  Trajectory t;
  t.final.phi_unwrapped = 0.0;
  CHECK(winding_of(t) == 0);
  t.final.phi_unwrapped = 4.0 * kPi - 0.1;
  CHECK(winding_of(t) == 1);
  t.final.phi_unwrapped = 4.0 * kPi + 0.1;
  CHECK(winding_of(t) == 2);
}

TEST_CASE("winding never decreases along a trajectory") {
  SystemParams p{1.0};
  std::mt19937_64 rng(12345);
  for (int i = 0; i < 10; ++i) {
    auto draw = random_admissible_schedule(rng, 1.0, 1.0, 12.0);
    Trajectory t = integrate(p, draw.schedule, draw.T, fine_config(draw.T));
    int prev = 0;
    for (auto& s : t.samples) {
      int w = static_cast<int>(std::floor(s.phi_unwrapped / (2 * kPi) + 1e-12));
      CHECK(w >= prev);
      prev = std::max(prev, w);
    }
  }
}

TEST_CASE("monotone drives keep winding zero") {
  SystemParams p{1.0};
  std::mt19937_64 rng(777);
  for (int i = 0; i < 25; ++i) {
    auto draw = random_monotone_schedule(rng, 1.0, 20.0);
    REQUIRE(draw.schedule.is_monotone(512));
    Trajectory t = integrate(p, draw.schedule, draw.T, fine_config(draw.T));
    CHECK(t.winding == 0);
  }
}

TEST_CASE("accumulators agree with trapezoidal post-processing") {
  SystemParams p{1.0};
  Schedule s(Constant{1.0}, 1.0);
  double T = 3.0;
  IntegratorConfig cfg = fine_config(T, 4096);
  Trajectory t = integrate(p, s, T, cfg);
  double a_trap = 0.0, e_trap = 0.0, jr_trap = 0.0, ji_trap = 0.0;
  for (size_t i = 1; i < t.samples.size(); ++i) {
    const auto& a = t.samples[i - 1];
    const auto& b = t.samples[i];
    double h = b.t - a.t;
    auto sh = [](const PhaseState& s) { return std::hypot(s.x, s.y); };
    a_trap += 0.5 * h * (sh(a) * sh(a) + sh(b) * sh(b));
    e_trap += 0.5 * h * (sh(a) + sh(b));
    jr_trap += 0.5 * h * (sh(a) * std::cos(a.theta) + sh(b) * std::cos(b.theta));
    ji_trap += 0.5 * h * (sh(a) * std::sin(a.theta) + sh(b) * std::sin(b.theta));
  }
  CHECK(a_trap == doctest::Approx(t.final.a_acc).epsilon(1e-6));
  CHECK(e_trap == doctest::Approx(t.final.env_acc).epsilon(1e-6));
  CHECK(jr_trap == doctest::Approx(t.final.j_re).epsilon(1e-6));
  CHECK(ji_trap == doctest::Approx(t.final.j_im).epsilon(1e-6));
}

TEST_CASE("solved feedback protocol reaches its winding number") {
  SystemParams p{1.0};
  double T = 60.0;
  OnOffSolution sol = solve_fixed_n(T, 2, 1.0, 1.0);
  REQUIRE(sol.feasible);
  Schedule fb = feedback_from_onoff_solution(sol);
  Trajectory t = integrate(p, fb, T, fine_config(T, 512));
  CHECK(t.winding == 2);
  // asymptotic agreement with the large-r prediction
  CHECK(squeezing_of(t.final) ==
        doctest::Approx(sol.r_pred).epsilon(0.10));
}

TEST_CASE("programmed and feedback realizations converge at large T") {
  SystemParams p{1.0};
  auto rel_gap = [&](double T) {
    OnOffSolution sol = solve_fixed_n(T, 3, 1.0, 1.0);
    REQUIRE(sol.feasible);
    Trajectory a =
        integrate(p, feedback_from_onoff_solution(sol), T, fine_config(T));
    Trajectory b = integrate(p, schedule_from_onoff_solution(sol, 1.0), T,
                             fine_config(T));
    double ra = squeezing_of(a.final), rb = squeezing_of(b.final);
    return std::abs(ra - rb) / std::max(ra, rb);
  };
  double g30 = rel_gap(30.0);
  double g90 = rel_gap(90.0);
  CHECK(g90 < g30);
  CHECK(g90 < 0.05);
}

TEST_CASE("overflow policy raises a typed error") {
  SystemParams p{1.0};
  Schedule s(Constant{1.0}, 1.0);
  IntegratorConfig cfg;
  cfg.output_stride = 1.0;
  try {
    (void)integrate_from(p, s, 40.0, cfg, 1e149, 0.0, 0.0);
    FAIL("expected overflow error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::overflow_error);
  }
}

TEST_CASE("trajectory CSV carries the full-precision columns") {
  SystemParams p{1.0};
  Schedule s(Constant{1.0}, 1.0);
  Trajectory t = integrate(p, s, 1.0, fine_config(1.0, 8));
  std::string csv = trajectory_csv(t);
  CHECK(csv.rfind("t,x,y,theta,phi,r,j_re,j_im,a_acc\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') ==
        static_cast<long>(t.samples.size()) + 1);
}

TEST_SUITE_END();
