#include <doctest.h>

#include <cmath>
#include <random>

#include "critmet/open_system.hpp"
#include "critmet/qfi.hpp"
#include "critmet/random_schedules.hpp"

using namespace critmet;

namespace {

IntegratorConfig cfg_of(double T, int samples = 512) {
  IntegratorConfig c;
  c.rel_tol = 1e-11;
  c.abs_tol = 1e-13;
  c.output_stride = T / samples;
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("open_system");

TEST_CASE("cov_rates: vacuum and thermal fixed points") {
  SystemParams p{1.0};
  CovarianceState vac;
  CovRates r0 = cov_rates(vac, 0.0, p, OpenParams{0.0, 0.0});
  CHECK(r0.vxx == doctest::Approx(0.0));
  CHECK(r0.vpp == doctest::Approx(0.0));
  CHECK(r0.vxp == doctest::Approx(0.0));

  OpenParams op{0.7, 2.0};
  double mu_star = (2.0 * op.nbar + 1.0) / 2.0;
  CovarianceState th = CovarianceState::from_moments(0, mu_star, mu_star, 0.0,
                                                     0.0, 0.0);
  CovRates rt = cov_rates(th, 0.0, p, op);
  CHECK(rt.vxx == doctest::Approx(0.0));
  CHECK(rt.vpp == doctest::Approx(0.0));
  CHECK(rt.vxp == doctest::Approx(0.0));

  // driven vacuum is not stationary
  CovRates rd = cov_rates(vac, 0.4, p, OpenParams{0.0, 0.0});
  CHECK(rd.vxp == doctest::Approx(0.2));
}

TEST_CASE("gamma = 0 reduces to the closed system (critical quench)") {
  SystemParams p{1.0};
  Schedule s(Constant{1.0}, 1.0);
  double T = 3.0;
  auto run = integrate_open(p, OpenParams{0.0, 0.0}, s, T, cfg_of(T));
  const CovarianceState& f = run.back();
  CHECK(f.mu == doctest::Approx(0.5).epsilon(1e-9));
  double cosh2r_ref = 1.0 + 0.5 * T * T;
  CHECK(std::cosh(2.0 * f.r) == doctest::Approx(cosh2r_ref).epsilon(1e-8));
  CHECK(f.phi == doctest::Approx(std::atan2(T, -0.5 * T * T)).epsilon(1e-7));
  // a_acc equals the closed-system integral of sinh^2 2r
  double a_ref = T * T * T / 3.0 + std::pow(T, 5) / 20.0;
  CHECK(f.a_acc == doctest::Approx(a_ref).epsilon(1e-8));
}

TEST_CASE("pure relaxation: mu -> (2 nbar + 1)/2 exponentially at rate gamma") {
  SystemParams p{1.0};
  OpenParams op{0.5, 2.0};
  Schedule s(Constant{0.0}, 1.0);
  double T = 6.0;
  auto run = integrate_open(p, op, s, T, cfg_of(T));
  double mu_inf = 2.5;
  for (size_t i = 0; i < run.size(); i += 60) {
    double t = run[i].t;
    double want = mu_inf + (0.5 - mu_inf) * std::exp(-op.gamma * t);
    CHECK(run[i].mu == doctest::Approx(want).epsilon(1e-8));
    CHECK(run[i].r == doctest::Approx(0.0).epsilon(1e-9));
  }
  CHECK(run.back().mu == doctest::Approx(mu_inf).epsilon(0.05));
}

TEST_CASE("det V obeys d(det)/dt = -2 gamma det + gamma mu_inf tr V") {
  // The determinant relaxes to ((2 nbar + 1)/2)^2 through a -2 gamma channel
  // driven by the trace; checked as the exact differential identity on a
  // driven dissipative run.
  SystemParams p{1.0};
  OpenParams op{0.3, 1.0};
  Schedule s(Constant{0.6}, 1.0);
  double T = 4.0;
  auto run = integrate_open(p, op, s, T, cfg_of(T, 2048));
  double mu_inf = (2.0 * op.nbar + 1.0) / 2.0;
  for (size_t i = 200; i + 1 < run.size(); i += 97) {
    const auto& a = run[i - 1];
    const auto& b = run[i + 1];
    const auto& m = run[i];
    double det_m = m.vxx * m.vpp - m.vxp * m.vxp;
    double det_a = a.vxx * a.vpp - a.vxp * a.vxp;
    double det_b = b.vxx * b.vpp - b.vxp * b.vxp;
    double ddet = (det_b - det_a) / (b.t - a.t);
    double want = -2.0 * op.gamma * det_m + op.gamma * mu_inf * (m.vxx + m.vpp);
    CHECK(ddet == doctest::Approx(want).epsilon(1e-4));
  }
  // and convergence of det toward mu_inf^2 under zero drive
  Schedule free(Constant{0.0}, 1.0);
  auto relax = integrate_open(p, op, free, 40.0, cfg_of(40.0));
  double det_end =
      relax.back().vxx * relax.back().vpp - relax.back().vxp * relax.back().vxp;
  CHECK(det_end == doctest::Approx(mu_inf * mu_inf).epsilon(1e-4));
}

TEST_CASE("mu never drops below 1/2") {
  SystemParams p{1.0};
  std::mt19937_64 rng(31);
  for (int i = 0; i < 8; ++i) {
    auto draw = random_admissible_schedule(rng, 1.0, 1.0, 10.0);
    auto run = integrate_open(p, OpenParams{0.2, 0.5}, draw.schedule, draw.T,
                              cfg_of(draw.T));
    for (auto& st : run) CHECK(st.mu >= 0.5 * (1.0 - 1e-9));
  }
}

TEST_CASE("instantaneous_qfi limits") {
  CovarianceState pure;
  pure.mu = 0.5;
  pure.r = 0.9;
  double sh = std::sinh(1.8);
  CHECK(instantaneous_qfi(pure) == doctest::Approx(2.0 * sh * sh).epsilon(1e-12));
  CovarianceState zero;
  CHECK(instantaneous_qfi(zero) == doctest::Approx(0.0));
  CovarianceState hot;
  hot.mu = 1e9;
  hot.r = 0.9;
  CHECK(instantaneous_qfi(hot) == doctest::Approx(4.0 * sh * sh).epsilon(1e-6));
}

TEST_CASE("qfi_open_bound dominates the closed-system QFI at gamma = 0") {
  SystemParams p{1.0};
  Schedule s(Constant{1.0}, 1.0);
  double T = 3.0;
  auto run = integrate_open(p, OpenParams{0.0, 0.0}, s, T, cfg_of(T));
  double bound = qfi_open_bound(run, T);
  // closed form: 4 T (T^3/3 + T^5/20) vs exact QFI 81
  CHECK(bound ==
        doctest::Approx(4.0 * T * (T * T * T / 3 + std::pow(T, 5) / 20))
            .epsilon(1e-8));
  Trajectory traj = integrate(p, s, T, cfg_of(T));
  CHECK(bound >= qfi_from_trajectory(traj).value);

  CovarianceState z;
  std::vector<CovarianceState> still(2, z);
  still[1].t = T;
  CHECK(qfi_open_bound(still, T) == doctest::Approx(0.0));

  // and on a handful of random admissible schedules
  std::mt19937_64 rng(606);
  for (int i = 0; i < 5; ++i) {
    auto draw = random_admissible_schedule(rng, 1.0, 1.0, 8.0);
    auto orun = integrate_open(p, OpenParams{0.0, 0.0}, draw.schedule, draw.T,
                               cfg_of(draw.T));
    Trajectory tr = integrate(p, draw.schedule, draw.T, cfg_of(draw.T));
    CHECK(qfi_open_bound(orun, draw.T) >=
          qfi_from_trajectory(tr).value * (1.0 - 1e-9));
  }
}

TEST_CASE("mu-r-phi formulation agrees away from r = 0") {
  SystemParams p{1.0};
  OpenParams op{0.15, 0.5};
  Schedule s(Constant{0.8}, 1.0);
  double T = 2.5;
  auto run = integrate_open(p, op, s, T, cfg_of(T, 4096));
  // start the cross-check from the first sample with r > 0.05
  size_t i0 = 0;
  while (i0 < run.size() && run[i0].r <= 0.05) ++i0;
  REQUIRE(i0 + 10 < run.size());
  double mu = run[i0].mu, r = run[i0].r, phi = run[i0].phi;
  for (size_t i = i0; i + 1 < run.size(); ++i) {
    double h = run[i + 1].t - run[i].t;
    auto rk_stage = [&](double m, double rr, double ph, double* dm, double* dr,
                        double* dp) {
      murphi_rates(m, rr, ph, 0.8, p, op, dm, dr, dp);
    };
    double k1m, k1r, k1p, k2m, k2r, k2p, k3m, k3r, k3p, k4m, k4r, k4p;
    rk_stage(mu, r, phi, &k1m, &k1r, &k1p);
    rk_stage(mu + 0.5 * h * k1m, r + 0.5 * h * k1r, phi + 0.5 * h * k1p, &k2m,
             &k2r, &k2p);
    rk_stage(mu + 0.5 * h * k2m, r + 0.5 * h * k2r, phi + 0.5 * h * k2p, &k3m,
             &k3r, &k3p);
    rk_stage(mu + h * k3m, r + h * k3r, phi + h * k3p, &k4m, &k4r, &k4p);
    mu += h / 6 * (k1m + 2 * k2m + 2 * k3m + k4m);
    r += h / 6 * (k1r + 2 * k2r + 2 * k3r + k4r);
    phi += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
  }
  CHECK(mu == doctest::Approx(run.back().mu).epsilon(1e-6));
  CHECK(r == doctest::Approx(run.back().r).epsilon(1e-6));
}

TEST_CASE("feedback switching works on the covariance phase") {
  SystemParams p{1.0};
  double T = 40.0;
  OnOffSolution sol = solve_fixed_n(T, 2, 1.0, 1.0);
  REQUIRE(sol.feasible);
  Schedule fb = feedback_from_onoff_solution(sol);
  // nearly closed: must reproduce the closed-system feedback run (the
  // thermal drag scales with sinh 2r, so gamma must be far below
  // 1/int sinh(2r) dt for the comparison)
  auto run = integrate_open(p, OpenParams{1e-12, 0.0}, fb, T, cfg_of(T));
  Trajectory closed = integrate(p, fb, T, cfg_of(T));
  const auto& f = run.back();
  CHECK(f.r == doctest::Approx(squeezing_of(closed.final)).epsilon(1e-5));
  CHECK(std::floor(f.phi / (2 * 3.14159265358979324) + 1e-9) == 2);
  // and with real dissipation the switching still completes the windings
  auto damped = integrate_open(p, OpenParams{0.05, 0.5}, fb, T, cfg_of(T));
  CHECK(std::floor(damped.back().phi / (2 * 3.14159265358979324) + 1e-9) == 2);
  CHECK(damped.back().r < f.r);  // dissipation costs squeezing
}

TEST_CASE("open CSV header") {
  std::vector<CovarianceState> run(1);
  std::string csv = open_run_csv(run);
  CHECK(csv.rfind("t,vxx,vpp,vxp,mu,r,phi,qfi_bound_running\n", 0) == 0);
}

TEST_SUITE_END();
