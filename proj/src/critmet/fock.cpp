#include "critmet/fock.hpp"

#include <algorithm>
#include <cmath>

#include "critmet/dynamics.hpp"
#include "critmet/qfi.hpp"

namespace critmet {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

using CVec = std::vector<std::complex<double>>;

double wrap_to_pi(double a) {
  a = std::fmod(a, kTwoPi);
  if (a > kPi) a -= kTwoPi;
  if (a <= -kPi) a += kTwoPi;
  return a;
}
}  // namespace

double FockVector::norm() const {
  double s = 0.0;
  for (auto& c : amp) s += std::norm(c);
  return std::sqrt(s);
}

double FockVector::tail_mass() const {
  int d = dim();
  int start = d - std::max(1, d / 10);
  double s = 0.0;
  for (int i = start; i < d; ++i) s += std::norm(amp[i]);
  return s;
}

double FockVector::odd_mass() const {
  double s = 0.0;
  for (int i = 1; i < dim(); i += 2) s += std::norm(amp[i]);
  return s;
}

FockVector FockVector::vacuum(int dim) {
  if (dim < 4) fail(ErrorCode::invalid_argument, "FockVector: dim < 4");
  FockVector v;
  v.amp.assign(dim, {0.0, 0.0});
  v.amp[0] = 1.0;
  return v;
}

FockHamiltonian hamiltonian_matrix(double eps, const SystemParams& params,
                                   int dim) {
  params.validate();
  if (dim < 4) fail(ErrorCode::invalid_argument, "hamiltonian_matrix: dim < 4");
  if (!(eps >= 0.0))
    fail(ErrorCode::invalid_argument, "hamiltonian_matrix: eps < 0");
  FockHamiltonian h;
  h.diag.resize(dim);
  h.off2.assign(dim, 0.0);
  for (int n = 0; n < dim; ++n) {
    h.diag[n] = params.omega * n - 0.25 * eps * (2.0 * n + 1.0);
    if (n + 2 < dim)
      h.off2[n] = -0.25 * eps * std::sqrt((n + 1.0) * (n + 2.0));
  }
  return h;
}

void apply_hamiltonian(const FockHamiltonian& h, const CVec& in, CVec& out) {
  int d = h.dim();
  out.resize(d);
  for (int n = 0; n < d; ++n) {
    std::complex<double> v = h.diag[n] * in[n];
    if (n + 2 < d) v += h.off2[n] * in[n + 2];
    if (n - 2 >= 0) v += h.off2[n - 2] * in[n - 2];
    out[n] = v;
  }
}

namespace {

// RK4 on i dpsi/dt = H(t) psi for one programmed segment [t0, t0+len] at
// fixed step h; eps is re-evaluated at stage times (ramps stay 4th order).
void rk4_segment(CVec& psi, const Schedule& sched, const SystemParams& params,
                 double t0, double len, double dt_base) {
  int dim = static_cast<int>(psi.size());
  long steps = std::max(1L, static_cast<long>(std::ceil(len / dt_base)));
  double h = len / steps;
  CVec k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  const std::complex<double> mi(0.0, -1.0);
  auto deriv = [&](const CVec& v, double t, CVec& out) {
    double eps = sched.eval(std::min(t, t0 + len), 0.0);
    FockHamiltonian hm = hamiltonian_matrix(eps, params, dim);
    apply_hamiltonian(hm, v, out);
    for (auto& c : out) c *= mi;
  };
  // Rebuilding H per stage is wasteful for constant segments; cache when the
  // control cannot change inside the segment.
  bool constant_seg = !std::holds_alternative<LinearRamp>(sched.variant());
  FockHamiltonian hm_cache;
  if (constant_seg)
    hm_cache = hamiltonian_matrix(sched.eval(t0 + 0.5 * len, 0.0), params, dim);
  auto deriv_cached = [&](const CVec& v, CVec& out) {
    apply_hamiltonian(hm_cache, v, out);
    for (auto& c : out) c *= mi;
  };

  double t = t0;
  for (long s = 0; s < steps; ++s) {
    if (constant_seg) {
      deriv_cached(psi, k1);
      for (int i = 0; i < dim; ++i) tmp[i] = psi[i] + 0.5 * h * k1[i];
      deriv_cached(tmp, k2);
      for (int i = 0; i < dim; ++i) tmp[i] = psi[i] + 0.5 * h * k2[i];
      deriv_cached(tmp, k3);
      for (int i = 0; i < dim; ++i) tmp[i] = psi[i] + h * k3[i];
      deriv_cached(tmp, k4);
    } else {
      deriv(psi, t, k1);
      for (int i = 0; i < dim; ++i) tmp[i] = psi[i] + 0.5 * h * k1[i];
      deriv(tmp, t + 0.5 * h, k2);
      for (int i = 0; i < dim; ++i) tmp[i] = psi[i] + 0.5 * h * k2[i];
      deriv(tmp, t + 0.5 * h, k3);
      for (int i = 0; i < dim; ++i) tmp[i] = psi[i] + h * k3[i];
      deriv(tmp, t + h, k4);
    }
    for (int i = 0; i < dim; ++i)
      psi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    t += h;
  }
}

}  // namespace

FockVector evolve(const FockVector& psi0, const Schedule& schedule, double T,
                  const SystemParams& params, double dt) {
  params.validate();
  if (schedule.is_feedback())
    fail(ErrorCode::invalid_argument,
         "fock evolve: feedback schedules are not supported; realize the "
         "protocol as programmed segments first");
  if (!(T > 0.0)) fail(ErrorCode::invalid_argument, "fock evolve: T <= 0");
  if (schedule.horizon() < T * (1.0 - 1e-12))
    fail(ErrorCode::domain_error, "fock evolve: schedule horizon shorter than T");
  if (!(dt > 0.0)) dt = 1e-3 / params.omega;

  FockVector psi = psi0;
  std::vector<double> cuts = schedule.breakpoints();
  cuts.push_back(T);
  std::sort(cuts.begin(), cuts.end());
  double t = 0.0;
  for (double edge : cuts) {
    if (edge > T) edge = T;
    double len = edge - t;
    if (len <= 0.0) continue;
    double dt_seg = std::min(dt, len / 16.0);
    rk4_segment(psi.amp, schedule, params, t, len, dt_seg);
    t = edge;
    if (t >= T) break;
  }

  double n = psi.norm();
  if (std::abs(n - 1.0) > 1e-8)
    fail(ErrorCode::step_size_error,
         "fock evolve: norm drift beyond 1e-8 (reduce dt)");
  if (psi.tail_mass() > 1e-6)
    fail(ErrorCode::truncation_error,
         "fock evolve: truncation tail mass beyond 1e-6");
  return psi;
}

GaussianMoments moments_of(const FockVector& psi) {
  GaussianMoments m;
  int d = psi.dim();
  for (int n = 0; n < d; ++n) m.n_exp += n * std::norm(psi.amp[n]);
  std::complex<double> a2{0.0, 0.0};
  for (int n = 0; n + 2 < d; ++n)
    a2 += std::conj(psi.amp[n]) * psi.amp[n + 2] *
          std::sqrt((n + 1.0) * (n + 2.0));
  m.a2 = a2;
  m.x = -2.0 * a2.real();
  m.y = 2.0 * a2.imag();
  double sh = std::hypot(m.x, m.y);
  m.r = 0.5 * std::asinh(sh);
  m.phi = std::atan2(m.y, m.x);
  return m;
}

namespace {

double qfi_fd_once(const Schedule& schedule, double T,
                   const SystemParams& params, double delta, int dim,
                   double dt) {
  FockVector v0 = FockVector::vacuum(dim);
  FockVector plus = evolve(v0, schedule, T, {params.omega + delta}, dt);
  FockVector minus = evolve(v0, schedule, T, {params.omega - delta}, dt);
  FockVector mid = evolve(v0, schedule, T, params, dt);
  std::complex<double> overlap{0.0, 0.0};
  double dnorm2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    std::complex<double> dpsi = (plus.amp[i] - minus.amp[i]) / (2.0 * delta);
    dnorm2 += std::norm(dpsi);
    overlap += std::conj(mid.amp[i]) * dpsi;
  }
  return 4.0 * (dnorm2 - std::norm(overlap));
}

}  // namespace

double qfi_fd(const Schedule& schedule, double T, const SystemParams& params,
              double delta_omega, int dim, double dt) {
  params.validate();
  if (delta_omega <= 0.0) delta_omega = 1e-5 * params.omega;
  if (dim <= 0) dim = 257;

  for (; dim <= 2048; dim *= 2) {
    try {
      double f1 = qfi_fd_once(schedule, T, params, delta_omega, dim, dt);
      double f2 = qfi_fd_once(schedule, T, params, 0.5 * delta_omega, dim, dt);
      double scale = std::max({std::abs(f1), std::abs(f2), 1e-12});
      if (std::abs(f2 - f1) > 1e-3 * scale)
        fail(ErrorCode::step_size_error,
             "qfi_fd: Richardson check failed (derivative not converged)");
      return (4.0 * f2 - f1) / 3.0;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::truncation_error || dim * 2 > 2048) throw;
    }
  }
  fail(ErrorCode::truncation_error, "qfi_fd: truncation escalation exhausted");
}

namespace {

// Cyclic Jacobi eigensolver for a dense symmetric matrix (row-major).
void jacobi_eigen(std::vector<double>& a, int m, std::vector<double>& evals,
                  std::vector<double>& vecs) {
  vecs.assign(static_cast<size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) vecs[static_cast<size_t>(i) * m + i] = 1.0;
  auto A = [&](int i, int j) -> double& { return a[static_cast<size_t>(i) * m + j]; };
  auto V = [&](int i, int j) -> double& { return vecs[static_cast<size_t>(i) * m + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) off += A(i, j) * A(i, j);
    if (off < 1e-26 * m * m) break;
    for (int p = 0; p < m - 1; ++p) {
      for (int q = p + 1; q < m; ++q) {
        double apq = A(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = 0.5 * (A(q, q) - A(p, p)) / apq;
        double t = ((theta >= 0) ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        double tau = s / (1.0 + c);
        double app = A(p, p), aqq = A(q, q);
        A(p, p) = app - t * apq;
        A(q, q) = aqq + t * apq;
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        for (int i = 0; i < m; ++i) {
          if (i != p && i != q) {
            double aip = A(i, p), aiq = A(i, q);
            A(i, p) = aip - s * (aiq + tau * aip);
            A(p, i) = A(i, p);
            A(i, q) = aiq + s * (aip - tau * aiq);
            A(q, i) = A(i, q);
          }
          double vip = V(i, p), viq = V(i, q);
          V(i, p) = vip - s * (viq + tau * vip);
          V(i, q) = viq + s * (vip - tau * viq);
        }
      }
    }
  }
  evals.resize(m);
  for (int i = 0; i < m; ++i) evals[i] = A(i, i);
}

}  // namespace

std::vector<double> even_sector_eigenvalues(double eps,
                                            const SystemParams& params,
                                            int dim) {
  FockHamiltonian h = hamiltonian_matrix(eps, params, dim);
  int m = (dim + 1) / 2;
  std::vector<double> a(static_cast<size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    a[static_cast<size_t>(i) * m + i] = h.diag[2 * i];
    if (i + 1 < m) {
      a[static_cast<size_t>(i) * m + i + 1] = h.off2[2 * i];
      a[static_cast<size_t>(i + 1) * m + i] = h.off2[2 * i];
    }
  }
  std::vector<double> evals, vecs;
  jacobi_eigen(a, m, evals, vecs);
  std::sort(evals.begin(), evals.end());
  return evals;
}

double qfi_generator_quench(double eps, double T, const SystemParams& params,
                            int dim) {
  params.validate();
  if (!(T > 0.0))
    fail(ErrorCode::invalid_argument, "qfi_generator_quench: T <= 0");
  FockHamiltonian h = hamiltonian_matrix(eps, params, dim);
  int m = (dim + 1) / 2;
  std::vector<double> a(static_cast<size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    a[static_cast<size_t>(i) * m + i] = h.diag[2 * i];
    if (i + 1 < m) {
      a[static_cast<size_t>(i) * m + i + 1] = h.off2[2 * i];
      a[static_cast<size_t>(i + 1) * m + i] = h.off2[2 * i];
    }
  }
  std::vector<double> lam, v;
  jacobi_eigen(a, m, lam, v);
  auto V = [&](int i, int j) { return v[static_cast<size_t>(i) * m + j]; };

  // number operator in the eigenbasis: M_ab = sum_i V_ia (2i) V_ib
  std::vector<double> M(static_cast<size_t>(m) * m, 0.0);
  for (int aa = 0; aa < m; ++aa)
    for (int bb = 0; bb < m; ++bb) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += V(i, aa) * (2.0 * i) * V(i, bb);
      M[static_cast<size_t>(aa) * m + bb] = s;
    }

  auto tau = [&](double d) -> std::complex<double> {
    if (std::abs(d) < 1e-14) return {T, 0.0};
    std::complex<double> num = std::exp(std::complex<double>(0.0, d * T)) - 1.0;
    return num / std::complex<double>(0.0, d);
  };

  // vacuum in the eigenbasis
  std::vector<double> v0(m);
  for (int aa = 0; aa < m; ++aa) v0[aa] = V(0, aa);

  std::complex<double> mean{0.0, 0.0};
  std::vector<std::complex<double>> g(m, {0.0, 0.0});
  for (int aa = 0; aa < m; ++aa) {
    for (int bb = 0; bb < m; ++bb) {
      std::complex<double> gel =
          M[static_cast<size_t>(aa) * m + bb] * tau(lam[aa] - lam[bb]);
      g[aa] += gel * v0[bb];
    }
    mean += v0[aa] * g[aa];
  }
  double g2 = 0.0;
  for (int aa = 0; aa < m; ++aa) g2 += std::norm(g[aa]);
  return 4.0 * (g2 - std::norm(mean));
}

OracleComparison oracle_check(const Schedule& schedule, double T,
                              const SystemParams& params, int dim, double dt,
                              double delta_omega) {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;
  cfg.output_stride = T;  // endpoints only
  Trajectory traj = integrate(params, schedule, T, cfg);
  QfiResult q = qfi_from_trajectory(traj);

  if (dim <= 0) dim = 257;
  FockVector out;
  for (;; dim *= 2) {
    try {
      out = evolve(FockVector::vacuum(dim), schedule, T, params, dt);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::truncation_error || dim * 2 > 2048) throw;
    }
  }
  GaussianMoments mo = moments_of(out);

  OracleComparison c;
  c.r_gauss = squeezing_of(traj.final);
  c.r_fock = mo.r;
  c.phi_gauss = traj.final.phi_unwrapped;
  c.phi_fock = mo.phi;
  c.qfi_gauss = q.value;
  c.qfi_fock = qfi_fd(schedule, T, params, delta_omega, dim, dt);
  c.rel_r = std::abs(c.r_gauss - c.r_fock) / std::max(std::abs(c.r_fock), 0.05);
  c.phi_diff = std::abs(wrap_to_pi(c.phi_gauss - c.phi_fock));
  c.rel_qfi = std::abs(c.qfi_gauss - c.qfi_fock) /
              std::max(std::abs(c.qfi_fock), 1e-9);
  return c;
}

}  // namespace critmet
