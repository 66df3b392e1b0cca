#ifndef CRITMET_FOCK_HPP
#define CRITMET_FOCK_HPP

#include <complex>
#include <vector>

#include "critmet/schedule.hpp"
#include "critmet/system.hpp"

namespace critmet {

/// Truncated number-basis statevector; squeezed vacua populate even levels
/// only, so odd amplitudes double as a parity-conservation diagnostic.
struct FockVector {
  std::vector<std::complex<double>> amp;

  int dim() const { return static_cast<int>(amp.size()); }
  double norm() const;
  /// Probability mass in the top 10% of levels (truncation health).
  double tail_mass() const;
  double odd_mass() const;

  static FockVector vacuum(int dim);
};

/// Number-basis matrix of omega a^dag a - (eps/4)(a^dag + a)^2: real
/// symmetric, diagonal plus a coupling between n and n+2.
struct FockHamiltonian {
  std::vector<double> diag;   // <n|H|n> = omega n - (eps/4)(2n+1)
  std::vector<double> off2;   // <n+2|H|n> = -(eps/4) sqrt((n+1)(n+2))

  int dim() const { return static_cast<int>(diag.size()); }
};

FockHamiltonian hamiltonian_matrix(double eps, const SystemParams& params,
                                   int dim);

void apply_hamiltonian(const FockHamiltonian& h,
                       const std::vector<std::complex<double>>& in,
                       std::vector<std::complex<double>>& out);

/// RK4 Schroedinger evolution under a time-programmed schedule, stepping
/// within programmed segments at dt_base = min(dt, segment/16). Checks norm
/// preservation (1e-8) and truncation health (tail < 1e-6).
FockVector evolve(const FockVector& psi0, const Schedule& schedule, double T,
                  const SystemParams& params, double dt);

struct GaussianMoments {
  double n_exp = 0.0;               // <a^dag a>
  std::complex<double> a2{0.0, 0.0};  // <a^2>
  double r = 0.0;
  double phi = 0.0;  // principal value in (-pi, pi]
  double x = 0.0;    // sinh 2r cos phi
  double y = 0.0;    // sinh 2r sin phi
};

GaussianMoments moments_of(const FockVector& psi);

/// QFI by central finite difference of the evolved state in omega, with a
/// Richardson half-step consistency check; returns the extrapolated value.
/// Escalates the truncation (doubling, max 2048) on tail-health failures.
double qfi_fd(const Schedule& schedule, double T, const SystemParams& params,
              double delta_omega, int dim, double dt);

/// Second oracle route for a constant quench: eigendecompose the even
/// sector, accumulate the generator integral in closed form, return
/// 4 Var_vacuum(G).
double qfi_generator_quench(double eps, double T, const SystemParams& params,
                            int dim);

/// Sorted eigenvalues of the even parity sector (diagnostics / gap checks).
std::vector<double> even_sector_eigenvalues(double eps,
                                            const SystemParams& params,
                                            int dim);

struct OracleComparison {
  double r_gauss = 0, r_fock = 0;
  double phi_gauss = 0, phi_fock = 0;
  double qfi_gauss = 0, qfi_fock = 0;
  double rel_r = 0;     // |r_g - r_f| / max(|r_f|, 0.05)
  double phi_diff = 0;  // wrapped |phi_g - phi_f|
  double rel_qfi = 0;
};

/// Run the Gaussian integrator and the Fock oracle on the same programmed
/// schedule and compare (r, phi) and the QFI.
OracleComparison oracle_check(const Schedule& schedule, double T,
                              const SystemParams& params, int dim, double dt,
                              double delta_omega);

}  // namespace critmet

#endif
