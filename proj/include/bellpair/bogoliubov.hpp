#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "bellpair/mean_field.hpp"

namespace bellpair {

// Linear-response kernels of the spin-flip fluctuation fields.  In lattice
// units, with kernels stored dimensionless (Chat = dx * C so the t = 0
// initial condition is the identity), the fields evolve as
//   i d/dt C_s = H0 C_s + s * g1 phi^2 conj(S_s)
//   i d/dt S_s = H0 S_s + s * g1 phi^2 conj(C_s),     s = +/- 1,
// with H0 = kinetic + V + (g0 + g1) |phi|^2 acting on the first (row) index.
//
// With equal initial data the two sectors are locked, C- = C+ and S- = -S+,
// so by default only the + sector is stored and evolved.
struct BogoliubovKernels {
  Grid1d grid;
  double t = 0;
  bool symmetric = true;  // minus sector implied by the sector map
  Eigen::MatrixXcd c_plus, s_plus;
  Eigen::MatrixXcd c_minus, s_minus;  // only when !symmetric
};

BogoliubovKernels initial_kernels(const Grid1d& grid, bool symmetric = true);

// max |(C C^dag - S S^dag - 1)_ij| over the + sector (and the - sector when
// present).  Exact commutator-preservation diagnostic.
double symplectic_residual(const BogoliubovKernels& k);

struct KernelEvolveOptions {
  double dt = 5e-3;
  double symplectic_tol = 1e-6;
  // called after reaching each requested snapshot time
  std::function<void(const BogoliubovKernels&)> on_snapshot;
  bool check_symplectic_at_snapshots = false;  // full O(n^3) check; costly
};

// Advances the kernels in place to each time in `times` (ascending), pulling
// the condensate from the provider at every substep midpoint.
void evolve_kernels(BogoliubovKernels& kernels, const MeanFieldProblem& prob,
                    CondensateProvider& pump, const std::vector<double>& times,
                    const KernelEvolveOptions& opt);

// Spec-shaped convenience wrapper: consumes a stored mean-field series
// (linear interpolation between snapshots) and returns kernel snapshots at
// the series times.
std::vector<BogoliubovKernels> evolve_kernels(const std::vector<CondensateField>& phi_series,
                                              const MeanFieldProblem& prob, double dt);

}  // namespace bellpair
