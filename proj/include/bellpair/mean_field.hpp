#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "bellpair/config.hpp"
#include "bellpair/fft.hpp"

namespace bellpair {

// Uniform periodic grid, lattice units.  x is centered on the box so the trap
// minimum sits mid-grid; the box length must be an integer number of lattice
// periods for the lattice potential to be periodic across the seam.
struct Grid1d {
  int n = 0;
  double box = 0;  // a_L

  double dx() const { return box / n; }
  double x(int j) const { return (j - n / 2) * dx(); }
  double kinetic(int m) const {  // (k/pi)^2 for FFT mode m
    const double k = fft_momentum(m, n, box);
    return (k / M_PI) * (k / M_PI);
  }
  double max_kinetic() const {
    const double k = M_PI * n / box;
    return (k / M_PI) * (k / M_PI);
  }
};

struct CondensateField {
  Grid1d grid;
  double t = 0;  // hbar/E_rec
  Eigen::VectorXcd phi;  // sum |phi|^2 dx = N

  double norm() const { return phi.squaredNorm() * grid.dx(); }
};

// Static ingredients of the 1D mean-field problem.
struct MeanFieldProblem {
  Grid1d grid;
  double g0 = 0;          // 1D coupling, E_rec a_L
  double g1 = 0;          // spin-dependent coupling (used by the kernels)
  double u0 = 0;          // lattice depth, E_rec
  double lattice_ramp = 0;  // linear switch-on time; 0 = quench
  Eigen::VectorXd trap;   // windowed trap potential on the grid
  Eigen::VectorXd lattice;  // sin^2(pi x) shape, unit depth

  double lattice_factor(double t) const {
    if (lattice_ramp <= 0) return 1.0;
    return t >= lattice_ramp ? 1.0 : std::max(0.0, t / lattice_ramp);
  }
};

// Builds the problem from params: slab geometry gets no trap and the
// Thomas-Fermi peak density in the box; trap geometry gets the windowed
// harmonic trap and all n_atoms.
MeanFieldProblem make_problem(const PhysicalParams& p, const Grid1d& grid);

// Atoms the given geometry puts in the box.
double box_atoms(const PhysicalParams& p, const Grid1d& grid);

struct GroundStateOptions {
  double dtau = 0.02;       // initial step; reduced 4x per converged stage
  double dtau_min = 4e-4;   // final stage (fixed-point bias is O(dtau^2))
  double tol = 1e-12;       // energy change per step, E_rec * N
  long max_iter = 400000;
  unsigned noise_seed = 0;  // 0: deterministic smooth seed
};

CondensateField ground_state(const MeanFieldProblem& prob, double n_atoms,
                             const GroundStateOptions& opt = {});

double gpe_energy(const MeanFieldProblem& prob, const CondensateField& f,
                  bool with_lattice = true);
double chemical_potential(const MeanFieldProblem& prob, const CondensateField& f);

struct EvolveOptions {
  double dt = 0;          // 0: auto = 0.1 / E_max
  double norm_tol = 1e-6; // abort threshold on norm drift
};

// Imprints exp(i k0 x) (k0 snapped to the grid) at t = 0, switches the
// lattice on, and split-steps to t_final.  Returns snapshots at the
// requested times (plus the final time).
std::vector<CondensateField> boost_and_evolve(const CondensateField& field,
                                              const MeanFieldProblem& prob, double k0,
                                              double t_final,
                                              const std::vector<double>& snapshot_times,
                                              const EvolveOptions& opt = {});

double snap_momentum(const Grid1d& grid, double k0);

// Supplies phi(t) to the kernel integrator at monotonically non-decreasing
// times.
class CondensateProvider {
 public:
  virtual ~CondensateProvider() = default;
  virtual const Eigen::VectorXcd& at(double t) = 0;
  virtual const Grid1d& grid() const = 0;
};

// Live GPE integration, stepped on demand.
class MeanFieldProvider : public CondensateProvider {
 public:
  MeanFieldProvider(const MeanFieldProblem& prob, CondensateField start, double dt_max = 0);
  const Eigen::VectorXcd& at(double t) override;
  const Grid1d& grid() const override { return prob_.grid; }
  const CondensateField& state() const { return field_; }

 private:
  MeanFieldProblem prob_;
  CondensateField field_;
  double dt_max_;
  std::shared_ptr<Fft> fft_;
};

// Undepleted condensate: phi(t) = phi(0) exp(-i mu t).
class FrozenPumpProvider : public CondensateProvider {
 public:
  FrozenPumpProvider(const MeanFieldProblem& prob, CondensateField start);
  const Eigen::VectorXcd& at(double t) override;
  const Grid1d& grid() const override { return grid_; }

 private:
  Grid1d grid_;
  double mu_;
  Eigen::VectorXcd phi0_, buf_;
};

// Linear-in-time interpolation between stored snapshots.
class SeriesProvider : public CondensateProvider {
 public:
  explicit SeriesProvider(std::vector<CondensateField> series);
  const Eigen::VectorXcd& at(double t) override;
  const Grid1d& grid() const override { return series_.front().grid; }

 private:
  std::vector<CondensateField> series_;
  Eigen::VectorXcd buf_;
};

}  // namespace bellpair
