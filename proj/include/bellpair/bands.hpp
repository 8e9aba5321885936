#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <variant>
#include <vector>

#include "bellpair/config.hpp"

namespace bellpair {

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Natural grid of the problem: quasimomentum in 1/a_L.  The first Brillouin
// zone is [-pi, pi); zone b (counting from 0) covers pi*b <= |k| <= pi*(b+1),
// which is where band b sits in the extended-zone scheme.
inline double reduce_to_first_zone(double k) {
  double r = k - 2.0 * M_PI * std::round(k / (2.0 * M_PI));
  if (r >= M_PI) r -= 2.0 * M_PI;  // canonical interval [-pi, pi)
  return r;
}
int zone_index(double k);

// Single-particle dispersion of the 1D lattice U0 sin^2(pi x / a_L) from a
// truncated plane-wave expansion.  Energies in E_rec, momenta in 1/a_L.
struct BandStructure {
  double u0 = 0;
  int n_max = 0;
  std::vector<double> k;                 // ascending, spans [-3pi, 3pi]
  Eigen::MatrixXd energy;                // (n_k, n_bands)
  std::vector<Eigen::MatrixXcd> coeff;   // per band: (2 n_max + 1, n_k), C_n(k)

  int n_bands() const { return static_cast<int>(energy.cols()); }
  int n_k() const { return static_cast<int>(k.size()); }
};

// (2 n_max + 1)-dimensional plane-wave Hamiltonian at quasimomentum k:
// kinetic ((k + 2 pi n)/pi)^2 diagonal, U0/2 diagonal and U0/4 on |dn| = 1.
Eigen::MatrixXd plane_wave_hamiltonian(double k, double u0, int n_max);

BandStructure solve_bands(const PhysicalParams& params, int n_max, int n_bands,
                          int n_k = 1537);
inline BandStructure solve_bands(const PhysicalParams& params) {
  return solve_bands(params, params.n_max, params.n_bands);
}

// Branch policy for dispersion queries:
//   ExtendedZone     -- band index follows the zone of k (free-particle-like
//                       monotone branch, the solid line of a dispersion plot).
//   PeriodicBand{b}  -- band b, periodically continued; this is the branch a
//                       condensate prepared on band b stays on, and the one
//                       the pair-resonance condition is evaluated on.
struct ExtendedZone {};
struct PeriodicBand {
  int band = 0;
};
using BranchPolicy = std::variant<ExtendedZone, PeriodicBand>;

double dispersion_at(const BandStructure& bands, double k, BranchPolicy policy);

}  // namespace bellpair
