#pragma once

#include "bellpair/gaussian_state.hpp"

namespace bellpair {

// Exact truncated-Fock reference for the four phase-matched modes
// (up_A, dn_A, up_B, dn_B): a product of two two-mode squeezed vacua on the
// cross-spin pairs (up_A, dn_B) and (dn_A, up_B), the state the scattering
// process prepares in the two-mode limit.
class FockOracle {
 public:
  FockOracle(double r, int n_cut = 24);

  double r() const { return r_; }
  int n_cut() const { return n_cut_; }
  double mean_occupation() const { return std::sinh(r_) * std::sinh(r_); }

  // Expectation of an ordered product of region bilinears (regions "A"/"B"
  // select the corresponding mode pair) by direct ladder-operator
  // application in the truncated basis.
  cxd moment(std::span<const Bilinear> prod) const;
  cxd moment(std::initializer_list<Bilinear> prod) const {
    return moment(std::span<const Bilinear>(prod.begin(), prod.size()));
  }

  // Normalized cross-region cross-spin g2 (regions are single modes here).
  double g2() const;

  // Gaussian state with identical two-point functions, for cross-validation
  // of the Wick machinery; mode momenta are (k_a, k_b).
  GaussianState matching_state(double k_a = -1.0, double k_b = 1.0) const;
  static Region region_a() { return {"A", -1.0, -1.0}; }
  static Region region_b() { return {"B", 1.0, 1.0}; }

 private:
  double r_;
  int n_cut_;   // highest retained occupation of the prepared state
  int dim_;     // per-mode dimension incl. headroom for operator raises
  Eigen::VectorXcd psi_;
  double norm2_;

  size_t idx(int n0, int n1, int n2, int n3) const {
    return ((static_cast<size_t>(n0) * dim_ + n1) * dim_ + n2) * dim_ + n3;
  }
  void apply_bilinear(const Bilinear& b, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
};

// Closed-form kernels for a uniform condensate phi = sqrt(n) exp(i k0 x) with
// no external potential: every momentum pair (k, 2 k0 - k) is an independent
// two-mode problem, hyperbolic when |g1 n| exceeds the pair detuning
// (dynamical instability) and oscillatory otherwise.  k0 must sit on the
// grid.  Returns position-space kernels directly comparable with
// evolve_kernels output.
BogoliubovKernels uniform_bogoliubov(double density, double g0, double g1, double k0,
                                     const Grid1d& grid, double t);

}  // namespace bellpair
