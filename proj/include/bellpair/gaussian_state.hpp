#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bellpair/bogoliubov.hpp"

namespace bellpair {

using cxd = std::complex<double>;

enum class Spin { Up = 0, Down = 1 };

// Momentum window used by the collective spin operators.  Regions must be
// disjoint and keep clear of the condensate and its lattice translates.
struct Region {
  std::string label;  // "A" or "B"
  double k_lo = 0, k_hi = 0;  // 1/a_L, inclusive

  bool contains(double k) const { return k >= k_lo - 1e-12 && k <= k_hi + 1e-12; }
};

// Full description of the scattered-pair state: first-order matrix
// G_s(k,k') = <delta_s^dag(k) delta_s(k')> and pair amplitude
// M_s(k,k') = <delta_s(k) delta_s(k')> for the +/- sectors, stored in
// canonical discrete-mode normalization ([a, a^dag] = 1, so region sums run
// directly over modes).  Spin-basis entries follow from
//   G_{ss'} = (G+ + ss' G-)/2,   M_{ss'} = (M+ + ss' M-)/2.
struct GaussianState {
  double t = 0;
  double box = 0;
  std::vector<double> k;         // support momenta, ascending
  Eigen::MatrixXcd g_plus, m_plus;
  Eigen::MatrixXcd g_minus, m_minus;  // unused when symmetric
  bool symmetric = true;          // G- = G+, M- = -M+

  std::vector<double> k_full;    // whole-grid momenta for the density diagonal
  Eigen::VectorXd diag_plus;     // G+(k,k) over k_full

  int n_modes() const { return static_cast<int>(k.size()); }

  cxd gp(int i, int j) const { return g_plus(i, j); }
  cxd gm(int i, int j) const { return symmetric ? g_plus(i, j) : g_minus(i, j); }
  cxd mp(int i, int j) const { return m_plus(i, j); }
  cxd mm(int i, int j) const { return symmetric ? -m_plus(i, j) : m_minus(i, j); }

  cxd g_spin(Spin a, Spin b, int i, int j) const {
    const double ss = (a == b) ? 1.0 : -1.0;
    return 0.5 * (gp(i, j) + ss * gm(i, j));
  }
  cxd m_spin(Spin a, Spin b, int i, int j) const {
    const double ss = (a == b) ? 1.0 : -1.0;
    return 0.5 * (mp(i, j) + ss * mm(i, j));
  }

  std::vector<int> resolve(const Region& r) const;
  int index_of(double k_query) const;  // throws RangeError off grid

  static GaussianState from_sectors(std::vector<double> k, Eigen::MatrixXcd g_plus,
                                    Eigen::MatrixXcd m_plus, Eigen::MatrixXcd g_minus,
                                    Eigen::MatrixXcd m_minus);
  // symmetric-sector shortcut
  static GaussianState from_sectors(std::vector<double> k, Eigen::MatrixXcd g_plus,
                                    Eigen::MatrixXcd m_plus);
};

// Builds the state from the kernels; with `support` the matrices are
// restricted to the union of the given windows (the density diagonal always
// covers the whole grid).
GaussianState build_state(const BogoliubovKernels& kernels);
GaussianState build_state(const BogoliubovKernels& kernels, const std::vector<Region>& support);

// G^(2)_{s1 s2 s3 s4}(k1..k4) = M*_{12} M_{34} + G_13 G_24 + G_14 G_23.
cxd second_order(const GaussianState& st, std::array<Spin, 4> s, std::array<double, 4> kq);

// Region-restricted spin bilinear: sum over k in region of
// w[s][s'] a^dag_s(k) a_s'(k).
struct Bilinear {
  Region region;
  std::array<std::array<cxd, 2>, 2> w{};
  const char* name = "";
};

namespace ops {
Bilinear jx(const Region& r);
Bilinear jy(const Region& r);
Bilinear jz(const Region& r);
Bilinear number(const Region& r);   // N of the collective-operator set: (n_up + n_dn)/2
Bilinear atoms(const Region& r);    // plain atom count, n_up + n_dn
Bilinear jplus(const Region& r);
Bilinear jminus(const Region& r);
}  // namespace ops

// <B1 B2 ... Bn> (n <= 4) on the zero-mean Gaussian state by exhaustive Wick
// pairing with ordered two-point functions (commutator deltas included).
cxd wick_moment(const GaussianState& st, std::span<const Bilinear> prod);
inline cxd wick_moment(const GaussianState& st, std::initializer_list<Bilinear> prod) {
  return wick_moment(st, std::span<const Bilinear>(prod.begin(), prod.size()));
}

enum class MomentStatus { Ok, EmptyRegion };
struct RatioResult {
  MomentStatus status = MomentStatus::Ok;
  double value = 0;
};

// Back-to-back second-order correlation integrated over the regions,
// numerator <d_up^dag(k) d_dn^dag(k') d_dn(k') d_up(k)> over A x B,
// denominator the product of the one-body populations.
RatioResult g2_regions(const GaussianState& st, const Region& a, const Region& b);

// Mean atom number (both spins) inside a region.
double region_atoms(const GaussianState& st, const Region& r);

}  // namespace bellpair
