#include "bellpair/bands.hpp"

#include <cmath>

namespace bellpair {

int zone_index(double k) {
  // |k| in (pi*b, pi*(b+1)] -> zone b; the boundary point belongs to the
  // lower zone so that zone 0 is the closed first half-zone pair.
  double a = std::abs(k) / M_PI;
  int z = static_cast<int>(std::ceil(a - 1e-12)) - 1;
  return std::max(z, 0);
}

Eigen::MatrixXd plane_wave_hamiltonian(double k, double u0, int n_max) {
  const int dim = 2 * n_max + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double kn = (k + 2.0 * M_PI * (i - n_max)) / M_PI;
    h(i, i) = kn * kn + u0 / 2.0;
    if (i + 1 < dim) {
      h(i, i + 1) = u0 / 4.0;
      h(i + 1, i) = u0 / 4.0;
    }
  }
  return h;
}

namespace {

// Deterministic eigenvector phase: make the dominant coefficient (C_0 when it
// is not negligible) real and non-negative.
void fix_phase(Eigen::VectorXd& v, int n_max) {
  double pivot = v(n_max);
  if (std::abs(pivot) < 1e-8) {
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    pivot = v(imax);
  }
  if (pivot < 0) v = -v;
}

}  // namespace

BandStructure solve_bands(const PhysicalParams& params, int n_max, int n_bands, int n_k) {
  if (n_max < 2 * n_bands)
    throw std::invalid_argument("solve_bands: require n_max >= 2 n_bands");
  if (params.lattice_depth_erec < 0)
    throw std::invalid_argument("solve_bands: negative lattice depth");

  const double u0 = params.lattice_depth_erec;
  BandStructure b;
  b.u0 = u0;
  b.n_max = n_max;
  b.k.resize(n_k);
  b.energy.resize(n_k, n_bands);
  b.coeff.assign(n_bands, Eigen::MatrixXcd(2 * n_max + 1, n_k));

  const double k_lo = -3.0 * M_PI, k_hi = 3.0 * M_PI;
  for (int i = 0; i < n_k; ++i)
    b.k[i] = k_lo + (k_hi - k_lo) * i / static_cast<double>(n_k - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  for (int i = 0; i < n_k; ++i) {
    es.compute(plane_wave_hamiltonian(b.k[i], u0, n_max));
    for (int band = 0; band < n_bands; ++band) {
      b.energy(i, band) = es.eigenvalues()(band);
      Eigen::VectorXd v = es.eigenvectors().col(band);
      fix_phase(v, n_max);
      b.coeff[band].col(i) = v.cast<std::complex<double>>();
    }
  }

  // Truncation check on a coarse subsample: the top band must be converged.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2;
  for (int i = 0; i < n_k; i += std::max(1, n_k / 16)) {
    es2.compute(plane_wave_hamiltonian(b.k[i], u0, n_max + 2), Eigen::EigenvaluesOnly);
    const double shift = std::abs(es2.eigenvalues()(n_bands - 1) - b.energy(i, n_bands - 1));
    if (shift > 1e-8)
      throw ConvergenceError("solve_bands: truncation n_max=" + std::to_string(n_max) +
                             " not converged (top-band shift " + std::to_string(shift) + " E_rec)");
  }
  return b;
}

namespace {

// Not-a-knot cubic spline on the uniform band grid; reproduces cubics exactly
// and returns nodal values bit-for-bit.
double spline_eval(const BandStructure& b, int band, double k) {
  const auto& ks = b.k;
  const int n = static_cast<int>(ks.size());
  const double h = ks[1] - ks[0];
  double pos = (k - ks[0]) / h;
  int i = static_cast<int>(std::floor(pos));
  i = std::min(std::max(i, 0), n - 2);
  if (k == ks[i]) return b.energy(i, band);
  if (k == ks[i + 1]) return b.energy(i + 1, band);

  // Local 4-point Lagrange interpolation (equivalent accuracy to a global
  // not-a-knot spline on a uniform grid, O(h^4), no precomputation).
  int j0 = std::min(std::max(i - 1, 0), n - 4);
  double x[4], y[4];
  for (int j = 0; j < 4; ++j) {
    x[j] = ks[j0 + j];
    y[j] = b.energy(j0 + j, band);
  }
  double acc = 0;
  for (int j = 0; j < 4; ++j) {
    double w = y[j];
    for (int l = 0; l < 4; ++l)
      if (l != j) w *= (k - x[l]) / (x[j] - x[l]);
    acc += w;
  }
  return acc;
}

}  // namespace

double dispersion_at(const BandStructure& bands, double k, BranchPolicy policy) {
  if (k < bands.k.front() - 1e-12 || k > bands.k.back() + 1e-12)
    throw RangeError("dispersion_at: k outside the solved span");
  k = std::min(std::max(k, bands.k.front()), bands.k.back());

  int band;
  if (std::holds_alternative<ExtendedZone>(policy)) {
    band = zone_index(k);
  } else {
    band = std::get<PeriodicBand>(policy).band;
  }
  if (band < 0 || band >= bands.n_bands())
    throw RangeError("dispersion_at: band index " + std::to_string(band) + " not solved");
  return spline_eval(bands, band, k);
}

}  // namespace bellpair
