#include "bellpair/phase_matching.hpp"

#include <algorithm>
#include <cmath>

namespace bellpair {

namespace {

constexpr int kScanPoints = 8192;
constexpr double kRootTol = 1e-10;    // |f| target, E_rec
constexpr double kMergeTol = 1e-6;    // roots closer than this are one root

}  // namespace

std::vector<ResonantPair> find_resonances(const BandStructure& bands, double k0) {
  // With the lattice on, quasi-momentum is conserved modulo 2 pi and the
  // dispersion is the condensate band continued periodically.  Without it
  // there is no reciprocal-lattice recoil: true momentum conservation on the
  // strictly convex free branch admits no nontrivial root.
  const int band = zone_index(k0);
  const BranchPolicy branch =
      bands.u0 > 0 ? BranchPolicy{PeriodicBand{band}} : BranchPolicy{ExtendedZone{}};
  const double e0 = dispersion_at(bands, k0, branch);
  auto f = [&](double q) {
    return dispersion_at(bands, k0 + q, branch) + dispersion_at(bands, k0 - q, branch) - 2.0 * e0;
  };

  // q and -q give the same pair and f has period 2pi, so (0, pi] covers all
  // distinct roots.  Sign-change bracketing excludes the trivial root q = 0.
  std::vector<double> roots;
  const double q_lo = M_PI / kScanPoints;
  double q_prev = q_lo, f_prev = f(q_lo);
  for (int i = 2; i <= kScanPoints; ++i) {
    const double q = M_PI * i / kScanPoints;
    const double fq = f(q);
    if ((f_prev < 0 && fq > 0) || (f_prev > 0 && fq < 0)) {
      double a = q_prev, fa = f_prev, b = q;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (std::abs(fm) <= kRootTol && (b - a) < 1e-12) break;
        if ((fa < 0) == (fm < 0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      roots.push_back(0.5 * (a + b));
    } else if (fq == 0.0 && i < kScanPoints) {
      roots.push_back(q);
    }
    q_prev = q;
    f_prev = fq;
  }

  std::sort(roots.begin(), roots.end());
  std::vector<ResonantPair> out;
  for (double q : roots) {
    if (!out.empty() && std::abs(q - out.back().q) < kMergeTol) continue;
    ResonantPair p;
    p.q = q;
    double a = reduce_to_first_zone(k0 + q);
    double b = reduce_to_first_zone(k0 - q);
    p.k1 = std::max(a, b);
    p.k2 = std::min(a, b);
    p.residual = f(q);
    out.push_back(p);
  }
  return out;
}

BoxTuning tune_box(const BandStructure& bands, double k0, double c1n_erec,
                   double l_target, double k0_snap_tol) {
  const int band = zone_index(k0);
  const BranchPolicy branch = PeriodicBand{band};

  BoxTuning best;
  const int l_hi = std::max(8, static_cast<int>(std::floor(l_target)));
  const int l_lo = std::max(8, static_cast<int>(std::ceil(0.75 * l_target)));
  for (int L = l_lo; L <= l_hi; ++L) {
    const double dk = 2.0 * M_PI / L;
    const int j0_mid = static_cast<int>(std::lround(k0 / dk));
    for (int j0 = j0_mid - 1; j0 <= j0_mid + 1; ++j0) {
      const double k0_run = dk * j0;
      if (std::abs(k0_run - k0) > k0_snap_tol) continue;
      auto res = find_resonances(bands, k0_run);
      if (res.empty()) continue;
      const double e0 = dispersion_at(bands, k0_run, branch);
      for (const auto& r : res) {
        const double q_grid = dk * std::lround(r.q / dk);
        if (q_grid <= 0) continue;
        const double fq = dispersion_at(bands, k0_run + q_grid, branch) +
                          dispersion_at(bands, k0_run - q_grid, branch) - 2.0 * e0;
        const double det = std::abs(0.5 * fq + c1n_erec);
        if (!best.resonant || det < best.detuning) {
          best = {static_cast<double>(L), k0_run, q_grid, det, true};
        }
      }
    }
  }

  if (!best.resonant) {
    // No root (e.g. no lattice): keep the target box, just snap k0.
    const int L = l_hi;
    const double dk = 2.0 * M_PI / L;
    best.box = L;
    best.k0_run = dk * std::lround(k0 / dk);
    best.q_grid = 0;
    best.detuning = 0;
  }
  return best;
}

}  // namespace bellpair
