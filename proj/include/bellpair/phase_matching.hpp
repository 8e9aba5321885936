#pragma once

#include <vector>

#include "bellpair/bands.hpp"

namespace bellpair {

// An outgoing pair satisfying both conservation laws:
//   E(k0+q) + E(k0-q) = 2 E(k0)   on the condensate band,
//   k1 + k2 = 2 k0 (mod 2 pi / a_L).
// Momenta reported reduced to the first zone, canonical order k1 > k2.
struct ResonantPair {
  double k1 = 0;        // 1/a_L
  double k2 = 0;
  double q = 0;         // momentum transfer of the root, q > 0
  double residual = 0;  // E(k1)+E(k2)-2E(k0), E_rec
};

std::vector<ResonantPair> find_resonances(const BandStructure& bands, double k0);

// Slab-geometry box commensuration: pick an integer box length L (in a_L,
// <= l_target) and a grid momentum k0_run = 2 pi j0 / L near k0 such that a
// grid momentum-transfer 2 pi j1 / L sits as close as possible to the pair
// resonance of the interacting system, detuning = f(q)/2 + c1 n.
struct BoxTuning {
  double box = 0;       // chosen L, integer-valued
  double k0_run = 0;    // snapped condensate momentum
  double q_grid = 0;    // resonant grid momentum transfer (0 when no root)
  double detuning = 0;  // |f(q_grid)/2 + c1 n| in E_rec
  bool resonant = false;
};

BoxTuning tune_box(const BandStructure& bands, double k0, double c1n_erec,
                   double l_target, double k0_snap_tol);

}  // namespace bellpair
