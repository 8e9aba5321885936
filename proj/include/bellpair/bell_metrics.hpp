#pragma once

#include <optional>

#include "bellpair/gaussian_state.hpp"

namespace bellpair {

// Quadratic moments every Bell quantity is built from.  All evaluated by the
// generic Wick engine; nothing here assumes the sector symmetry.
struct BellMoments {
  double jz_jz = 0;  // <Jz^A Jz^B>
  double jz_jx = 0;
  double jx_jz = 0;
  double jx_jx = 0;
  double nn = 0;     // <N_A N_B>, Eq.-of-motion N = (n_up+n_dn)/2 convention
  bool populated = false;
};
BellMoments bell_moments(const GaussianState& st, const Region& a, const Region& b);

struct CorrelationResult {
  MomentStatus status = MomentStatus::Ok;
  double value = 0;     // rotated-operator evaluation
  double analytic = 0;  // (ratio) cos(theta+phi)
};

// E(theta, phi) computed two ways: explicit y-axis rotation of the collective
// operators followed by Wick evaluation, and the closed cosine form; the two
// must agree to 1e-8.  An x-axis generator is available behind `axis_x`.
CorrelationResult bell_correlation(const GaussianState& st, const Region& a, const Region& b,
                                   double theta, double phi, bool axis_x = false);

struct BellMaxResult {
  MomentStatus status = MomentStatus::Ok;
  double value = 0;   // 2 sqrt(2) |<Jz Jz>| / <N N>
  double via_g2 = 0;  // 2 sqrt(2) (g2-1)/(g2+1)
};
BellMaxResult bell_max(const GaussianState& st, const Region& a, const Region& b);

struct HzResult {
  bool defined = false;
  double value = 0;
};
// Hillery-Zubairy steering coefficient; < 1/2 flags EPR steering.
HzResult hillery_zubairy(const GaussianState& st, const Region& a, const Region& b);

struct QfiResult {
  double fq = 0;          // 4 Var(Jz^A - Jz^B)
  double shot_noise = 0;  // <N_A + N_B>
};
QfiResult qfi(const GaussianState& st, const Region& a, const Region& b);

struct ChshResult {
  double theta = 0, theta_p = 0, phi = 0, phi_p = 0;
  double value = 0;
};
// Exhaustive grid maximization of |E(t,p) + E(t',p') + E(t',p) - E(t,p')|.
ChshResult chsh_over_angles(const GaussianState& st, const Region& a, const Region& b,
                            double grid_step);

struct MetricsSample {
  double t = 0;             // lattice units
  double t_seconds = 0;
  Eigen::MatrixXd e_grid;   // E(theta, phi) samples
  double bell = 0;          // B_max
  double bell_via_g2 = 0;
  double g2 = 0;
  double e_hz = 0;
  bool e_hz_defined = false;
  double fq = 0;
  double shot_noise = 0;
  double atoms_a = 0, atoms_b = 0;  // mean scattered atoms per region
  bool populated = false;
};

MetricsSample metrics_sample(const GaussianState& st, const Region& a, const Region& b,
                             int angle_grid = 16);

}  // namespace bellpair
