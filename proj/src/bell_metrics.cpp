#include "bellpair/bell_metrics.hpp"

#include <cmath>

namespace bellpair {

namespace {

double real_moment(const GaussianState& st, std::initializer_list<Bilinear> prod) {
  const cxd v = wick_moment(st, prod);
  return v.real();
}

constexpr double kTwoWayTol = 1e-8;   // rotated vs analytic E
constexpr double kBellIdTol = 1e-9;   // direct vs g2-form B_max

}  // namespace

BellMoments bell_moments(const GaussianState& st, const Region& a, const Region& b) {
  BellMoments m;
  m.jz_jz = real_moment(st, {ops::jz(a), ops::jz(b)});
  m.jz_jx = real_moment(st, {ops::jz(a), ops::jx(b)});
  m.jx_jz = real_moment(st, {ops::jx(a), ops::jz(b)});
  m.jx_jx = real_moment(st, {ops::jx(a), ops::jx(b)});
  m.nn = real_moment(st, {ops::number(a), ops::number(b)});
  m.populated = m.nn > 0;
  return m;
}

namespace {

CorrelationResult correlation_from(const BellMoments& m, double theta, double phi) {
  CorrelationResult r;
  if (!m.populated) {
    r.status = MomentStatus::EmptyRegion;
    return r;
  }
  const double ct = std::cos(theta), stn = std::sin(theta);
  const double cp = std::cos(phi), sp = std::sin(phi);
  r.value = (m.jz_jz * ct * cp + m.jz_jx * ct * sp + m.jx_jz * stn * cp + m.jx_jx * stn * sp) / m.nn;
  r.analytic = m.jz_jz / m.nn * std::cos(theta + phi);
  return r;
}

}  // namespace

CorrelationResult bell_correlation(const GaussianState& st, const Region& a, const Region& b,
                                   double theta, double phi, bool axis_x) {
  if (axis_x) {
    // x-axis generator: Jz(theta) = Jz cos(theta) + Jy sin(theta)
    BellMoments m;
    m.jz_jz = real_moment(st, {ops::jz(a), ops::jz(b)});
    m.jz_jx = real_moment(st, {ops::jz(a), ops::jy(b)});
    m.jx_jz = real_moment(st, {ops::jy(a), ops::jz(b)});
    m.jx_jx = real_moment(st, {ops::jy(a), ops::jy(b)});
    m.nn = real_moment(st, {ops::number(a), ops::number(b)});
    m.populated = m.nn > 0;
    return correlation_from(m, theta, phi);
  }
  const BellMoments m = bell_moments(st, a, b);
  CorrelationResult r = correlation_from(m, theta, phi);
  if (r.status == MomentStatus::Ok && std::abs(r.value - r.analytic) > kTwoWayTol)
    throw std::logic_error("bell_correlation: rotated evaluation disagrees with the cosine form");
  return r;
}

BellMaxResult bell_max(const GaussianState& st, const Region& a, const Region& b) {
  BellMaxResult r;
  const BellMoments m = bell_moments(st, a, b);
  if (!m.populated) {
    r.status = MomentStatus::EmptyRegion;
    return r;
  }
  r.value = 2.0 * std::sqrt(2.0) * std::abs(m.jz_jz) / m.nn;
  const auto g2 = g2_regions(st, a, b);
  if (g2.status != MomentStatus::Ok) {
    r.status = g2.status;
    return r;
  }
  r.via_g2 = 2.0 * std::sqrt(2.0) * (g2.value - 1.0) / (g2.value + 1.0);
  if (std::abs(r.value - r.via_g2) > kBellIdTol)
    throw std::logic_error("bell_max: direct and g2-form evaluations disagree");
  return r;
}

HzResult hillery_zubairy(const GaussianState& st, const Region& a, const Region& b) {
  HzResult r;
  const double quart =
      real_moment(st, {ops::jplus(a), ops::jminus(a), ops::jplus(b), ops::jminus(b)});
  const cxd jpjm_a = wick_moment(st, {ops::jplus(a), ops::jminus(a)});
  const double den_1 = real_moment(st, {ops::jz(a), ops::jplus(b), ops::jminus(b)});
  const double den_2 = real_moment(st, {ops::jplus(a), ops::jminus(a), ops::jz(b)});
  const double den = 2.0 * std::min(den_1, den_2);
  if (std::abs(den) < 1e-30) return r;  // vacuum: undefined marker
  r.defined = true;
  r.value = 1.0 + (quart - std::norm(jpjm_a)) / den;
  return r;
}

QfiResult qfi(const GaussianState& st, const Region& a, const Region& b) {
  QfiResult r;
  const double zz_aa = real_moment(st, {ops::jz(a), ops::jz(a)});
  const double zz_bb = real_moment(st, {ops::jz(b), ops::jz(b)});
  const double zz_ab = real_moment(st, {ops::jz(a), ops::jz(b)});
  const double z_a = real_moment(st, {ops::jz(a)});
  const double z_b = real_moment(st, {ops::jz(b)});
  const double mean = z_a - z_b;
  r.fq = 4.0 * (zz_aa + zz_bb - 2.0 * zz_ab - mean * mean);
  r.shot_noise = real_moment(st, {ops::number(a)}) + real_moment(st, {ops::number(b)});
  return r;
}

ChshResult chsh_over_angles(const GaussianState& st, const Region& a, const Region& b,
                            double grid_step) {
  if (grid_step > M_PI / 64.0 + 1e-12)
    throw std::invalid_argument("chsh_over_angles: grid resolution must be <= pi/64");
  const BellMoments m = bell_moments(st, a, b);
  ChshResult best;
  if (!m.populated) return best;

  const int na = static_cast<int>(std::ceil(2.0 * M_PI / grid_step));
  std::vector<double> ang(na);
  for (int i = 0; i < na; ++i) ang[i] = 2.0 * M_PI * i / na;
  Eigen::MatrixXd e(na, na);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j) e(i, j) = correlation_from(m, ang[i], ang[j]).value;

  // For fixed (theta, theta') the sum splits into independent maxima over phi
  // and phi'; track both signs for the absolute value.
  for (int it = 0; it < na; ++it)
    for (int itp = 0; itp < na; ++itp) {
      double g1_max = -1e300, g1_min = 1e300, g2_max = -1e300, g2_min = 1e300;
      int jp_max = 0, jp_min = 0, jpp_max = 0, jpp_min = 0;
      for (int j = 0; j < na; ++j) {
        const double g1 = e(it, j) + e(itp, j);       // over phi
        const double g2 = e(itp, j) - e(it, j);       // over phi'
        if (g1 > g1_max) { g1_max = g1; jp_max = j; }
        if (g1 < g1_min) { g1_min = g1; jp_min = j; }
        if (g2 > g2_max) { g2_max = g2; jpp_max = j; }
        if (g2 < g2_min) { g2_min = g2; jpp_min = j; }
      }
      const double plus = g1_max + g2_max;
      const double minus = -(g1_min + g2_min);
      const double v = std::max(plus, minus);
      if (v > best.value) {
        best.value = v;
        best.theta = ang[it];
        best.theta_p = ang[itp];
        best.phi = ang[plus >= minus ? jp_max : jp_min];
        best.phi_p = ang[plus >= minus ? jpp_max : jpp_min];
      }
    }
  return best;
}

MetricsSample metrics_sample(const GaussianState& st, const Region& a, const Region& b,
                             int angle_grid) {
  MetricsSample s;
  s.t = st.t;
  const auto bm = bell_max(st, a, b);
  s.populated = bm.status == MomentStatus::Ok;
  if (s.populated) {
    s.bell = bm.value;
    s.bell_via_g2 = bm.via_g2;
    s.g2 = g2_regions(st, a, b).value;
  }
  const auto hz = hillery_zubairy(st, a, b);
  s.e_hz_defined = hz.defined;
  s.e_hz = hz.value;
  const auto q = qfi(st, a, b);
  s.fq = q.fq;
  s.shot_noise = q.shot_noise;
  s.atoms_a = region_atoms(st, a);
  s.atoms_b = region_atoms(st, b);
  s.e_grid.resize(angle_grid, angle_grid);
  const BellMoments m = bell_moments(st, a, b);
  for (int i = 0; i < angle_grid; ++i)
    for (int j = 0; j < angle_grid; ++j) {
      const double th = 2.0 * M_PI * i / angle_grid;
      const double ph = 2.0 * M_PI * j / angle_grid;
      s.e_grid(i, j) = m.populated ? correlation_from(m, th, ph).value : 0.0;
    }
  return s;
}

}  // namespace bellpair
