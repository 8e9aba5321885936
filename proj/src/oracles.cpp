#include "bellpair/oracles.hpp"

#include <cmath>

namespace bellpair {

namespace {

// Mode layout: 0 = up_A, 1 = dn_A, 2 = up_B, 3 = dn_B.
int mode_of(const std::string& label, Spin s) {
  if (label == "A") return s == Spin::Up ? 0 : 1;
  if (label == "B") return s == Spin::Up ? 2 : 3;
  throw std::invalid_argument("FockOracle: bilinear region must be labelled A or B");
}

constexpr int kHeadroom = 4;          // one raise per bilinear
constexpr size_t kMaxAmps = 80000000; // ~1.2 GB vector cap

}  // namespace

FockOracle::FockOracle(double r, int n_cut) : r_(r) {
  if (r < 0) throw std::invalid_argument("FockOracle: r must be >= 0");
  // Raise the truncation until the residual weight of the product of the two
  // squeezed pairs is below 1e-10.
  const double t2 = std::tanh(r) * std::tanh(r);
  int nc = std::max(n_cut, 2);
  while (true) {
    const double kept = 1.0 - std::pow(t2, nc + 1);
    if (kept * kept >= 1.0 - 1e-10) break;
    ++nc;
    if (nc > 4096) throw std::runtime_error("FockOracle: truncation norm target unreachable");
  }
  n_cut_ = nc;
  dim_ = n_cut_ + 1 + kHeadroom;
  const size_t total = static_cast<size_t>(dim_) * dim_ * dim_ * dim_;
  if (total > kMaxAmps) throw std::runtime_error("FockOracle: truncated basis too large");

  psi_ = Eigen::VectorXcd::Zero(total);
  const double tr = std::tanh(r);
  const double c2 = std::cosh(r) * std::cosh(r);
  // pairs (0,3) and (1,2); amplitudes tanh^(n+m) / cosh^2
  for (int n = 0; n <= n_cut_; ++n)
    for (int m = 0; m <= n_cut_; ++m)
      psi_(idx(n, m, m, n)) = std::pow(tr, n + m) / c2;
  norm2_ = psi_.squaredNorm();
}

void FockOracle::apply_bilinear(const Bilinear& b, const Eigen::VectorXcd& in,
                                Eigen::VectorXcd& out) const {
  out.setZero();
  const int modes[2] = {mode_of(b.region.label, Spin::Up), mode_of(b.region.label, Spin::Down)};
  const int d = dim_;
  size_t stride[4];
  stride[3] = 1;
  stride[2] = static_cast<size_t>(d);
  stride[1] = stride[2] * d;
  stride[0] = stride[1] * d;

  struct Term {
    int mu, mv;
    cxd w;
  };
  Term terms[4];
  int n_terms = 0;
  for (int a = 0; a < 2; ++a)
    for (int bb = 0; bb < 2; ++bb)
      if (b.w[a][bb] != cxd(0, 0)) terms[n_terms++] = {modes[a], modes[bb], b.w[a][bb]};
  if (n_terms == 0) return;

  int occ[4];
  const size_t total = static_cast<size_t>(in.size());
  for (size_t flat = 0; flat < total; ++flat) {
    const cxd amp = in(flat);
    if (amp == cxd(0, 0)) continue;
    size_t rest = flat;
    occ[3] = static_cast<int>(rest % d);
    rest /= d;
    occ[2] = static_cast<int>(rest % d);
    rest /= d;
    occ[1] = static_cast<int>(rest % d);
    occ[0] = static_cast<int>(rest / d);
    for (int ti = 0; ti < n_terms; ++ti) {
      const auto& tm = terms[ti];
      if (tm.mu == tm.mv) {
        out(flat) += tm.w * static_cast<double>(occ[tm.mu]) * amp;
        continue;
      }
      if (occ[tm.mv] == 0 || occ[tm.mu] + 1 >= d) continue;
      const double fac =
          std::sqrt(static_cast<double>(occ[tm.mv]) * static_cast<double>(occ[tm.mu] + 1));
      out(flat + stride[tm.mu] - stride[tm.mv]) += tm.w * fac * amp;
    }
  }
}

cxd FockOracle::moment(std::span<const Bilinear> prod) const {
  if (prod.empty()) return 1.0;
  Eigen::VectorXcd work = psi_, tmp(psi_.size());
  for (auto it = prod.rbegin(); it != prod.rend(); ++it) {
    apply_bilinear(*it, work, tmp);
    work.swap(tmp);
  }
  return psi_.dot(work) / norm2_;  // Eigen dot conjugates the left factor
}

double FockOracle::g2() const {
  Bilinear n_up_a;
  n_up_a.region = region_a();
  n_up_a.w[0][0] = 1.0;
  Bilinear n_dn_b;
  n_dn_b.region = region_b();
  n_dn_b.w[1][1] = 1.0;
  const double num = moment({n_up_a, n_dn_b}).real();
  const double da = moment({n_up_a}).real();
  const double db = moment({n_dn_b}).real();
  return num / (da * db);
}

GaussianState FockOracle::matching_state(double k_a, double k_b) const {
  const double n = mean_occupation();
  const double sc = std::sinh(r_) * std::cosh(r_);
  Eigen::MatrixXcd gp = Eigen::MatrixXcd::Zero(2, 2);
  gp(0, 0) = n;
  gp(1, 1) = n;
  Eigen::MatrixXcd mp = Eigen::MatrixXcd::Zero(2, 2);
  mp(0, 1) = sc;
  mp(1, 0) = sc;
  return GaussianState::from_sectors({k_a, k_b}, std::move(gp), std::move(mp));
}

BogoliubovKernels uniform_bogoliubov(double density, double g0, double g1, double k0,
                                     const Grid1d& grid, double t) {
  const int n = grid.n;
  const double dk = 2.0 * M_PI / grid.box;
  const long j0 = std::lround(k0 / dk);
  if (std::abs(j0 * dk - k0) > 1e-9)
    throw std::invalid_argument("uniform_bogoliubov: k0 must be a grid momentum");

  const double mu = std::pow(k0 / M_PI, 2) + g0 * density;
  const double p = g1 * density;

  Eigen::MatrixXcd cm = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd sm = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const int jp = static_cast<int>((((2 * j0 - j) % n) + n) % n);
    const double e1 = std::pow(fft_momentum(j, n, grid.box) / M_PI, 2) + (g0 + g1) * density;
    const double e2 = std::pow(fft_momentum(jp, n, grid.box) / M_PI, 2) + (g0 + g1) * density;
    const double det = 0.5 * (e1 + e2) - mu;   // pair detuning
    const double thc = 0.5 * (e1 - e2);        // common phase
    const double d2 = det * det - p * p;
    double c, s;
    if (std::abs(d2) * t * t < 1e-14) {
      c = 1.0 - 0.5 * d2 * t * t;
      s = t;
    } else if (d2 > 0) {
      const double om = std::sqrt(d2);
      c = std::cos(om * t);
      s = std::sin(om * t) / om;
    } else {
      const double ka = std::sqrt(-d2);
      c = std::cosh(ka * t);
      s = std::sinh(ka * t) / ka;
    }
    const cxd rot = std::polar(1.0, -(mu + thc) * t);
    cm(j, j) = rot * cxd(c, -det * s);
    // S row jp couples to column j; exp(i thc t) relative phase
    sm(jp, j) = std::polar(1.0, -(mu - thc) * t) * cxd(0.0, -p * s);
  }

  // back to position kernels: C = Fdag Cm F / n, S = Fdag Sm conj(F) / n
  Fft fft(n);
  fft.forward_rows(cm);
  fft.backward_cols(cm);
  cm /= n;
  fft.backward_rows(sm);
  fft.backward_cols(sm);
  sm /= n;

  BogoliubovKernels k;
  k.grid = grid;
  k.t = t;
  k.symmetric = true;
  k.c_plus = std::move(cm);
  k.s_plus = std::move(sm);
  return k;
}

}  // namespace bellpair
