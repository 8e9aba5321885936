#include "bellpair/bogoliubov.hpp"

#include <cmath>

namespace bellpair {

BogoliubovKernels initial_kernels(const Grid1d& grid, bool symmetric) {
  BogoliubovKernels k;
  k.grid = grid;
  k.t = 0;
  k.symmetric = symmetric;
  k.c_plus = Eigen::MatrixXcd::Identity(grid.n, grid.n);
  k.s_plus = Eigen::MatrixXcd::Zero(grid.n, grid.n);
  if (!symmetric) {
    k.c_minus = k.c_plus;
    k.s_minus = k.s_plus;
  }
  return k;
}

namespace {

double sector_residual(const Eigen::MatrixXcd& c, const Eigen::MatrixXcd& s) {
  Eigen::MatrixXcd r = c * c.adjoint() - s * s.adjoint();
  r.diagonal().array() -= 1.0;
  return r.cwiseAbs().maxCoeff();
}

}  // namespace

double symplectic_residual(const BogoliubovKernels& k) {
  double r = sector_residual(k.c_plus, k.s_plus);
  if (!k.symmetric) r = std::max(r, sector_residual(k.c_minus, k.s_minus));
  return r;
}

namespace {

// One pair-coupled local step, exact exponential of the pointwise generator
// [[W, P], [-conj(P), -W]] acting on (C_row, conj(S)_row).  W real makes the
// propagator coefficients real: trigonometric for W^2 > |P|^2, hyperbolic
// (two-mode squeezing) otherwise.  Each substep is itself a Bogoliubov map,
// so the symplectic identity is conserved to rounding no matter the dt.
struct LocalCoef {
  Eigen::VectorXd c;   // cos / cosh
  Eigen::VectorXd s;   // dt * sinc(z), with z^2 = (W^2 - |P|^2) dt^2
  Eigen::VectorXd w;   // W
  Eigen::VectorXcd p;  // P = g1 phi^2
};

void local_coefficients(const MeanFieldProblem& prob, const Eigen::VectorXcd& phi,
                        double t_mid, double dt, LocalCoef& lc) {
  const int n = prob.grid.n;
  lc.c.resize(n);
  lc.s.resize(n);
  lc.w.resize(n);
  lc.p.resize(n);
  const double lat = prob.u0 * prob.lattice_factor(t_mid);
  for (int j = 0; j < n; ++j) {
    const double dens = std::norm(phi(j));
    const double w = prob.trap(j) + lat * prob.lattice(j) + (prob.g0 + prob.g1) * dens;
    const std::complex<double> p = prob.g1 * phi(j) * phi(j);
    const double d2 = w * w - std::norm(p);
    double c, s;
    const double a2 = std::abs(d2) * dt * dt;
    if (a2 < 1e-12) {
      // series around z = 0
      const double z2 = d2 * dt * dt;
      c = 1.0 - z2 / 2.0 + z2 * z2 / 24.0;
      s = dt * (1.0 - z2 / 6.0 + z2 * z2 / 120.0);
    } else if (d2 > 0) {
      const double om = std::sqrt(d2);
      c = std::cos(om * dt);
      s = std::sin(om * dt) / om;
    } else {
      const double ka = std::sqrt(-d2);
      c = std::cosh(ka * dt);
      s = std::sinh(ka * dt) / ka;
    }
    lc.w(j) = w;
    lc.p(j) = p;
    lc.c(j) = c;
    lc.s(j) = s;
  }
}

// C' = c C - i s (W C + P conj(S));  S' = c S - i s (P conj(C) + W S).
void apply_local(Eigen::MatrixXcd& cmat, Eigen::MatrixXcd& smat, const LocalCoef& lc,
                 double sector) {
  const int n = static_cast<int>(cmat.rows());
  const int ncols = static_cast<int>(cmat.cols());
  ThreadPool::instance().run_blocks(ncols, [&](int b, int e) {
    for (int col = b; col < e; ++col) {
      std::complex<double>* cc = cmat.data() + static_cast<ptrdiff_t>(col) * n;
      std::complex<double>* ss = smat.data() + static_cast<ptrdiff_t>(col) * n;
      for (int j = 0; j < n; ++j) {
        const std::complex<double> p = sector * lc.p(j);
        const std::complex<double> u = lc.w(j) * cc[j] + p * std::conj(ss[j]);
        const std::complex<double> v = p * std::conj(cc[j]) + lc.w(j) * ss[j];
        const std::complex<double> mi_s(0.0, -lc.s(j));
        cc[j] = lc.c(j) * cc[j] + mi_s * u;
        ss[j] = lc.c(j) * ss[j] + mi_s * v;
      }
    }
  });
}

// Every apply is one unnormalized fwd/bwd round trip, so each phase table
// carries the full 1/n.
struct KineticTable {
  Eigen::VectorXcd half, full;
  KineticTable(const Grid1d& g, double dt) {
    half.resize(g.n);
    full.resize(g.n);
    const double inv = 1.0 / g.n;
    for (int m = 0; m < g.n; ++m) {
      half(m) = std::polar(inv, -g.kinetic(m) * dt / 2.0);
      full(m) = std::polar(inv, -g.kinetic(m) * dt);
    }
  }
};

// exp(-i eps dt) applied spectrally to the first index of both kernels.  The
// 1/n of the round trip is folded into the phase tables.
void apply_kinetic(Eigen::MatrixXcd& a, Fft& fft, const Eigen::VectorXcd& phase) {
  fft.forward_cols(a);
  const int n = static_cast<int>(a.rows());
  ThreadPool::instance().run_blocks(static_cast<int>(a.cols()), [&](int b, int e) {
    for (int col = b; col < e; ++col) {
      std::complex<double>* cc = a.data() + static_cast<ptrdiff_t>(col) * n;
      for (int m = 0; m < n; ++m) cc[m] *= phase(m);
    }
  });
  fft.backward_cols(a);
}

}  // namespace

void evolve_kernels(BogoliubovKernels& kernels, const MeanFieldProblem& prob,
                    CondensateProvider& pump, const std::vector<double>& times,
                    const KernelEvolveOptions& opt) {
  if (prob.grid.n != kernels.grid.n)
    throw std::invalid_argument("evolve_kernels: grid mismatch");
  Fft fft(prob.grid.n);
  LocalCoef lc;

  auto kin_all = [&](const Eigen::VectorXcd& phase) {
    apply_kinetic(kernels.c_plus, fft, phase);
    apply_kinetic(kernels.s_plus, fft, phase);
    if (!kernels.symmetric) {
      apply_kinetic(kernels.c_minus, fft, phase);
      apply_kinetic(kernels.s_minus, fft, phase);
    }
  };
  auto local_all = [&](double t_mid, double h) {
    local_coefficients(prob, pump.at(t_mid), t_mid, h, lc);
    apply_local(kernels.c_plus, kernels.s_plus, lc, +1.0);
    if (!kernels.symmetric) apply_local(kernels.c_minus, kernels.s_minus, lc, -1.0);
  };

  for (double target : times) {
    if (target < kernels.t - 1e-12)
      throw std::invalid_argument("evolve_kernels: snapshot times must be ascending");
    if (target > kernels.t + 1e-12) {
      // Strang with interior half steps merged: K/2 (L K)^(m-1) L K/2.
      const double span = target - kernels.t;
      const long m = std::max(1L, std::lround(std::ceil(span / opt.dt - 1e-9)));
      const double h = span / m;
      const double t0 = kernels.t;
      KineticTable kt(prob.grid, h);
      kin_all(kt.half);
      for (long i = 0; i < m; ++i) {
        local_all(t0 + (i + 0.5) * h, h);
        if (i + 1 < m) kin_all(kt.full);
      }
      kin_all(kt.half);
    }
    kernels.t = target;
    if (opt.check_symplectic_at_snapshots) {
      const double r = symplectic_residual(kernels);
      if (r > opt.symplectic_tol)
        throw std::runtime_error("evolve_kernels: symplectic residual " + std::to_string(r) +
                                 " at t=" + std::to_string(kernels.t) +
                                 " exceeds tolerance; reduce dt");
    }
    if (opt.on_snapshot) opt.on_snapshot(kernels);
  }
}

std::vector<BogoliubovKernels> evolve_kernels(const std::vector<CondensateField>& phi_series,
                                              const MeanFieldProblem& prob, double dt) {
  SeriesProvider pump(phi_series);
  BogoliubovKernels k = initial_kernels(prob.grid, true);
  std::vector<double> times;
  for (const auto& f : phi_series) times.push_back(f.t);
  KernelEvolveOptions opt;
  opt.dt = dt;
  std::vector<BogoliubovKernels> out;
  opt.on_snapshot = [&](const BogoliubovKernels& snap) { out.push_back(snap); };
  evolve_kernels(k, prob, pump, times, opt);
  return out;
}

}  // namespace bellpair
