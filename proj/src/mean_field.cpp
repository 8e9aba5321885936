#include "bellpair/mean_field.hpp"

#include <cmath>
#include <random>

#include "bellpair/bands.hpp"

namespace bellpair {

namespace {

Eigen::VectorXd lattice_shape(const Grid1d& g) {
  Eigen::VectorXd v(g.n);
  for (int j = 0; j < g.n; ++j) {
    const double s = std::sin(M_PI * g.x(j));
    v(j) = s * s;
  }
  return v;
}

// Harmonic trap tapered to zero in the outer 20% of the box so the periodic
// seam stays smooth.
Eigen::VectorXd windowed_trap(const Grid1d& g, double wz) {
  Eigen::VectorXd v(g.n);
  const double half = g.box / 2.0;
  for (int j = 0; j < g.n; ++j) {
    const double x = g.x(j);
    double w = 1.0;
    const double a = std::abs(x);
    if (a > 0.8 * half) {
      const double s = std::cos(0.5 * M_PI * (a - 0.8 * half) / (0.2 * half));
      w = s * s;
    }
    v(j) = 0.5 * (M_PI * M_PI / 2.0) * wz * wz * x * x * w;
  }
  return v;
}

}  // namespace

MeanFieldProblem make_problem(const PhysicalParams& p, const Grid1d& grid) {
  if (grid.dx() > 1.0 / 16.0 + 1e-12)
    throw std::invalid_argument("make_problem: grid must resolve the lattice (dx <= a_L/16)");
  if (std::abs(grid.box - std::round(grid.box)) > 1e-9)
    throw std::invalid_argument("make_problem: box length must be an integer number of lattice periods");
  const auto c = effective_1d_couplings(p);
  MeanFieldProblem prob;
  prob.grid = grid;
  prob.g0 = c.g0_lat;
  prob.g1 = c.g1_lat;
  prob.u0 = p.lattice_depth_erec;
  prob.lattice_ramp = p.lattice_ramp;
  prob.lattice = lattice_shape(grid);
  if (p.geometry == Geometry::Trap) {
    prob.trap = windowed_trap(grid, p.trap_wz);
  } else {
    prob.trap = Eigen::VectorXd::Zero(grid.n);
  }
  return prob;
}

double box_atoms(const PhysicalParams& p, const Grid1d& grid) {
  if (p.geometry == Geometry::Trap) return p.n_atoms;
  return slab_density_alat(p) * grid.box;
}

namespace {

double kinetic_energy(const Grid1d& g, const Eigen::VectorXcd& phi, Fft& fft) {
  Eigen::VectorXcd ph = phi;
  fft.forward(ph.data());
  double e = 0;
  for (int m = 0; m < g.n; ++m) e += g.kinetic(m) * std::norm(ph(m));
  return e * g.dx() / g.n;
}

}  // namespace

double gpe_energy(const MeanFieldProblem& prob, const CondensateField& f, bool with_lattice) {
  Fft fft(prob.grid.n);
  const double lat = with_lattice ? prob.u0 * prob.lattice_factor(f.t) : 0.0;
  double e = kinetic_energy(prob.grid, f.phi, fft);
  for (int j = 0; j < prob.grid.n; ++j) {
    const double d = std::norm(f.phi(j));
    e += ((prob.trap(j) + lat * prob.lattice(j)) * d + 0.5 * prob.g0 * d * d) * prob.grid.dx();
  }
  return e;
}

double chemical_potential(const MeanFieldProblem& prob, const CondensateField& f) {
  Fft fft(prob.grid.n);
  const double lat = prob.lattice_factor(f.t);
  double e = kinetic_energy(prob.grid, f.phi, fft);
  for (int j = 0; j < prob.grid.n; ++j) {
    const double d = std::norm(f.phi(j));
    e += ((prob.trap(j) + prob.u0 * lat * prob.lattice(j)) * d + prob.g0 * d * d) * prob.grid.dx();
  }
  return e / f.norm();
}

CondensateField ground_state(const MeanFieldProblem& prob, double n_atoms,
                             const GroundStateOptions& opt) {
  // Imaginary time, lattice off (initial state is prepared before the quench).
  const Grid1d& g = prob.grid;
  Fft fft(g.n);

  CondensateField f;
  f.grid = g;
  f.t = 0;
  f.phi.resize(g.n);
  if (opt.noise_seed != 0) {
    std::mt19937 rng(opt.noise_seed);
    std::normal_distribution<double> dist;
    for (int j = 0; j < g.n; ++j) f.phi(j) = {std::abs(dist(rng)) + 0.1, 0.2 * dist(rng)};
  } else {
    // Smooth positive seed: flat profile shaped gently by the trap.
    const double vmax = prob.trap.maxCoeff();
    for (int j = 0; j < g.n; ++j)
      f.phi(j) = 1.0 + (vmax > 0 ? std::exp(-prob.trap(j) / std::max(vmax * 0.25, 1e-12)) : 0.0);
  }

  auto renorm = [&] {
    f.phi *= std::sqrt(n_atoms / f.norm());
  };
  renorm();

  auto kstep = [&](const Eigen::VectorXd& damp) {
    fft.forward(f.phi.data());
    f.phi.array() *= damp.array();
    fft.backward(f.phi.data());
    f.phi /= g.n;
  };

  // The Trotterized fixed point is biased at O(dtau^2); converge, shrink the
  // step, repeat down to dtau_min.
  double dtau = opt.dtau;
  double de = 0;
  long iters_left = opt.max_iter;
  for (;;) {
    Eigen::VectorXd kin_half(g.n), kin_full(g.n), kin_undo(g.n);
    for (int m = 0; m < g.n; ++m) {
      kin_half(m) = std::exp(-g.kinetic(m) * dtau / 2.0);
      kin_full(m) = std::exp(-g.kinetic(m) * dtau);
      kin_undo(m) = std::exp(g.kinetic(m) * dtau / 2.0);
    }
    auto probe_state = [&] {
      // synchronized field: undo the trailing half step
      CondensateField probe = f;
      Eigen::VectorXcd ph = probe.phi;
      fft.forward(ph.data());
      ph.array() *= kin_undo.array();
      fft.backward(ph.data());
      probe.phi = ph / g.n;
      probe.phi *= std::sqrt(n_atoms / probe.norm());
      return probe;
    };

    double e_prev = gpe_energy(prob, f, /*with_lattice=*/false);
    bool converged = false;
    kstep(kin_half);
    for (long it = 0; it < iters_left; ++it) {
      for (int j = 0; j < g.n; ++j) {
        const double d = std::norm(f.phi(j));
        f.phi(j) *= std::exp(-(prob.trap(j) + prob.g0 * d) * dtau);
      }
      kstep(kin_full);
      renorm();
      if ((it & 15) == 15) {
        const double e = gpe_energy(prob, probe_state(), /*with_lattice=*/false);
        de = std::abs(e - e_prev) / 16.0;
        e_prev = e;
        if (de < opt.tol * n_atoms) {
          iters_left -= it + 1;
          converged = true;
          break;
        }
      }
    }
    if (!converged)
      throw ConvergenceError("ground_state: not converged after " + std::to_string(opt.max_iter) +
                             " iterations; last energy change per step " + std::to_string(de));
    if (dtau <= opt.dtau_min) {
      // refine to a seed-independent fixed point: iterate until the per-step
      // state change reaches the rounding floor
      Eigen::VectorXcd prev = f.phi;
      const double floor_abs = 1e-12 * f.phi.cwiseAbs().maxCoeff();
      for (long it = 0; it < iters_left; ++it) {
        for (int j = 0; j < g.n; ++j) {
          const double d = std::norm(f.phi(j));
          f.phi(j) *= std::exp(-(prob.trap(j) + prob.g0 * d) * dtau);
        }
        kstep(kin_full);
        renorm();
        if ((it & 15) == 15) {
          const double delta = (f.phi - prev).cwiseAbs().maxCoeff();
          if (delta <= floor_abs) break;
          prev = f.phi;
        }
      }
      f = probe_state();
      break;
    }
    f = probe_state();
    dtau = std::max(dtau / 4.0, opt.dtau_min);
  }

  // Global phase: real and positive.
  std::complex<double> s = f.phi.sum();
  if (std::abs(s) > 0) f.phi *= std::conj(s) / std::abs(s);
  for (int j = 0; j < g.n; ++j) f.phi(j) = std::abs(f.phi(j));
  renorm();
  return f;
}

double snap_momentum(const Grid1d& grid, double k0) {
  const double dk = 2.0 * M_PI / grid.box;
  return dk * std::lround(k0 / dk);
}

namespace {

struct Stepper {
  const MeanFieldProblem& prob;
  Fft& fft;
  Eigen::VectorXd eps;  // kinetic table

  Stepper(const MeanFieldProblem& p, Fft& f) : prob(p), fft(f) {
    eps.resize(p.grid.n);
    for (int m = 0; m < p.grid.n; ++m) eps(m) = p.grid.kinetic(m);
  }

  void kinetic(Eigen::VectorXcd& phi, double dt) const {
    fft.forward(phi.data());
    for (int m = 0; m < prob.grid.n; ++m)
      phi(m) *= std::polar(1.0 / prob.grid.n, -eps(m) * dt);
    fft.backward(phi.data());
  }

  void potential(Eigen::VectorXcd& phi, double t_mid, double dt) const {
    const double lat = prob.u0 * prob.lattice_factor(t_mid);
    for (int j = 0; j < prob.grid.n; ++j) {
      const double v = prob.trap(j) + lat * prob.lattice(j) + prob.g0 * std::norm(phi(j));
      phi(j) *= std::polar(1.0, -v * dt);
    }
  }

  // One Strang step t -> t + dt.
  void step(Eigen::VectorXcd& phi, double t, double dt) const {
    kinetic(phi, dt / 2.0);
    potential(phi, t + dt / 2.0, dt);
    kinetic(phi, dt / 2.0);
  }
};

}  // namespace

std::vector<CondensateField> boost_and_evolve(const CondensateField& field,
                                              const MeanFieldProblem& prob, double k0,
                                              double t_final,
                                              const std::vector<double>& snapshot_times,
                                              const EvolveOptions& opt) {
  const Grid1d& g = prob.grid;
  double dt = opt.dt > 0 ? opt.dt : 0.1 / g.max_kinetic();
  if (dt > 0.1 / g.max_kinetic() + 1e-15)
    throw std::invalid_argument("boost_and_evolve: dt exceeds 0.1 hbar / E_max");

  CondensateField f = field;
  f.t = 0;
  const double kb = snap_momentum(g, k0);
  for (int j = 0; j < g.n; ++j) f.phi(j) *= std::polar(1.0, kb * g.x(j));
  const double norm0 = f.norm();

  std::vector<double> times = snapshot_times;
  times.push_back(t_final);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  Fft fft(g.n);
  Stepper st(prob, fft);
  std::vector<CondensateField> out;
  for (double target : times) {
    if (target > t_final + 1e-12) break;
    if (target > f.t + 1e-14) {
      const long nsteps = std::max(1L, std::lround(std::ceil((target - f.t) / dt - 1e-9)));
      const double h = (target - f.t) / nsteps;
      for (long i = 0; i < nsteps; ++i) st.step(f.phi, f.t + i * h, h);
      f.t = target;
    }
    const double drift = std::abs(f.norm() - norm0) / norm0;
    if (drift > opt.norm_tol)
      throw std::runtime_error("boost_and_evolve: norm drift " + std::to_string(drift) +
                               " at t=" + std::to_string(f.t));
    out.push_back(f);
  }
  return out;
}

// ---- providers ----

MeanFieldProvider::MeanFieldProvider(const MeanFieldProblem& prob, CondensateField start,
                                     double dt_max)
    : prob_(prob), field_(std::move(start)) {
  const double cap = 0.1 / prob_.grid.max_kinetic();
  dt_max_ = (dt_max > 0 && dt_max < cap) ? dt_max : cap;
  fft_ = std::make_shared<Fft>(prob_.grid.n);
}

const Eigen::VectorXcd& MeanFieldProvider::at(double t) {
  if (t < field_.t - 1e-12)
    throw std::logic_error("MeanFieldProvider: non-monotonic time query");
  if (t > field_.t + 1e-14) {
    Stepper st(prob_, *fft_);
    const long nsteps = std::max(1L, std::lround(std::ceil((t - field_.t) / dt_max_ - 1e-9)));
    const double h = (t - field_.t) / nsteps;
    for (long i = 0; i < nsteps; ++i) st.step(field_.phi, field_.t + i * h, h);
    field_.t = t;
  }
  return field_.phi;
}

FrozenPumpProvider::FrozenPumpProvider(const MeanFieldProblem& prob, CondensateField start)
    : grid_(prob.grid), phi0_(start.phi), buf_(start.phi) {
  CondensateField f0 = start;
  f0.t = 0;
  mu_ = chemical_potential(prob, f0);
}

const Eigen::VectorXcd& FrozenPumpProvider::at(double t) {
  buf_ = phi0_ * std::polar(1.0, -mu_ * t);
  return buf_;
}

SeriesProvider::SeriesProvider(std::vector<CondensateField> series) : series_(std::move(series)) {
  if (series_.empty()) throw std::invalid_argument("SeriesProvider: empty series");
}

const Eigen::VectorXcd& SeriesProvider::at(double t) {
  const auto& s = series_;
  if (t <= s.front().t) {
    buf_ = s.front().phi;
    return buf_;
  }
  if (t >= s.back().t) {
    buf_ = s.back().phi;
    return buf_;
  }
  size_t hi = 1;
  while (s[hi].t < t) ++hi;
  const auto& a = s[hi - 1];
  const auto& b = s[hi];
  const double w = (t - a.t) / (b.t - a.t);
  buf_ = (1.0 - w) * a.phi + w * b.phi;
  return buf_;
}

}  // namespace bellpair
