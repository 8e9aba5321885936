#include "bellpair/gaussian_state.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "bellpair/bands.hpp"

namespace bellpair {

std::vector<int> GaussianState::resolve(const Region& r) const {
  std::vector<int> idx;
  for (int i = 0; i < n_modes(); ++i)
    if (r.contains(k[i])) idx.push_back(i);
  return idx;
}

int GaussianState::index_of(double k_query) const {
  auto it = std::lower_bound(k.begin(), k.end(), k_query - 1e-9);
  if (it == k.end() || std::abs(*it - k_query) > 1e-9)
    throw RangeError("GaussianState: momentum not on the stored grid");
  return static_cast<int>(it - k.begin());
}

GaussianState GaussianState::from_sectors(std::vector<double> kk, Eigen::MatrixXcd gp,
                                          Eigen::MatrixXcd mp, Eigen::MatrixXcd gm,
                                          Eigen::MatrixXcd mm) {
  GaussianState st;
  st.k = std::move(kk);
  st.g_plus = std::move(gp);
  st.m_plus = std::move(mp);
  st.g_minus = std::move(gm);
  st.m_minus = std::move(mm);
  st.symmetric = false;
  st.k_full = st.k;
  st.diag_plus = st.g_plus.diagonal().real();
  return st;
}

GaussianState GaussianState::from_sectors(std::vector<double> kk, Eigen::MatrixXcd gp,
                                          Eigen::MatrixXcd mp) {
  GaussianState st;
  st.k = std::move(kk);
  st.g_plus = std::move(gp);
  st.m_plus = std::move(mp);
  st.symmetric = true;
  st.k_full = st.k;
  st.diag_plus = st.g_plus.diagonal().real();
  return st;
}

namespace {

// Kernel matrices in discrete-mode representation (FFT order):
//   Cmode = F C F^dag / n (forward over rows, backward over columns),
//   Smode = F S F^T / n   (forward over both).
void to_mode_kernels(const Grid1d& g, const Eigen::MatrixXcd& c, const Eigen::MatrixXcd& s,
                     Fft& fft, Eigen::MatrixXcd& cm, Eigen::MatrixXcd& sm) {
  cm = c;
  sm = s;
  fft.forward_cols(cm);
  fft.backward_rows(cm);
  cm /= g.n;
  fft.forward_cols(sm);
  fft.forward_rows(sm);
  sm /= g.n;
}

std::vector<int> sorted_to_fft(int n) {
  std::vector<int> perm(n);
  for (int s = 0; s < n; ++s) perm[s] = (s + n / 2) % n;
  return perm;
}

}  // namespace

GaussianState build_state(const BogoliubovKernels& kernels) {
  std::vector<Region> all;  // empty -> full support
  return build_state(kernels, all);
}

GaussianState build_state(const BogoliubovKernels& kernels, const std::vector<Region>& support) {
  const Grid1d& g = kernels.grid;
  const int n = g.n;
  Fft fft(n);

  GaussianState st;
  st.t = kernels.t;
  st.box = g.box;
  const auto perm = sorted_to_fft(n);
  st.k_full.resize(n);
  for (int s = 0; s < n; ++s) st.k_full[s] = fft_momentum(perm[s], n, g.box);

  // support rows (sorted-momentum indices)
  std::vector<int> rows;
  if (support.empty()) {
    rows.resize(n);
    for (int i = 0; i < n; ++i) rows[i] = i;
  } else {
    for (int s = 0; s < n; ++s)
      for (const auto& r : support)
        if (r.contains(st.k_full[s])) {
          rows.push_back(s);
          break;
        }
  }
  st.k.resize(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) st.k[i] = st.k_full[rows[i]];

  Eigen::MatrixXcd cm, sm;
  auto sector = [&](const Eigen::MatrixXcd& c, const Eigen::MatrixXcd& s,
                    Eigen::MatrixXcd& g_out, Eigen::MatrixXcd& m_out, Eigen::VectorXd* diag) {
    to_mode_kernels(g, c, s, fft, cm, sm);
    const int m = static_cast<int>(rows.size());
    Eigen::MatrixXcd s_rows(m, n), c_rows(m, n);
    for (int i = 0; i < m; ++i) {
      s_rows.row(i) = sm.row(perm[rows[i]]);
      c_rows.row(i) = cm.row(perm[rows[i]]);
    }
    g_out.noalias() = s_rows.conjugate() * s_rows.transpose();
    m_out.noalias() = c_rows * s_rows.transpose();
    if (diag) {
      diag->resize(n);
      for (int s2 = 0; s2 < n; ++s2) (*diag)(s2) = sm.row(perm[s2]).squaredNorm();
    }
  };

  sector(kernels.c_plus, kernels.s_plus, st.g_plus, st.m_plus, &st.diag_plus);
  st.symmetric = kernels.symmetric;
  if (!kernels.symmetric)
    sector(kernels.c_minus, kernels.s_minus, st.g_minus, st.m_minus, nullptr);
  return st;
}

cxd second_order(const GaussianState& st, std::array<Spin, 4> s, std::array<double, 4> kq) {
  int i1 = st.index_of(kq[0]), i2 = st.index_of(kq[1]), i3 = st.index_of(kq[2]),
      i4 = st.index_of(kq[3]);
  return std::conj(st.m_spin(s[0], s[1], i1, i2)) * st.m_spin(s[2], s[3], i3, i4) +
         st.g_spin(s[0], s[2], i1, i3) * st.g_spin(s[1], s[3], i2, i4) +
         st.g_spin(s[0], s[3], i1, i4) * st.g_spin(s[1], s[2], i2, i3);
}

// ---- collective-operator factories ----

namespace ops {

namespace {
Bilinear make(const Region& r, cxd uu, cxd ud, cxd du, cxd dd, const char* name) {
  Bilinear b;
  b.region = r;
  b.w[0][0] = uu;
  b.w[0][1] = ud;
  b.w[1][0] = du;
  b.w[1][1] = dd;
  b.name = name;
  return b;
}
}  // namespace

Bilinear jx(const Region& r) { return make(r, 0, 0.5, 0.5, 0, "Jx"); }
Bilinear jy(const Region& r) { return make(r, 0, cxd(0, -0.5), cxd(0, 0.5), 0, "Jy"); }
Bilinear jz(const Region& r) { return make(r, 0.5, 0, 0, -0.5, "Jz"); }
Bilinear number(const Region& r) { return make(r, 0.5, 0, 0, 0.5, "N"); }
Bilinear atoms(const Region& r) { return make(r, 1.0, 0, 0, 1.0, "atoms"); }
Bilinear jplus(const Region& r) { return make(r, 0, 1.0, 0, 0, "J+"); }
Bilinear jminus(const Region& r) { return make(r, 0, 0, 1.0, 0, "J-"); }

}  // namespace ops

// ---- Wick engine ----
//
// A product of n bilinears is 2n field operators; the moment is the sum over
// all perfect pairings of products of ordered two-point functions.  Each
// pairing factorizes into cycles alternating bilinear weight matrices W_j and
// pair matrices; the cycle structure depends only on n and the pairing, so it
// is precomputed once as a small trace program and replayed with the
// state-dependent matrices.

namespace {

enum class MatKind : uint8_t { W, G, GTI, MAdj, M };

struct Token {
  MatKind kind;
  int j = 0;   // bilinear index for W
  bool transpose = false;
};
using Cycle = std::vector<Token>;
struct Program {
  std::vector<Cycle> cycles;
};

void enumerate_pairings(std::vector<int>& legs, std::vector<std::pair<int, int>>& cur,
                        std::vector<std::vector<std::pair<int, int>>>& out) {
  if (legs.empty()) {
    out.push_back(cur);
    return;
  }
  const int a = legs.front();
  for (size_t i = 1; i < legs.size(); ++i) {
    const int b = legs[i];
    std::vector<int> rest;
    for (size_t j2 = 1; j2 < legs.size(); ++j2)
      if (j2 != i) rest.push_back(legs[j2]);
    cur.emplace_back(a, b);
    enumerate_pairings(rest, cur, out);
    cur.pop_back();
  }
}

bool is_dagger(int leg) { return (leg % 2) == 0; }

MatKind pair_kind(int p, int q) {
  // p < q in operator order
  const bool dp = is_dagger(p), dq = is_dagger(q);
  if (dp && !dq) return MatKind::G;
  if (!dp && dq) return MatKind::GTI;
  if (dp && dq) return MatKind::MAdj;
  return MatKind::M;
}

Program build_program(int n, const std::vector<std::pair<int, int>>& pairing) {
  std::map<int, int> partner;
  for (auto [a, b] : pairing) {
    partner[a] = b;
    partner[b] = a;
  }
  Program prog;
  std::vector<bool> visited(n, false);
  for (int j0 = 0; j0 < n; ++j0) {
    if (visited[j0]) continue;
    Cycle cyc;
    const int start = 2 * j0;
    visited[j0] = true;
    cyc.push_back({MatKind::W, j0, false});
    int cur = 2 * j0 + 1;
    for (;;) {
      const int nxt = partner.at(cur);
      const int p = std::min(cur, nxt), q = std::max(cur, nxt);
      cyc.push_back({pair_kind(p, q), 0, cur != p});
      if (nxt == start) break;
      const int j = nxt / 2;
      visited[j] = true;
      if (is_dagger(nxt)) {
        cyc.push_back({MatKind::W, j, false});
        cur = 2 * j + 1;
      } else {
        cyc.push_back({MatKind::W, j, true});
        cur = 2 * j;
      }
    }
    prog.cycles.push_back(std::move(cyc));
  }
  return prog;
}

const std::vector<Program>& programs_for(int n) {
  static std::mutex mu;
  static std::map<int, std::vector<Program>> cache;
  std::lock_guard lk(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<int> legs(2 * n);
  for (int i = 0; i < 2 * n; ++i) legs[i] = i;
  std::vector<std::vector<std::pair<int, int>>> pairings;
  std::vector<std::pair<int, int>> cur;
  enumerate_pairings(legs, cur, pairings);
  std::vector<Program> progs;
  progs.reserve(pairings.size());
  for (const auto& p : pairings) progs.push_back(build_program(n, p));
  return cache.emplace(n, std::move(progs)).first->second;
}

}  // namespace

cxd wick_moment(const GaussianState& st, std::span<const Bilinear> prod) {
  const int n = static_cast<int>(prod.size());
  if (n < 1 || n > 4)
    throw std::invalid_argument("wick_moment: supports products of 1..4 bilinears");

  // Union of the participating modes.
  std::vector<std::vector<int>> region_idx(n);
  std::vector<int> u;
  for (int j = 0; j < n; ++j) {
    region_idx[j] = st.resolve(prod[j].region);
    if (region_idx[j].empty()) return 0.0;  // a bilinear over an empty window vanishes
    u.insert(u.end(), region_idx[j].begin(), region_idx[j].end());
  }
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  const int nu = static_cast<int>(u.size());
  const int m = 2 * nu;
  std::map<int, int> pos;
  for (int i = 0; i < nu; ++i) pos[u[i]] = i;

  // Composite-mode matrices: index = spin * nu + mode position.
  Eigen::MatrixXcd G(m, m), M(m, m);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nu; ++j) {
          G(a * nu + i, b * nu + j) =
              st.g_spin(static_cast<Spin>(a), static_cast<Spin>(b), u[i], u[j]);
          M(a * nu + i, b * nu + j) =
              st.m_spin(static_cast<Spin>(a), static_cast<Spin>(b), u[i], u[j]);
        }
  Eigen::MatrixXcd GTI = G.transpose();
  GTI.diagonal().array() += 1.0;
  Eigen::MatrixXcd MAdj = M.adjoint();

  std::vector<Eigen::MatrixXcd> W(n, Eigen::MatrixXcd::Zero(m, m));
  for (int j = 0; j < n; ++j)
    for (int gi : region_idx[j]) {
      const int p = pos[gi];
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) W[j](a * nu + p, b * nu + p) = prod[j].w[a][b];
    }

  auto matrix_of = [&](const Token& t) -> const Eigen::MatrixXcd& {
    switch (t.kind) {
      case MatKind::W: return W[t.j];
      case MatKind::G: return G;
      case MatKind::GTI: return GTI;
      case MatKind::MAdj: return MAdj;
      default: return M;
    }
  };

  cxd total = 0;
  Eigen::MatrixXcd chain, tmp;
  for (const auto& prog : programs_for(n)) {
    cxd val = 1.0;
    for (const auto& cyc : prog.cycles) {
      bool first = true;
      for (const auto& tok : cyc) {
        const auto& mat = matrix_of(tok);
        if (first) {
          chain = tok.transpose ? mat.transpose() : mat;
          first = false;
        } else if (tok.transpose) {
          tmp.noalias() = chain * mat.transpose();
          chain.swap(tmp);
        } else {
          tmp.noalias() = chain * mat;
          chain.swap(tmp);
        }
      }
      val *= chain.trace();
      if (val == 0.0) break;
    }
    total += val;
  }
  return total;
}

RatioResult g2_regions(const GaussianState& st, const Region& a, const Region& b) {
  const auto ia = st.resolve(a), ib = st.resolve(b);
  double num = 0, pop_a = 0, pop_b = 0;
  for (int i : ia) pop_a += st.g_spin(Spin::Up, Spin::Up, i, i).real();
  for (int j : ib) pop_b += st.g_spin(Spin::Down, Spin::Down, j, j).real();
  const double den = pop_a * pop_b;
  if (ia.empty() || ib.empty() || den <= 0) return {MomentStatus::EmptyRegion, 0};
  for (int i : ia)
    for (int j : ib) {
      num += (std::conj(st.m_spin(Spin::Up, Spin::Down, i, j)) *
                  st.m_spin(Spin::Down, Spin::Up, j, i) +
              st.g_spin(Spin::Up, Spin::Down, i, j) * st.g_spin(Spin::Down, Spin::Up, j, i))
                 .real();
      num += st.g_spin(Spin::Up, Spin::Up, i, i).real() *
             st.g_spin(Spin::Down, Spin::Down, j, j).real();
    }
  return {MomentStatus::Ok, num / den};
}

double region_atoms(const GaussianState& st, const Region& r) {
  double tot = 0;
  for (int i : st.resolve(r))
    tot += (st.g_spin(Spin::Up, Spin::Up, i, i) + st.g_spin(Spin::Down, Spin::Down, i, i)).real();
  return tot;
}

}  // namespace bellpair
