// hamiltonians.hpp — lattice model builders (Rydberg PXP, Fermi-Hubbard,
// Hofstadter-Bose-Hubbard), ground states, real-time evolution, and the
// single-site observables used by the transport experiments.
#pragma once

#include "qst/basis.hpp"
#include "qst/lanczos.hpp"
#include "qst/sparse.hpp"

#include <Eigen/Eigenvalues>

namespace qst {

// ---- Rydberg -----------------------------------------------------------

struct RydbergParams {
  double omega = 1.0;
  double delta = 0.0;
  double v2 = 0.0;
  std::vector<std::pair<int, int>> blockade;  // adjacency graph
  std::vector<std::pair<int, int>> v2_pairs;  // |i-j| = 2 interaction pairs
};

inline RydbergParams rydberg_chain_params(int n, double omega, double delta,
                                          double v2 = 0.0) {
  RydbergParams p{omega, delta, v2, {}, {}};
  for (int i = 0; i + 1 < n; ++i) p.blockade.push_back({i, i + 1});
  if (v2 != 0.0)
    for (int i = 0; i + 2 < n; ++i) p.v2_pairs.push_back({i, i + 2});
  return p;
}

// H = (Omega/2) sum_i P X_i P - Delta sum_i n_i + V2 sum n_i n_j.
// Built in the constrained basis, so the projectors are structural: a flip
// leaving the blockaded space simply has no matrix element.
inline SparseOp build_rydberg(const RydbergParams& p, const HilbertBasis& basis) {
  require(basis.kind == BasisKind::BlockadedQubit || basis.kind == BasisKind::Qubit,
          "build_rydberg: needs a qubit-like basis");
  for (auto [i, j] : p.blockade)
    require(i < basis.n_sites && j < basis.n_sites,
            "build_rydberg: site in params absent from basis");
  {
    auto has_bond = [&](std::pair<int, int> b) {
      for (auto [i, j] : basis.constraints.blockade)
        if ((i == b.first && j == b.second) || (i == b.second && j == b.first))
          return true;
      return false;
    };
    for (auto b : p.blockade)
      require(has_bond(b), "build_rydberg: basis does not enforce params blockade graph");
  }
  std::vector<Triplet> coo;
  Config flipped;
  for (Index i = 0; i < basis.dim(); ++i) {
    const Config& c = basis.configs[i];
    double diag = 0;
    for (int s = 0; s < basis.n_sites; ++s) diag -= p.delta * c[s];
    for (auto [a, b] : p.v2_pairs) diag += p.v2 * c[a] * c[b];
    if (diag != 0) coo.push_back({i, i, diag});
    for (int s = 0; s < basis.n_sites; ++s) {
      flipped = c;
      flipped[s] ^= 1;
      if (auto j = basis.find(flipped)) coo.push_back({*j, i, p.omega / 2});
    }
  }
  return SparseOp(basis.dim(), std::move(coo));
}

// E_i = (Omega/2) P X_i P - Delta n_i
inline SparseOp local_energy_density(int site, const RydbergParams& p,
                                     const HilbertBasis& basis) {
  std::vector<Triplet> coo;
  Config flipped;
  for (Index i = 0; i < basis.dim(); ++i) {
    const Config& c = basis.configs[i];
    if (c[site]) coo.push_back({i, i, -p.delta});
    flipped = c;
    flipped[site] ^= 1;
    if (auto j = basis.find(flipped)) coo.push_back({*j, i, p.omega / 2});
  }
  return SparseOp(basis.dim(), std::move(coo));
}

// Projected Pauli generator P sigma_i P on the constrained basis.
inline SparseOp projected_pauli(int site, char axis, const HilbertBasis& basis) {
  require(site >= 0 && site < basis.n_sites, "projected_pauli: site out of range");
  std::vector<Triplet> coo;
  Config flipped;
  for (Index i = 0; i < basis.dim(); ++i) {
    const Config& c = basis.configs[i];
    switch (axis) {
      case 'z':
        coo.push_back({i, i, c[site] ? -1.0 : 1.0});
        break;
      case 'x': {
        flipped = c;
        flipped[site] ^= 1;
        if (auto j = basis.find(flipped)) coo.push_back({*j, i, 1.0});
        break;
      }
      case 'y': {
        flipped = c;
        flipped[site] ^= 1;
        // Y|0> = i|1>, Y|1> = -i|0>
        if (auto j = basis.find(flipped))
          coo.push_back({*j, i, c[site] ? -I_UNIT : I_UNIT});
        break;
      }
      default:
        throw Error("projected_pauli: axis must be x, y or z");
    }
  }
  return SparseOp(basis.dim(), std::move(coo));
}

// Rotation gate convention: exp(-i (angle/2) P sigma_axis P).
inline StateVector apply_local_rotation(const StateVector& state, int site,
                                        double angle, char axis) {
  SparseOp g = projected_pauli(site, axis, *state.basis);
  return {state.basis, krylov_expv(g, state.amps, angle / 2)};
}

// ---- Fermi-Hubbard -------------------------------------------------------

struct FermiHubbardParams {
  double j = 1.0;
  double u = 0.0;
  std::vector<std::pair<int, int>> bonds;
};

namespace detail {

// apply c^dag_a c_b (modes in JW order) to config; returns sign or 0
inline int hop_config(const Config& c, int a, int b, Config& out) {
  if (!c[b]) return 0;
  out = c;
  int sign = 1;
  for (int m = 0; m < b; ++m) sign = out[m] ? -sign : sign;
  out[b] = 0;
  if (out[a]) return 0;
  for (int m = 0; m < a; ++m) sign = out[m] ? -sign : sign;
  out[a] = 1;
  return sign;
}

}  // namespace detail

// H = -J sum_{(i,j) in A, sigma} (c^dag_i c_j + h.c.) + U sum_i n_up n_down
inline SparseOp build_fermi_hubbard(const FermiHubbardParams& p,
                                    const HilbertBasis& basis) {
  require(basis.kind == BasisKind::FermionicFockSpinful,
          "build_fermi_hubbard: needs spinful fermionic basis");
  for (auto [a, b] : p.bonds) {
    require(a != b, "build_fermi_hubbard: self-bond");
    require(a < basis.n_sites && b < basis.n_sites,
            "build_fermi_hubbard: bond references missing site");
  }
  std::vector<Triplet> coo;
  Config out;
  const int n = basis.n_sites;
  for (Index i = 0; i < basis.dim(); ++i) {
    const Config& c = basis.configs[i];
    double diag = 0;
    for (int s = 0; s < n; ++s) diag += p.u * c[s] * c[n + s];
    if (diag != 0) coo.push_back({i, i, diag});
    for (auto [a, b] : p.bonds)
      for (int spin = 0; spin < 2; ++spin) {
        int ma = spin * n + a, mb = spin * n + b;
        for (auto [src, dst] : {std::pair{mb, ma}, std::pair{ma, mb}}) {
          int sgn = detail::hop_config(c, dst, src, out);
          if (sgn)
            if (auto j = basis.find(out)) coo.push_back({*j, i, -p.j * double(sgn)});
        }
      }
  }
  return SparseOp(basis.dim(), std::move(coo));
}

// ---- Hofstadter-Bose-Hubbard ----------------------------------------------

struct HBHParams {
  double j = 1.0;
  double u = 0.0;
  double alpha = 0.0;  // flux density, 0 <= alpha < 1
  int lx = 0, ly = 0;  // open boundaries
};

struct BoseBond {
  int a, b;   // hop b^dag_a b_b carries amplitude `amp`; h.c. added
  cplx amp;
};

inline SparseOp build_bose_bonds(const std::vector<BoseBond>& bonds, double u,
                                 const HilbertBasis& basis) {
  require(basis.kind == BasisKind::BosonicFock, "build_bose_bonds: needs bosonic basis");
  std::vector<Triplet> coo;
  Config out;
  for (Index i = 0; i < basis.dim(); ++i) {
    const Config& c = basis.configs[i];
    double diag = 0;
    for (int s = 0; s < basis.n_sites; ++s)
      diag += 0.5 * u * double(c[s]) * double(c[s] - 1);
    if (diag != 0) coo.push_back({i, i, diag});
    for (const auto& bd : bonds) {
      if (c[bd.b] > 0 && c[bd.a] < basis.constraints.max_occ) {
        out = c;
        out[bd.b] -= 1;
        out[bd.a] += 1;
        if (auto j = basis.find(out)) {
          cplx v = bd.amp * std::sqrt(double(c[bd.b]) * double(c[bd.a] + 1));
          coo.push_back({*j, i, v});
          coo.push_back({i, *j, std::conj(v)});
        }
      }
    }
  }
  return SparseOp(basis.dim(), std::move(coo));
}

// Landau gauge: x-hops plain, y-hops carry exp(2 pi i alpha x).
inline std::vector<BoseBond> hbh_bonds(const HBHParams& p) {
  std::vector<BoseBond> bonds;
  auto sid = [&](int x, int y) { return x * p.ly + y; };
  for (int x = 0; x < p.lx; ++x)
    for (int y = 0; y < p.ly; ++y) {
      if (x + 1 < p.lx) bonds.push_back({sid(x + 1, y), sid(x, y), -p.j});
      if (y + 1 < p.ly)
        bonds.push_back({sid(x, y + 1), sid(x, y),
                         -p.j * std::exp(cplx(0, 2 * PI * p.alpha * x))});
    }
  return bonds;
}

inline SparseOp build_hbh(const HBHParams& p, const HilbertBasis& basis) {
  require(p.alpha >= 0 && p.alpha < 1, "build_hbh: alpha out of range");
  require(basis.n_sites == p.lx * p.ly, "build_hbh: basis does not match lattice");
  return build_bose_bonds(hbh_bonds(p), p.u, basis);
}

inline std::vector<Pos> grid_positions(int lx, int ly, int layer = 0) {
  std::vector<Pos> pos(lx * ly);
  for (int x = 0; x < lx; ++x)
    for (int y = 0; y < ly; ++y) pos[x * ly + y] = {double(x), double(y), layer};
  return pos;
}

// sum_x <n(n-1)>/2 normalized per boson pair
inline double doublon_density(const StateVector& state) {
  const auto& b = *state.basis;
  double d = 0;
  for (Index i = 0; i < b.dim(); ++i) {
    double w = std::norm(state.amps[i]);
    if (w == 0) continue;
    for (int s = 0; s < b.n_sites; ++s) {
      double n = b.configs[i][s];
      d += w * n * (n - 1) / 2;
    }
  }
  long n_tot = 0;
  for (int s = 0; s < b.n_sites; ++s) n_tot += b.configs[0][s];
  require(n_tot >= 2, "doublon_density: fewer than two bosons");
  return d / (double(n_tot) * double(n_tot - 1) / 2);
}

// ---- ground states and evolution -------------------------------------------

inline GroundStateResult ground_state(const SparseOp& h, double tol = 1e-9,
                                      Index dense_cutoff = 512) {
  if (h.dim() <= dense_cutoff) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h.to_dense());
    GroundStateResult r;
    r.energy = es.eigenvalues()(0);
    r.vector = es.eigenvectors().col(0);
    r.residual = (h.apply(r.vector) - r.energy * r.vector).norm();
    r.degenerate = h.dim() > 1 && es.eigenvalues()(1) - es.eigenvalues()(0) < 1e-10;
    return r;
  }
  return lanczos_ground_state(h, tol);
}

inline StateVector ground_state(const SparseOp& h, BasisPtr basis, double tol = 1e-9) {
  auto r = ground_state(h, tol);
  return {std::move(basis), std::move(r.vector)};
}

inline StateVector evolve(const SparseOp& h, const StateVector& psi, double t,
                          double tol = 1e-11) {
  if (h.dim() <= 512) {
    Mat u = expm(cplx(0, -t) * h.to_dense());
    return {psi.basis, u * psi.amps};
  }
  return {psi.basis, krylov_expv(h, psi.amps, t, tol)};
}

inline DensityMatrix evolve(const SparseOp& h, const DensityMatrix& rho, double t,
                            double tol = 1e-11) {
  Mat a = evolve_columns(h, rho.mat, t, tol);        // U rho
  Mat b = evolve_columns(h, a.adjoint(), t, tol);    // U rho^dag U^dag = (U rho U^dag)^dag
  return {rho.basis, b.adjoint()};
}

}  // namespace qst
