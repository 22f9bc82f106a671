// bcs.hpp — BCS Gaussian states on finite open lattices: mode tables, Wick
// contractions, reduced density matrices on small supports, pairing
// correlators, and the d-wave witness.
//
// Single-particle basis: sine standing waves of the open box,
// phi_k(x, y) = N sin(kx (x+1)) sin(ky (y+1)), k = (pi mx/(Lx+1), pi my/(Ly+1)),
// with pairing between the up and down copies of the same standing-wave mode.
// u, v come from the robust parametrization v^2 = (1 - xi/E)/2 so that d-wave
// nodal modes with xi < 0 are treated as occupied.
#pragma once

#include "qst/basis.hpp"
#include "qst/linalg.hpp"

#include <map>

namespace qst {

enum class Pairing { SWave, DWave };

struct BCSParams {
  int lx = 0, ly = 0;
  double mu = 0.0;
  double delta = 0.0;
  Pairing pairing = Pairing::SWave;
};

struct LatticeSite {
  int x = 0, y = 0;
  bool operator==(const LatticeSite& o) const { return x == o.x && y == o.y; }
  bool operator<(const LatticeSite& o) const {
    return x != o.x ? x < o.x : y < o.y;
  }
};

class BCSState {
 public:
  explicit BCSState(const BCSParams& p) : p_(p) {
    require(p.delta >= 0, "BCSState: delta must be nonnegative");
    const int nm = p.lx * p.ly;
    u_.resize(nm);
    v_.resize(nm);
    kx_.resize(nm);
    ky_.resize(nm);
    int m = 0;
    for (int mx = 1; mx <= p.lx; ++mx)
      for (int my = 1; my <= p.ly; ++my, ++m) {
        double kx = PI * mx / (p.lx + 1), ky = PI * my / (p.ly + 1);
        kx_[m] = kx;
        ky_[m] = ky;
        double xi = -2.0 * (std::cos(kx) + std::cos(ky)) - p.mu;
        double dk = p.pairing == Pairing::SWave
                        ? p.delta
                        : p.delta * (std::cos(kx) - std::cos(ky));
        double e = std::hypot(xi, dk);
        if (e < 1e-14) {
          u_[m] = v_[m] = 1.0 / std::sqrt(2.0);
          continue;
        }
        double v2 = 0.5 * (1.0 - xi / e);
        u_[m] = std::sqrt(std::max(0.0, 1.0 - v2));
        v_[m] = std::sqrt(std::max(0.0, v2));
        if (dk < 0) v_[m] = -v_[m];
      }
  }

  const BCSParams& params() const { return p_; }

  double phi(int m, LatticeSite r) const {
    double nx = std::sqrt(2.0 / (p_.lx + 1)), ny = std::sqrt(2.0 / (p_.ly + 1));
    return nx * std::sin(kx_[m] * (r.x + 1)) * ny * std::sin(ky_[m] * (r.y + 1));
  }

  // <c^dag_{r,s} c_{r',s}>
  double g(LatticeSite r, LatticeSite rp) const {
    double acc = 0;
    for (std::size_t m = 0; m < v_.size(); ++m)
      acc += v_[m] * v_[m] * phi(int(m), r) * phi(int(m), rp);
    return acc;
  }

  // <c^dag_{r,up} c^dag_{r',down}>
  double f(LatticeSite r, LatticeSite rp) const {
    double acc = 0;
    for (std::size_t m = 0; m < v_.size(); ++m)
      acc += u_[m] * v_[m] * phi(int(m), r) * phi(int(m), rp);
    return acc;
  }

  // mean total fermions per site
  double mean_filling() const {
    double acc = 0;
    for (double v : v_) acc += v * v;
    return 2.0 * acc / double(p_.lx * p_.ly);
  }

 private:
  BCSParams p_;
  std::vector<double> u_, v_, kx_, ky_;
};

// ---- Wick machinery ----------------------------------------------------------

struct FermiOp {
  LatticeSite site;
  int spin = 0;  // 0 up, 1 down
  bool dagger = false;
};

inline cplx contraction(const BCSState& s, const FermiOp& a, const FermiOp& b) {
  if (a.dagger && !b.dagger)
    return a.spin == b.spin ? cplx(s.g(a.site, b.site)) : cplx(0);
  if (!a.dagger && b.dagger) {
    if (a.spin != b.spin) return 0;
    double d = (a.site == b.site) ? 1.0 : 0.0;
    return cplx(d - s.g(a.site, b.site));
  }
  if (a.dagger && b.dagger) {
    if (a.spin == b.spin) return 0;
    // <c+_up c+_dn> = F, <c+_dn c+_up> = -F
    return a.spin == 0 ? cplx(s.f(a.site, b.site)) : cplx(-s.f(b.site, a.site));
  }
  // two annihilators: <c_up c_dn> = -F, <c_dn c_up> = +F
  if (a.spin == b.spin) return 0;
  return a.spin == 0 ? cplx(-s.f(a.site, b.site)) : cplx(s.f(b.site, a.site));
}

// Pfaffian of a complex antisymmetric matrix, O(n^3) skew elimination.
inline cplx pfaffian(Mat a) {
  const Index n = a.rows();
  if (n % 2) return 0;
  cplx result = 1;
  for (Index k = 0; k + 1 < n; k += 2) {
    // pivot: largest |a(j,k)| for j > k
    Index piv = k + 1;
    for (Index j = k + 2; j < n; ++j)
      if (std::abs(a(j, k)) > std::abs(a(piv, k))) piv = j;
    if (piv != k + 1) {
      a.row(piv).swap(a.row(k + 1));
      a.col(piv).swap(a.col(k + 1));
      result = -result;
    }
    cplx pivot = a(k + 1, k);
    if (pivot == cplx(0)) return 0;
    result *= -pivot;  // pf uses a(k, k+1) = -a(k+1, k)
    for (Index j = k + 2; j < n; ++j) {
      cplx factor = a(j, k) / pivot;
      a.row(j) -= factor * a.row(k + 1);
      a.col(j) -= factor * a.col(k + 1);
    }
  }
  return result;
}

// Expectation of an ordered product of fermion operators in the BCS state.
inline cplx wick_expectation(const BCSState& s, const std::vector<FermiOp>& ops) {
  const Index n = Index(ops.size());
  if (n % 2) return 0;
  if (n == 0) return 1;
  Mat m = Mat::Zero(n, n);
  for (Index p = 0; p < n; ++p)
    for (Index q = p + 1; q < n; ++q) {
      m(p, q) = contraction(s, ops[p], ops[q]);
      m(q, p) = -m(p, q);
    }
  return pfaffian(std::move(m));
}

// ---- reduced density matrices -------------------------------------------------

// RDM of the BCS state on `support` (<= 8 spinful sites), by entrywise Wick
// evaluation. Basis mode order: all up modes by support order, then all down.
inline DensityMatrix bcs_reduced_density_matrix(const BCSState& state,
                                                const std::vector<LatticeSite>& support) {
  require(support.size() <= 8, "bcs_reduced_density_matrix: support too large");
  const int ns = int(support.size());
  std::vector<Pos> pos;
  for (auto r : support) pos.push_back({double(r.x), double(r.y), 0});
  auto basis = make_fermionic(ns, std::nullopt, std::nullopt, pos);
  auto site_of_mode = [&](int m) { return support[m % ns]; };
  auto spin_of_mode = [&](int m) { return m < ns ? 0 : 1; };

  const Index d = basis->dim();
  Mat rho(d, d);
  std::vector<FermiOp> ops;
  for (Index row = 0; row < d; ++row)
    for (Index col = 0; col < d; ++col) {
      const Config& cn = basis->configs[row];   // <n|
      const Config& cnp = basis->configs[col];  // |n'>
      ops.clear();
      for (int m = 0; m < 2 * ns; ++m)
        if (cnp[m]) ops.push_back({site_of_mode(m), spin_of_mode(m), true});
      for (int m = 0; m < 2 * ns; ++m) {
        ops.push_back({site_of_mode(m), spin_of_mode(m), false});
        ops.push_back({site_of_mode(m), spin_of_mode(m), true});
      }
      for (int m = 2 * ns - 1; m >= 0; --m)
        if (cn[m]) ops.push_back({site_of_mode(m), spin_of_mode(m), false});
      rho(row, col) = wick_expectation(state, ops);
    }
  rho = hermitian_part(rho);
  double tr = rho.trace().real();
  require(std::abs(tr - 1.0) <= 1e-8,
          "bcs_reduced_density_matrix: trace deviates (" + std::to_string(tr) +
              "), correlation matrix ill-conditioned");
  rho /= tr;
  return {basis, std::move(rho)};
}

// C_{i,j,k,l} = <c+_{i,up} c+_{j,down} c_{k,up} c_{l,down}>
inline cplx exact_pairing_correlator(const BCSState& s, LatticeSite i, LatticeSite j,
                                     LatticeSite k, LatticeSite l) {
  return wick_expectation(
      s, {{i, 0, true}, {j, 1, true}, {k, 0, false}, {l, 1, false}});
}

// ---- operators on support bases -------------------------------------------------

namespace detail {

// apply c or c^dag at mode m with the JW string; returns 0 on annihilation
inline int apply_fermi_mode(Config& c, int m, bool dagger) {
  if (dagger ? c[m] != 0 : c[m] == 0) return 0;
  int sign = 1;
  for (int q = 0; q < m; ++q)
    if (c[q]) sign = -sign;
  c[m] = dagger ? 1 : 0;
  return sign;
}

}  // namespace detail

// c^dag_{i,up} c^dag_{j,down} c_{k,up} c_{l,down} on a fermionic support basis,
// sites given as local ids. Non-Hermitian; conserves per-spin particle number.
inline Mat pairing_correlator_operator(int i, int j, int k, int l,
                                       const HilbertBasis& basis) {
  require(basis.kind == BasisKind::FermionicFockSpinful,
          "pairing_correlator_operator: fermionic basis required");
  for (int s : {i, j, k, l})
    require(s >= 0 && s < basis.n_sites, "pairing_correlator_operator: site outside support");
  Mat m = Mat::Zero(basis.dim(), basis.dim());
  for (Index col = 0; col < basis.dim(); ++col) {
    Config c = basis.configs[col];
    int sign = 1, step;
    // right-to-left: c_{l,down}, c_{k,up}, c+_{j,down}, c+_{i,up}
    if (!(step = detail::apply_fermi_mode(c, basis.mode(l, 1), false))) continue;
    sign *= step;
    if (!(step = detail::apply_fermi_mode(c, basis.mode(k, 0), false))) continue;
    sign *= step;
    if (!(step = detail::apply_fermi_mode(c, basis.mode(j, 1), true))) continue;
    sign *= step;
    if (!(step = detail::apply_fermi_mode(c, basis.mode(i, 0), true))) continue;
    sign *= step;
    if (auto row = basis.find(c)) m(*row, col) += double(sign);
  }
  return m;
}

// D = sum_{j in N(i)} chi_j C(0, j, 1y, 0): chi = +1 horizontal, -1 vertical.
inline double dwave_witness(const std::map<LatticeSite, cplx>& correlators,
                            LatticeSite center = {0, 0}) {
  const std::vector<std::pair<LatticeSite, double>> neighbors = {
      {{center.x + 1, center.y}, +1.0},
      {{center.x - 1, center.y}, +1.0},
      {{center.x, center.y + 1}, -1.0},
      {{center.x, center.y - 1}, -1.0}};
  double d = 0;
  for (auto [site, chi] : neighbors) {
    auto it = correlators.find(site);
    require(it != correlators.end(), "dwave_witness: missing neighbor correlator");
    d += chi * it->second.real();
  }
  return d;
}

inline double exact_dwave_witness(const BCSState& s, LatticeSite center) {
  LatticeSite oneY{center.x, center.y + 1};
  std::map<LatticeSite, cplx> c;
  for (auto j : {LatticeSite{center.x + 1, center.y}, LatticeSite{center.x - 1, center.y},
                 LatticeSite{center.x, center.y + 1}, LatticeSite{center.x, center.y - 1}})
    c[j] = exact_pairing_correlator(s, center, j, oneY, center);
  return dwave_witness(c, center);
}

}  // namespace qst
