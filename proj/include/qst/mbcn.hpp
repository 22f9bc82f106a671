// mbcn.hpp — the many-body Chern number observable T(phi) (twist, swap and
// polarization factors), winding-number extraction, bond currents, and swap
// operators on doubled bases.
#pragma once

#include "qst/hamiltonians.hpp"

namespace qst {

// Three disjoint rectangular regions; R1 and R3 must be site-wise pairable by
// equal row (the swap partner of (x, y) in R1 is the unique (x', y) in R3).
struct MBCNRegions {
  std::vector<int> r1, r2, r3;  // site ids in the lattice basis
  int ly = 0;                   // region height
  int s = 2;                    // ground-state degeneracy exponent
};

inline void validate_regions(const MBCNRegions& reg, const HilbertBasis& basis) {
  std::vector<int> seen(basis.n_sites, 0);
  for (const auto* r : {&reg.r1, &reg.r2, &reg.r3})
    for (int s : *r) {
      require(s >= 0 && s < basis.n_sites, "MBCNRegions: site out of range");
      require(!seen[s]++, "MBCNRegions: regions overlap");
    }
  require(reg.r1.size() == reg.r3.size(), "MBCNRegions: R1 and R3 not congruent");
  for (int a : reg.r1) {
    int matches = 0;
    for (int b : reg.r3)
      if (basis.positions[a].y == basis.positions[b].y) ++matches;
    require(matches == 1, "MBCNRegions: R1 and R3 not pairable by row");
  }
}

// T(phi) = W1^dag(phi) S_{1,3} W1(phi) V1^s V2^s. All factors either permute
// Fock configurations or multiply diagonal phases, so the operator acts in
// O(dim) per application. The polarization exponent uses the local 0-based
// row within each region; the twist angle enters as exp(-i n phi), the
// orientation for which the nu = 1/2 Laughlin state winds by +1.
class MbcnOperator {
 public:
  MbcnOperator(MBCNRegions regions, BasisPtr basis)
      : reg_(std::move(regions)), basis_(std::move(basis)) {
    validate_regions(reg_, *basis_);
    for (int a : reg_.r1)
      for (int b : reg_.r3)
        if (basis_->positions[a].y == basis_->positions[b].y)
          swap_pairs_.push_back({a, b});
    // permutation of configurations under the R1 <-> R3 swap
    const Index d = basis_->dim();
    perm_.resize(d);
    Config c;
    for (Index i = 0; i < d; ++i) {
      c = basis_->configs[i];
      for (auto [a, b] : swap_pairs_) std::swap(c[a], c[b]);
      perm_[i] = basis_->index_of(c);  // boson-number conserving: always present
    }
    v12_.resize(d);
    n1_.resize(d);
    double ybase1 = region_ymin(reg_.r1), ybase2 = region_ymin(reg_.r2);
    for (Index i = 0; i < d; ++i) {
      const Config& cfg = basis_->configs[i];
      double phase = 0;
      int n1 = 0;
      for (int s : reg_.r1) {
        double yy = basis_->positions[s].y - ybase1;
        phase += reg_.s * 2.0 * PI * yy / reg_.ly * cfg[s];
        n1 += cfg[s];
      }
      for (int s : reg_.r2) {
        double yy = basis_->positions[s].y - ybase2;
        phase += reg_.s * 2.0 * PI * yy / reg_.ly * cfg[s];
      }
      v12_[i] = std::exp(cplx(0, phase));
      n1_[i] = n1;
    }
  }

  const MBCNRegions& regions() const { return reg_; }

  // diagonal readout factor V2^s alone (measured directly on R2)
  cplx v2_phase(const Config& cfg) const {
    double ybase2 = region_ymin(reg_.r2), phase = 0;
    for (int s : reg_.r2)
      phase += reg_.s * 2.0 * PI * (basis_->positions[s].y - ybase2) / reg_.ly * cfg[s];
    return std::exp(cplx(0, phase));
  }

  // <psi| T(phi) |psi>
  cplx expectation(const StateVector& psi, double phi) const {
    require(psi.basis.get() == basis_.get(), "MbcnOperator: basis mismatch");
    cplx acc = 0;
    for (Index i = 0; i < basis_->dim(); ++i) {
      if (psi.amps[i] == cplx(0)) continue;
      Index j = perm_[i];
      cplx phase = v12_[i] * std::exp(cplx(0, -phi * double(n1_[i] - n1_[j])));
      acc += std::conj(psi.amps[j]) * phase * psi.amps[i];
    }
    return acc;
  }

  // dense block of W1^dag S W1 V1^s on an arbitrary basis over the same sites
  // (used for per-sector estimator observables; excludes the V2 readout factor)
  Mat patch_block(const HilbertBasis& sector_basis, double phi) const {
    Mat m = Mat::Zero(sector_basis.dim(), sector_basis.dim());
    double ybase1 = region_ymin(reg_.r1);
    // region sites must be addressed by position within the sector basis
    std::vector<int> r1_local, pair_local(sector_basis.n_sites, -1);
    auto local_id = [&](int global) {
      for (int s = 0; s < sector_basis.n_sites; ++s)
        if (sector_basis.positions[s] == basis_->positions[global]) return s;
      throw Error("MbcnOperator: site missing from sector basis");
    };
    for (auto [a, b] : swap_pairs_) {
      int la = local_id(a), lb = local_id(b);
      pair_local[la] = lb;
      pair_local[lb] = la;
    }
    for (int a : reg_.r1) r1_local.push_back(local_id(a));
    Config c;
    for (Index i = 0; i < sector_basis.dim(); ++i) {
      const Config& cfg = sector_basis.configs[i];
      double phase = 0;
      int n1 = 0;
      for (std::size_t q = 0; q < r1_local.size(); ++q) {
        int s = r1_local[q];
        phase += reg_.s * 2.0 * PI * (sector_basis.positions[s].y - ybase1) / reg_.ly * cfg[s];
        n1 += cfg[s];
      }
      c = cfg;
      for (int s = 0; s < sector_basis.n_sites; ++s)
        if (pair_local[s] >= 0 && pair_local[s] > s) std::swap(c[s], c[pair_local[s]]);
      Index j = sector_basis.index_of(c);
      int n1j = 0;
      for (int s : r1_local) n1j += c[s];
      m(j, i) += std::exp(cplx(0, phase - phi * double(n1 - n1j)));
    }
    return m;
  }

 private:
  double region_ymin(const std::vector<int>& r) const {
    double y = std::numeric_limits<double>::infinity();
    for (int s : r) y = std::min(y, basis_->positions[s].y);
    return y;
  }

  MBCNRegions reg_;
  BasisPtr basis_;
  std::vector<std::pair<int, int>> swap_pairs_;
  std::vector<Index> perm_;
  std::vector<cplx> v12_;
  std::vector<int> n1_;
};

// ---- winding number ------------------------------------------------------------

struct WindingResult {
  int winding = 0;
  double raw = 0;        // accumulated angle / 2 pi before rounding
  bool reliable = true;  // false: sample near origin or non-integer residue
};

// C = round( sum_k Delta arg(T_{k+1}/T_k) / 2 pi ), branch-safe differences.
inline WindingResult winding_number(const std::vector<cplx>& samples, double eps_w = 0.0) {
  require(samples.size() >= 16, "winding_number: need at least 16 grid points");
  WindingResult out;
  double acc = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    cplx a = samples[k], b = samples[(k + 1) % samples.size()];
    if (std::abs(a) <= eps_w || std::abs(b) <= eps_w) out.reliable = false;
    if (a == cplx(0) || b == cplx(0)) {
      out.reliable = false;
      continue;
    }
    acc += std::arg(b / a);
  }
  out.raw = acc / (2 * PI);
  out.winding = int(std::llround(out.raw));
  if (std::abs(out.raw - out.winding) > 0.25) out.reliable = false;
  return out;
}

// ---- bond currents --------------------------------------------------------------

// j = i J_ab b^dag_a b_b + h.c. with J_ab the full hopping coefficient of the
// Hamiltonian (including sign and Peierls phase).
inline SparseOp bond_current_operator(const BoseBond& bond, const HilbertBasis& basis) {
  std::vector<Triplet> coo;
  Config out;
  for (Index i = 0; i < basis.dim(); ++i) {
    const Config& c = basis.configs[i];
    if (c[bond.b] > 0 && c[bond.a] < basis.constraints.max_occ) {
      out = c;
      out[bond.b] -= 1;
      out[bond.a] += 1;
      if (auto j = basis.find(out)) {
        cplx v = I_UNIT * bond.amp * std::sqrt(double(c[bond.b]) * double(c[bond.a] + 1));
        coo.push_back({*j, i, v});
        coo.push_back({i, *j, std::conj(v)});
      }
    }
  }
  return SparseOp(basis.dim(), std::move(coo));
}

// ---- swap operators on doubled bases ----------------------------------------------

// Permutation on the doubled basis (ordinal pair (i, j) -> i*d + j) exchanging
// the occupations of subsystem A between the copies. Entries exist where both
// the input pair and the swapped pair are admissible (free-product embedding).
inline SparseOp swap_operator(const std::vector<int>& a_sites, const HilbertBasis& basis) {
  for (int s : a_sites)
    require(s >= 0 && s < basis.n_sites, "swap_operator: site out of range");
  const Index d = basis.dim();
  std::vector<Triplet> coo;
  Config ci, cj;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      ci = basis.configs[i];
      cj = basis.configs[j];
      for (int s : a_sites) {
        if (basis.fermionic()) {
          std::swap(ci[s], cj[s]);
          std::swap(ci[basis.n_sites + s], cj[basis.n_sites + s]);
        } else {
          std::swap(ci[s], cj[s]);
        }
      }
      auto pi = basis.find(ci), pj = basis.find(cj);
      if (pi && pj) coo.push_back({*pi * d + *pj, i * d + j, 1.0});
    }
  return SparseOp(d * d, std::move(coo));
}

// Tr(S_A (x (x) y)) = Tr_A( Tr_B(x) Tr_B(y) ), evaluated directly.
inline cplx swap_pair_expectation(const SparseOp& swap_op, const Mat& x, const Mat& y) {
  const Index d = x.rows();
  // small-scale oracle; fine at test dimensions
  Mat kron(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      kron.block(i * d, j * d, d, d) = x(i, j) * y;
  Mat s = swap_op.to_dense();
  return (s * kron).trace();
}

}  // namespace qst
