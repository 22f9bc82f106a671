// basis.hpp — constrained many-body configuration bases, tensor extension,
// vectorization, and partial traces.
//
// Conventions fixed here and relied on everywhere else:
//  * configurations are occupation tuples over modes, listed in ascending
//    lexicographic order, and index_of(configs[i]) == i;
//  * spinful fermions use one mode per (site, spin) with all spin-up modes
//    first (by site), then all spin-down modes; Jordan-Wigner strings follow
//    this mode order (the basis itself is purely combinatorial);
//  * vectorize is row-major over basis ordinals: vec(A)[k*d + l] = A(k,l).
#pragma once

#include "qst/common.hpp"

#include <algorithm>
#include <memory>
#include <optional>

namespace qst {

enum class BasisKind { Qubit, BlockadedQubit, BosonicFock, FermionicFockSpinful };

inline const char* to_string(BasisKind k) {
  switch (k) {
    case BasisKind::Qubit: return "qubit";
    case BasisKind::BlockadedQubit: return "blockaded-qubit";
    case BasisKind::BosonicFock: return "bosonic-fock";
    case BasisKind::FermionicFockSpinful: return "fermionic-fock-spinful";
  }
  return "?";
}

// Site coordinates; `layer` distinguishes ancilla planes stacked on a lattice.
struct Pos {
  double x = 0, y = 0;
  int layer = 0;
  bool operator==(const Pos& o) const {
    return x == o.x && y == o.y && layer == o.layer;
  }
};

using Config = std::vector<std::uint16_t>;

struct BasisConstraints {
  std::vector<std::pair<int, int>> blockade;  // site pairs, n_i n_j = 0
  int max_occ = 1;                            // per-mode occupation cap
  std::optional<int> total_number;            // sum over all modes
  std::optional<int> total_up, total_down;    // fermionic per-spin totals
};

class HilbertBasis {
 public:
  BasisKind kind{};
  int n_sites = 0;
  int n_modes = 0;  // == n_sites except spinful fermions (2*n_sites)
  std::vector<Pos> positions;
  BasisConstraints constraints;
  std::vector<Config> configs;

  Index dim() const { return Index(configs.size()); }

  bool fermionic() const { return kind == BasisKind::FermionicFockSpinful; }

  // mode id of (site, spin); spin: 0 = up, 1 = down
  int mode(int site, int spin = 0) const {
    return fermionic() ? spin * n_sites + site : site;
  }

  Index index_of(const Config& c) const {
    auto it = std::lower_bound(configs.begin(), configs.end(), c);
    require(it != configs.end() && *it == c, "basis: configuration not in basis");
    return Index(it - configs.begin());
  }

  std::optional<Index> find(const Config& c) const {
    auto it = std::lower_bound(configs.begin(), configs.end(), c);
    if (it == configs.end() || *it != c) return std::nullopt;
    return Index(it - configs.begin());
  }

  // Re-checkable constraint predicate over a raw occupation tuple.
  bool admissible(const Config& c) const {
    if (int(c.size()) != n_modes) return false;
    long total = 0, nup = 0, ndown = 0;
    for (int m = 0; m < n_modes; ++m) {
      if (c[m] > constraints.max_occ) return false;
      total += c[m];
      if (fermionic()) (m < n_sites ? nup : ndown) += c[m];
    }
    if (constraints.total_number && total != *constraints.total_number) return false;
    if (constraints.total_up && nup != *constraints.total_up) return false;
    if (constraints.total_down && ndown != *constraints.total_down) return false;
    for (auto [i, j] : constraints.blockade)
      if (site_occ(c, i) > 0 && site_occ(c, j) > 0) return false;
    return true;
  }

  int site_occ(const Config& c, int site) const {
    return fermionic() ? c[site] + c[n_sites + site] : c[site];
  }

  std::uint64_t content_hash() const {
    Fnv64 h;
    h.str(to_string(kind));
    h.i64(n_sites);
    h.i64(n_modes);
    for (const auto& c : configs) h.bytes(c.data(), c.size() * sizeof(Config::value_type));
    return h.h;
  }
};

using BasisPtr = std::shared_ptr<const HilbertBasis>;

namespace detail {

inline void enumerate_configs(HilbertBasis& b) {
  // DFS in mode order; lexicographic ascending comes out naturally.
  Config c(b.n_modes, 0);
  std::vector<std::vector<int>> blocked_by(b.n_sites);  // earlier sites blocking this one
  for (auto [i, j] : b.constraints.blockade) {
    int lo = std::min(i, j), hi = std::max(i, j);
    require(lo >= 0 && hi < b.n_sites, "basis: blockade bond references missing site");
    require(lo != hi, "basis: blockade self-bond");
    blocked_by[hi].push_back(lo);
  }
  const auto& cs = b.constraints;
  long want_total = cs.total_number.value_or(-1);
  auto rec = [&](auto&& self, int m, long total, long nup, long ndown) -> void {
    if (m == b.n_modes) {
      if (want_total >= 0 && total != want_total) return;
      if (cs.total_up && nup != *cs.total_up) return;
      if (cs.total_down && ndown != *cs.total_down) return;
      b.configs.push_back(c);
      return;
    }
    long room = long(cs.max_occ) * (b.n_modes - m - 1);
    for (int occ = 0; occ <= cs.max_occ; ++occ) {
      long t = total + occ;
      if (want_total >= 0 && (t > want_total || t + room < want_total)) {
        if (t > want_total) break;
        continue;
      }
      if (occ > 0 && !b.fermionic()) {
        // blockade applies to site occupancy; check earlier bonded sites
        bool bad = false;
        for (int s : blocked_by[m])
          if (c[s] > 0) { bad = true; break; }
        if (bad) continue;
      }
      if (occ > 0 && b.fermionic()) {
        int site = m % b.n_sites;
        bool bad = false;
        for (int s : blocked_by[site])
          if (b.site_occ(c, s) > 0) { bad = true; break; }
        // same-site other-spin handled only through blockade if requested
        if (bad) continue;
      }
      c[m] = std::uint16_t(occ);
      long u = nup + ((b.fermionic() && m < b.n_sites) ? occ : 0);
      long d = ndown + ((b.fermionic() && m >= b.n_sites) ? occ : 0);
      self(self, m + 1, t, u, d);
    }
    c[m] = 0;
  };
  rec(rec, 0, 0, 0, 0);
  require(!b.configs.empty(), "basis: constraints admit no configuration");
}

}  // namespace detail

// ---- builders ------------------------------------------------------------

inline std::vector<Pos> line_positions(int n, double y = 0, int layer = 0,
                                       double x0 = 0) {
  std::vector<Pos> p(n);
  for (int i = 0; i < n; ++i) p[i] = {x0 + i, y, layer};
  return p;
}

inline BasisPtr make_qubits(int n, std::vector<Pos> pos = {}) {
  auto b = std::make_shared<HilbertBasis>();
  b->kind = BasisKind::Qubit;
  b->n_sites = b->n_modes = n;
  b->positions = pos.empty() ? line_positions(n) : std::move(pos);
  b->constraints.max_occ = 1;
  detail::enumerate_configs(*b);
  return b;
}

inline BasisPtr make_blockaded(int n, std::vector<std::pair<int, int>> bonds,
                               std::vector<Pos> pos = {}) {
  auto b = std::make_shared<HilbertBasis>();
  b->kind = BasisKind::BlockadedQubit;
  b->n_sites = b->n_modes = n;
  b->positions = pos.empty() ? line_positions(n) : std::move(pos);
  b->constraints.max_occ = 1;
  b->constraints.blockade = std::move(bonds);
  detail::enumerate_configs(*b);
  return b;
}

inline BasisPtr make_blockaded_chain(int n) {
  std::vector<std::pair<int, int>> bonds;
  for (int i = 0; i + 1 < n; ++i) bonds.push_back({i, i + 1});
  return make_blockaded(n, std::move(bonds));
}

inline BasisPtr make_bosonic(int n_sites, std::optional<int> total, int max_occ,
                             std::vector<Pos> pos = {}) {
  auto b = std::make_shared<HilbertBasis>();
  b->kind = BasisKind::BosonicFock;
  b->n_sites = b->n_modes = n_sites;
  b->positions = pos.empty() ? line_positions(n_sites) : std::move(pos);
  b->constraints.max_occ = max_occ;
  b->constraints.total_number = total;
  detail::enumerate_configs(*b);
  return b;
}

inline BasisPtr make_fermionic(int n_sites, std::optional<int> n_up,
                               std::optional<int> n_down,
                               std::vector<Pos> pos = {}) {
  auto b = std::make_shared<HilbertBasis>();
  b->kind = BasisKind::FermionicFockSpinful;
  b->n_sites = n_sites;
  b->n_modes = 2 * n_sites;
  b->positions = pos.empty() ? line_positions(n_sites) : std::move(pos);
  b->constraints.max_occ = 1;
  b->constraints.total_up = n_up;
  b->constraints.total_down = n_down;
  detail::enumerate_configs(*b);
  return b;
}

// ---- tensor extension ----------------------------------------------------

struct JointConstraints {
  // extra blockade bonds in extended-site numbering (system sites first)
  std::vector<std::pair<int, int>> blockade;
  // conserved totals across system + ancilla; when any is set the extended
  // basis spans the whole fixed-charge sector (particles may migrate between
  // the parts during the quench), not just products of part configurations
  std::optional<int> total_number;
  std::optional<int> total_up, total_down;
  std::optional<int> max_occ;  // per-site cap in the extended space

  bool has_totals() const {
    return total_number.has_value() || total_up.has_value() || total_down.has_value();
  }
};

// Extended basis of (system, ancilla) configurations. Without joint totals it
// is the set of admissible pairs; with joint totals it is the whole
// fixed-charge sector over the union of sites. Every configuration splits by
// position; the (s, a) ordinal pair is defined where both parts lie in their
// part bases (-1 otherwise). Pairs forbidden by joint constraints are simply
// absent and carry zero amplitude in the free-product embedding.
class ExtendedBasis : public HilbertBasis {
 public:
  BasisPtr sys, anc;
  std::vector<std::pair<Index, Index>> split;  // ext ordinal -> (sys, anc) or (-1,-1)

  Index sys_of(Index z) const { return split[z].first; }
  Index anc_of(Index z) const { return split[z].second; }

  std::optional<Index> ext_index(Index s, Index a) const {
    Config c = join_configs(sys->configs[s], anc->configs[a]);
    return find(c);
  }

  Config join_configs(const Config& s, const Config& a) const {
    Config c(n_modes);
    if (fermionic()) {
      int ns = sys->n_sites, na = anc->n_sites;
      for (int i = 0; i < ns; ++i) c[i] = s[i], c[n_sites + i] = s[ns + i];
      for (int i = 0; i < na; ++i)
        c[ns + i] = a[i], c[n_sites + ns + i] = a[na + i];
    } else {
      std::copy(s.begin(), s.end(), c.begin());
      std::copy(a.begin(), a.end(), c.begin() + sys->n_modes);
    }
    return c;
  }

  void split_config(const Config& c, Config& s, Config& a) const {
    if (fermionic()) {
      int ns = sys->n_sites, na = anc->n_sites;
      s.resize(2 * ns);
      a.resize(2 * na);
      for (int i = 0; i < ns; ++i) s[i] = c[i], s[ns + i] = c[n_sites + i];
      for (int i = 0; i < na; ++i)
        a[i] = c[ns + i], a[na + i] = c[n_sites + ns + i];
    } else {
      s.assign(c.begin(), c.begin() + sys->n_modes);
      a.assign(c.begin() + sys->n_modes, c.end());
    }
  }
};

using ExtBasisPtr = std::shared_ptr<const ExtendedBasis>;

inline ExtBasisPtr tensor_extend(BasisPtr sys, BasisPtr anc,
                                 JointConstraints joint = {}) {
  auto qubit_like = [](BasisKind k) {
    return k == BasisKind::Qubit || k == BasisKind::BlockadedQubit;
  };
  require(sys->kind == anc->kind || (qubit_like(sys->kind) && qubit_like(anc->kind)),
          "tensor_extend: mixed basis kinds");
  for (const auto& ps : sys->positions)
    for (const auto& pa : anc->positions)
      require(!(ps == pa), "tensor_extend: site position collision between system and ancilla");
  auto b = std::make_shared<ExtendedBasis>();
  b->kind = sys->kind == anc->kind ? sys->kind : BasisKind::BlockadedQubit;
  b->n_sites = sys->n_sites + anc->n_sites;
  b->n_modes = sys->n_modes + anc->n_modes;
  b->positions = sys->positions;
  b->positions.insert(b->positions.end(), anc->positions.begin(),
                      anc->positions.end());
  b->sys = sys;
  b->anc = anc;
  b->constraints.max_occ = std::max(sys->constraints.max_occ, anc->constraints.max_occ);
  b->constraints.total_number = joint.total_number;
  // union of constraints: system bonds, ancilla bonds (shifted), joint bonds
  auto& bonds = b->constraints.blockade;
  bonds = sys->constraints.blockade;
  for (auto [i, j] : anc->constraints.blockade)
    bonds.push_back({i + sys->n_sites, j + sys->n_sites});
  for (auto [i, j] : joint.blockade) {
    require(i < b->n_sites && j < b->n_sites,
            "tensor_extend: joint constraint references missing site");
    bonds.push_back({i, j});
  }
  Config s, a;
  if (joint.has_totals()) {
    // enumerate the whole fixed-charge sector over the union of sites
    b->constraints.total_up = joint.total_up;
    b->constraints.total_down = joint.total_down;
    if (joint.max_occ)
      b->constraints.max_occ = *joint.max_occ;
    else if (b->kind == BasisKind::BosonicFock && joint.total_number)
      b->constraints.max_occ = *joint.total_number;
    detail::enumerate_configs(*b);
  } else {
    // free or blockade-joined product: admissible pairs, part constraints kept
    for (Index is = 0; is < sys->dim(); ++is)
      for (Index ia = 0; ia < anc->dim(); ++ia) {
        Config c = b->join_configs(sys->configs[is], anc->configs[ia]);
        if (b->admissible(c)) b->configs.push_back(std::move(c));
      }
    require(!b->configs.empty(), "tensor_extend: joint constraints admit no configuration");
    std::sort(b->configs.begin(), b->configs.end());
  }
  b->split.resize(b->configs.size());
  for (Index z = 0; z < b->dim(); ++z) {
    b->split_config(b->configs[z], s, a);
    auto is = sys->find(s), ia = anc->find(a);
    b->split[z] = {is ? *is : Index(-1), ia ? *ia : Index(-1)};
  }
  return b;
}

// ---- domain value types ----------------------------------------------------

struct StateVector {
  BasisPtr basis;
  Vec amps;

  double norm() const { return amps.norm(); }
  void check_normalized(double tol = 1e-10) const {
    require(std::abs(norm() - 1.0) <= tol, "StateVector: not normalized");
  }
};

struct DensityMatrix {
  BasisPtr basis;
  Mat mat;

  double trace_real() const { return mat.trace().real(); }
  // Hermitian within 1e-10, trace 1 within 1e-10, eigenvalues >= -1e-9.
  // The PSD slack is deliberate: reconstructed states are legitimately
  // slightly non-positive.
  void validate(double tol = 1e-10, double psd_tol = 1e-9) const {
    require((mat - mat.adjoint()).cwiseAbs().maxCoeff() <= tol,
            "DensityMatrix: not Hermitian");
    require(std::abs(mat.trace() - cplx(1.0)) <= tol, "DensityMatrix: trace != 1");
    Eigen::SelfAdjointEigenSolver<Mat> es(mat, Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -psd_tol,
            "DensityMatrix: negative eigenvalue");
  }
};

struct OperatorMatrix {
  BasisPtr basis;
  Mat mat;
  bool hermitian = false;

  void check_hermitian(double tol = 1e-10) const {
    require((mat - mat.adjoint()).cwiseAbs().maxCoeff() <= tol,
            "OperatorMatrix: hermitian flag violated");
  }
};

inline DensityMatrix pure_density(const StateVector& psi) {
  return {psi.basis, psi.amps * psi.amps.adjoint()};
}

// ---- vectorization ---------------------------------------------------------

inline Vec vectorize(const Mat& a) {
  Vec v(a.rows() * a.cols());
  for (Index k = 0; k < a.rows(); ++k)
    for (Index l = 0; l < a.cols(); ++l) v[k * a.cols() + l] = a(k, l);
  return v;
}

inline Mat devectorize(const Vec& v, Index d) {
  require(v.size() == d * d, "devectorize: length mismatch");
  Mat a(d, d);
  for (Index k = 0; k < d; ++k)
    for (Index l = 0; l < d; ++l) a(k, l) = v[k * d + l];
  return a;
}

// ---- partial trace ---------------------------------------------------------

namespace detail {

// Jordan-Wigner reordering sign for splitting a fermionic configuration into
// (kept, traced) mode groups: (-1)^{#crossings} where a crossing is an
// occupied traced mode preceding an occupied kept mode in the original order.
inline int split_sign(const Config& c, const std::vector<int>& kept_mask) {
  int sign = 0, traced_seen = 0;
  for (std::size_t m = 0; m < c.size(); ++m) {
    if (!c[m]) continue;
    if (kept_mask[m])
      sign += traced_seen;
    else
      ++traced_seen;
  }
  return (sign & 1) ? -1 : 1;
}

}  // namespace detail

// Reduced operator on the kept sites. Constrained bases are handled through
// their free-product embedding: configuration pairs forbidden by constraints
// contribute zero. `keep_sites` lists site ids in the input basis. A target
// kept basis may be supplied (it must contain every kept pattern that occurs);
// by default the unconstrained free factor is used.
inline std::pair<Mat, BasisPtr> partial_trace(const Mat& rho, const HilbertBasis& b,
                                              const std::vector<int>& keep_sites,
                                              BasisPtr kept_basis = nullptr) {
  require(rho.rows() == b.dim() && rho.cols() == b.dim(),
          "partial_trace: matrix does not match basis");
  std::vector<int> keep_site_mask(b.n_sites, 0);
  for (int s : keep_sites) {
    require(s >= 0 && s < b.n_sites, "partial_trace: site out of range");
    keep_site_mask[s] = 1;
  }
  std::vector<int> keep_mode_mask(b.n_modes, 0);
  for (int m = 0; m < b.n_modes; ++m) {
    int site = b.fermionic() ? m % b.n_sites : m;
    keep_mode_mask[m] = keep_site_mask[site];
  }

  BasisPtr kb = kept_basis;
  if (!kb) {
    // kept-factor basis: unconstrained free factor of the same kind
    auto fresh = std::make_shared<HilbertBasis>();
    fresh->kind = b.kind;
    fresh->n_sites = int(keep_sites.size());
    fresh->n_modes = b.fermionic() ? 2 * fresh->n_sites : fresh->n_sites;
    fresh->constraints.max_occ = b.constraints.max_occ;
    for (int s : keep_sites) fresh->positions.push_back(b.positions[s]);
    detail::enumerate_configs(*fresh);
    kb = fresh;
  }

  auto project = [&](const Config& c, Config& kept, Config& rest) {
    kept.clear();
    rest.clear();
    if (b.fermionic()) {
      for (int spin = 0; spin < 2; ++spin)
        for (int s = 0; s < b.n_sites; ++s)
          (keep_site_mask[s] ? kept : rest).push_back(c[spin * b.n_sites + s]);
    } else {
      for (int m = 0; m < b.n_modes; ++m)
        (keep_mode_mask[m] ? kept : rest).push_back(c[m]);
    }
  };

  // group input ordinals by traced pattern
  std::vector<Index> kept_idx(b.dim());
  std::vector<Config> rest_pat(b.dim());
  std::vector<int> sign(b.dim(), 1);
  Config kc, rc;
  for (Index i = 0; i < b.dim(); ++i) {
    project(b.configs[i], kc, rc);
    kept_idx[i] = kb->index_of(kc);
    rest_pat[i] = rc;
    if (b.fermionic()) sign[i] = detail::split_sign(b.configs[i], keep_mode_mask);
  }
  Mat out = Mat::Zero(kb->dim(), kb->dim());
  // group ordinals by traced pattern; only within-group pairs contribute
  std::vector<Index> order(b.dim());
  for (Index i = 0; i < b.dim(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](Index i, Index j) { return rest_pat[i] < rest_pat[j]; });
  for (std::size_t g0 = 0; g0 < order.size();) {
    std::size_t g1 = g0 + 1;
    while (g1 < order.size() && rest_pat[order[g1]] == rest_pat[order[g0]]) ++g1;
    for (std::size_t p = g0; p < g1; ++p)
      for (std::size_t q = g0; q < g1; ++q) {
        Index i = order[p], j = order[q];
        out(kept_idx[i], kept_idx[j]) += double(sign[i] * sign[j]) * rho(i, j);
      }
    g0 = g1;
  }
  return {std::move(out), kb};
}

inline DensityMatrix partial_trace(const DensityMatrix& rho,
                                   const std::vector<int>& keep_sites) {
  auto [m, kb] = partial_trace(rho.mat, *rho.basis, keep_sites);
  return {kb, std::move(m)};
}

// Reduced density matrix of a pure state without forming the full projector:
// group configurations by the traced pattern and accumulate outer products.
inline DensityMatrix reduced_density(const StateVector& psi,
                                     const std::vector<int>& keep_sites) {
  const auto& b = *psi.basis;
  std::vector<int> keep_site_mask(b.n_sites, 0);
  for (int s : keep_sites) {
    require(s >= 0 && s < b.n_sites, "reduced_density: site out of range");
    keep_site_mask[s] = 1;
  }
  std::vector<int> keep_mode_mask(b.n_modes, 0);
  for (int m = 0; m < b.n_modes; ++m)
    keep_mode_mask[m] = keep_site_mask[b.fermionic() ? m % b.n_sites : m];

  auto kb = std::make_shared<HilbertBasis>();
  kb->kind = b.kind;
  kb->n_sites = int(keep_sites.size());
  kb->n_modes = b.fermionic() ? 2 * kb->n_sites : kb->n_sites;
  kb->constraints.max_occ = b.constraints.max_occ;
  for (int s : keep_sites) kb->positions.push_back(b.positions[s]);
  detail::enumerate_configs(*kb);

  std::vector<Index> kept_idx(b.dim());
  std::vector<Config> rest_pat(b.dim());
  Config kc, rc;
  for (Index i = 0; i < b.dim(); ++i) {
    const Config& c = b.configs[i];
    kc.clear();
    rc.clear();
    if (b.fermionic()) {
      for (int spin = 0; spin < 2; ++spin)
        for (int s = 0; s < b.n_sites; ++s)
          (keep_site_mask[s] ? kc : rc).push_back(c[spin * b.n_sites + s]);
    } else {
      for (int m = 0; m < b.n_modes; ++m)
        (keep_mode_mask[m] ? kc : rc).push_back(c[m]);
    }
    kept_idx[i] = kb->index_of(kc);
    rest_pat[i] = rc;
  }
  std::vector<Index> order(b.dim());
  for (Index i = 0; i < b.dim(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](Index i, Index j) { return rest_pat[i] < rest_pat[j]; });
  Mat out = Mat::Zero(kb->dim(), kb->dim());
  Vec group = Vec::Zero(kb->dim());
  for (std::size_t g0 = 0; g0 < order.size();) {
    std::size_t g1 = g0 + 1;
    while (g1 < order.size() && rest_pat[order[g1]] == rest_pat[order[g0]]) ++g1;
    group.setZero();
    for (std::size_t p = g0; p < g1; ++p) {
      Index i = order[p];
      double sgn = b.fermionic()
                       ? double(detail::split_sign(b.configs[i], keep_mode_mask))
                       : 1.0;
      group[kept_idx[i]] = sgn * psi.amps[i];
    }
    out.noalias() += group * group.adjoint();
    g0 = g1;
  }
  return {kb, std::move(out)};
}

inline double purity(const Mat& rho) { return (rho * rho).trace().real(); }

}  // namespace qst
