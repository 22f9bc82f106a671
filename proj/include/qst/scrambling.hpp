// scrambling.hpp — the scrambling map S induced by a quench: its POVM
// vectors, Born distributions, noisy generalizations, patched composites, and
// the controlled-unitary ensemble bridge to classical shadows.
//
// Row z of S is the rank-one form S_{z,(k,l)} = Psi(z,k) conj(Psi(z,l)) with
// Psi(., k) = U_t (|k> ⊗ |phi>); rows are only materialized into a dense
// d_ext × d_sys^2 matrix when inversion needs them.
#pragma once

#include "qst/basis.hpp"
#include "qst/hamiltonians.hpp"

namespace qst {

enum class QuenchSetup { Global, Patched, Bridged };

struct NoiseChannel {
  enum class Kind { LocalDephasing, GlobalDepolarizing, CustomKraus };
  Kind kind = Kind::GlobalDepolarizing;
  double gamma = 0.0;   // rate, 1/time
  int trotter_steps = 0;  // 0 = auto: ceil(20 * max(gamma t, ||H|| t))
  std::vector<int> sites;  // dephasing support; empty = all extended sites
  std::vector<Mat> kraus;  // CustomKraus only; applied once after the quench

  void check_kraus(Index dim) const {
    if (kind != Kind::CustomKraus) return;
    Mat acc = Mat::Zero(dim, dim);
    for (const auto& k : kraus) acc += k.adjoint() * k;
    require((acc - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff() <= 1e-10,
            "NoiseChannel: Kraus completeness violated");
  }
};

struct QuenchConfig {
  BasisPtr sys;
  BasisPtr anc;
  Vec phi;  // fiducial ancilla state, |phi| = 1, in anc basis ordering
  ExtBasisPtr ext;
  SparseOp hamiltonian;  // on ext basis
  double time = 0;
  QuenchSetup setup = QuenchSetup::Global;
  std::optional<NoiseChannel> noise;

  void validate(bool completeness_requested = true) const {
    require(std::abs(phi.norm() - 1.0) <= 1e-10, "QuenchConfig: |phi> not normalized");
    require(phi.size() == anc->dim(), "QuenchConfig: |phi> size mismatch");
    require(hamiltonian.dim() == ext->dim(), "QuenchConfig: Hamiltonian dim mismatch");
    if (completeness_requested)
      require(anc->dim() >= sys->dim(),
              "QuenchConfig: d_anc >= d_sys required for tomographic completeness");
  }

  std::uint64_t hash() const {
    Fnv64 h;
    h.u64(sys->content_hash());
    h.u64(anc->content_hash());
    h.u64(ext->content_hash());
    hamiltonian.hash_into(h);
    h.f64(time);
    for (Index i = 0; i < phi.size(); ++i) h.c128(phi[i]);
    if (noise) {
      h.i64(int(noise->kind));
      h.f64(noise->gamma);
      h.i64(noise->trotter_steps);
    }
    return h.h;
  }
};

class ScramblingMap {
 public:
  BasisPtr sys;
  ExtBasisPtr ext;
  Mat psi;  // d_ext x d_sys, noiseless rank-one row structure
  double time = 0;
  std::uint64_t config_hash = 0;
  std::string note;

  Index d_sys() const { return sys->dim(); }
  Index d_ext() const { return ext->dim(); }

  bool noiseless() const { return psi.size() > 0; }

  // |S_z> = (I ⊗ <phi|) U_t^dag |z>, as a system-space vector
  Vec povm_vector(Index z) const {
    require(noiseless(), "povm_vector: only defined for noiseless maps");
    return psi.row(z).conjugate().transpose();
  }

  // Dense S (materializes from psi on first use for noiseless maps).
  const Mat& matrix() const {
    if (s_.size() == 0 && noiseless()) {
      const Index d = d_sys();
      s_.resize(d_ext(), d * d);
      for (Index z = 0; z < d_ext(); ++z)
        for (Index k = 0; k < d; ++k)
          for (Index l = 0; l < d; ++l)
            s_(z, k * d + l) = psi(z, k) * std::conj(psi(z, l));
    }
    return s_;
  }

  void set_matrix(Mat s) { s_ = std::move(s); }
  void drop_matrix() const { s_.resize(0, 0); }

  // P_z for a density matrix: real within tolerance, clipped at -1e-10,
  // renormalized to sum 1.
  RVec born(const Mat& rho, double imag_tol = 1e-9, double neg_tol = 1e-10) const {
    RVec p(d_ext());
    if (noiseless()) {
      Mat m = psi * rho;  // d_ext x d_sys
      for (Index z = 0; z < d_ext(); ++z) {
        cplx v = m.row(z).conjugate().dot(psi.row(z).conjugate());
        require(std::abs(v.imag()) <= imag_tol, "born: imaginary residue too large");
        p[z] = v.real();
      }
    } else {
      Vec v = s_ * vectorize(rho);
      for (Index z = 0; z < d_ext(); ++z) {
        require(std::abs(v[z].imag()) <= imag_tol, "born: imaginary residue too large");
        p[z] = v[z].real();
      }
    }
    for (Index z = 0; z < d_ext(); ++z) {
      require(p[z] >= -neg_tol, "born: negative probability, invalid state or broken map");
      if (p[z] < 0) p[z] = 0;
    }
    double sum = p.sum();
    require(sum > 0, "born: distribution sums to zero");
    return p / sum;
  }

  // POVM completeness residual max|sum_z |S_z><S_z| - I|
  double completeness_error() const {
    Mat acc = psi.adjoint() * psi;  // sum_z conj-outer
    return (acc - Mat::Identity(d_sys(), d_sys())).cwiseAbs().maxCoeff();
  }

 private:
  mutable Mat s_;
};

inline std::vector<StateVector> povm_vectors(const ScramblingMap& map) {
  std::vector<StateVector> out;
  out.reserve(map.d_ext());
  for (Index z = 0; z < map.d_ext(); ++z)
    out.push_back({map.sys, map.povm_vector(z)});
  return out;
}

// Initial extended-space columns |k> ⊗ |phi> in the extended basis.
// Components falling outside the constrained extended space must be
// negligible, otherwise the fiducial state is incompatible with the joint
// constraints.
inline Mat embed_initial_columns(const QuenchConfig& cfg) {
  const Index ds = cfg.sys->dim(), de = cfg.ext->dim();
  Mat cols = Mat::Zero(de, ds);
  double lost = 0;
  for (Index k = 0; k < ds; ++k) {
    double got = 0;
    for (Index a = 0; a < cfg.anc->dim(); ++a) {
      if (cfg.phi[a] == cplx(0)) continue;
      if (auto z = cfg.ext->ext_index(k, a)) {
        cols(*z, k) = cfg.phi[a];
        got += std::norm(cfg.phi[a]);
      }
    }
    lost = std::max(lost, 1.0 - got);
  }
  require(lost <= 1e-12,
          "embed_initial_columns: fiducial state incompatible with joint constraints");
  return cols;
}

inline std::size_t map_bytes_estimate(Index d_ext, Index d_sys) {
  return std::size_t(16) * std::size_t(d_ext) * std::size_t(d_sys) * std::size_t(d_sys);
}

inline ScramblingMap build_scrambling_map(const QuenchConfig& cfg,
                                          std::size_t budget_mb = 4096) {
  cfg.validate(false);
  require(!cfg.noise.has_value(),
          "build_scrambling_map: config carries noise; use the noisy builder");
  std::size_t need =
      (map_bytes_estimate(cfg.ext->dim(), cfg.sys->dim()) + (1u << 20) - 1) >> 20;
  require(need <= budget_mb,
          "build_scrambling_map: dense map would need ~" + std::to_string(need) +
              " MB (budget " + std::to_string(budget_mb) +
              " MB); use a patched setup");
  ScramblingMap map;
  map.sys = cfg.sys;
  map.ext = cfg.ext;
  map.time = cfg.time;
  map.config_hash = cfg.hash();
  map.psi = evolve_columns(cfg.hamiltonian, embed_initial_columns(cfg), cfg.time);
  return map;
}

// ---- noisy maps -------------------------------------------------------------

// Pointwise dephasing factor: E_p(rho)_{zz'} = [(1-p) + (p/n) sum_i z_i z'_i] rho_{zz'}
// with z_i = +-1 the Z eigenvalue of site i in configuration z.
inline RMat dephasing_factor_table(const HilbertBasis& ext, const std::vector<int>& sites) {
  std::vector<int> use = sites;
  if (use.empty())
    for (int s = 0; s < ext.n_sites; ++s) use.push_back(s);
  const Index d = ext.dim();
  RMat zeta(d, Index(use.size()));
  for (Index z = 0; z < d; ++z)
    for (std::size_t i = 0; i < use.size(); ++i)
      zeta(z, Index(i)) = ext.site_occ(ext.configs[z], use[i]) ? -1.0 : 1.0;
  RMat t = (zeta * zeta.transpose()) / double(use.size());
  return t;  // combine as (1-p) + p * t
}

inline int auto_trotter_steps(const QuenchConfig& cfg) {
  double gt = cfg.noise ? cfg.noise->gamma * cfg.time : 0.0;
  double ht = cfg.hamiltonian.norm_estimate() * std::abs(cfg.time);
  return std::max(1, int(std::ceil(20.0 * std::max(gt, ht))));
}

// Trotterized noisy quench channel applied to one extended density matrix:
// Q_t^(gamma) ~= [E_{gamma t/N} o Q^(0)_{t/N}]^N
inline Mat apply_noisy_channel(const QuenchConfig& cfg, Mat rho_ext,
                               int steps_override = 0) {
  require(cfg.noise.has_value(), "apply_noisy_channel: config has no noise channel");
  const auto& nc = *cfg.noise;
  if (nc.kind == NoiseChannel::Kind::CustomKraus) {
    nc.check_kraus(cfg.ext->dim());
    Mat u = expm(cplx(0, -cfg.time) * cfg.hamiltonian.to_dense());
    Mat evolved = u * rho_ext * u.adjoint();
    Mat out = Mat::Zero(evolved.rows(), evolved.cols());
    for (const auto& k : nc.kraus) out += k * evolved * k.adjoint();
    return out;
  }
  require(nc.kind == NoiseChannel::Kind::LocalDephasing,
          "apply_noisy_channel: use the closed form for global depolarizing");
  int n = steps_override > 0 ? steps_override
                             : (nc.trotter_steps > 0 ? nc.trotter_steps
                                                     : auto_trotter_steps(cfg));
  double p = nc.gamma * cfg.time / n;
  require(p <= 0.05 + 1e-12, "apply_noisy_channel: gamma t / N must be <= 0.05");
  Mat u = expm(cplx(0, -cfg.time / n) * cfg.hamiltonian.to_dense());
  RMat t = dephasing_factor_table(*cfg.ext, nc.sites);
  for (int s = 0; s < n; ++s) {
    rho_ext = u * rho_ext * u.adjoint();
    rho_ext.array() *= ((1.0 - p) + p * t.array()).cast<cplx>();
  }
  return rho_ext;
}

// Depolarizing closed form: S^(gamma) = [e^{-gt} I + (1-e^{-gt}) 1/d_ext] S.
inline Mat depolarize_map_matrix(const Mat& s, double gamma_t) {
  const Index d_ext = s.rows();
  double decay = std::exp(-gamma_t), beta = 1.0 - decay;
  Vec col_sums = s.colwise().sum();  // = vec(I)^T by POVM completeness
  Mat out = decay * s;
  out.noalias() += (beta / double(d_ext)) * Vec::Ones(d_ext) * col_sums.transpose();
  return out;
}

inline RVec depolarize_distribution(const RVec& p, double gamma_t) {
  double decay = std::exp(-gamma_t);
  return decay * p + RVec::Constant(p.size(), (1.0 - decay) / double(p.size()));
}

inline ScramblingMap build_noisy_scrambling_map(const QuenchConfig& cfg,
                                                std::size_t budget_mb = 4096) {
  require(cfg.noise.has_value(), "build_noisy_scrambling_map: config has no noise channel");
  QuenchConfig clean = cfg;
  clean.noise.reset();
  if (cfg.noise->kind == NoiseChannel::Kind::GlobalDepolarizing) {
    ScramblingMap map = build_scrambling_map(clean, budget_mb);
    Mat s = depolarize_map_matrix(map.matrix(), cfg.noise->gamma * cfg.time);
    ScramblingMap noisy;
    noisy.sys = map.sys;
    noisy.ext = map.ext;
    noisy.time = map.time;
    noisy.config_hash = cfg.hash();
    noisy.note = "global-depolarizing";
    noisy.set_matrix(std::move(s));
    return noisy;
  }
  // Dephasing (or custom): one channel evolution per Hermitian input pair.
  const Index ds = cfg.sys->dim(), de = cfg.ext->dim();
  std::size_t need = map_bytes_estimate(de, ds) >> 20;
  require(need <= budget_mb, "build_noisy_scrambling_map: over memory budget");
  Mat cols = embed_initial_columns(clean);
  Mat s(de, ds * ds);
  int steps = cfg.noise->trotter_steps > 0 ? cfg.noise->trotter_steps
                                           : auto_trotter_steps(cfg);
  for (Index k = 0; k < ds; ++k)
    for (Index l = k; l < ds; ++l) {
      Mat in = cols.col(k) * cols.col(l).adjoint();
      Mat out = apply_noisy_channel(cfg, std::move(in), steps);
      for (Index z = 0; z < de; ++z) {
        s(z, k * ds + l) = out(z, z);
        if (l != k) s(z, l * ds + k) = std::conj(out(z, z));
      }
    }
  ScramblingMap map;
  map.sys = cfg.sys;
  map.ext = cfg.ext;
  map.time = cfg.time;
  map.config_hash = cfg.hash();
  map.note = "local-dephasing";
  map.set_matrix(std::move(s));
  return map;
}

// ---- controlled-unitary ensembles (classical-shadow bridge) ----------------

// S for U = sum_a U_a ⊗ |a><a| with |phi> the uniform superposition: the
// quench that realizes classical shadow tomography with the ensemble {U_a}.
inline ScramblingMap controlled_unitary_ensemble(const std::vector<Mat>& unitaries,
                                                 BasisPtr sys) {
  const Index d = sys->dim();
  const Index mu = Index(unitaries.size());
  require(mu > 0, "controlled_unitary_ensemble: empty ensemble");
  for (const auto& u : unitaries) {
    require(u.rows() == d && u.cols() == d, "controlled_unitary_ensemble: size mismatch");
    require((u.adjoint() * u - Mat::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-10,
            "controlled_unitary_ensemble: non-unitary member");
  }
  // ancilla register: one mu-level site
  auto anc = make_bosonic(1, std::nullopt, int(mu - 1), {{0.0, -1.0, 1}});
  BasisPtr sys_like = sys;
  // extended basis: free product, kinds differ so build manually
  auto ext = std::make_shared<ExtendedBasis>();
  ext->kind = sys->kind;
  ext->n_sites = sys->n_sites + 1;
  ext->n_modes = sys->n_modes + 1;
  ext->positions = sys->positions;
  ext->positions.push_back({0.0, -1.0, 1});
  ext->constraints = sys->constraints;
  ext->constraints.max_occ = std::max(sys->constraints.max_occ, int(mu - 1));
  ext->constraints.total_number.reset();
  ext->sys = sys;
  ext->anc = anc;
  for (Index is = 0; is < d; ++is)
    for (Index ia = 0; ia < mu; ++ia) {
      Config c = sys->configs[is];
      c.push_back(std::uint16_t(ia));
      ext->configs.push_back(std::move(c));
    }
  std::sort(ext->configs.begin(), ext->configs.end());
  ext->split.resize(ext->configs.size());
  for (Index z = 0; z < ext->dim(); ++z) {
    const Config& c = ext->configs[z];
    Config s(c.begin(), c.end() - 1);
    ext->split[z] = {sys->index_of(s), Index(c.back())};
  }
  ScramblingMap map;
  map.sys = sys;
  map.ext = ext;
  map.psi.resize(ext->dim(), d);
  double w = 1.0 / std::sqrt(double(mu));
  for (Index z = 0; z < ext->dim(); ++z) {
    auto [s, a] = ext->split[z];
    // <z| U (|k> ⊗ |phi>) = U_a[s,k] / sqrt(mu)
    map.psi.row(z) = w * unitaries[std::size_t(a)].row(s);
  }
  Fnv64 h;
  h.str("controlled-unitary-ensemble");
  h.u64(sys->content_hash());
  for (const auto& u : unitaries)
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) h.c128(u(i, j));
  map.config_hash = h.h;
  return map;
}

// ---- patched composites -----------------------------------------------------

// Disjoint per-patch maps. Probabilities of full outcomes factorize over
// patches; the global tensor-product map is only materialized by tests at
// oracle scale.
struct PatchedMap {
  std::vector<ScramblingMap> patches;
  std::vector<std::vector<int>> patch_sites;  // system site ids per patch

  void validate(int n_system_sites) const {
    std::vector<int> seen(n_system_sites, 0);
    for (const auto& ps : patch_sites)
      for (int s : ps) {
        require(s >= 0 && s < n_system_sites, "PatchedMap: site out of range");
        require(!seen[s]++, "PatchedMap: overlapping patches");
      }
    for (int s = 0; s < n_system_sites; ++s)
      require(seen[s], "PatchedMap: patches do not cover the system");
  }

  // Oracle-scale materialization: kron of patch maps over (k,l) pairs.
  Mat full_matrix() const {
    Mat acc;
    for (const auto& p : patches) {
      const Mat& s = p.matrix();
      if (acc.size() == 0) {
        acc = s;
        continue;
      }
      Index ra = acc.rows(), ca = acc.cols(), rb = s.rows(), cb = s.cols();
      Mat next(ra * rb, ca * cb);
      for (Index i = 0; i < ra; ++i)
        for (Index j = 0; j < ca; ++j) next.block(i * rb, j * cb, rb, cb) = acc(i, j) * s;
      acc = std::move(next);
    }
    return acc;
  }
};

}  // namespace qst
