// experiments.hpp — quench geometries, charge-sector map sets, and the
// Rydberg-array experiment drivers (fidelity, energy transport, entanglement
// dynamics).
#pragma once

#include "qst/diagnostics.hpp"
#include "qst/io.hpp"
#include "qst/sampling.hpp"

#include <functional>
#include <map>

namespace qst {

// ---- Rydberg geometries -----------------------------------------------------

struct RydbergQuenchSpec {
  int n_sys = 8;
  int n_anc = 10;
  double delta = -1.0;
  double v2 = 0.0;
  double t = 2 * PI;
};

// Two-row ladder: system atoms at (i, 0), ancillae at (i - 1, 1); blockade
// along each row and on vertical rungs. Every system atom sits next to an
// ancilla, so scrambling sets in on an O(1) timescale.
inline QuenchConfig rydberg_ladder_config(const RydbergQuenchSpec& spec) {
  const int ns = spec.n_sys, na = spec.n_anc;
  auto sys = make_blockaded_chain(ns);
  std::vector<std::pair<int, int>> anc_bonds;
  for (int i = 0; i + 1 < na; ++i) anc_bonds.push_back({i, i + 1});
  auto anc = make_blockaded(na, anc_bonds, line_positions(na, 1.0, 0, -1.0));
  JointConstraints joint;
  for (int i = 0; i < ns; ++i)
    if (i + 1 < na) joint.blockade.push_back({i, ns + i + 1});
  auto ext = tensor_extend(sys, anc, joint);

  RydbergParams params{1.0, spec.delta, spec.v2, ext->constraints.blockade, {}};
  if (spec.v2 != 0.0) {
    for (int i = 0; i + 2 < ns; ++i) params.v2_pairs.push_back({i, i + 2});
    for (int i = 0; i + 2 < na; ++i) params.v2_pairs.push_back({ns + i, ns + i + 2});
  }
  QuenchConfig cfg;
  cfg.sys = sys;
  cfg.anc = anc;
  cfg.ext = ext;
  cfg.phi = Vec::Zero(anc->dim());
  cfg.phi[anc->index_of(Config(na, 0))] = 1.0;  // all atoms in the ground state
  cfg.hamiltonian = build_rydberg(params, *ext);
  cfg.time = spec.t;
  cfg.setup = QuenchSetup::Global;
  return cfg;
}

// One chain of length L with an arbitrary subset of sites declared "system";
// used by the Lieb-Robinson scan where the system-ancilla boundary count and
// distances are the object of study.
inline QuenchConfig rydberg_partitioned_chain_config(int length,
                                                     const std::vector<int>& sys_sites,
                                                     double delta, double t) {
  std::vector<int> is_sys(length, 0);
  for (int s : sys_sites) {
    require(s >= 0 && s < length, "partitioned chain: site out of range");
    is_sys[s] = 1;
  }
  std::vector<int> sys_list, anc_list;
  for (int i = 0; i < length; ++i) (is_sys[i] ? sys_list : anc_list).push_back(i);
  auto local_bonds = [&](const std::vector<int>& sites) {
    std::vector<std::pair<int, int>> bonds;
    for (std::size_t a = 0; a < sites.size(); ++a)
      for (std::size_t b = a + 1; b < sites.size(); ++b)
        if (std::abs(sites[a] - sites[b]) == 1) bonds.push_back({int(a), int(b)});
    return bonds;
  };
  auto pos_of = [&](const std::vector<int>& sites) {
    std::vector<Pos> pos;
    for (int s : sites) pos.push_back({double(s), 0.0, 0});
    return pos;
  };
  auto sys = make_blockaded(int(sys_list.size()), local_bonds(sys_list), pos_of(sys_list));
  auto anc = make_blockaded(int(anc_list.size()), local_bonds(anc_list), pos_of(anc_list));
  JointConstraints joint;
  for (std::size_t a = 0; a < sys_list.size(); ++a)
    for (std::size_t b = 0; b < anc_list.size(); ++b)
      if (std::abs(sys_list[a] - anc_list[b]) == 1)
        joint.blockade.push_back({int(a), int(sys_list.size() + b)});
  auto ext = tensor_extend(sys, anc, joint);
  RydbergParams params{1.0, delta, 0.0, ext->constraints.blockade, {}};
  QuenchConfig cfg;
  cfg.sys = sys;
  cfg.anc = anc;
  cfg.ext = ext;
  cfg.phi = Vec::Zero(anc->dim());
  cfg.phi[anc->index_of(Config(anc->n_sites, 0))] = 1.0;
  cfg.hamiltonian = build_rydberg(params, *ext);
  cfg.time = t;
  cfg.setup = QuenchSetup::Global;
  return cfg;
}

// Single system atom coupled to a three-atom ancilla chain (energy patches).
inline QuenchConfig rydberg_energy_patch_config(double delta, double t) {
  auto sys = make_blockaded(1, {});
  auto anc = make_blockaded(3, {{0, 1}, {1, 2}}, line_positions(3, 0.0, 0, 1.0));
  JointConstraints joint;
  joint.blockade.push_back({0, 1});  // system atom to first ancilla
  auto ext = tensor_extend(sys, anc, joint);
  RydbergParams params{1.0, delta, 0.0, ext->constraints.blockade, {}};
  QuenchConfig cfg;
  cfg.sys = sys;
  cfg.anc = anc;
  cfg.ext = ext;
  cfg.phi = Vec::Zero(anc->dim());
  cfg.phi[anc->index_of(Config(3, 0))] = 1.0;
  cfg.hamiltonian = build_rydberg(params, *ext);
  cfg.time = t;
  cfg.setup = QuenchSetup::Patched;
  return cfg;
}

// Six system atoms over two ancilla rows of six (entropy patches).
inline QuenchConfig rydberg_entropy_patch_config(double delta, double t) {
  const int np = 6;
  auto sys = make_blockaded_chain(np);
  // two ancilla rows below the system row, chains plus vertical rungs
  std::vector<std::pair<int, int>> anc_bonds;
  for (int r = 0; r < 2; ++r)
    for (int i = 0; i + 1 < np; ++i) anc_bonds.push_back({r * np + i, r * np + i + 1});
  for (int i = 0; i < np; ++i) anc_bonds.push_back({i, np + i});
  std::vector<Pos> anc_pos;
  for (int r = 0; r < 2; ++r)
    for (int i = 0; i < np; ++i) anc_pos.push_back({double(i), -1.0 - r, 0});
  auto anc = make_blockaded(2 * np, anc_bonds, anc_pos);
  JointConstraints joint;
  for (int i = 0; i < np; ++i) joint.blockade.push_back({i, np + i});
  auto ext = tensor_extend(sys, anc, joint);
  RydbergParams params{1.0, delta, 0.0, ext->constraints.blockade, {}};
  QuenchConfig cfg;
  cfg.sys = sys;
  cfg.anc = anc;
  cfg.ext = ext;
  cfg.phi = Vec::Zero(anc->dim());
  cfg.phi[anc->index_of(Config(2 * np, 0))] = 1.0;
  cfg.hamiltonian = build_rydberg(params, *ext);
  cfg.time = t;
  cfg.setup = QuenchSetup::Patched;
  return cfg;
}

// ---- charge-sector map sets ---------------------------------------------------

// Extract the block of a full-Fock density matrix living on a charge-sector
// sub-basis (configs of the sector basis must be configs of the full basis).
inline Mat extract_block(const Mat& rho, const HilbertBasis& full,
                         const HilbertBasis& sector) {
  Mat out(sector.dim(), sector.dim());
  std::vector<Index> idx(sector.dim());
  for (Index i = 0; i < sector.dim(); ++i) idx[i] = full.index_of(sector.configs[i]);
  for (Index i = 0; i < sector.dim(); ++i)
    for (Index j = 0; j < sector.dim(); ++j) out(i, j) = rho(idx[i], idx[j]);
  return out;
}

// Per-charge-sector scrambling maps for quenches that conserve a total charge.
// Observables block-diagonal in the charge compose into one estimator table
// over the concatenated outcome space.
struct SectorMapSet {
  struct Sector {
    BasisPtr sys;  // sector block basis on the patch sites
    ScramblingMap map;
    std::shared_ptr<RecoverySolver> solver;
    double weight = 0;  // Tr rho_block
    RVec p;             // unnormalized outcome probabilities (sums to weight)
    Index z_offset = 0;
  };
  std::vector<Sector> sectors;
  Index d_ext_total = 0;
  double discarded_weight = 0;  // sector mass dropped by a truncation rule
  std::uint64_t hash = 0;

  void finalize() {
    Index off = 0;
    Fnv64 h;
    for (auto& s : sectors) {
      s.z_offset = off;
      off += s.map.d_ext();
      h.u64(s.map.config_hash);
    }
    d_ext_total = off;
    hash = h.h;
  }

  RVec full_distribution() const {
    RVec p = RVec::Zero(d_ext_total);
    double total = 0;
    for (const auto& s : sectors) {
      p.segment(s.z_offset, s.p.size()) = s.p;
      total += s.p.sum();
    }
    require(total > 0, "SectorMapSet: empty distribution");
    return p / total;
  }

  // estimator table over the concatenated outcome space for an observable
  // given block-by-block
  EstimatorTable estimator(const std::function<Mat(const HilbertBasis&)>& block) const {
    Vec o = Vec::Zero(d_ext_total);
    for (const auto& s : sectors) {
      EstimatorTable t = s.solver->estimator(block(*s.sys));
      o.segment(s.z_offset, t.o.size()) = t.o;
    }
    return {std::move(o), sectors.empty() ? RecoveryFlavor::MoorePenrose
                                          : sectors.front().solver->flavor(),
            hash, -1};
  }
};

// ---- experiment result rows ---------------------------------------------------

struct FidelityRow {
  double delta_ref = 0, estimate = 0, stderr_ = 0, exact = 0;
};

struct FidelityResult {
  std::vector<FidelityRow> rows;
  double var_optimal = 0, var_moore_penrose = 0;  // self-fidelity estimator
  Index m = 0;
};

struct RydbergFidelityOptions {
  RydbergQuenchSpec quench{};  // defaults to 8 + 10
  double delta_state = -1.0;
  double ref_min = -2.0, ref_max = 2.0;
  int ref_points = 41;
  Index m = 2000;
  std::uint64_t seed = 7;
  std::size_t budget_mb = 4096;
};

struct RydbergFidelityArtifacts {
  QuenchConfig cfg;
  ScramblingMap map;
  StateVector gs;
  RVec p;
  std::shared_ptr<RecoverySolver> optimal, moore_penrose;
};

inline RydbergFidelityArtifacts prepare_rydberg_fidelity(const RydbergFidelityOptions& opt) {
  RydbergFidelityArtifacts art;
  art.cfg = rydberg_ladder_config(opt.quench);
  art.cfg.validate(true);
  art.map = build_scrambling_map(art.cfg, opt.budget_mb);
  RydbergParams sys_params = rydberg_chain_params(opt.quench.n_sys, 1.0, opt.delta_state);
  art.gs = ground_state(build_rydberg(sys_params, *art.cfg.sys), art.cfg.sys);
  art.p = art.map.born(pure_density(art.gs).mat);
  art.optimal = std::make_shared<RecoverySolver>(art.map, RecoveryFlavor::GammaOptimal, art.p);
  art.moore_penrose = std::make_shared<RecoverySolver>(art.map, RecoveryFlavor::MoorePenrose);
  return art;
}

inline FidelityResult run_rydberg_fidelity(const RydbergFidelityArtifacts& art,
                                           const RydbergFidelityOptions& opt) {
  FidelityResult res;
  res.m = opt.m;
  SnapshotSet snaps = sample_snapshots(art.p, opt.m, opt.seed, 0, art.map.config_hash);
  Mat self = pure_density(art.gs).mat;
  res.var_optimal = variance(art.optimal->estimator(self).o, art.p);
  res.var_moore_penrose = variance(art.moore_penrose->estimator(self).o, art.p);
  for (int g = 0; g < opt.ref_points; ++g) {
    double dref = opt.ref_min + (opt.ref_max - opt.ref_min) * g /
                                    std::max(1, opt.ref_points - 1);
    RydbergParams ref = rydberg_chain_params(opt.quench.n_sys, 1.0, dref);
    StateVector gs_ref = ground_state(build_rydberg(ref, *art.cfg.sys), art.cfg.sys);
    Mat proj = pure_density(gs_ref).mat;
    EstimatorTable table = art.optimal->estimator(proj);
    EstimateResult est = estimate_linear(table, snaps);
    double exact = std::norm(gs_ref.amps.dot(art.gs.amps));
    res.rows.push_back({dref, est.value.real(), est.stderr_, exact});
  }
  return res;
}

// ---- energy transport -----------------------------------------------------------

struct EnergyRow {
  int site = 0;
  double tau = 0, estimate = 0, stderr_ = 0, exact = 0;
};

struct RydbergEnergyOptions {
  int n_sys = 24;
  double delta = -1.0;
  double quench_t = 4 * 2 * PI;
  std::vector<double> taus{0.0, 2 * 2 * PI, 4 * 2 * PI};
  Index m = 2000;
  std::uint64_t seed = 11;
};

inline std::vector<EnergyRow> run_rydberg_energy(const RydbergEnergyOptions& opt) {
  auto chain = make_blockaded_chain(opt.n_sys);
  RydbergParams params = rydberg_chain_params(opt.n_sys, 1.0, opt.delta);
  SparseOp h = build_rydberg(params, *chain);
  StateVector gs = ground_state(h, chain);
  // pi/2 rotation about y in the blockaded space: exp(-i (pi/2) P Y P)
  StateVector psi0 = apply_local_rotation(gs, opt.n_sys / 2 - 1, PI, 'y');

  QuenchConfig patch = rydberg_energy_patch_config(opt.delta, opt.quench_t);
  ScramblingMap patch_map = build_scrambling_map(patch);
  Mat e_patch(2, 2);
  e_patch << 0.0, 0.5, 0.5, -opt.delta;  // (Omega/2) X - Delta n on {0, 1}

  std::vector<EnergyRow> rows;
  StateVector psi = psi0;
  double prev_tau = 0;
  for (double tau : opt.taus) {
    psi = tau == prev_tau ? psi : evolve(h, psi, tau - prev_tau);
    prev_tau = tau;
    for (int site = 0; site < opt.n_sys; ++site) {
      SparseOp e_op = local_energy_density(site, params, *chain);
      double exact = std::real(expectation(e_op, psi.amps));
      DensityMatrix rho_i = reduced_density(psi, {site});
      RVec p = patch_map.born(rho_i.mat);
      RecoverySolver solver(patch_map, RecoveryFlavor::GammaOptimal, p);
      EstimatorTable table = solver.estimator(e_patch);
      std::uint64_t stream = std::uint64_t(site) * 1000 + std::uint64_t(tau * 16);
      SnapshotSet snaps = sample_snapshots(p, opt.m, opt.seed, stream, patch_map.config_hash);
      EstimateResult est = estimate_linear(table, snaps);
      rows.push_back({site, tau, est.value.real(), est.stderr_, exact});
    }
  }
  return rows;
}

// ---- entanglement dynamics -------------------------------------------------------

struct EntropyRow {
  int cut = 0;          // subsystem A = first `cut` sites
  double tau = 0;
  double estimate = 0;  // S2 from the lower-variance swap estimator
  double stderr_ = 0;
  double exact = 0;
  double stderr_a = 0;  // stderr of the fixed S^A estimator (diagnostics)
  bool defined = true;
};

struct RydbergEntropyOptions {
  int n_patches = 2;  // patches of six atoms each
  double delta = -1.0;
  double quench_t = 6 * 2 * PI;
  std::vector<double> taus{0.0, 2 * 2 * PI};
  std::vector<int> cuts{};  // default: all interior cuts
  Index m = 100000;
  std::uint64_t seed = 13;
  Index pair_budget = 2'000'000;
};

struct EntropyPatchTables {
  // flattened partial traces of recovery columns for one patch and one kept set
  std::vector<Vec> w;        // vec(g_z)
  std::vector<Vec> w_t;      // vec(g_z^T)
  bool trivial = false;      // kept set empty: factor = Tr(r_z) Tr(r_z')
  std::vector<cplx> traces;  // Tr(g_z)
};

namespace detail {

inline EntropyPatchTables entropy_tables(const Mat& recovery, const HilbertBasis& patch_basis,
                                         const std::vector<int>& keep) {
  EntropyPatchTables t;
  const Index d_ext = recovery.cols();
  const Index d = patch_basis.dim();
  t.trivial = keep.empty();
  t.w.reserve(t.trivial ? 0 : std::size_t(d_ext));
  t.traces.reserve(std::size_t(d_ext));
  // kept factor on the blockaded sub-chain keeps table sizes small
  BasisPtr kept = t.trivial ? nullptr : make_blockaded_chain(int(keep.size()));
  for (Index z = 0; z < d_ext; ++z) {
    Mat r_z = devectorize(recovery.col(z), d);
    if (t.trivial) {
      t.traces.push_back(r_z.trace());
      continue;
    }
    auto [g, kb] = partial_trace(r_z, patch_basis, keep, kept);
    t.w.push_back(vectorize(g));
    t.w_t.push_back(vectorize(g.transpose()));
    t.traces.push_back(g.trace());
  }
  return t;
}

inline cplx entropy_kernel_factor(const EntropyPatchTables& t, Index z, Index zp) {
  if (t.trivial) return t.traces[std::size_t(z)] * t.traces[std::size_t(zp)];
  return t.w[std::size_t(z)].transpose() * t.w_t[std::size_t(zp)];
}

}  // namespace detail

struct RydbergEntropyResult {
  std::vector<EntropyRow> rows;
};

inline RydbergEntropyResult run_rydberg_entropy(const RydbergEntropyOptions& opt) {
  const int np = 6, n_sys = np * opt.n_patches;
  require(opt.n_patches == 2, "run_rydberg_entropy: two-patch driver");
  auto chain = make_blockaded_chain(n_sys);
  RydbergParams params = rydberg_chain_params(n_sys, 1.0, opt.delta);
  SparseOp h = build_rydberg(params, *chain);
  StateVector gs = ground_state(h, chain);
  StateVector psi0 = apply_local_rotation(gs, n_sys / 2 - 1, PI, 'y');

  QuenchConfig patch_cfg = rydberg_entropy_patch_config(opt.delta, opt.quench_t);
  ScramblingMap patch_map = build_scrambling_map(patch_cfg);
  auto patch_basis = patch_cfg.sys;
  const Index dp = patch_basis->dim(), de = patch_map.d_ext();

  std::vector<int> cuts = opt.cuts;
  if (cuts.empty())
    for (int l = 1; l < n_sys; ++l) cuts.push_back(l);

  RydbergEntropyResult res;
  StateVector psi = psi0;
  double prev_tau = 0;
  for (double tau : opt.taus) {
    psi = tau == prev_tau ? psi : evolve(h, psi, tau - prev_tau);
    prev_tau = tau;
    // split amplitudes across the patch boundary (free-product embedding)
    Mat m_split = Mat::Zero(dp, dp);
    Config c1, c2;
    for (Index i = 0; i < chain->dim(); ++i) {
      const Config& c = chain->configs[i];
      c1.assign(c.begin(), c.begin() + np);
      c2.assign(c.begin() + np, c.end());
      m_split(patch_basis->index_of(c1), patch_basis->index_of(c2)) = psi.amps[i];
    }
    // joint outcome amplitudes and distribution
    Mat joint = patch_map.psi * m_split * patch_map.psi.transpose();
    RMat pj = joint.cwiseAbs2();
    double norm = pj.sum();
    require(std::abs(norm - 1.0) <= 1e-8, "entropy driver: joint distribution not normalized");
    pj /= norm;
    // per-patch marginals and optimal recovery maps
    RVec p1 = pj.rowwise().sum(), p2 = pj.colwise().sum();
    Mat r1 = RecoverySolver(patch_map, RecoveryFlavor::GammaOptimal, p1).left_inverse();
    Mat r2 = RecoverySolver(patch_map, RecoveryFlavor::GammaOptimal, p2).left_inverse();
    // sample joint outcomes via row marginal + per-row conditional CDF
    CounterRng rng(opt.seed, std::uint64_t(tau * 64));
    DiscreteSampler row_sampler(p1);
    std::vector<std::unique_ptr<DiscreteSampler>> cond(de);
    SnapshotSet snaps;
    snaps.n_patches = 2;
    snaps.seed = opt.seed;
    snaps.config_hash = patch_map.config_hash;
    snaps.outcomes.reserve(std::size_t(opt.m));
    for (Index j = 0; j < opt.m; ++j) {
      Index z1 = row_sampler.draw(rng);
      if (!cond[z1]) cond[z1] = std::make_unique<DiscreteSampler>(pj.row(z1).transpose());
      Index z2 = cond[z1]->draw(rng);
      snaps.outcomes.push_back({z1, z2});
    }
    for (int cut : cuts) {
      std::vector<int> a1, a2, b1, b2;
      for (int s = 0; s < np; ++s) {
        (s < cut ? a1 : b1).push_back(s);
        (np + s < cut ? a2 : b2).push_back(s);
      }
      auto ta1 = detail::entropy_tables(r1, *patch_basis, a1);
      auto ta2 = detail::entropy_tables(r2, *patch_basis, a2);
      auto tb1 = detail::entropy_tables(r1, *patch_basis, b1);
      auto tb2 = detail::entropy_tables(r2, *patch_basis, b2);
      auto kernel_a = [&](const std::vector<Index>& x, const std::vector<Index>& y) {
        return detail::entropy_kernel_factor(ta1, x[0], y[0]) *
               detail::entropy_kernel_factor(ta2, x[1], y[1]);
      };
      auto kernel_b = [&](const std::vector<Index>& x, const std::vector<Index>& y) {
        return detail::entropy_kernel_factor(tb1, x[0], y[0]) *
               detail::entropy_kernel_factor(tb2, x[1], y[1]);
      };
      EstimateResult ea = estimate_u2(snaps, kernel_a, opt.pair_budget);
      EstimateResult eb = estimate_u2(snaps, kernel_b, opt.pair_budget);
      const EstimateResult& best = ea.stderr_ <= eb.stderr_ ? ea : eb;
      std::vector<int> keep_a;
      for (int s = 0; s < cut; ++s) keep_a.push_back(s);
      double exact = -std::log(purity(reduced_density(psi, keep_a).mat));
      EntropyRow row;
      row.cut = cut;
      row.tau = tau;
      row.exact = exact;
      double pur = best.value.real();
      if (pur <= 0) {
        row.defined = false;
        row.estimate = 0;
        row.stderr_ = 0;
      } else {
        row.estimate = -std::log(pur);
        row.stderr_ = best.stderr_ / pur;
      }
      row.stderr_a = ea.value.real() > 0 ? ea.stderr_ / ea.value.real() : -1.0;
      res.rows.push_back(row);
    }
  }
  return res;
}

}  // namespace qst
