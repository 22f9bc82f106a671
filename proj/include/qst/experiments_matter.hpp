// experiments_matter.hpp — drivers for the fermionic pairing-order experiment
// (bridged quenches, d-wave witness) and the bosonic topology experiments
// (many-body Chern number, bond currents).
#pragma once

#include "qst/bcs.hpp"
#include "qst/experiments.hpp"
#include "qst/mbcn.hpp"

namespace qst {

// ---- BCS pairing order -------------------------------------------------------

struct BcsQuenchSpec {
  double j = 1.0, u = 1.5;
  double t = 2.0;  // 2/J
};

// One bridged quench for correlator support sites: a second-layer copy of the
// support with vertical tunneling everywhere and in-layer nearest-neighbor
// hopping; the bridge starts with one up and one down fermion on the site
// above `filled`.
struct BcsBridgedQuench {
  std::vector<LatticeSite> support;  // unique support sites, fixed order
  SectorMapSet maps;
  std::map<std::pair<int, int>, Index> sector_of;  // (n_up, n_down) -> index
};

inline BcsBridgedQuench build_bcs_bridged_quench(const BCSState& state,
                                                 const std::vector<LatticeSite>& support,
                                                 LatticeSite filled,
                                                 const BcsQuenchSpec& spec) {
  BcsBridgedQuench out;
  out.support = support;
  const int ns = int(support.size());
  DensityMatrix rho = bcs_reduced_density_matrix(state, support);

  std::vector<Pos> bridge_pos;
  for (auto r : support) bridge_pos.push_back({double(r.x), double(r.y), 1});
  auto anc = make_fermionic(ns, 1, 1, bridge_pos);
  Config phi_cfg(2 * ns, 0);
  int filled_id = -1;
  for (int s = 0; s < ns; ++s)
    if (support[s] == filled) filled_id = s;
  require(filled_id >= 0, "bcs quench: filled bridge site not in support");
  phi_cfg[filled_id] = 1;
  phi_cfg[ns + filled_id] = 1;

  // bonds in extended numbering: support 0..ns-1, bridge ns..2ns-1
  FermiHubbardParams fh{spec.j, spec.u, {}};
  auto adjacent = [](LatticeSite a, LatticeSite b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1;
  };
  for (int a = 0; a < ns; ++a)
    for (int b = a + 1; b < ns; ++b)
      if (adjacent(support[a], support[b])) {
        fh.bonds.push_back({a, b});            // system layer
        fh.bonds.push_back({ns + a, ns + b});  // bridge layer
      }
  for (int a = 0; a < ns; ++a) fh.bonds.push_back({a, ns + a});  // vertical

  for (int nu = 0; nu <= ns; ++nu)
    for (int nd = 0; nd <= ns; ++nd) {
      std::vector<Pos> sys_pos;
      for (auto r : support) sys_pos.push_back({double(r.x), double(r.y), 0});
      auto sys_b = make_fermionic(ns, nu, nd, sys_pos);
      Mat block = extract_block(rho.mat, *rho.basis, *sys_b);
      double weight = block.trace().real();
      if (weight < 1e-12) continue;
      JointConstraints joint;
      joint.total_up = nu + 1;
      joint.total_down = nd + 1;
      auto ext = tensor_extend(sys_b, anc, joint);
      QuenchConfig cfg;
      cfg.sys = sys_b;
      cfg.anc = anc;
      cfg.ext = ext;
      cfg.phi = Vec::Zero(anc->dim());
      cfg.phi[anc->index_of(phi_cfg)] = 1.0;
      cfg.hamiltonian = build_fermi_hubbard(fh, *ext);
      cfg.time = spec.t;
      cfg.setup = QuenchSetup::Bridged;
      SectorMapSet::Sector sec;
      sec.sys = sys_b;
      sec.map = build_scrambling_map(cfg);
      sec.weight = weight;
      sec.p = sec.map.born(block / weight) * weight;
      sec.solver = std::make_shared<RecoverySolver>(sec.map, RecoveryFlavor::GammaOptimal,
                                                    (sec.p / weight).eval());
      out.sector_of[{nu, nd}] = Index(out.maps.sectors.size());
      out.maps.sectors.push_back(std::move(sec));
    }
  out.maps.finalize();
  return out;
}

struct DwaveResult {
  double exact_witness = 0;
  std::map<LatticeSite, cplx> exact_correlators;
  std::vector<double> sampled_witnesses;  // one per repetition
};

struct BcsDwaveOptions {
  BCSParams params{11, 11, 0.5, 5.0, Pairing::DWave};
  BcsQuenchSpec quench{};
  Index m = 2000;
  int repetitions = 200;
  std::uint64_t seed = 17;
};

inline DwaveResult run_bcs_dwave(const BcsDwaveOptions& opt) {
  BCSState state(opt.params);
  LatticeSite center{opt.params.lx / 2, opt.params.ly / 2};
  LatticeSite one_y{center.x, center.y + 1};
  const std::vector<std::pair<LatticeSite, double>> neighbors = {
      {{center.x + 1, center.y}, +1.0},
      {{center.x - 1, center.y}, +1.0},
      {{center.x, center.y + 1}, -1.0},
      {{center.x, center.y - 1}, -1.0}};

  DwaveResult res;
  for (auto [j, chi] : neighbors)
    res.exact_correlators[j] = exact_pairing_correlator(state, center, j, one_y, center);
  res.exact_witness = dwave_witness(res.exact_correlators, center);

  // bridged quench per correlator; observable block-diagonal in (N_up, N_down)
  struct NeighborPipe {
    double chi;
    BcsBridgedQuench quench;
    EstimatorTable table;
    RVec p;
  };
  std::vector<NeighborPipe> pipes;
  for (auto [j, chi] : neighbors) {
    std::vector<LatticeSite> support{center, one_y};
    if (!(j == one_y)) support.push_back(j);
    std::sort(support.begin(), support.end());
    auto local = [&](LatticeSite r) {
      for (int s = 0; s < int(support.size()); ++s)
        if (support[s] == r) return s;
      throw Error("bcs driver: site not in support");
    };
    BcsBridgedQuench q = build_bcs_bridged_quench(state, support, j, opt.quench);
    int li = local(center), lj = local(j), lk = local(one_y), ll = local(center);
    EstimatorTable table = q.maps.estimator([&](const HilbertBasis& sector) {
      return pairing_correlator_operator(li, lj, lk, ll, sector);
    });
    RVec p = q.maps.full_distribution();
    pipes.push_back({chi, std::move(q), std::move(table), std::move(p)});
  }

  for (int rep = 0; rep < opt.repetitions; ++rep) {
    double d = 0;
    for (std::size_t n = 0; n < pipes.size(); ++n) {
      SnapshotSet snaps =
          sample_snapshots(pipes[n].p, opt.m, opt.seed + std::uint64_t(rep),
                           std::uint64_t(n), pipes[n].table.map_hash);
      EstimateResult est = estimate_linear(pipes[n].table, snaps);
      d += pipes[n].chi * est.value.real();
    }
    res.sampled_witnesses.push_back(d);
  }
  return res;
}

// ---- Hofstadter-Bose-Hubbard: MBCN ---------------------------------------------

struct MbcnLattice {
  HBHParams params;
  int n_bosons = 3;
  MBCNRegions regions;
  BasisPtr basis;
  StateVector gs;
  std::shared_ptr<MbcnOperator> op;
};

// Columns c1 | c2 range | c3 with strip height ly starting at row 0.
inline MbcnLattice make_mbcn_lattice(const HBHParams& params, int n_bosons, int col1,
                                     int col3, int ly) {
  MbcnLattice lat;
  lat.params = params;
  lat.n_bosons = n_bosons;
  lat.basis = make_bosonic(params.lx * params.ly, n_bosons, n_bosons,
                           grid_positions(params.lx, params.ly));
  SparseOp h = build_hbh(params, *lat.basis);
  lat.gs = ground_state(h, lat.basis, 1e-9);
  auto sid = [&](int x, int y) { return x * params.ly + y; };
  for (int y = 0; y < ly; ++y) {
    lat.regions.r1.push_back(sid(col1, y));
    lat.regions.r3.push_back(sid(col3, y));
  }
  for (int x = col1 + 1; x < col3; ++x)
    for (int y = 0; y < ly; ++y) lat.regions.r2.push_back(sid(x, y));
  lat.regions.ly = ly;
  lat.regions.s = 2;
  lat.op = std::make_shared<MbcnOperator>(lat.regions, lat.basis);
  return lat;
}

inline std::vector<cplx> exact_mbcn_curve(const MbcnLattice& lat, int n_phi = 32) {
  std::vector<cplx> curve;
  for (int k = 0; k < n_phi; ++k)
    curve.push_back(lat.op->expectation(lat.gs, 2 * PI * k / n_phi));
  return curve;
}

struct MbcnSampledOptions {
  HBHParams params{1.0, 5.0, 2.0 / 3.0, 4, 4};
  int n_bosons = 3;
  int col1 = 0, col3 = 3, ly = 3;
  int n_phi = 32;
  Index m = 2000;
  int repetitions = 48;
  std::uint64_t seed = 23;
  int max_patch_bosons = 2;  // occupations beyond this on R1 u R3 are discarded
};

struct MbcnSampledResult {
  std::vector<cplx> exact_curve;
  WindingResult exact_winding;
  std::vector<WindingResult> sampled_windings;
  double success_probability = 0;
  double discard_fraction = 0;
};

// Estimate <T(phi)> by quenching the R1 u R3 patch against a second-layer
// bridge and reading V2^s directly off the R2 measurement outcomes.
inline MbcnSampledResult run_hbh_mbcn_sampled(const MbcnSampledOptions& opt) {
  MbcnLattice lat = make_mbcn_lattice(opt.params, opt.n_bosons, opt.col1, opt.col3, opt.ly);
  MbcnSampledResult res;
  res.exact_curve = exact_mbcn_curve(lat, opt.n_phi);
  res.exact_winding = winding_number(res.exact_curve);

  const auto& reg = lat.regions;
  std::vector<int> patch_sites = reg.r1;
  patch_sites.insert(patch_sites.end(), reg.r3.begin(), reg.r3.end());
  std::sort(patch_sites.begin(), patch_sites.end());
  std::vector<int> r2_sites = reg.r2;
  std::sort(r2_sites.begin(), r2_sites.end());

  // bridge: second-layer row spanning the column range, attached to strip tops
  const int nb = opt.col3 - opt.col1 + 1;
  const int np = int(patch_sites.size());
  std::vector<Pos> bridge_pos;
  for (int i = 0; i < nb; ++i)
    bridge_pos.push_back({double(opt.col1 + i), double(opt.ly), 1});
  auto patch_pos = [&] {
    std::vector<Pos> pos;
    for (int s : patch_sites) pos.push_back(lat.basis->positions[s]);
    return pos;
  }();

  // quench bonds (extended numbering: patch sites then bridge sites)
  std::vector<BoseBond> bonds;
  auto peierls_y = [&](double x) { return std::exp(cplx(0, 2 * PI * opt.params.alpha * x)); };
  auto local_patch = [&](int x, int y) {
    for (int s = 0; s < np; ++s)
      if (patch_pos[s].x == x && patch_pos[s].y == y) return s;
    return -1;
  };
  for (int x : {opt.col1, opt.col3})
    for (int y = 0; y + 1 < opt.ly; ++y)
      bonds.push_back({local_patch(x, y + 1), local_patch(x, y),
                       -opt.params.j * peierls_y(x)});
  for (int i = 0; i + 1 < nb; ++i) bonds.push_back({np + i + 1, np + i, -opt.params.j});
  bonds.push_back({np, local_patch(opt.col1, opt.ly - 1), -opt.params.j});
  bonds.push_back({np + nb - 1, local_patch(opt.col3, opt.ly - 1), -opt.params.j});

  Config phi_cfg(nb, 0);
  phi_cfg[0] = 1;
  phi_cfg[nb - 1] = 1;  // one boson at each bridge end
  auto anc = make_bosonic(nb, 2, 2, bridge_pos);

  // joint state of patch and R2 (everything else traced out)
  std::vector<int> pr_sites = patch_sites;
  pr_sites.insert(pr_sites.end(), r2_sites.begin(), r2_sites.end());
  DensityMatrix rho_pr = reduced_density(lat.gs, pr_sites);
  auto patch_full = make_bosonic(np, std::nullopt, opt.n_bosons, patch_pos);

  // decompose rho_pr by R2 readout pattern: index maps
  const auto& prb = *rho_pr.basis;
  std::vector<Index> patch_idx(prb.dim());
  std::vector<Config> r2_pat(prb.dim());
  for (Index i = 0; i < prb.dim(); ++i) {
    const Config& c = prb.configs[i];
    Config pc(c.begin(), c.begin() + np), rc(c.begin() + np, c.end());
    patch_idx[i] = patch_full->index_of(pc);
    r2_pat[i] = rc;
  }

  // sector machinery per boson count on the patch
  struct SectorCtx {
    BasisPtr sys;
    ScramblingMap map;
    std::shared_ptr<RecoverySolver> solver;
    Index z_offset = 0;
    std::vector<Index> sys_in_full;  // sector config -> patch_full ordinal
  };
  std::vector<SectorCtx> sectors;
  Index z_total = 0;
  {
    Mat rho_patch = Mat::Zero(patch_full->dim(), patch_full->dim());
    for (Index i = 0; i < prb.dim(); ++i)
      for (Index j = 0; j < prb.dim(); ++j)
        if (r2_pat[i] == r2_pat[j])
          rho_patch(patch_idx[i], patch_idx[j]) += rho_pr.mat(i, j);
    for (int n = 0; n <= opt.max_patch_bosons; ++n) {
      SectorCtx ctx;
      ctx.sys = make_bosonic(np, n, std::max(1, n), patch_pos);
      JointConstraints joint;
      joint.total_number = n + 2;
      auto ext = tensor_extend(ctx.sys, anc, joint);
      QuenchConfig cfg;
      cfg.sys = ctx.sys;
      cfg.anc = anc;
      cfg.ext = ext;
      cfg.phi = Vec::Zero(anc->dim());
      cfg.phi[anc->index_of(phi_cfg)] = 1.0;
      cfg.hamiltonian = build_bose_bonds(bonds, opt.params.u, *ext);
      cfg.time = 10.0 / opt.params.j;
      cfg.setup = QuenchSetup::Bridged;
      ctx.map = build_scrambling_map(cfg);
      Mat block = extract_block(rho_patch, *patch_full, *ctx.sys);
      double w = std::max(block.trace().real(), 1e-14);
      ctx.solver = std::make_shared<RecoverySolver>(
          ctx.map, RecoveryFlavor::GammaOptimal, (ctx.map.born(block / w) * w).eval());
      ctx.z_offset = z_total;
      z_total += ctx.map.d_ext();
      for (Index i = 0; i < ctx.sys->dim(); ++i)
        ctx.sys_in_full.push_back(patch_full->index_of(ctx.sys->configs[i]));
      sectors.push_back(std::move(ctx));
    }
  }

  // per-phi estimator tables over the concatenated patch-outcome space
  std::vector<Vec> tables(opt.n_phi, Vec::Zero(z_total));
  for (int k = 0; k < opt.n_phi; ++k) {
    double phi = 2 * PI * k / opt.n_phi;
    for (auto& ctx : sectors) {
      Mat block = lat.op->patch_block(*ctx.sys, phi);
      tables[k].segment(ctx.z_offset, ctx.map.d_ext()) = ctx.solver->estimator(block).o;
    }
  }

  // conditional outcome distributions per R2 pattern
  struct Conditional {
    double weight = 0;       // P(r) including discarded sectors
    double kept_weight = 0;  // mass inside kept sectors
    RVec p;                  // over concatenated patch outcomes (unnormalized)
    cplx v2 = 1.0;
  };
  std::map<Config, Index> r2_id;
  std::vector<Conditional> conds;
  for (Index i = 0; i < prb.dim(); ++i)
    if (!r2_id.count(r2_pat[i])) {
      r2_id[r2_pat[i]] = Index(conds.size());
      conds.push_back({});
    }
  {
    // v2 phases from R2 occupations
    for (auto& [pat, id] : r2_id) {
      double phase = 0;
      for (std::size_t q = 0; q < r2_sites.size(); ++q) {
        double yy = lat.basis->positions[r2_sites[q]].y;  // rows start at 0
        phase += reg.s * 2 * PI * yy / reg.ly * pat[q];
      }
      conds[id].v2 = std::exp(cplx(0, phase));
    }
    // collapsed patch blocks per pattern
    std::vector<std::vector<Index>> members(conds.size());
    for (Index i = 0; i < prb.dim(); ++i) members[r2_id[r2_pat[i]]].push_back(i);
    for (std::size_t r = 0; r < conds.size(); ++r) {
      Mat collapsed = Mat::Zero(patch_full->dim(), patch_full->dim());
      for (Index i : members[r])
        for (Index j : members[r])
          collapsed(patch_idx[i], patch_idx[j]) += rho_pr.mat(i, j);
      conds[r].weight = collapsed.trace().real();
      if (conds[r].weight <= 1e-14) continue;
      conds[r].p = RVec::Zero(z_total);
      for (const auto& ctx : sectors) {
        Mat block(ctx.sys->dim(), ctx.sys->dim());
        for (Index a = 0; a < ctx.sys->dim(); ++a)
          for (Index b = 0; b < ctx.sys->dim(); ++b)
            block(a, b) = collapsed(ctx.sys_in_full[a], ctx.sys_in_full[b]);
        double w = block.trace().real();
        if (w <= 1e-14) continue;
        conds[r].p.segment(ctx.z_offset, ctx.map.d_ext()) = ctx.map.born(block / w) * w;
        conds[r].kept_weight += w;
      }
    }
  }

  // sampling: draw R2 pattern, then patch outcome conditioned on it
  RVec p_r(conds.size());
  for (std::size_t r = 0; r < conds.size(); ++r) p_r[Index(r)] = conds[r].weight;
  double total_weight = p_r.sum();
  p_r /= total_weight;
  double kept = 0;
  for (const auto& c : conds) kept += c.kept_weight;
  res.discard_fraction = 1.0 - kept / total_weight;

  std::vector<std::unique_ptr<DiscreteSampler>> cond_samplers(conds.size());
  DiscreteSampler r_sampler(p_r);
  int successes = 0;
  for (int rep = 0; rep < opt.repetitions; ++rep) {
    CounterRng rng(opt.seed + std::uint64_t(rep), 0);
    std::vector<cplx> sums(opt.n_phi, cplx(0));
    std::vector<double> sq(opt.n_phi, 0.0);
    Index m_kept = 0;
    for (Index j = 0; j < opt.m; ++j) {
      Index r = r_sampler.draw(rng);
      const auto& c = conds[r];
      if (c.kept_weight <= 0) continue;  // all mass discarded for this pattern
      // rejection for the discarded sector mass within this pattern
      if (c.kept_weight < c.weight &&
          rng.next_double() > c.kept_weight / c.weight)
        continue;
      if (!cond_samplers[r]) cond_samplers[r] = std::make_unique<DiscreteSampler>(c.p);
      Index z = cond_samplers[r]->draw(rng);
      ++m_kept;
      for (int k = 0; k < opt.n_phi; ++k) {
        cplx v = tables[k][z] * c.v2;
        sums[k] += v;
        sq[k] += std::norm(v);
      }
    }
    if (m_kept < 2) continue;
    std::vector<cplx> curve(opt.n_phi);
    double max_stderr = 0;
    for (int k = 0; k < opt.n_phi; ++k) {
      curve[k] = sums[k] / double(m_kept);
      double var = std::max(0.0, sq[k] / m_kept - std::norm(curve[k]));
      max_stderr = std::max(max_stderr, std::sqrt(var / double(m_kept)));
    }
    WindingResult w = winding_number(curve, 3.0 * max_stderr);
    res.sampled_windings.push_back(w);
    if (w.winding == res.exact_winding.winding) ++successes;
  }
  res.success_probability =
      res.sampled_windings.empty()
          ? 0.0
          : double(successes) / double(res.sampled_windings.size());
  return res;
}

// ---- Hofstadter-Bose-Hubbard: bond currents --------------------------------------

struct BondCurrentRow {
  int ax = 0, ay = 0, bx = 0, by = 0;
  double exact = 0, estimate = 0, stderr_ = 0;
  bool edge = false;
  bool sampled = false;
};

struct CurrentsOptions {
  HBHParams params{1.0, 5.0, 0.25, 6, 6};
  int n_bosons = 3;
  double quench_t = 10.0;
  Index m = 5000;
  std::uint64_t seed = 29;
};

struct CurrentsResult {
  std::vector<BondCurrentRow> rows;
  double continuity_residual = 0;  // max over sites on the exact ground state
  double mean_edge = 0, mean_bulk = 0;
};

// Four shifted layouts of 2x2 patches; every bond is interior to at least one
// patch (a single shifted pair cannot cover the boundary ring on an open
// lattice). A bond is estimated in the first layout that contains it.
inline std::vector<std::vector<std::vector<int>>> current_patch_layouts(int lx, int ly) {
  std::vector<std::vector<std::vector<int>>> layouts;
  auto sid = [&](int x, int y) { return x * ly + y; };
  for (auto [ox, oy] : std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {1, 0}, {0, 1}}) {
    std::vector<std::vector<int>> patches;
    for (int x = ox; x + 1 < lx; x += 2)
      for (int y = oy; y + 1 < ly; y += 2)
        patches.push_back({sid(x, y), sid(x, y + 1), sid(x + 1, y), sid(x + 1, y + 1)});
    layouts.push_back(std::move(patches));
  }
  return layouts;
}

inline CurrentsResult run_hbh_currents(const CurrentsOptions& opt, bool sampled = true) {
  CurrentsResult res;
  auto basis = make_bosonic(opt.params.lx * opt.params.ly, opt.n_bosons, opt.n_bosons,
                            grid_positions(opt.params.lx, opt.params.ly));
  SparseOp h = build_hbh(opt.params, *basis);
  StateVector gs = ground_state(h, basis, 1e-9);
  auto bonds = hbh_bonds(opt.params);

  // exact currents and continuity
  std::map<std::pair<int, int>, double> exact;  // (a, b) -> <j>
  std::vector<double> inflow(basis->n_sites, 0.0);
  for (const auto& bd : bonds) {
    SparseOp j_op = bond_current_operator(bd, *basis);
    double v = std::real(expectation(j_op, gs.amps));
    exact[{bd.a, bd.b}] = v;
    inflow[bd.a] += v;
    inflow[bd.b] -= v;
  }
  for (double f : inflow) res.continuity_residual = std::max(res.continuity_residual, std::abs(f));

  auto pos = [&](int s) { return basis->positions[s]; };
  auto on_edge = [&](int s) {
    auto p = pos(s);
    return p.x == 0 || p.x == opt.params.lx - 1 || p.y == 0 || p.y == opt.params.ly - 1;
  };

  // patched sampling
  std::map<std::pair<int, int>, std::pair<double, double>> sampled_current;
  if (sampled) {
    auto layouts = current_patch_layouts(opt.params.lx, opt.params.ly);
    std::map<std::pair<int, int>, bool> covered;
    std::uint64_t stream = 0;
    for (const auto& layout : layouts) {
      for (const auto& patch : layout) {
        // bonds interior to this patch and not yet covered
        std::vector<BoseBond> interior;
        for (const auto& bd : bonds) {
          bool a_in = std::count(patch.begin(), patch.end(), bd.a);
          bool b_in = std::count(patch.begin(), patch.end(), bd.b);
          if (a_in && b_in && !covered[{bd.a, bd.b}]) interior.push_back(bd);
        }
        if (interior.empty()) continue;
        for (const auto& bd : interior) covered[{bd.a, bd.b}] = true;

        // patch quench: second-layer plaquette, two bosons on one diagonal
        const int np = int(patch.size());
        std::vector<Pos> patch_pos, anc_pos;
        for (int s : patch) patch_pos.push_back(pos(s));
        for (int s : patch) {
          Pos p = pos(s);
          p.layer = 1;
          anc_pos.push_back(p);
        }
        auto anc = make_bosonic(np, 2, 2, anc_pos);
        Config phi_cfg(np, 0);
        phi_cfg[0] = 1;
        phi_cfg[np - 1] = 1;
        std::vector<BoseBond> qbonds;
        auto local = [&](int s) {
          for (int q = 0; q < np; ++q)
            if (patch[q] == s) return q;
          return -1;
        };
        for (const auto& bd : bonds) {
          int la = local(bd.a), lb = local(bd.b);
          if (la >= 0 && lb >= 0) {
            qbonds.push_back({la, lb, bd.amp});            // system layer
            qbonds.push_back({np + la, np + lb, bd.amp});  // ancilla layer
          }
        }
        for (int q = 0; q < np; ++q) qbonds.push_back({q, np + q, -opt.params.j});

        DensityMatrix rho_patch = reduced_density(gs, patch);
        SectorMapSet set;
        for (int n = 0; n <= opt.n_bosons; ++n) {
          auto sys_b = make_bosonic(np, n, std::max(1, n), patch_pos);
          Mat block = extract_block(rho_patch.mat, *rho_patch.basis, *sys_b);
          double w = block.trace().real();
          if (w < 1e-12) continue;
          JointConstraints joint;
          joint.total_number = n + 2;
          auto ext = tensor_extend(sys_b, anc, joint);
          QuenchConfig cfg;
          cfg.sys = sys_b;
          cfg.anc = anc;
          cfg.ext = ext;
          cfg.phi = Vec::Zero(anc->dim());
          cfg.phi[anc->index_of(phi_cfg)] = 1.0;
          cfg.hamiltonian = build_bose_bonds(qbonds, opt.params.u, *ext);
          cfg.time = opt.quench_t;
          cfg.setup = QuenchSetup::Patched;
          SectorMapSet::Sector sec;
          sec.sys = sys_b;
          sec.map = build_scrambling_map(cfg);
          sec.weight = w;
          sec.p = sec.map.born(block / w) * w;
          sec.solver = std::make_shared<RecoverySolver>(sec.map, RecoveryFlavor::GammaOptimal,
                                                        (sec.p / w).eval());
          set.sectors.push_back(std::move(sec));
        }
        set.finalize();
        RVec p = set.full_distribution();
        SnapshotSet snaps = sample_snapshots(p, opt.m, opt.seed, stream++, set.hash);
        for (const auto& bd : interior) {
          int la = local(bd.a), lb = local(bd.b);
          EstimatorTable table = set.estimator([&](const HilbertBasis& sector) {
            return bond_current_operator({la, lb, bd.amp}, sector).to_dense();
          });
          EstimateResult est = estimate_linear(table, snaps);
          sampled_current[{bd.a, bd.b}] = {est.value.real(), est.stderr_};
        }
      }
    }
  }

  double edge_sum = 0, bulk_sum = 0;
  int edge_n = 0, bulk_n = 0;
  for (const auto& bd : bonds) {
    BondCurrentRow row;
    row.ax = int(pos(bd.a).x);
    row.ay = int(pos(bd.a).y);
    row.bx = int(pos(bd.b).x);
    row.by = int(pos(bd.b).y);
    row.exact = exact[{bd.a, bd.b}];
    row.edge = on_edge(bd.a) && on_edge(bd.b);
    auto it = sampled_current.find({bd.a, bd.b});
    if (it != sampled_current.end()) {
      row.sampled = true;
      row.estimate = it->second.first;
      row.stderr_ = it->second.second;
      (row.edge ? edge_sum : bulk_sum) += std::abs(row.estimate);
      (row.edge ? edge_n : bulk_n) += 1;
    }
    res.rows.push_back(row);
  }
  res.mean_edge = edge_n ? edge_sum / edge_n : 0.0;
  res.mean_bulk = bulk_n ? bulk_sum / bulk_n : 0.0;
  return res;
}

// Doublon-density scan of the HBH ground state over flux values.
struct DoublonRow {
  double alpha = 0, inv_filling = 0, doublon = 0;
};

inline std::vector<DoublonRow> run_doublon_scan(int lx, int ly, int n_bosons, double u,
                                                const std::vector<double>& alphas) {
  std::vector<DoublonRow> rows;
  auto basis = make_bosonic(lx * ly, n_bosons, n_bosons, grid_positions(lx, ly));
  for (double alpha : alphas) {
    HBHParams p{1.0, u, alpha, lx, ly};
    StateVector gs = ground_state(build_hbh(p, *basis), basis, 1e-8);
    double inv_nu = alpha * (lx - 1) * (ly - 1) / n_bosons;
    rows.push_back({alpha, inv_nu, doublon_density(gs)});
  }
  return rows;
}

}  // namespace qst
