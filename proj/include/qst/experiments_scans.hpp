// experiments_scans.hpp — Lieb-Robinson quench-time scans, noise experiments
// (depolarizing closed form, Trotterized dephasing), symmetry diagnostics on
// fermionic patches, and the controlled-Clifford shadow bridge.
#pragma once

#include "qst/experiments.hpp"

namespace qst {

// ---- Lieb-Robinson scan ---------------------------------------------------------

struct LrScanRow {
  int n_sys = 0;
  int boundaries = 1;
  double t = 0;
  double var = 0;  // fidelity-estimator sample complexity; inf when incomplete
};

struct LrScanOptions {
  int length = 17;
  std::vector<int> sys_sizes{3, 4, 5, 6};
  std::vector<double> times;  // default grid below
  double delta = -1.0;
  double var_threshold = 1.5;
};

inline std::vector<int> lr_sys_sites(int length, int n, int boundaries) {
  std::vector<int> sites;
  if (boundaries == 1) {
    for (int i = 0; i < n; ++i) sites.push_back(i);
    return sites;
  }
  require(boundaries == 4, "lr_sys_sites: 1 or 4 boundaries");
  // two interior blocks separated by ancillae on all four block edges
  int n1 = (n + 1) / 2, n2 = n - n1;
  int start1 = 2, start2 = start1 + n1 + 3;
  for (int i = 0; i < n1; ++i) sites.push_back(start1 + i);
  for (int i = 0; i < n2; ++i) sites.push_back(start2 + i);
  require(start2 + n2 + 2 <= length, "lr_sys_sites: chain too short for 4 boundaries");
  return sites;
}

inline double lr_fidelity_variance(int length, const std::vector<int>& sys_sites,
                                   double delta, double t) {
  QuenchConfig cfg = rydberg_partitioned_chain_config(length, sys_sites, delta, t);
  ScramblingMap map = build_scrambling_map(cfg);
  // system Hamiltonian on the (possibly disconnected) system blockade graph
  RydbergParams sys_params{1.0, delta, 0.0, cfg.sys->constraints.blockade, {}};
  StateVector gs = ground_state(build_rydberg(sys_params, *cfg.sys), cfg.sys);
  Mat proj = pure_density(gs).mat;
  RVec p = map.born(proj);
  try {
    RecoverySolver solver(map, RecoveryFlavor::GammaOptimal, p);
    EstimatorTable table = solver.estimator(proj);
    // detect out-of-range observables (nearly singular maps) by residual
    Vec conj_o = table.o.conjugate();
    RVec sqrt_gamma = floor_distribution(p, map.d_ext()).cwiseInverse().cwiseSqrt();
    Vec y = conj_o.cwiseQuotient(sqrt_gamma.cast<cplx>());
    Vec resid = map.matrix().adjoint() * (sqrt_gamma.cast<cplx>().asDiagonal() * y) -
                vectorize(proj.adjoint());
    if (resid.norm() > 1e-6 * std::max(1.0, vectorize(proj).norm()))
      return std::numeric_limits<double>::infinity();
    return variance(table.o, p);
  } catch (const RankDeficientError&) {
    return std::numeric_limits<double>::infinity();
  }
}

struct LrScanResult {
  std::vector<LrScanRow> rows;
  std::map<std::pair<int, int>, double> t_star;  // (n_sys, boundaries) -> threshold time
};

inline LrScanResult run_lr_scan(const LrScanOptions& opt) {
  std::vector<double> times = opt.times;
  if (times.empty())
    for (double t = 2.0; t <= 48.0 + 1e-9; t += 2.0) times.push_back(t);
  LrScanResult res;
  auto scan_one = [&](int n, int boundaries) {
    auto sites = lr_sys_sites(opt.length, n, boundaries);
    double tstar = std::numeric_limits<double>::infinity();
    for (double t : times) {
      double var = lr_fidelity_variance(opt.length, sites, opt.delta, t);
      res.rows.push_back({n, boundaries, t, var});
      if (!std::isfinite(tstar) && var <= opt.var_threshold) tstar = t;
    }
    res.t_star[{n, boundaries}] = tstar;
  };
  for (int n : opt.sys_sizes) scan_one(n, 1);
  scan_one(5, 4);
  return res;
}

// ---- noise: depolarizing closed form ----------------------------------------------

struct DepolarizingCheck {
  double gamma_t = 0;
  double inversion_error = 0;   // max |R^g S^g - I|
  double mean_var_ratio = 0;    // mean over observables of Var^g / Var^0
  double predicted_ratio = 0;   // e^{2 gamma t}
};

struct DepolarizingOptions {
  RydbergQuenchSpec quench{6, 8, -1.0, 0.0, 2 * PI};
  std::vector<double> gamma_ts{0.1, 0.5, 1.0};
  int n_observables = 20;
  std::uint64_t seed = 31;
};

inline std::vector<DepolarizingCheck> run_depolarizing_check(const DepolarizingOptions& opt) {
  QuenchConfig cfg = rydberg_ladder_config(opt.quench);
  ScramblingMap map = build_scrambling_map(cfg);
  RydbergParams sys_params = rydberg_chain_params(opt.quench.n_sys, 1.0, opt.quench.delta);
  StateVector gs = ground_state(build_rydberg(sys_params, *cfg.sys), cfg.sys);
  Mat rho = pure_density(gs).mat;
  RVec p0 = map.born(rho);
  RecoveryMap r0 = moore_penrose(map);
  const Index d = map.d_sys(), de = map.d_ext();

  CounterRng rng(opt.seed, 0);
  std::vector<Mat> observables;
  for (int i = 0; i < opt.n_observables; ++i) {
    // random rank-k projector-like observables, k cycling over 1..d
    Index k = 1 + Index(i) % d;
    Mat g = random_matrix(d, rng);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ() * Mat::Identity(d, k);
    observables.push_back(q * q.adjoint());
  }

  std::vector<DepolarizingCheck> checks;
  for (double gt : opt.gamma_ts) {
    DepolarizingCheck c;
    c.gamma_t = gt;
    c.predicted_ratio = std::exp(2 * gt);
    Mat s_g = depolarize_map_matrix(map.matrix(), gt);
    RecoveryMap r_g = depolarizing_recovery(r0, gt, 1.0, de);
    c.inversion_error =
        (r_g.r * s_g - Mat::Identity(d * d, d * d)).cwiseAbs().maxCoeff();
    RVec p_g = depolarize_distribution(p0, gt);
    double acc = 0;
    for (const auto& obs : observables) {
      EstimatorTable t0 = r0.estimator(obs);
      EstimatorTable tg = r_g.estimator(obs);
      acc += variance(tg.o, p_g) / variance(t0.o, p0);
    }
    c.mean_var_ratio = acc / double(observables.size());
    checks.push_back(c);
  }
  return checks;
}

// ---- noise: Trotterized local dephasing --------------------------------------------

struct DephasingBoundOptions {
  RydbergQuenchSpec quench{6, 7, -1.0, 0.2, 2 * PI};
  double gamma_t = 0.02;
  int n_observables = 100;
  int trotter_steps = 0;  // 0 = spec default ceil(20 max(gamma t, |H| t))
  std::uint64_t seed = 37;
};

struct DephasingBoundRow {
  int rank = 0;
  double empirical = 0, bound = 0;
};

struct DephasingBoundResult {
  std::vector<DephasingBoundRow> rows;
  double fraction_within = 0;
  int trotter_steps_used = 0;
};

// Process noisy data with the noiseless recovery map; compare the systematic
// error against gamma t sqrt(sum o_z^2 / d_ext).
inline DephasingBoundResult run_dephasing_bound(const DephasingBoundOptions& opt) {
  QuenchConfig cfg = rydberg_ladder_config(opt.quench);
  ScramblingMap map = build_scrambling_map(cfg);
  RydbergParams sys_params = rydberg_chain_params(opt.quench.n_sys, 1.0, opt.quench.delta);
  StateVector gs = ground_state(build_rydberg(sys_params, *cfg.sys), cfg.sys);
  Mat rho = pure_density(gs).mat;
  RVec p0 = map.born(rho);
  RecoverySolver solver(map, RecoveryFlavor::GammaOptimal, p0);

  QuenchConfig noisy = cfg;
  NoiseChannel nc;
  nc.kind = NoiseChannel::Kind::LocalDephasing;
  nc.gamma = opt.gamma_t / cfg.time;
  nc.trotter_steps = opt.trotter_steps;
  noisy.noise = nc;
  DephasingBoundResult res;
  res.trotter_steps_used =
      opt.trotter_steps > 0 ? opt.trotter_steps : auto_trotter_steps(noisy);

  // noisy outcome distribution for the prepared state
  Mat rho_ext = embed_initial_columns(cfg) * rho * embed_initial_columns(cfg).adjoint();
  Mat evolved = apply_noisy_channel(noisy, std::move(rho_ext), res.trotter_steps_used);
  RVec p_g(map.d_ext());
  for (Index z = 0; z < map.d_ext(); ++z) p_g[z] = std::max(0.0, evolved(z, z).real());
  p_g /= p_g.sum();

  CounterRng rng(opt.seed, 0);
  const Index d = map.d_sys();
  int within = 0;
  for (int i = 0; i < opt.n_observables; ++i) {
    Index k = 1 + Index(i) % d;
    Mat g = random_matrix(d, rng);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ() * Mat::Identity(d, k);
    Mat obs = q * q.adjoint();
    EstimatorTable table = solver.estimator(obs);
    cplx noisy_mean = 0;
    for (Index z = 0; z < map.d_ext(); ++z) noisy_mean += p_g[z] * table.o[z];
    double exact = (obs * rho).trace().real();
    double empirical = std::abs(noisy_mean.real() - exact);
    double bound = systematic_error_bound(table, opt.gamma_t, 1.0, map.d_ext());
    if (empirical <= bound) ++within;
    res.rows.push_back({int(k), empirical, bound});
  }
  res.fraction_within = double(within) / double(opt.n_observables);
  return res;
}

// Dephasing variance-ratio scan on a small preset: the full noisy map is
// inverted per gamma and the sample-complexity ratio is reported.
struct NoiseScanRow {
  double gamma_t = 0;
  double mean_ratio = 0;
};

struct NoiseScanOptions {
  RydbergQuenchSpec quench{3, 4, -1.0, 0.0, 2 * PI};
  std::vector<double> gamma_ts{0.0, 0.05, 0.1, 0.2, 0.4};
  int n_observables = 10;
  std::uint64_t seed = 41;
};

struct NoiseScanResult {
  std::vector<NoiseScanRow> rows;
  double log_slope = 0;  // linear fit of log(ratio) vs gamma t
};

inline NoiseScanResult run_noise_scan(const NoiseScanOptions& opt) {
  QuenchConfig cfg = rydberg_ladder_config(opt.quench);
  ScramblingMap clean = build_scrambling_map(cfg);
  RydbergParams sys_params = rydberg_chain_params(opt.quench.n_sys, 1.0, opt.quench.delta);
  StateVector gs = ground_state(build_rydberg(sys_params, *cfg.sys), cfg.sys);
  Mat rho = pure_density(gs).mat;
  RVec p0 = clean.born(rho);
  RecoverySolver solver0(clean, RecoveryFlavor::GammaOptimal, p0);

  CounterRng rng(opt.seed, 0);
  const Index d = clean.d_sys();
  std::vector<Mat> observables;
  for (int i = 0; i < opt.n_observables; ++i) {
    Index k = 1 + Index(i) % d;
    Mat g = random_matrix(d, rng);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ() * Mat::Identity(d, k);
    observables.push_back(q * q.adjoint());
  }
  std::vector<double> base;
  for (const auto& obs : observables)
    base.push_back(variance(solver0.estimator(obs).o, p0));

  NoiseScanResult res;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n_fit = 0;
  for (double gt : opt.gamma_ts) {
    double ratio = 1.0;
    if (gt > 0) {
      QuenchConfig noisy = cfg;
      NoiseChannel nc;
      nc.kind = NoiseChannel::Kind::LocalDephasing;
      nc.gamma = gt / cfg.time;
      noisy.noise = nc;
      ScramblingMap noisy_map = build_noisy_scrambling_map(noisy);
      RVec p_g = noisy_map.born(rho);
      RecoverySolver solver_g(noisy_map, RecoveryFlavor::GammaOptimal, p_g);
      double acc = 0;
      for (std::size_t i = 0; i < observables.size(); ++i)
        acc += variance(solver_g.estimator(observables[i]).o, p_g) / base[i];
      ratio = acc / double(observables.size());
    }
    res.rows.push_back({gt, ratio});
    if (ratio > 0) {
      sx += gt;
      sy += std::log(ratio);
      sxx += gt * gt;
      sxy += gt * std::log(ratio);
      ++n_fit;
    }
  }
  double denom = n_fit * sxx - sx * sx;
  res.log_slope = denom != 0 ? (n_fit * sxy - sx * sy) / denom : 0.0;
  return res;
}

// ---- fermionic two-patch / bridged symmetry diagnostic ------------------------------

struct SymmetryDiagnostic {
  CompletenessReport two_patch;
  CompletenessReport bridged;
  double hopping_null_overlap = 0;   // two-patch case
  double hopping_bridged_overlap = 0;
  double explained_fraction = 0;     // null space weight between charge sectors
};

// System: one up-spin fermion shared by two far sites i and j; each patch has
// an ancilla site; the bridged variant adds tunneling between the ancillae.
// The bridge starts with an up and a down fermion so the on-site interaction
// acts during the quench (single-species free hopping leaves an invisible
// coherence combination even when bridged).
inline SymmetryDiagnostic run_symmetry_diagnostic(double t = 2.0, double u = 1.5) {
  auto sys = make_fermionic(2, 1, 0, {{0, 0, 0}, {3, 0, 0}});
  auto anc = make_fermionic(2, 1, 1, {{1, 0, 0}, {2, 0, 0}});
  Vec phi = Vec::Zero(anc->dim());
  phi[anc->index_of({1, 0, 1, 0})] = 1.0;  // both bridge fermions on the left site
  JointConstraints joint;
  joint.total_up = 2;
  joint.total_down = 1;
  auto ext = tensor_extend(sys, anc, joint);

  auto make_map = [&](bool bridged) {
    // extended sites: sys {0: left, 1: right}, anc {2: left, 3: right}
    FermiHubbardParams fh{1.0, u, {{0, 2}, {1, 3}}};
    if (bridged) fh.bonds.push_back({2, 3});
    QuenchConfig cfg;
    cfg.sys = sys;
    cfg.anc = anc;
    cfg.ext = ext;
    cfg.phi = phi;
    cfg.hamiltonian = build_fermi_hubbard(fh, *ext);
    cfg.time = t;
    cfg.setup = bridged ? QuenchSetup::Bridged : QuenchSetup::Patched;
    return build_scrambling_map(cfg);
  };

  ScramblingMap two_patch = make_map(false), bridged = make_map(true);
  SymmetryDiagnostic diag;
  diag.two_patch = singular_spectrum(two_patch);
  diag.bridged = singular_spectrum(bridged);
  // cross-patch hopping c^dag_i c_j + h.c. in the fixed-charge system basis
  Mat hop = Mat::Zero(sys->dim(), sys->dim());
  Config out;
  for (Index c = 0; c < sys->dim(); ++c) {
    Config cfg_c = sys->configs[c];
    for (auto [a, b] : {std::pair{0, 1}, std::pair{1, 0}}) {
      Config tmp = cfg_c;
      int s = detail::hop_config(cfg_c, a, b, tmp);
      if (s)
        if (auto row = sys->find(tmp)) hop(*row, c) += double(s);
    }
  }
  diag.hopping_null_overlap = null_space_overlap(diag.two_patch, hop);
  diag.hopping_bridged_overlap =
      diag.bridged.null_space.cols() ? null_space_overlap(diag.bridged, hop) : 0.0;
  // per-patch charge of each system basis state: occupation of the left site
  RVec charge(sys->dim());
  for (Index c = 0; c < sys->dim(); ++c) charge[c] = sys->configs[c][0];
  diag.explained_fraction =
      null_space_symmetry(diag.two_patch, charge).explained_fraction;
  return diag;
}

// ---- controlled-Clifford ensembles ---------------------------------------------------

inline std::vector<Mat> clifford_group(int n_qubits) {
  require(n_qubits == 1 || n_qubits == 2, "clifford_group: n <= 2 supported");
  const Index d = Index(1) << n_qubits;
  Mat h2(2, 2), s2(2, 2);
  h2 << 1, 1, 1, -1;
  h2 /= std::sqrt(2.0);
  s2 << 1, 0, 0, I_UNIT;
  std::vector<Mat> gens;
  auto lift = [&](const Mat& g, int target) {
    Mat out = Mat::Identity(1, 1);
    for (int q = 0; q < n_qubits; ++q) {
      Mat factor = q == target ? g : Mat::Identity(2, 2);
      Mat next(out.rows() * 2, out.cols() * 2);
      for (Index i = 0; i < out.rows(); ++i)
        for (Index j = 0; j < out.cols(); ++j)
          next.block(i * 2, j * 2, 2, 2) = out(i, j) * factor;
      out = next;
    }
    return out;
  };
  for (int q = 0; q < n_qubits; ++q) {
    gens.push_back(lift(h2, q));
    gens.push_back(lift(s2, q));
  }
  if (n_qubits == 2) {
    Mat cnot01 = Mat::Zero(4, 4), cnot10 = Mat::Zero(4, 4);
    // basis ordering |q0 q1> with q0 the first (row-major) qubit
    cnot01(0, 0) = cnot01(1, 1) = cnot01(2, 3) = cnot01(3, 2) = 1;
    cnot10(0, 0) = cnot10(3, 1) = cnot10(2, 2) = cnot10(1, 3) = 1;
    gens.push_back(cnot01);
    gens.push_back(cnot10);
  }
  // BFS modulo global phase; canonical form fixes the first nonzero entry
  auto canonical = [&](Mat u) {
    for (Index j = 0; j < d * d; ++j) {
      cplx v = u(j % d, j / d);
      if (std::abs(v) > 1e-8) {
        u *= std::conj(v) / std::abs(v);
        break;
      }
    }
    return u;
  };
  auto key_of = [&](const Mat& u) {
    std::string key;
    key.reserve(std::size_t(d * d * 4));
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) {
        auto quant = [](double x) { return int(std::llround(x * 1e6)); };
        int re = quant(u(i, j).real()), im = quant(u(i, j).imag());
        key.append(reinterpret_cast<const char*>(&re), sizeof re);
        key.append(reinterpret_cast<const char*>(&im), sizeof im);
      }
    return key;
  };
  std::vector<Mat> group{canonical(Mat::Identity(d, d))};
  std::map<std::string, bool> seen{{key_of(group[0]), true}};
  for (std::size_t head = 0; head < group.size(); ++head) {
    Mat base = group[head];
    for (const auto& g : gens) {
      Mat u = canonical(g * base);
      std::string key = key_of(u);
      if (!seen.count(key)) {
        seen[key] = true;
        group.push_back(std::move(u));
      }
    }
  }
  return group;
}

struct CliffordBridgeResult {
  Index ensemble_size = 0;
  double design_inverse_error = 0;  // |(S^dag S)^{-1}/mu - analytic| max
  double recovery_error = 0;        // exhaustive-outcome state recovery
  double povm_error = 0;
};

inline CliffordBridgeResult run_clifford_bridge(int n_qubits, std::uint64_t seed = 43) {
  auto group = clifford_group(n_qubits);
  auto sys = make_qubits(n_qubits);
  ScramblingMap map = controlled_unitary_ensemble(group, sys);
  CliffordBridgeResult res;
  res.ensemble_size = Index(group.size());
  res.povm_error = map.completeness_error();
  const Mat& s = map.matrix();
  Mat sts = s.adjoint() * s;
  Mat inv = sts.inverse();
  res.design_inverse_error =
      ((inv / double(group.size())) - analytic_design_inverse(n_qubits))
          .cwiseAbs()
          .maxCoeff();
  CounterRng rng(seed, 0);
  Mat rho = random_density(sys->dim(), rng);
  RecoveryMap r = moore_penrose(map);
  RVec p = map.born(rho);
  Vec rec = Vec::Zero(sys->dim() * sys->dim());
  for (Index z = 0; z < map.d_ext(); ++z) rec += p[z] * r.r.col(z);
  res.recovery_error =
      (devectorize(rec, sys->dim()) - rho).cwiseAbs().maxCoeff();
  return res;
}

}  // namespace qst
