// config.hpp — experiment configuration schema (JSON), named presets encoding
// the reference parameter sets, and the result-bundle writers used by the CLI.
#pragma once

#include "qst/experiments.hpp"
#include "qst/experiments_matter.hpp"
#include "qst/experiments_scans.hpp"

#include <json.hpp>

namespace qst {

using Json = nlohmann::json;

enum class ExperimentKind {
  RydbergFidelity,
  RydbergEnergy,
  RydbergEntropy,
  BcsDwave,
  HbhMbcn,
  HbhCurrents,
  LrScan,
  NoiseScan,
  NoiseDepolarizing,
  NoiseDephasingBound,
  CliffordBridge,
  DoublonScan,
  Custom,
};

struct ExperimentConfig {
  ExperimentKind kind{};
  std::string name;      // preset name or "custom"
  Json params;           // schema-checked per kind
  Index m = 2000;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::size_t budget_mb = 4096;
};

inline ExperimentKind kind_from_string(const std::string& s) {
  static const std::map<std::string, ExperimentKind> table{
      {"rydberg-fidelity", ExperimentKind::RydbergFidelity},
      {"rydberg-energy", ExperimentKind::RydbergEnergy},
      {"rydberg-entropy", ExperimentKind::RydbergEntropy},
      {"bcs-dwave", ExperimentKind::BcsDwave},
      {"hbh-mbcn", ExperimentKind::HbhMbcn},
      {"hbh-currents", ExperimentKind::HbhCurrents},
      {"lr-scan", ExperimentKind::LrScan},
      {"noise-scan", ExperimentKind::NoiseScan},
      {"noise-depolarizing", ExperimentKind::NoiseDepolarizing},
      {"noise-dephasing-bound", ExperimentKind::NoiseDephasingBound},
      {"clifford-bridge", ExperimentKind::CliffordBridge},
      {"doublon-scan", ExperimentKind::DoublonScan},
      {"custom", ExperimentKind::Custom},
  };
  auto it = table.find(s);
  require(it != table.end(), "unknown experiment kind '" + s + "'");
  return it->second;
}

// Named presets: the reference parameter sets, one command each.
inline Json preset_params(const std::string& name) {
  if (name == "rydberg-4x5") return {{"n_sys", 4}, {"n_anc", 5}, {"t_over_2pi", 1.0}};
  if (name == "rydberg-fidelity" || name == "rydberg-8x10")
    return {{"n_sys", 8}, {"n_anc", 10}, {"t_over_2pi", 1.0}, {"delta", -1.0},
            {"ref_min", -2.0}, {"ref_max", 2.0}, {"ref_points", 41}};
  if (name == "rydberg-fidelity-small")
    return {{"n_sys", 6}, {"n_anc", 8}, {"t_over_2pi", 1.0}, {"delta", -1.0},
            {"ref_min", -2.0}, {"ref_max", 2.0}, {"ref_points", 41}};
  if (name == "rydberg-energy")
    return {{"n_sys", 24}, {"quench_t_over_2pi", 4.0}, {"taus_over_2pi", {0.0, 2.0, 4.0}}};
  if (name == "rydberg-entropy")
    return {{"n_patches", 2}, {"quench_t_over_2pi", 6.0}, {"taus_over_2pi", {0.0, 2.0}}};
  if (name == "bcs-dwave")
    return {{"l", 11}, {"mu", 0.5}, {"delta", 5.0}, {"repetitions", 200}};
  if (name == "hbh-mbcn")
    return {{"exact", {{"lx", 6}, {"ly", 6}, {"alpha", 0.25}, {"u", 5.0}}},
            {"sampled", {{"lx", 4}, {"ly", 4}, {"alpha", 2.0 / 3.0}, {"u", 5.0},
                         {"repetitions", 48}}}};
  if (name == "hbh-currents")
    return {{"lx", 6}, {"ly", 6}, {"alpha", 0.25}, {"u", 5.0}, {"n_bosons", 3}};
  if (name == "lr-scan") return {{"length", 17}, {"sys_sizes", {3, 4, 5, 6}}};
  if (name == "noise-scan") return {{"n_sys", 3}, {"n_anc", 4}};
  if (name == "noise-depolarizing")
    return {{"n_sys", 6}, {"n_anc", 8}, {"gamma_ts", {0.1, 0.5, 1.0}}};
  if (name == "noise-dephasing-bound")
    return {{"n_sys", 6}, {"n_anc", 7}, {"gamma_t", 0.02}, {"v2", 0.2}};
  if (name == "clifford-bridge") return {{"qubits", 2}};
  if (name == "doublon-scan")
    return {{"lx", 5}, {"ly", 5}, {"n_bosons", 3}, {"u", 5.0}};
  throw Error("unknown preset '" + name + "'");
}

inline ExperimentConfig make_config(const std::string& preset, const Json& overrides = {}) {
  ExperimentConfig cfg;
  cfg.name = preset;
  std::string kind = preset;
  if (preset == "rydberg-4x5" || preset == "rydberg-8x10" || preset == "rydberg-fidelity-small")
    kind = "rydberg-fidelity";
  cfg.kind = kind_from_string(kind);
  cfg.params = preset_params(preset);
  for (auto it = overrides.begin(); it != overrides.end(); ++it) {
    if (it.key() == "m")
      cfg.m = it.value().get<Index>();
    else if (it.key() == "seed")
      cfg.seed = it.value().get<std::uint64_t>();
    else if (it.key() == "out")
      cfg.out_dir = it.value().get<std::string>();
    else if (it.key() == "budget_mb")
      cfg.budget_mb = it.value().get<std::size_t>();
    else {
      require(cfg.params.contains(it.key()),
              "config: unknown parameter '" + it.key() + "' for preset " + preset);
      cfg.params[it.key()] = it.value();
    }
  }
  return cfg;
}

// ---- bundle emission ------------------------------------------------------------

struct Bundle {
  std::filesystem::path dir;
  Json manifest;

  explicit Bundle(const std::filesystem::path& d) : dir(d) {
    std::filesystem::create_directories(dir);
    manifest["format_version"] = 1;
  }

  CsvWriter csv(const std::string& name, const std::vector<std::string>& header) {
    CsvWriter w(dir / name);
    w.row(header);
    manifest["files"].push_back(name);
    return w;
  }

  void finish() { write_json(manifest, dir / "manifest.json"); }
};

inline QuenchConfig quench_from_json(const ExperimentConfig& cfg) {
  RydbergQuenchSpec spec;
  spec.n_sys = cfg.params.value("n_sys", 8);
  spec.n_anc = cfg.params.value("n_anc", spec.n_sys + 2);
  spec.delta = cfg.params.value("delta", -1.0);
  spec.v2 = cfg.params.value("v2", 0.0);
  spec.t = cfg.params.value("t_over_2pi", 1.0) * 2 * PI;
  return rydberg_ladder_config(spec);
}

// Executes a preset end to end and writes its bundle. Returns the manifest.
inline Json run_experiment(const ExperimentConfig& cfg) {
  require(!cfg.out_dir.empty(), "run_experiment: output directory required");
  Bundle bundle(cfg.out_dir);
  bundle.manifest["preset"] = cfg.name;
  bundle.manifest["params"] = cfg.params;
  bundle.manifest["m"] = cfg.m;
  bundle.manifest["seed"] = cfg.seed;
  bundle.manifest["units"] = "Omega = 1 (Rydberg), J = 1 (Hubbard/HBH); times in inverse energy";

  switch (cfg.kind) {
    case ExperimentKind::RydbergFidelity: {
      RydbergFidelityOptions opt;
      opt.quench.n_sys = cfg.params.value("n_sys", 8);
      opt.quench.n_anc = cfg.params.value("n_anc", 10);
      opt.quench.delta = cfg.params.value("delta", -1.0);
      opt.quench.t = cfg.params.value("t_over_2pi", 1.0) * 2 * PI;
      opt.delta_state = opt.quench.delta;
      opt.ref_min = cfg.params.value("ref_min", -2.0);
      opt.ref_max = cfg.params.value("ref_max", 2.0);
      opt.ref_points = cfg.params.value("ref_points", 41);
      opt.m = cfg.m;
      opt.seed = cfg.seed;
      opt.budget_mb = cfg.budget_mb;
      auto art = prepare_rydberg_fidelity(opt);
      FidelityResult res = run_rydberg_fidelity(art, opt);
      auto csv = bundle.csv("fidelity.csv", {"delta_ref", "estimate", "stderr", "exact"});
      for (const auto& r : res.rows)
        csv.row({CsvWriter::num(r.delta_ref), CsvWriter::num(r.estimate),
                 CsvWriter::num(r.stderr_), CsvWriter::num(r.exact)});
      bundle.manifest["map_hash"] = art.map.config_hash;
      bundle.manifest["var_optimal"] = res.var_optimal;
      bundle.manifest["var_moore_penrose"] = res.var_moore_penrose;
      break;
    }
    case ExperimentKind::RydbergEnergy: {
      RydbergEnergyOptions opt;
      opt.n_sys = cfg.params.value("n_sys", 24);
      opt.quench_t = cfg.params.value("quench_t_over_2pi", 4.0) * 2 * PI;
      opt.taus.clear();
      for (double tau : cfg.params.value("taus_over_2pi", std::vector<double>{0, 2, 4}))
        opt.taus.push_back(tau * 2 * PI);
      opt.m = cfg.m;
      opt.seed = cfg.seed;
      auto rows = run_rydberg_energy(opt);
      auto csv = bundle.csv("energy.csv", {"site", "tau", "estimate", "stderr", "exact"});
      for (const auto& r : rows)
        csv.row({std::to_string(r.site), CsvWriter::num(r.tau), CsvWriter::num(r.estimate),
                 CsvWriter::num(r.stderr_), CsvWriter::num(r.exact)});
      break;
    }
    case ExperimentKind::RydbergEntropy: {
      RydbergEntropyOptions opt;
      opt.quench_t = cfg.params.value("quench_t_over_2pi", 6.0) * 2 * PI;
      opt.taus.clear();
      for (double tau : cfg.params.value("taus_over_2pi", std::vector<double>{0, 2}))
        opt.taus.push_back(tau * 2 * PI);
      opt.m = cfg.m;
      opt.seed = cfg.seed;
      RydbergEntropyResult res = run_rydberg_entropy(opt);
      auto csv = bundle.csv("entropy.csv",
                            {"cut", "tau", "estimate", "stderr", "exact", "stderr_a", "defined"});
      for (const auto& r : res.rows)
        csv.row({std::to_string(r.cut), CsvWriter::num(r.tau), CsvWriter::num(r.estimate),
                 CsvWriter::num(r.stderr_), CsvWriter::num(r.exact),
                 CsvWriter::num(r.stderr_a), r.defined ? "1" : "0"});
      break;
    }
    case ExperimentKind::BcsDwave: {
      int l = cfg.params.value("l", 11);
      for (Pairing wave : {Pairing::DWave, Pairing::SWave}) {
        BcsDwaveOptions opt;
        opt.params = {l, l, cfg.params.value("mu", 0.5), cfg.params.value("delta", 5.0), wave};
        opt.m = cfg.m;
        opt.repetitions = cfg.params.value("repetitions", 200);
        opt.seed = cfg.seed;
        DwaveResult res = run_bcs_dwave(opt);
        std::string tag = wave == Pairing::DWave ? "dwave" : "swave";
        auto csv = bundle.csv("witness_" + tag + ".csv", {"repetition", "witness"});
        for (std::size_t i = 0; i < res.sampled_witnesses.size(); ++i)
          csv.row({std::to_string(i), CsvWriter::num(res.sampled_witnesses[i])});
        bundle.manifest["exact_witness_" + tag] = res.exact_witness;
      }
      break;
    }
    case ExperimentKind::HbhMbcn: {
      Json sp = cfg.params["sampled"];
      MbcnSampledOptions opt;
      opt.params = {1.0, sp.value("u", 5.0), sp.value("alpha", 2.0 / 3.0),
                    sp.value("lx", 4), sp.value("ly", 4)};
      opt.col3 = sp.value("lx", 4) - 1;
      opt.ly = sp.value("ly", 4) - 1;
      opt.m = cfg.m;
      opt.repetitions = sp.value("repetitions", 48);
      opt.seed = cfg.seed;
      MbcnSampledResult res = run_hbh_mbcn_sampled(opt);
      auto csv = bundle.csv("mbcn_curve.csv", {"phi", "re_T", "im_T"});
      for (std::size_t k = 0; k < res.exact_curve.size(); ++k)
        csv.row({CsvWriter::num(2 * PI * double(k) / double(res.exact_curve.size())),
                 CsvWriter::num(res.exact_curve[k].real()),
                 CsvWriter::num(res.exact_curve[k].imag())});
      bundle.manifest["exact_winding"] = res.exact_winding.winding;
      bundle.manifest["success_probability"] = res.success_probability;
      bundle.manifest["discard_fraction"] = res.discard_fraction;
      break;
    }
    case ExperimentKind::HbhCurrents: {
      CurrentsOptions opt;
      opt.params = {1.0, cfg.params.value("u", 5.0), cfg.params.value("alpha", 0.25),
                    cfg.params.value("lx", 6), cfg.params.value("ly", 6)};
      opt.n_bosons = cfg.params.value("n_bosons", 3);
      opt.m = cfg.m;
      opt.seed = cfg.seed;
      CurrentsResult res = run_hbh_currents(opt);
      auto csv = bundle.csv("currents.csv",
                            {"ax", "ay", "bx", "by", "exact", "estimate", "stderr", "edge"});
      for (const auto& r : res.rows)
        csv.row({std::to_string(r.ax), std::to_string(r.ay), std::to_string(r.bx),
                 std::to_string(r.by), CsvWriter::num(r.exact), CsvWriter::num(r.estimate),
                 CsvWriter::num(r.stderr_), r.edge ? "1" : "0"});
      bundle.manifest["continuity_residual"] = res.continuity_residual;
      bundle.manifest["mean_edge"] = res.mean_edge;
      bundle.manifest["mean_bulk"] = res.mean_bulk;
      break;
    }
    case ExperimentKind::LrScan: {
      LrScanOptions opt;
      opt.length = cfg.params.value("length", 17);
      opt.sys_sizes = cfg.params.value("sys_sizes", std::vector<int>{3, 4, 5, 6});
      LrScanResult res = run_lr_scan(opt);
      auto csv = bundle.csv("lr_scan.csv", {"n_sys", "boundaries", "t", "var"});
      for (const auto& r : res.rows)
        csv.row({std::to_string(r.n_sys), std::to_string(r.boundaries), CsvWriter::num(r.t),
                 CsvWriter::num(r.var)});
      for (auto& [key, tstar] : res.t_star)
        bundle.manifest["t_star"][std::to_string(key.first) + "b" +
                                  std::to_string(key.second)] = tstar;
      break;
    }
    case ExperimentKind::NoiseScan: {
      NoiseScanOptions opt;
      opt.quench.n_sys = cfg.params.value("n_sys", 3);
      opt.quench.n_anc = cfg.params.value("n_anc", 4);
      NoiseScanResult res = run_noise_scan(opt);
      auto csv = bundle.csv("noise_scan.csv", {"gamma_t", "ratio"});
      for (const auto& r : res.rows)
        csv.row({CsvWriter::num(r.gamma_t), CsvWriter::num(r.mean_ratio)});
      bundle.manifest["log_slope"] = res.log_slope;
      break;
    }
    case ExperimentKind::NoiseDepolarizing: {
      DepolarizingOptions opt;
      opt.quench.n_sys = cfg.params.value("n_sys", 6);
      opt.quench.n_anc = cfg.params.value("n_anc", 8);
      opt.gamma_ts = cfg.params.value("gamma_ts", std::vector<double>{0.1, 0.5, 1.0});
      auto checks = run_depolarizing_check(opt);
      auto csv = bundle.csv("depolarizing.csv",
                            {"gamma_t", "inversion_error", "var_ratio", "e_2gt"});
      for (const auto& c : checks)
        csv.row({CsvWriter::num(c.gamma_t), CsvWriter::num(c.inversion_error),
                 CsvWriter::num(c.mean_var_ratio), CsvWriter::num(c.predicted_ratio)});
      break;
    }
    case ExperimentKind::NoiseDephasingBound: {
      DephasingBoundOptions opt;
      opt.quench.n_sys = cfg.params.value("n_sys", 6);
      opt.quench.n_anc = cfg.params.value("n_anc", 7);
      opt.quench.v2 = cfg.params.value("v2", 0.2);
      opt.gamma_t = cfg.params.value("gamma_t", 0.02);
      DephasingBoundResult res = run_dephasing_bound(opt);
      auto csv = bundle.csv("dephasing_bound.csv", {"rank", "empirical", "bound"});
      for (const auto& r : res.rows)
        csv.row({std::to_string(r.rank), CsvWriter::num(r.empirical), CsvWriter::num(r.bound)});
      bundle.manifest["fraction_within"] = res.fraction_within;
      bundle.manifest["trotter_steps"] = res.trotter_steps_used;
      break;
    }
    case ExperimentKind::CliffordBridge: {
      int n = cfg.params.value("qubits", 2);
      auto csv = bundle.csv("clifford.csv",
                            {"qubits", "ensemble", "design_inverse_err", "recovery_err"});
      for (int q = 1; q <= n; ++q) {
        CliffordBridgeResult res = run_clifford_bridge(q, cfg.seed);
        csv.row({std::to_string(q), std::to_string(res.ensemble_size),
                 CsvWriter::num(res.design_inverse_error), CsvWriter::num(res.recovery_error)});
      }
      break;
    }
    case ExperimentKind::DoublonScan: {
      std::vector<double> alphas;
      for (double a = 0.1; a <= 0.65; a += 0.05) alphas.push_back(a);
      auto rows = run_doublon_scan(cfg.params.value("lx", 5), cfg.params.value("ly", 5),
                                   cfg.params.value("n_bosons", 3),
                                   cfg.params.value("u", 5.0), alphas);
      auto csv = bundle.csv("doublon.csv", {"alpha", "inv_filling", "doublon"});
      for (const auto& r : rows)
        csv.row({CsvWriter::num(r.alpha), CsvWriter::num(r.inv_filling),
                 CsvWriter::num(r.doublon)});
      break;
    }
    case ExperimentKind::Custom: {
      // sanity path: identity quench, diagonal observable = direct average
      int n = cfg.params.value("n_sys", 2);
      auto sys = make_qubits(n);
      auto anc = make_qubits(n, line_positions(n, 1.0));
      QuenchConfig qc;
      qc.sys = sys;
      qc.anc = anc;
      qc.ext = tensor_extend(sys, anc);
      qc.phi = Vec::Zero(anc->dim());
      qc.phi[0] = 1.0;
      qc.hamiltonian = SparseOp(qc.ext->dim(), {});
      qc.time = 0.0;
      ScramblingMap map = build_scrambling_map(qc);
      CounterRng rng(cfg.seed, 0);
      Mat rho = random_density(sys->dim(), rng);
      RVec p = map.born(rho);
      // diagonal observable through direct outcome averaging
      RVec diag(sys->dim());
      for (Index i = 0; i < sys->dim(); ++i) diag[i] = double(i);
      SnapshotSet snaps = sample_snapshots(p, cfg.m, cfg.seed, 0, map.config_hash);
      double mean = 0;
      for (Index j = 0; j < snaps.m(); ++j)
        mean += diag[qc.ext->split[snaps.single(j)].first];
      mean /= double(snaps.m());
      double direct = 0;
      for (Index i = 0; i < sys->dim(); ++i) direct += diag[i] * rho(i, i).real();
      auto csv = bundle.csv("custom.csv", {"estimate", "direct"});
      csv.row({CsvWriter::num(mean), CsvWriter::num(direct)});
      break;
    }
  }
  bundle.finish();
  return bundle.manifest;
}

}  // namespace qst
