// qst command-line runner: declarative experiments, map inspection, sampling,
// and scan drivers over the preset table.
#include "qst/config.hpp"
#include "qst/diagnostics.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace qst;

namespace {

Json load_overrides(const std::string& config_path) {
  if (config_path.empty()) return Json::object();
  std::ifstream is(config_path);
  require(bool(is), "cannot open config file " + config_path);
  return Json::parse(is);
}

ScramblingMap build_preset_map(const std::string& preset, std::size_t budget_mb) {
  ExperimentConfig cfg = make_config(preset);
  cfg.budget_mb = budget_mb;
  return build_scrambling_map(quench_from_json(cfg), budget_mb);
}

std::filesystem::path ensure_out(const std::string& out) {
  require(!out.empty(), "--out is required");
  std::filesystem::create_directories(out);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ancilla-assisted shadow tomography simulator"};
  app.require_subcommand(1);

  std::string config_path, out, preset = "rydberg-4x5", flavor = "optimal";
  std::uint64_t seed = 1;
  Index m = 2000;
  std::size_t budget_mb = 4096;
  int threads = 1;
  app.add_option("--config", config_path, "JSON config with parameter overrides");
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--out", out, "output directory or file");
  app.add_option("--threads", threads, "worker threads (single-core builds ignore this)");
  app.add_option("--budget-mb", budget_mb, "dense-map memory budget in MiB");

  auto* basis_cmd = app.add_subcommand("basis", "build a basis and print its summary");
  std::string basis_kind = "blockaded-chain";
  int basis_sites = 8, basis_total = -1;
  basis_cmd->add_option("--kind", basis_kind, "qubit | blockaded-chain | bosonic | fermionic");
  basis_cmd->add_option("--sites", basis_sites);
  basis_cmd->add_option("--total", basis_total, "total particle number (bosonic/fermionic)");

  auto* ham_cmd = app.add_subcommand("hamiltonian", "build a preset Hamiltonian");
  ham_cmd->add_option("--preset", preset, "quench preset name");

  auto* map_cmd = app.add_subcommand("map", "scrambling-map operations");
  auto* map_build = map_cmd->add_subcommand("build", "build and persist a preset map");
  map_build->add_option("--preset", preset);
  auto* map_invert = map_cmd->add_subcommand("invert", "build the recovery map");
  map_invert->add_option("--preset", preset);
  map_invert->add_option("--flavor", flavor, "mp | optimal");
  auto* map_inspect = map_cmd->add_subcommand("inspect", "singular spectrum report");
  map_inspect->add_option("--preset", preset);

  auto* sample_cmd = app.add_subcommand("sample", "simulate measurement snapshots");
  sample_cmd->add_option("--preset", preset);
  sample_cmd->add_option("--m", m, "number of snapshots");

  auto* estimate_cmd = app.add_subcommand("estimate", "fidelity estimate from fresh snapshots");
  estimate_cmd->add_option("--preset", preset);
  estimate_cmd->add_option("--m", m);

  auto* exp_cmd = app.add_subcommand("experiment", "run preset experiments");
  auto* exp_run = exp_cmd->add_subcommand("run", "execute and write the result bundle");
  std::string exp_preset = "rydberg-fidelity";
  Index exp_m = 0;
  exp_run->add_option("--preset", exp_preset, "experiment preset");
  exp_run->add_option("--m", exp_m, "snapshots per estimate (0 = preset default)");
  auto* exp_report = exp_cmd->add_subcommand("report", "print a bundle manifest");
  std::string bundle_dir;
  exp_report->add_option("--bundle", bundle_dir, "bundle directory")->required();

  auto* scan_cmd = app.add_subcommand("scan", "parameter scans");
  auto* scan_lr = scan_cmd->add_subcommand("lr", "Lieb-Robinson quench-time scan");
  auto* scan_noise = scan_cmd->add_subcommand("noise", "dephasing variance-ratio scan");

  CLI11_PARSE(app, argc, argv);

  try {
    Json overrides = load_overrides(config_path);
    if (basis_cmd->parsed()) {
      BasisPtr b;
      if (basis_kind == "qubit") b = make_qubits(basis_sites);
      else if (basis_kind == "blockaded-chain") b = make_blockaded_chain(basis_sites);
      else if (basis_kind == "bosonic")
        b = make_bosonic(basis_sites, basis_total < 0 ? std::nullopt : std::optional<int>(basis_total),
                         std::max(1, basis_total));
      else if (basis_kind == "fermionic")
        b = make_fermionic(basis_sites, basis_total < 0 ? std::nullopt : std::optional<int>(basis_total),
                           basis_total < 0 ? std::nullopt : std::optional<int>(0));
      else throw Error("unknown basis kind " + basis_kind);
      std::cout << "kind=" << to_string(b->kind) << " sites=" << b->n_sites
                << " dim=" << b->dim() << " hash=" << std::hex << b->content_hash()
                << std::dec << "\n";
    } else if (ham_cmd->parsed()) {
      ExperimentConfig cfg = make_config(preset, overrides);
      QuenchConfig qc = quench_from_json(cfg);
      auto gs = ground_state(qc.hamiltonian);
      std::cout << "d_ext=" << qc.ext->dim() << " nnz=" << qc.hamiltonian.nnz()
                << " ground_energy=" << gs.energy
                << (gs.degenerate ? " (degenerate)" : "") << "\n";
    } else if (map_build->parsed()) {
      ScramblingMap map = build_preset_map(preset, budget_mb);
      auto path = ensure_out(out) / (preset + ".map");
      write_map(map, path);
      std::cout << "wrote " << path << " d_ext=" << map.d_ext()
                << " d_sys=" << map.d_sys() << " hash=" << std::hex << map.config_hash
                << std::dec << "\n";
    } else if (map_invert->parsed()) {
      ScramblingMap map = build_preset_map(preset, budget_mb);
      RecoveryMap r;
      if (flavor == "mp") r = moore_penrose(map);
      else {
        ExperimentConfig cfg = make_config(preset);
        QuenchConfig qc = quench_from_json(cfg);
        RydbergParams sp = rydberg_chain_params(cfg.params.value("n_sys", 8), 1.0,
                                                cfg.params.value("delta", -1.0));
        StateVector gs = ground_state(build_rydberg(sp, *qc.sys), qc.sys);
        r = optimal_recovery(map, map.born(pure_density(gs).mat));
      }
      auto path = ensure_out(out) / (preset + "." + flavor + ".rec");
      write_recovery(r, path);
      std::cout << "wrote " << path << " |RS - I| = " << r.inversion_error(map) << "\n";
    } else if (map_inspect->parsed()) {
      ScramblingMap map = build_preset_map(preset, budget_mb);
      CompletenessReport rep = singular_spectrum(map);
      std::cout << "sigma_max=" << rep.sigma_max << " sigma_min=" << rep.sigma_min
                << " complete=" << (rep.complete ? "yes" : "no")
                << " null_dim=" << rep.null_space.cols() << "\n";
      if (!out.empty()) {
        CsvWriter csv(ensure_out(out) / (preset + ".spectrum.csv"));
        csv.row({"index", "sigma"});
        for (Index i = 0; i < rep.singular_values.size(); ++i)
          csv.row({std::to_string(i), CsvWriter::num(rep.singular_values[i])});
      }
    } else if (sample_cmd->parsed()) {
      ExperimentConfig cfg = make_config(preset, overrides);
      QuenchConfig qc = quench_from_json(cfg);
      ScramblingMap map = build_scrambling_map(qc, budget_mb);
      RydbergParams sp = rydberg_chain_params(cfg.params.value("n_sys", 8), 1.0,
                                              cfg.params.value("delta", -1.0));
      StateVector gs = ground_state(build_rydberg(sp, *qc.sys), qc.sys);
      SnapshotSet snaps =
          sample_snapshots(map.born(pure_density(gs).mat), m, seed, 0, map.config_hash);
      auto path = ensure_out(out) / (preset + ".snap");
      write_snapshots(snaps, path);
      write_snapshots_csv(snaps, ensure_out(out) / (preset + ".snap.csv"));
      std::cout << "wrote " << path << " m=" << snaps.m() << "\n";
    } else if (estimate_cmd->parsed()) {
      ExperimentConfig cfg = make_config(preset, overrides);
      QuenchConfig qc = quench_from_json(cfg);
      ScramblingMap map = build_scrambling_map(qc, budget_mb);
      RydbergParams sp = rydberg_chain_params(cfg.params.value("n_sys", 8), 1.0,
                                              cfg.params.value("delta", -1.0));
      StateVector gs = ground_state(build_rydberg(sp, *qc.sys), qc.sys);
      RVec p = map.born(pure_density(gs).mat);
      RecoverySolver solver(map, RecoveryFlavor::GammaOptimal, p);
      EstimatorTable t = solver.estimator(pure_density(gs).mat);
      SnapshotSet snaps = sample_snapshots(p, m, seed, 0, map.config_hash);
      EstimateResult est = estimate_linear(t, snaps);
      std::cout << "self-fidelity estimate = " << est.value.real() << " +- " << est.stderr_
                << " (exact 1)\n";
    } else if (exp_run->parsed()) {
      ExperimentConfig cfg = make_config(exp_preset, overrides);
      if (exp_m > 0) cfg.m = exp_m;
      cfg.seed = seed;
      cfg.budget_mb = budget_mb;
      cfg.out_dir = ensure_out(out).string();
      Json manifest = run_experiment(cfg);
      std::cout << manifest.dump(2) << "\n";
    } else if (exp_report->parsed()) {
      std::ifstream is(std::filesystem::path(bundle_dir) / "manifest.json");
      require(bool(is), "no manifest in " + bundle_dir);
      std::cout << is.rdbuf();
    } else if (scan_lr->parsed()) {
      ExperimentConfig cfg = make_config("lr-scan", overrides);
      cfg.out_dir = ensure_out(out).string();
      std::cout << run_experiment(cfg).dump(2) << "\n";
    } else if (scan_noise->parsed()) {
      ExperimentConfig cfg = make_config("noise-scan", overrides);
      cfg.out_dir = ensure_out(out).string();
      std::cout << run_experiment(cfg).dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
