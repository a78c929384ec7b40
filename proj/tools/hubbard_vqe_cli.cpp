// Command-line front end: run, sweep, plotdata, replay and ed.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hubbard_vqe/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kInterrupted = 130;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw hvqe::ConfigError("--tprime", "not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw hvqe::ConfigError("--tprime", "empty list");
  return out;
}

int run_sweep(const hvqe::ExperimentConfig& cfg, const std::string& out_flag, bool quiet) {
  hvqe::ExperimentConfig c = cfg;
  c.output_dir = hvqe::resolve_output_dir(cfg, out_flag);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  auto progress = [&](std::size_t done, std::size_t total) {
    if (!quiet) std::cerr << "cell " << done << "/" << total << " done\n";
  };
  const auto outcome = hvqe::run_experiment(c, progress, &g_stop);
  const auto rows = hvqe::summarize(outcome.records);
  if (!quiet) hvqe::write_summary_csv(std::cout, rows);
  std::cerr << "results in " << c.output_dir << "\n";
  if (outcome.interrupted) {
    std::cerr << "interrupted: " << outcome.records.size() << " records kept\n";
    return kInterrupted;
  }
  return kOk;
}

int cmd_ed(double tprime, double u, double t, std::size_t n_sites, std::size_t levels,
           const std::string& csv) {
  hvqe::HubbardParams p{n_sites, t, tprime * t, u * t};
  p.validate();
  const hvqe::ModelOracle oracle(p);
  const auto ground = oracle.ground_state();
  std::printf("n_sites=%zu t=%g t'/t=%g U/t=%g\n", n_sites, t, tprime, u);
  std::printf("ground state: E=%.10f irrep=%s %s\n", ground.energy,
              hvqe::to_string(ground.label.irrep).c_str(), ground.label.to_string().c_str());
  std::vector<hvqe::SpectrumRow> rows;
  std::vector<hvqe::Irrep> irreps = {hvqe::Irrep::A1, hvqe::Irrep::A2, hvqe::Irrep::B1,
                                     hvqe::Irrep::B2, hvqe::Irrep::E};
  for (auto ir : irreps) {
    const auto sector = hvqe::SectorLabel::for_irrep(ir, n_sites);
    const auto spec = oracle.sector_spectrum(sector);
    std::printf("sector %-3s %s  E0=%.10f\n", hvqe::to_string(ir).c_str(), sector.to_string().c_str(),
                spec.energies[0]);
    for (std::size_t k = 0; k < std::min(levels, spec.size()); ++k) {
      rows.push_back({tprime, hvqe::to_string(ir), k, spec.energies[static_cast<Eigen::Index>(k)]});
    }
  }
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw hvqe::ConfigError("--csv", "cannot write '" + csv + "'");
    hvqe::write_spectrum_csv(out, rows);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry-resolved VQE for the Hubbard ring"};
  app.set_version_flag("--version", hvqe::library_version());
  app.require_subcommand(1);

  // run
  std::string run_config, run_out;
  bool quiet = false;
  std::size_t run_threads = 0;
  auto* run = app.add_subcommand("run", "Run the sweep described by a JSON config");
  run->add_option("config", run_config, "Config file")->required();
  run->add_option("-o,--output", run_out, "Output directory (default: config, then HUBBARD_VQE_OUTPUT)");
  run->add_option("--threads", run_threads, "Worker threads (overrides the config)");
  run->add_flag("-q,--quiet", quiet, "No progress or summary on the terminal");

  // sweep
  std::string sw_config, sw_tprime, sw_out, sw_label, sw_optimizer, sw_noise, sw_coupling;
  std::vector<std::string> sw_sectors;
  std::optional<double> sw_u, sw_p1, sw_p2, sw_readout;
  std::optional<std::size_t> sw_sites, sw_ncz, sw_nc, sw_ninit, sw_shots, sw_iters, sw_repeats,
      sw_c4, sw_threads;
  std::optional<std::uint64_t> sw_seed;
  auto* sweep = app.add_subcommand("sweep", "Run a sweep from flags (optionally on top of a config)");
  sweep->add_option("--config", sw_config, "Base config file");
  sweep->add_option("--tprime", sw_tprime, "Comma-separated t'/t values");
  sweep->add_option("--sector", sw_sectors, "Sector irrep (repeatable): A1, A2, B1, B2, E");
  sweep->add_option("--u", sw_u, "U/t");
  sweep->add_option("--n-sites", sw_sites, "Ring size (4 or 6)");
  sweep->add_option("--n-cz", sw_ncz, "Entangling gates per sequence");
  sweep->add_option("--n-c", sw_nc, "Sequence pool size");
  sweep->add_option("--n-init", sw_ninit, "Restarts per sequence");
  sweep->add_option("--shots", sw_shots, "Shots per measurement group (0 = exact)");
  sweep->add_option("--optimizer", sw_optimizer, "spsa or simplex");
  sweep->add_option("--iters", sw_iters, "SPSA iterations");
  sweep->add_option("--repeats", sw_repeats, "Measurement repeats K");
  sweep->add_option("--seed", sw_seed, "Master seed");
  sweep->add_option("--noise", sw_noise, "none or default");
  sweep->add_option("--p1", sw_p1, "Single-qubit depolarizing probability");
  sweep->add_option("--p2", sw_p2, "Two-qubit depolarizing probability");
  sweep->add_option("--readout", sw_readout, "Readout flip probability");
  sweep->add_option("--coupling", sw_coupling, "ourense, linear or all_to_all");
  sweep->add_option("--c4-shots", sw_c4, "Shots of the sampled rotation measurement");
  sweep->add_option("--label", sw_label, "Run label");
  sweep->add_option("--threads", sw_threads, "Worker threads");
  sweep->add_option("-o,--output", sw_out, "Output directory");
  sweep->add_flag("-q,--quiet", quiet, "No progress or summary on the terminal");

  // plotdata
  std::string pd_dir, pd_out;
  auto* plot = app.add_subcommand("plotdata", "Write figure CSVs from a results directory");
  plot->add_option("results-dir", pd_dir, "Results directory")->required();
  plot->add_option("-o,--output", pd_out, "Where to write the CSVs (default: results-dir)");

  // replay
  std::string rp_id, rp_dir;
  std::uint64_t rp_offset = 0;
  auto* rep = app.add_subcommand("replay", "Recompute one stored record and compare");
  rep->add_option("record-id", rp_id, "Record id, e.g. g3-B1-c2")->required();
  rep->add_option("--results", rp_dir, "Results directory (default: HUBBARD_VQE_OUTPUT or results)");
  rep->add_option("--seed-offset", rp_offset, "Perturb the stored VQE seed by this amount");

  // ed
  double ed_tp = 0.0, ed_u = 0.5, ed_t = 1.0;
  std::size_t ed_sites = 4, ed_levels = 4;
  std::string ed_csv;
  auto* ed = app.add_subcommand("ed", "Exact diagonalization only");
  ed->add_option("--tprime", ed_tp, "t'/t")->required();
  ed->add_option("--u", ed_u, "U/t")->required();
  ed->add_option("--t", ed_t, "Hopping t");
  ed->add_option("--n-sites", ed_sites, "Ring size (4 or 6)");
  ed->add_option("--levels", ed_levels, "Levels per sector in the CSV");
  ed->add_option("--csv", ed_csv, "Write the sector spectra as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      auto cfg = hvqe::ExperimentConfig::load(run_config);
      if (run_threads > 0) cfg.threads = run_threads;
      return run_sweep(cfg, run_out, quiet);
    }
    if (*sweep) {
      hvqe::ExperimentConfig cfg;
      if (!sw_config.empty()) cfg = hvqe::ExperimentConfig::load(sw_config);
      if (!sw_tprime.empty()) cfg.t_prime_grid = parse_list(sw_tprime);
      if (!sw_sectors.empty()) {
        cfg.sectors.clear();
        for (const auto& s : sw_sectors) {
          try {
            cfg.sectors.push_back(hvqe::parse_irrep(s));
          } catch (const hvqe::Error& e) {
            throw hvqe::ConfigError("--sector", e.what());
          }
        }
      }
      if (sw_u) cfg.u = *sw_u;
      if (sw_sites) {
        cfg.n_sites = *sw_sites;
        if (cfg.n_sites == 6 && cfg.coupling == "ourense") cfg.coupling = "linear";
      }
      if (sw_ncz) cfg.vqe.n_cz = *sw_ncz;
      if (sw_nc) cfg.vqe.n_c = *sw_nc;
      if (sw_ninit) cfg.vqe.n_init = *sw_ninit;
      if (sw_shots) cfg.vqe.shots = *sw_shots;
      if (!sw_optimizer.empty()) {
        try {
          cfg.vqe.optimizer = hvqe::parse_optimizer(sw_optimizer);
        } catch (const hvqe::Error& e) {
          throw hvqe::ConfigError("--optimizer", e.what());
        }
      }
      if (sw_iters) cfg.vqe.spsa.max_iters = *sw_iters;
      if (sw_repeats) cfg.vqe.repeats = *sw_repeats;
      if (sw_seed) cfg.vqe.seed = *sw_seed;
      if (!sw_noise.empty()) {
        if (sw_noise == "none") cfg.noise = hvqe::NoiseModel::none();
        else if (sw_noise == "default") cfg.noise = hvqe::NoiseModel{};
        else throw hvqe::ConfigError("--noise", "expected none or default");
      }
      if (sw_p1) cfg.noise.p1 = *sw_p1;
      if (sw_p2) cfg.noise.p2 = *sw_p2;
      if (sw_readout) cfg.noise.readout = *sw_readout;
      if (!sw_coupling.empty()) cfg.coupling = sw_coupling;
      if (sw_c4) cfg.c4_shots = *sw_c4;
      if (!sw_label.empty()) cfg.label = sw_label;
      if (sw_threads) cfg.threads = *sw_threads;
      cfg.validate();
      return run_sweep(cfg, sw_out, quiet);
    }
    if (*plot) {
      for (const auto& path : hvqe::emit_plotdata(pd_dir, pd_out)) std::cout << path << "\n";
      return kOk;
    }
    if (*rep) {
      hvqe::ExperimentConfig empty;
      const std::string dir = hvqe::resolve_output_dir(empty, rp_dir);
      const auto report = hvqe::replay(dir, rp_id, rp_offset);
      std::printf("record %s (version %s)\n", rp_id.c_str(), report.stored.version.c_str());
      std::printf("  stored     E_opt=%.17g E_L=%.17g E_non=%.17g\n", report.stored.e_opt.value,
                  report.stored.e_lanczos.value, report.stored.e_non);
      std::printf("  recomputed E_opt=%.17g E_L=%.17g E_non=%.17g\n", report.recomputed.e_opt.value,
                  report.recomputed.e_lanczos.value, report.recomputed.e_non);
      if (report.identical) {
        std::printf("identical\n");
        return kOk;
      }
      std::printf("differs in:");
      for (const auto& d : report.differences) std::printf(" %s", d.c_str());
      std::printf("\n");
      // A perturbed seed is expected to change the record.
      return rp_offset != 0 ? kOk : kNumericalError;
    }
    if (*ed) return cmd_ed(ed_tp, ed_u, ed_t, ed_sites, ed_levels, ed_csv);
  } catch (const hvqe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const hvqe::VersionMismatch& e) {
    std::cerr << "refusing to replay: " << e.what() << "\n";
    return kConfigError;
  } catch (const hvqe::DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  }
  return kOk;
}
