#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hubbard_vqe/ansatz.hpp"
#include "hubbard_vqe/hubbard.hpp"
#include "hubbard_vqe/mitigation.hpp"
#include "hubbard_vqe/tapering.hpp"
#include "hubbard_vqe/vqe.hpp"

namespace hvqe {

/// Library version baked in at build time; stored in every record.
std::string library_version();

/// Default t'/t grid of the four-site sweeps.
std::vector<double> default_grid();

/// Everything one sweep needs. Serialized as JSON with a schema version.
struct ExperimentConfig {
  static constexpr int kSchemaVersion = 1;

  std::string label = "experiment";
  std::size_t n_sites = 4;
  double t = 1.0;
  double u = 0.5;
  std::vector<double> t_prime_grid = default_grid();
  std::vector<Irrep> sectors = {Irrep::A1, Irrep::B1, Irrep::E};
  VqeConfig vqe;
  NoiseModel noise;
  /// "ourense", "linear", "all_to_all" or "custom" (then `custom_pairs`).
  std::string coupling = "ourense";
  std::vector<std::pair<std::size_t, std::size_t>> custom_pairs;
  /// Place strongly interacting qubits on well-connected device qubits.
  bool auto_layout = true;
  /// Shots for the sampled rotation-eigenvalue measurement; 0 skips it.
  std::size_t c4_shots = 8192;
  /// Empty means: resolved by the caller (flag, then environment, then "results").
  std::string output_dir;
  std::size_t threads = 1;

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  std::string to_json() const;
  /// Missing fields keep their defaults; unknown fields are rejected.
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig load(const std::string& path);

  HubbardParams params_at(std::size_t grid_index) const;
  /// Device map on the reduced register before layout.
  CouplingMap device(std::size_t n_qubits) const;
};

/// Tapered problem of one (t'/t, sector) cell with its exact references.
struct SectorProblem {
  HubbardParams params;
  SectorLabel sector;
  ModeOrdering ordering = ModeOrdering::tapering_friendly(4);
  TaperingPlan plan;
  SymmetryOperators symmetries;
  PauliSum hamiltonian;  // tapered
  PauliSum number;       // tapered
  double e0_sector = 0.0;
  double e0_ground = 0.0;
  Irrep ground_irrep = Irrep::A1;
  /// Tapered states spanning the lowest half-filling level of the sector.
  std::vector<Statevector> ground_space;

  static SectorProblem build(const HubbardParams& params, Irrep irrep);
};

/// Per-sequence outcome of one cell.
struct ExperimentRecord {
  std::string id;
  std::string version;
  std::string label;
  std::size_t grid_index = 0;
  std::size_t n_sites = 4;
  double t = 1.0;
  double t_prime = 0.0;
  double u = 0.0;
  Irrep sector = Irrep::A1;
  std::vector<int> sector_eigenvalues;
  std::size_t seq_index = 0;
  std::string sequence;
  std::vector<std::size_t> layout;
  std::size_t n_cz = 0;
  std::string optimizer;
  std::size_t shots = 0;
  NoiseModel noise;
  std::uint64_t vqe_seed = 0;
  std::uint64_t measure_seed = 0;

  std::vector<double> theta_opt;
  std::vector<double> restart_costs;
  std::size_t best_restart = 0;
  OptimizationTrace trace;  // best restart
  std::size_t evaluations = 0;
  bool selected = false;    // min over the pool

  EnergyEstimate e_opt;     // weighted over K repeats, raw
  EnergyEstimate e_lanczos; // weighted over K repeats, Lanczos
  std::size_t lanczos_fallbacks = 0;
  double e_non = 0.0;       // exact energy of theta_opt
  double n_non = 0.0;
  double filling_violation = 0.0;
  double e0_sector = 0.0;
  double e0_ground = 0.0;
  Irrep ground_irrep = Irrep::A1;

  double overlap = 0.0;                 // |<ED ground | psi(theta_opt)>|^2 in the sector
  std::vector<double> c4_exact;         // noiseless rotation distribution
  std::vector<double> c4_raw;           // sampled, no post-selection
  std::vector<double> c4_postselected;  // sampled, post-selected on known parities
  double retained_fraction = 1.0;

  std::string to_json() const;  // single line
  static ExperimentRecord from_json(const std::string& line);
};

std::string record_id(std::size_t grid_index, Irrep sector, std::size_t seq_index);

/// Seeds of one cell. Both depend only on the config seed and the cell position.
std::uint64_t cell_vqe_seed(const ExperimentConfig& cfg, std::size_t grid_index, Irrep sector);
std::uint64_t cell_measure_seed(const ExperimentConfig& cfg, std::size_t grid_index, Irrep sector);

/// Runs one (grid point, sector) cell and returns one record per pool sequence.
/// `vqe_seed` overrides the derived seed (used by replay checks).
std::vector<ExperimentRecord> run_cell(const ExperimentConfig& cfg, std::size_t grid_index,
                                       Irrep sector,
                                       std::optional<std::uint64_t> vqe_seed = std::nullopt);

/// One row of the sweep summary.
struct SummaryRow {
  double t_prime = 0.0;
  std::map<Irrep, double> e_lanczos;  // min over the pool per sector
  std::map<Irrep, double> e_opt;
  std::map<Irrep, double> e0;
  std::vector<Irrep> predicted;       // more than one entry means a tie
  std::vector<Irrep> exact;           // ED argmin over the sectors that ran
};

/// Groups records by grid point. Two sectors tie when their energies agree to 1e-9.
std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Called after each finished cell with (done, total).
using ProgressCallback = std::function<void(std::size_t, std::size_t)>;

struct RunOutcome {
  std::vector<ExperimentRecord> records;
  bool interrupted = false;
};

/// Output directory: `flag` if non-empty, else cfg.output_dir, else the
/// HUBBARD_VQE_OUTPUT environment variable, else "results".
std::string resolve_output_dir(const ExperimentConfig& cfg, const std::string& flag = "");

/// Full sweep into resolve_output_dir(cfg). Writes config.json, records.jsonl
/// (flushed per cell) and summary.csv. When `stop` becomes true, finished
/// cells are kept, the summary is written and the run returns early.
RunOutcome run_experiment(const ExperimentConfig& cfg, const ProgressCallback& progress = {},
                          const std::atomic<bool>* stop = nullptr);

std::vector<ExperimentRecord> load_records(const std::string& results_dir);

/// Writes fig3.csv ... fig6.csv into `results_dir` (or `out_dir` when given).
/// Cells present in the config but absent from the records become NA rows.
/// Returns the written paths.
std::vector<std::string> emit_plotdata(const std::string& results_dir,
                                       const std::string& out_dir = "");

/// Outcome of recomputing a stored record.
struct ReplayReport {
  ExperimentRecord stored;
  ExperimentRecord recomputed;
  bool identical = false;
  std::vector<std::string> differences;
};

/// Thrown when a record was written by another library version.
class VersionMismatch : public Error {
 public:
  VersionMismatch(const std::string& record, const std::string& binary)
      : Error("record written by version " + record + ", this binary is " + binary) {}
};

/// Recomputes a record from the stored config and seeds. `seed_offset` != 0
/// perturbs the VQE seed, which should change the result.
ReplayReport replay(const std::string& results_dir, const std::string& id,
                    std::uint64_t seed_offset = 0);

}  // namespace hvqe
