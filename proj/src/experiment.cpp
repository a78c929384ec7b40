#include "hubbard_vqe/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace hvqe {

using nlohmann::json;
namespace fs = std::filesystem;

std::string library_version() { return HUBBARD_VQE_VERSION; }

std::vector<double> default_grid() {
  return {0.2, 0.3, 0.4, 0.44, 0.48, 0.52, 0.56, 0.6, 0.7, 0.8};
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

// Reads fields of one JSON object, tracking the path for error messages and
// rejecting keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = convert<T>(*it, path(key));
    } catch (const json::exception& e) {
      throw ConfigError(path(key), std::string("wrong type (") + e.what() + ")");
    }
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path(it.key()), "unknown field");
    }
  }

 private:
  template <typename T>
  static T convert(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where, "expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where, "expected an integer");
      if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() &&
          v.get<long long>() < 0) {
        throw ConfigError(where, "must not be negative");
      }
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where, "expected a number");
      return v.get<T>();
    } else {
      return v.get<T>();
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_spsa(const json& j, const std::string& path, SpsaOptions& s) {
  ObjectReader r(j, path);
  r.read("max_iters", s.max_iters);
  r.read("a", s.a);
  r.read("c", s.c);
  r.read("alpha", s.alpha);
  r.read("gamma", s.gamma);
  r.read("stability", s.stability);
  r.read("target_step", s.target_step);
  r.read("calibration_samples", s.calibration_samples);
  r.read("final_shot_multiplier", s.final_shot_multiplier);
  r.finish();
}

void read_simplex(const json& j, const std::string& path, SimplexOptions& s) {
  ObjectReader r(j, path);
  r.read("max_evaluations", s.max_evaluations);
  r.read("initial_step", s.initial_step);
  r.read("diameter_tolerance", s.diameter_tolerance);
  r.read("restarts", s.restarts);
  r.finish();
}

void read_vqe(const json& j, const std::string& path, VqeConfig& v) {
  ObjectReader r(j, path);
  r.read("n_cz", v.n_cz);
  r.read("n_c", v.n_c);
  r.read("n_init", v.n_init);
  r.read("shots", v.shots);
  std::string opt = to_string(v.optimizer);
  r.read("optimizer", opt);
  try {
    v.optimizer = parse_optimizer(opt);
  } catch (const Error& e) {
    throw ConfigError(r.path("optimizer"), e.what());
  }
  r.read("penalty", v.penalty);
  r.read("repeats", v.repeats);
  r.read("seed", v.seed);
  if (const json* s = r.child("spsa")) read_spsa(*s, r.path("spsa"), v.spsa);
  if (const json* s = r.child("simplex")) read_simplex(*s, r.path("simplex"), v.simplex);
  r.finish();
}

json spsa_json(const SpsaOptions& s) {
  return {{"max_iters", s.max_iters},
          {"a", s.a},
          {"c", s.c},
          {"alpha", s.alpha},
          {"gamma", s.gamma},
          {"stability", s.stability},
          {"target_step", s.target_step},
          {"calibration_samples", s.calibration_samples},
          {"final_shot_multiplier", s.final_shot_multiplier}};
}

json simplex_json(const SimplexOptions& s) {
  return {{"max_evaluations", s.max_evaluations},
          {"initial_step", s.initial_step},
          {"diameter_tolerance", s.diameter_tolerance},
          {"restarts", s.restarts}};
}

json noise_json(const NoiseModel& n) {
  return {{"p1", n.p1}, {"p2", n.p2}, {"readout", n.readout}};
}

NoiseModel noise_from(const json& j, const std::string& path) {
  NoiseModel n;
  if (j.is_string()) {
    if (j.get<std::string>() == "none") return NoiseModel::none();
    if (j.get<std::string>() == "default") return n;
    throw ConfigError(path, "expected \"none\", \"default\" or an object");
  }
  ObjectReader r(j, path);
  r.read("p1", n.p1);
  r.read("p2", n.p2);
  r.read("readout", n.readout);
  r.finish();
  return n;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (label.empty()) throw ConfigError("label", "must not be empty");
  if (n_sites != 4 && n_sites != 6) throw ConfigError("model.n_sites", "only 4 and 6 are supported");
  if (!std::isfinite(t) || t <= 0.0) throw ConfigError("model.t", "must be positive");
  if (!std::isfinite(u)) throw ConfigError("model.u", "must be finite");
  if (t_prime_grid.empty()) throw ConfigError("t_prime_grid", "must not be empty");
  for (std::size_t i = 0; i < t_prime_grid.size(); ++i) {
    if (!std::isfinite(t_prime_grid[i])) {
      throw ConfigError("t_prime_grid[" + std::to_string(i) + "]", "must be finite");
    }
  }
  if (sectors.empty()) throw ConfigError("sectors", "must not be empty");
  std::set<Irrep> seen;
  for (std::size_t i = 0; i < sectors.size(); ++i) {
    if (!seen.insert(sectors[i]).second) {
      throw ConfigError("sectors[" + std::to_string(i) + "]", "listed twice");
    }
  }
  auto positive = [](std::size_t v, const char* field) {
    if (v == 0) throw ConfigError(field, "must be positive");
  };
  positive(vqe.n_c, "vqe.n_c");
  positive(vqe.n_init, "vqe.n_init");
  positive(vqe.repeats, "vqe.repeats");
  positive(vqe.spsa.max_iters, "vqe.spsa.max_iters");
  positive(vqe.simplex.max_evaluations, "vqe.simplex.max_evaluations");
  if (!(vqe.penalty >= 0.0)) throw ConfigError("vqe.penalty", "must be non-negative");
  if (!(vqe.spsa.c > 0.0)) throw ConfigError("vqe.spsa.c", "must be positive");
  if (!(vqe.spsa.target_step > 0.0)) throw ConfigError("vqe.spsa.target_step", "must be positive");
  if (!(vqe.simplex.initial_step > 0.0)) throw ConfigError("vqe.simplex.initial_step", "must be positive");
  try {
    vqe.validate();
  } catch (const Error& e) {
    throw ConfigError("vqe", e.what());
  }
  for (const auto& [field, p] : {std::pair{"noise.p1", noise.p1}, std::pair{"noise.p2", noise.p2},
                                 std::pair{"noise.readout", noise.readout}}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(field, "must be a probability in [0, 1]");
  }
  if (threads == 0) throw ConfigError("threads", "must be at least 1");
  try {
    device(2 * n_sites - 4).validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("device", e.what());
  }
}

CouplingMap ExperimentConfig::device(std::size_t n_qubits) const {
  if (coupling == "ourense") {
    if (n_qubits != 4) {
      throw ConfigError("device.coupling", "the T-shaped device has 4 usable qubits, the problem needs " +
                                                std::to_string(n_qubits));
    }
    return CouplingMap::ourense();
  }
  if (coupling == "linear") return CouplingMap::linear(n_qubits);
  if (coupling == "all_to_all") return CouplingMap::all_to_all(n_qubits);
  if (coupling == "custom") {
    if (custom_pairs.empty()) throw ConfigError("device.pairs", "custom coupling needs pairs");
    return CouplingMap{n_qubits, custom_pairs};
  }
  throw ConfigError("device.coupling", "unknown coupling '" + coupling + "'");
}

HubbardParams ExperimentConfig::params_at(std::size_t grid_index) const {
  return HubbardParams{n_sites, t, t_prime_grid.at(grid_index) * t, u * t};
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["label"] = label;
  j["model"] = {{"n_sites", n_sites}, {"t", t}, {"u", u}};
  j["t_prime_grid"] = t_prime_grid;
  json secs = json::array();
  for (auto s : sectors) secs.push_back(hvqe::to_string(s));
  j["sectors"] = secs;
  j["vqe"] = {{"n_cz", vqe.n_cz},       {"n_c", vqe.n_c},
              {"n_init", vqe.n_init},   {"shots", vqe.shots},
              {"optimizer", hvqe::to_string(vqe.optimizer)},
              {"penalty", vqe.penalty}, {"repeats", vqe.repeats},
              {"seed", vqe.seed},       {"spsa", spsa_json(vqe.spsa)},
              {"simplex", simplex_json(vqe.simplex)}};
  j["noise"] = noise_json(noise);
  j["device"] = {{"coupling", coupling}, {"pairs", custom_pairs}, {"auto_layout", auto_layout}};
  j["c4_shots"] = c4_shots;
  j["output_dir"] = output_dir;
  j["threads"] = threads;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  ObjectReader r(j, "");
  int version = 0;
  if (!j.is_object() || !j.contains("schema_version")) {
    throw ConfigError("schema_version", "missing");
  }
  r.read("schema_version", version);
  if (version != kSchemaVersion) {
    throw ConfigError("schema_version", "expected " + std::to_string(kSchemaVersion) + ", got " +
                                            std::to_string(version));
  }
  r.read("label", c.label);
  if (const json* m = r.child("model")) {
    ObjectReader mr(*m, "model");
    mr.read("n_sites", c.n_sites);
    mr.read("t", c.t);
    mr.read("u", c.u);
    mr.finish();
  }
  r.read("t_prime_grid", c.t_prime_grid);
  if (const json* s = r.child("sectors")) {
    if (!s->is_array()) throw ConfigError("sectors", "expected an array of irrep names");
    c.sectors.clear();
    for (std::size_t i = 0; i < s->size(); ++i) {
      const std::string where = "sectors[" + std::to_string(i) + "]";
      if (!(*s)[i].is_string()) throw ConfigError(where, "expected an irrep name");
      try {
        c.sectors.push_back(parse_irrep((*s)[i].get<std::string>()));
      } catch (const Error& e) {
        throw ConfigError(where, e.what());
      }
    }
  }
  if (const json* v = r.child("vqe")) read_vqe(*v, "vqe", c.vqe);
  if (const json* n = r.child("noise")) c.noise = noise_from(*n, "noise");
  if (const json* d = r.child("device")) {
    ObjectReader dr(*d, "device");
    dr.read("coupling", c.coupling);
    dr.read("pairs", c.custom_pairs);
    dr.read("auto_layout", c.auto_layout);
    dr.finish();
  }
  r.read("c4_shots", c.c4_shots);
  r.read("output_dir", c.output_dir);
  r.read("threads", c.threads);
  r.finish();
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

// ---------------------------------------------------------------------------
// Cells

SectorProblem SectorProblem::build(const HubbardParams& params, Irrep irrep) {
  params.validate();
  const ModelOracle oracle(params);
  SectorProblem p;
  p.params = params;
  p.sector = SectorLabel::for_irrep(irrep, params.n_sites);
  p.ordering = oracle.model().ordering;
  p.symmetries = oracle.symmetries();
  p.plan = build_plan(oracle.model().hamiltonian, p.symmetries.tapering_generators(),
                      SymmetryOperators::tapering_eigenvalues(p.sector));
  p.hamiltonian = taper(oracle.model().hamiltonian, p.plan);
  p.number = taper(oracle.model().number, p.plan);

  const Spectrum spec = oracle.sector_spectrum(p.sector);
  p.e0_sector = spec.energies[0];
  for (std::size_t k = 0; k < spec.size() && spec.energies[static_cast<Eigen::Index>(k)] < p.e0_sector + 1e-8; ++k) {
    p.ground_space.push_back(taper_state(spec.state(k), p.plan));
  }
  const ClassifiedState g = oracle.ground_state();
  p.e0_ground = g.energy;
  p.ground_irrep = g.label.irrep;
  return p;
}

std::string record_id(std::size_t grid_index, Irrep sector, std::size_t seq_index) {
  return "g" + std::to_string(grid_index) + "-" + to_string(sector) + "-c" + std::to_string(seq_index);
}

std::uint64_t cell_vqe_seed(const ExperimentConfig& cfg, std::size_t grid_index, Irrep sector) {
  return derive_seed(cfg.vqe.seed, 2 * grid_index, static_cast<std::uint64_t>(sector));
}

std::uint64_t cell_measure_seed(const ExperimentConfig& cfg, std::size_t grid_index, Irrep sector) {
  return derive_seed(cfg.vqe.seed, 2 * grid_index + 1, static_cast<std::uint64_t>(sector));
}

namespace {

// Parities that stay diagonal after the momentum-restoring gates: C2 reads the
// parity of the odd-momentum occupations, P_sigma that of each spin.
std::vector<ParityConstraint> momentum_constraints(const SectorProblem& p) {
  const ModeOrdering mom = p.ordering.restored_momentum();
  const std::size_t n = p.params.n_sites;
  const std::size_t nq = 2 * n;
  std::uint64_t c2 = 0, up = 0, dn = 0;
  for (std::size_t m = 0; m < n; ++m) {
    const std::uint64_t bu = std::uint64_t{1} << mom.qubit(m, Spin::up);
    const std::uint64_t bd = std::uint64_t{1} << mom.qubit(m, Spin::down);
    up |= bu;
    dn |= bd;
    if (m % 2 == 1) c2 |= bu | bd;
  }
  return {{PauliString(nq, 0, c2), p.sector.s_c2},
          {PauliString(nq, 0, up), p.sector.s_p_up},
          {PauliString(nq, 0, dn), p.sector.s_p_down}};
}

std::vector<Gate> lift_to_full(const std::vector<Gate>& reduced, const TaperingPlan& plan) {
  const auto& kept = plan.kept();
  std::vector<Gate> out = reduced;
  for (auto& g : out) {
    g.q0 = kept.at(g.q0);
    if (g.two_qubit()) g.q1 = kept.at(g.q1);
  }
  return out;
}

}  // namespace

std::vector<ExperimentRecord> run_cell(const ExperimentConfig& cfg, std::size_t grid_index,
                                       Irrep sector, std::optional<std::uint64_t> vqe_seed) {
  if (grid_index >= cfg.t_prime_grid.size()) throw DomainError("grid index out of range");
  const SectorProblem prob = SectorProblem::build(cfg.params_at(grid_index), sector);
  const std::size_t n_red = prob.plan.n_reduced();
  const std::size_t n_full = prob.plan.n_qubits();
  const double n_target = static_cast<double>(prob.params.n_sites);

  const CouplingMap base = cfg.device(n_red);
  std::vector<std::size_t> layout(n_red);
  std::iota(layout.begin(), layout.end(), 0);
  if (cfg.auto_layout) layout = interaction_layout(prob.hamiltonian, base);
  const CouplingMap map = base.relabeled(layout);

  VqeConfig vcfg = cfg.vqe;
  vcfg.seed = vqe_seed.value_or(cell_vqe_seed(cfg, grid_index, sector));
  const std::uint64_t mseed = cell_measure_seed(cfg, grid_index, sector);

  auto factory = [&](const CZSequence& s) {
    return CostModel(prob.hamiltonian, prob.number, n_target, vcfg.penalty,
                     build_adaptive_ryrz(n_red, s, map));
  };
  const VqeResult vqe = random_search(factory, map, vcfg, cfg.noise);
  const MomentOperators ops = MomentOperators::build(prob.hamiltonian);
  const ModeOrdering momentum = prob.ordering.restored_momentum();
  const std::vector<Gate> restore = momentum_restoring_gates(prob.ordering);
  const std::vector<Gate> untaper = untapering_circuit(prob.plan);
  const auto constraints = momentum_constraints(prob);
  const CounterRng measure_root(mseed);

  std::vector<ExperimentRecord> out;
  for (std::size_t c = 0; c < vqe.pool.size(); ++c) {
    const SequenceResult& sr = vqe.pool[c];
    const CostModel model = factory(sr.sequence);
    const OptimizeResult& best = sr.best();

    ExperimentRecord r;
    r.id = record_id(grid_index, sector, c);
    r.version = library_version();
    r.label = cfg.label;
    r.grid_index = grid_index;
    r.n_sites = prob.params.n_sites;
    r.t = prob.params.t;
    r.t_prime = cfg.t_prime_grid[grid_index];
    r.u = cfg.u;
    r.sector = sector;
    r.sector_eigenvalues = SymmetryOperators::tapering_eigenvalues(prob.sector);
    r.seq_index = c;
    r.sequence = sr.sequence.to_string();
    r.layout = layout;
    r.n_cz = vcfg.n_cz;
    r.optimizer = to_string(vcfg.optimizer);
    r.shots = vcfg.shots;
    r.noise = cfg.noise;
    r.vqe_seed = vcfg.seed;
    r.measure_seed = mseed;
    r.theta_opt = best.theta;
    for (const auto& rr : sr.restarts) r.restart_costs.push_back(rr.result.value.value);
    r.best_restart = sr.best_restart;
    r.trace = best.trace;
    for (const auto& rr : sr.restarts) r.evaluations += rr.result.evaluations;
    r.selected = (c == vqe.best_sequence);

    const std::vector<Gate> gates = model.ansatz().bind(best.theta);
    const Statevector psi = model.state(best.theta);
    CounterRng rng = measure_root.split(c);
    std::vector<EnergyEstimate> raw, lanczos;
    for (std::size_t k = 0; k < vcfg.repeats; ++k) {
      const MomentEstimates m = vcfg.shots == 0
                                    ? exact_moments(psi, ops)
                                    : measure_moments(gates, Statevector(n_red), ops, vcfg.shots,
                                                      cfg.noise, rng);
      const LanczosResult l = lanczos_estimate(m);
      raw.push_back(m.m1);
      lanczos.push_back(l.energy);
      if (l.degenerate) ++r.lanczos_fallbacks;
    }
    r.e_opt = weighted_average(raw).estimate;
    r.e_lanczos = weighted_average(lanczos).estimate;
    r.e_non = model.exact_energy(best.theta);
    r.n_non = model.exact_number(best.theta);
    r.filling_violation = model.exact_filling_violation(best.theta);
    r.e0_sector = prob.e0_sector;
    r.e0_ground = prob.e0_ground;
    r.ground_irrep = prob.ground_irrep;

    for (const auto& g : prob.ground_space) r.overlap += std::norm(g.inner(psi));

    Statevector full = untaper_state(psi, prob.plan);
    for (const auto& g : restore) apply_gate(full, g);
    r.c4_exact = measure_c4(full, momentum).probability;

    if (cfg.c4_shots > 0 && vcfg.shots > 0) {
      std::vector<Gate> circuit = lift_to_full(gates, prob.plan);
      circuit.insert(circuit.end(), untaper.begin(), untaper.end());
      circuit.insert(circuit.end(), restore.begin(), restore.end());
      const ShotCounts counts =
          sample_circuit(circuit, Statevector(n_full), cfg.c4_shots, cfg.noise, rng);
      r.c4_raw = rotation_from_counts(counts, momentum).probability;
      try {
        const PostselectResult ps = symmetry_postselect(counts, constraints);
        r.c4_postselected = rotation_from_counts(ps.counts, momentum).probability;
        r.retained_fraction = ps.retained_fraction;
      } catch (const PostselectionError& e) {
        r.retained_fraction = e.retained_fraction();
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Records

std::string ExperimentRecord::to_json() const {
  json j;
  j["id"] = id;
  j["version"] = version;
  j["label"] = label;
  j["grid_index"] = grid_index;
  j["n_sites"] = n_sites;
  j["t"] = t;
  j["t_prime_over_t"] = t_prime;
  j["u"] = u;
  j["sector"] = hvqe::to_string(sector);
  j["sector_eigenvalues"] = sector_eigenvalues;
  j["seq_index"] = seq_index;
  j["sequence"] = sequence;
  j["layout"] = layout;
  j["n_cz"] = n_cz;
  j["optimizer"] = optimizer;
  j["shots"] = shots;
  j["noise"] = noise_json(noise);
  j["seeds"] = {{"vqe", vqe_seed}, {"measure", measure_seed}};
  j["theta_opt"] = theta_opt;
  j["restart_costs"] = restart_costs;
  j["best_restart"] = best_restart;
  json tr = json::array();
  for (const auto& row : trace.rows) tr.push_back({row.iter, row.cost, row.sigma});
  j["trace"] = tr;
  j["evaluations"] = evaluations;
  j["selected"] = selected;
  j["E_opt"] = {{"value", e_opt.value}, {"sigma", e_opt.sigma}};
  j["E_L"] = {{"value", e_lanczos.value}, {"sigma", e_lanczos.sigma}};
  j["lanczos_fallbacks"] = lanczos_fallbacks;
  j["E_non"] = e_non;
  j["N_non"] = n_non;
  j["filling_violation"] = filling_violation;
  j["E0_sector"] = e0_sector;
  j["E0_ground"] = e0_ground;
  j["ground_irrep"] = hvqe::to_string(ground_irrep);
  j["overlap"] = overlap;
  j["c4_exact"] = c4_exact;
  j["c4_raw"] = c4_raw;
  j["c4_postselected"] = c4_postselected;
  j["retained_fraction"] = retained_fraction;
  return j.dump();
}

ExperimentRecord ExperimentRecord::from_json(const std::string& line) {
  ExperimentRecord r;
  try {
    const json j = json::parse(line);
    r.id = j.at("id").get<std::string>();
    r.version = j.at("version").get<std::string>();
    r.label = j.at("label").get<std::string>();
    r.grid_index = j.at("grid_index").get<std::size_t>();
    r.n_sites = j.at("n_sites").get<std::size_t>();
    r.t = j.at("t").get<double>();
    r.t_prime = j.at("t_prime_over_t").get<double>();
    r.u = j.at("u").get<double>();
    r.sector = parse_irrep(j.at("sector").get<std::string>());
    r.sector_eigenvalues = j.at("sector_eigenvalues").get<std::vector<int>>();
    r.seq_index = j.at("seq_index").get<std::size_t>();
    r.sequence = j.at("sequence").get<std::string>();
    r.layout = j.at("layout").get<std::vector<std::size_t>>();
    r.n_cz = j.at("n_cz").get<std::size_t>();
    r.optimizer = j.at("optimizer").get<std::string>();
    r.shots = j.at("shots").get<std::size_t>();
    r.noise = noise_from(j.at("noise"), "noise");
    r.vqe_seed = j.at("seeds").at("vqe").get<std::uint64_t>();
    r.measure_seed = j.at("seeds").at("measure").get<std::uint64_t>();
    r.theta_opt = j.at("theta_opt").get<std::vector<double>>();
    r.restart_costs = j.at("restart_costs").get<std::vector<double>>();
    r.best_restart = j.at("best_restart").get<std::size_t>();
    for (const auto& row : j.at("trace")) {
      r.trace.rows.push_back({row.at(0).get<std::size_t>(), row.at(1).get<double>(),
                              row.at(2).get<double>()});
    }
    r.evaluations = j.at("evaluations").get<std::size_t>();
    r.selected = j.at("selected").get<bool>();
    r.e_opt = {j.at("E_opt").at("value").get<double>(), j.at("E_opt").at("sigma").get<double>()};
    r.e_lanczos = {j.at("E_L").at("value").get<double>(), j.at("E_L").at("sigma").get<double>()};
    r.lanczos_fallbacks = j.at("lanczos_fallbacks").get<std::size_t>();
    r.e_non = j.at("E_non").get<double>();
    r.n_non = j.at("N_non").get<double>();
    r.filling_violation = j.at("filling_violation").get<double>();
    r.e0_sector = j.at("E0_sector").get<double>();
    r.e0_ground = j.at("E0_ground").get<double>();
    r.ground_irrep = parse_irrep(j.at("ground_irrep").get<std::string>());
    r.overlap = j.at("overlap").get<double>();
    r.c4_exact = j.at("c4_exact").get<std::vector<double>>();
    r.c4_raw = j.at("c4_raw").get<std::vector<double>>();
    r.c4_postselected = j.at("c4_postselected").get<std::vector<double>>();
    r.retained_fraction = j.at("retained_fraction").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError("record", std::string("malformed record: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError("record", e.what());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Summary

std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records) {
  std::map<std::size_t, SummaryRow> rows;
  for (const auto& r : records) {
    SummaryRow& row = rows[r.grid_index];
    row.t_prime = r.t_prime;
    auto keep_min = [](std::map<Irrep, double>& m, Irrep k, double v) {
      auto it = m.find(k);
      if (it == m.end() || v < it->second) m[k] = v;
    };
    keep_min(row.e_lanczos, r.sector, r.e_lanczos.value);
    keep_min(row.e_opt, r.sector, r.e_opt.value);
    row.e0[r.sector] = r.e0_sector;
  }
  auto argmin = [](const std::map<Irrep, double>& m) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& [k, v] : m) lo = std::min(lo, v);
    std::vector<Irrep> out;
    for (const auto& [k, v] : m) {
      if (v <= lo + 1e-9 * std::max(1.0, std::abs(lo))) out.push_back(k);
    }
    return out;
  };
  std::vector<SummaryRow> out;
  for (auto& [g, row] : rows) {
    row.predicted = argmin(row.e_lanczos);
    row.exact = argmin(row.e0);
    out.push_back(row);
  }
  return out;
}

namespace {

std::string join_irreps(const std::vector<Irrep>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += "|";
    s += to_string(xs[i]);
  }
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  std::set<Irrep> sectors;
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.e0) sectors.insert(k);
  }
  out << "t_prime_over_t";
  for (auto s : sectors) {
    const std::string n = to_string(s);
    out << ",E_L_" << n << ",E_opt_" << n << ",E0_" << n;
  }
  out << ",predicted,exact,tie,match\n";
  for (const auto& r : rows) {
    out << fmt(r.t_prime);
    for (auto s : sectors) {
      auto cell = [&](const std::map<Irrep, double>& m) {
        auto it = m.find(s);
        return it == m.end() ? std::string("NA") : fmt(it->second);
      };
      out << ',' << cell(r.e_lanczos) << ',' << cell(r.e_opt) << ',' << cell(r.e0);
    }
    const bool match = r.predicted == r.exact;
    out << ',' << join_irreps(r.predicted) << ',' << join_irreps(r.exact) << ','
        << (r.predicted.size() > 1 ? "yes" : "no") << ',' << (match ? "yes" : "no") << '\n';
  }
}

// ---------------------------------------------------------------------------
// Sweep

std::string resolve_output_dir(const ExperimentConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("HUBBARD_VQE_OUTPUT"); env && *env) return env;
  return "results";
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const ProgressCallback& progress,
                          const std::atomic<bool>* stop) {
  cfg.validate();
  const fs::path dir = resolve_output_dir(cfg);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output_dir", "cannot create '" + dir.string() + "': " + ec.message());

  {
    std::ofstream c(dir / "config.json");
    ExperimentConfig stored = cfg;
    stored.output_dir.clear();  // the location is not part of the experiment
    c << stored.to_json() << '\n';
  }
  std::ofstream records(dir / "records.jsonl", std::ios::trunc);
  if (!records) throw ConfigError("output_dir", "cannot write records in '" + dir.string() + "'");

  struct Cell {
    std::size_t grid;
    Irrep sector;
  };
  std::vector<Cell> cells;
  for (std::size_t g = 0; g < cfg.t_prime_grid.size(); ++g) {
    for (auto s : cfg.sectors) cells.push_back({g, s});
  }

  RunOutcome outcome;
  auto stopped = [&] { return stop && stop->load(); };
  auto emit = [&](std::vector<ExperimentRecord>&& recs, std::size_t done) {
    for (auto& r : recs) {
      records << r.to_json() << '\n';
      outcome.records.push_back(std::move(r));
    }
    records.flush();
    if (progress) progress(done, cells.size());
  };

  std::exception_ptr failure;
  if (cfg.threads <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (stopped()) {
        outcome.interrupted = true;
        break;
      }
      emit(run_cell(cfg, cells[i].grid, cells[i].sector), i + 1);
    }
  } else {
    // Workers fill slots; this thread writes them in cell order so the files
    // do not depend on scheduling.
    std::vector<std::optional<std::vector<ExperimentRecord>>> slots(cells.size());
    std::mutex mu;
    std::condition_variable cv;
    std::size_t next = 0;
    std::size_t running = std::min(cfg.threads, cells.size());
    bool abort = false;
    auto worker = [&] {
      for (;;) {
        std::size_t i = 0;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (abort || next >= cells.size() || stopped()) break;
          i = next++;
        }
        try {
          auto recs = run_cell(cfg, cells[i].grid, cells[i].sector);
          std::lock_guard<std::mutex> lock(mu);
          slots[i] = std::move(recs);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
          abort = true;
        }
        cv.notify_all();
      }
      std::lock_guard<std::mutex> lock(mu);
      --running;
      cv.notify_all();
    };
    std::vector<std::thread> pool;
    const std::size_t n_workers = running;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      std::unique_lock<std::mutex> lock(mu);
      cv.wait(lock, [&] { return slots[i].has_value() || running == 0; });
      if (!slots[i]) {
        outcome.interrupted = !failure;
        break;
      }
      auto recs = std::move(*slots[i]);
      slots[i].reset();
      lock.unlock();
      emit(std::move(recs), i + 1);
    }
    for (auto& th : pool) th.join();
  }

  std::ofstream summary(dir / "summary.csv");
  write_summary_csv(summary, summarize(outcome.records));
  if (failure) std::rethrow_exception(failure);
  return outcome;
}

std::vector<ExperimentRecord> load_records(const std::string& results_dir) {
  const fs::path path = fs::path(results_dir) / "records.jsonl";
  std::ifstream in(path);
  if (!in) throw ConfigError("", "no records file at '" + path.string() + "'");
  std::vector<ExperimentRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(ExperimentRecord::from_json(line));
    } catch (const ConfigError& e) {
      throw ConfigError("records.jsonl:" + std::to_string(n), e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Plot data

namespace {

struct Run {
  ExperimentConfig config;
  std::vector<ExperimentRecord> records;
};

// The directory itself and every immediate subdirectory holding a sweep.
std::vector<Run> collect_runs(const fs::path& dir) {
  std::vector<fs::path> dirs;
  if (fs::exists(dir / "config.json")) dirs.push_back(dir);
  if (fs::is_directory(dir)) {
    std::vector<fs::path> subs;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_directory() && fs::exists(e.path() / "config.json")) subs.push_back(e.path());
    }
    std::sort(subs.begin(), subs.end());
    dirs.insert(dirs.end(), subs.begin(), subs.end());
  }
  if (dirs.empty()) throw ConfigError("", "no results found under '" + dir.string() + "'");
  std::vector<Run> runs;
  for (const auto& d : dirs) {
    Run r{ExperimentConfig::load((d / "config.json").string()), {}};
    if (fs::exists(d / "records.jsonl")) r.records = load_records(d.string());
    runs.push_back(std::move(r));
  }
  return runs;
}

double p_minus_one(const std::vector<double>& dist, std::size_t n_sites) {
  return dist.size() == n_sites ? dist[n_sites / 2] : std::numeric_limits<double>::quiet_NaN();
}

std::string cell(double v) { return std::isnan(v) ? "NA" : fmt(v); }

}  // namespace

std::vector<std::string> emit_plotdata(const std::string& results_dir, const std::string& out_dir) {
  const fs::path dir(results_dir);
  const fs::path out = out_dir.empty() ? dir : fs::path(out_dir);
  fs::create_directories(out);
  const std::vector<Run> runs = collect_runs(dir);

  std::ofstream f3(out / "fig3.csv"), f4(out / "fig4.csv"), f5(out / "fig5.csv"),
      f6(out / "fig6.csv");
  f3 << "t_over,sector,seq,E_opt,E_L,E_non,sigma,E0_exact,sigma_opt,sequence,label\n";
  f4 << "t_over,sector,seq,overlap_with_ED_ground,P_lambda_minus1,P_lambda_minus1_sampled,"
        "P_lambda_minus1_postselected,retained_fraction,label\n";
  f5 << "n_CZ,mean_abs_error_over_grid,n_points,optimizer,label\n";
  f6 << "t_over,sector,E_vqe,E0_exact,abs_error,ed_ground_irrep,label\n";

  for (const auto& run : runs) {
    const auto& cfg = run.config;
    std::map<std::pair<std::size_t, Irrep>, std::vector<const ExperimentRecord*>> by_cell;
    for (const auto& r : run.records) by_cell[{r.grid_index, r.sector}].push_back(&r);
    double err_sum = 0.0;
    std::size_t err_n = 0;

    for (std::size_t g = 0; g < cfg.t_prime_grid.size(); ++g) {
      for (auto s : cfg.sectors) {
        const std::string tp = fmt(cfg.t_prime_grid[g]);
        const std::string sec = to_string(s);
        auto it = by_cell.find({g, s});
        if (it == by_cell.end()) {
          f3 << tp << ',' << sec << ",NA,NA,NA,NA,NA,NA,NA,NA," << cfg.label << '\n';
          f4 << tp << ',' << sec << ",NA,NA,NA,NA,NA,NA," << cfg.label << '\n';
          if (cfg.n_sites == 6) f6 << tp << ',' << sec << ",NA,NA,NA,NA," << cfg.label << '\n';
          continue;
        }
        auto recs = it->second;
        std::sort(recs.begin(), recs.end(),
                  [](auto* a, auto* b) { return a->seq_index < b->seq_index; });
        const ExperimentRecord* best = recs.front();
        for (const auto* r : recs) {
          f3 << tp << ',' << sec << ',' << r->seq_index << ',' << fmt(r->e_opt.value) << ','
             << fmt(r->e_lanczos.value) << ',' << fmt(r->e_non) << ',' << fmt(r->e_lanczos.sigma)
             << ',' << fmt(r->e0_sector) << ',' << fmt(r->e_opt.sigma) << ',' << r->sequence << ','
             << cfg.label << '\n';
          f4 << tp << ',' << sec << ',' << r->seq_index << ',' << fmt(r->overlap) << ','
             << cell(p_minus_one(r->c4_exact, r->n_sites)) << ','
             << cell(p_minus_one(r->c4_raw, r->n_sites)) << ','
             << cell(p_minus_one(r->c4_postselected, r->n_sites)) << ','
             << fmt(r->retained_fraction) << ',' << cfg.label << '\n';
          if (r->selected) best = r;
        }
        err_sum += std::abs(best->e_opt.value - best->e0_sector);
        ++err_n;
        if (cfg.n_sites == 6) {
          f6 << tp << ',' << sec << ',' << fmt(best->e_opt.value) << ',' << fmt(best->e0_sector)
             << ',' << fmt(std::abs(best->e_opt.value - best->e0_sector)) << ','
             << to_string(best->ground_irrep) << ',' << cfg.label << '\n';
        }
      }
    }
    f5 << cfg.vqe.n_cz << ',' << (err_n ? fmt(err_sum / static_cast<double>(err_n)) : "NA") << ','
       << err_n << ',' << to_string(cfg.vqe.optimizer) << ',' << cfg.label << '\n';
  }
  return {(out / "fig3.csv").string(), (out / "fig4.csv").string(), (out / "fig5.csv").string(),
          (out / "fig6.csv").string()};
}

// ---------------------------------------------------------------------------
// Replay

ReplayReport replay(const std::string& results_dir, const std::string& id,
                    std::uint64_t seed_offset) {
  const fs::path dir(results_dir);
  const ExperimentConfig cfg = ExperimentConfig::load((dir / "config.json").string());
  ReplayReport rep;
  bool found = false;
  for (auto& r : load_records(results_dir)) {
    if (r.id == id) {
      rep.stored = std::move(r);
      found = true;
      break;
    }
  }
  if (!found) throw ConfigError("record", "no record '" + id + "' in '" + dir.string() + "'");
  if (rep.stored.version != library_version()) {
    throw VersionMismatch(rep.stored.version, library_version());
  }
  if (rep.stored.grid_index >= cfg.t_prime_grid.size()) {
    throw ConfigError("record", "grid index outside the stored config");
  }
  auto recs = run_cell(cfg, rep.stored.grid_index, rep.stored.sector,
                       rep.stored.vqe_seed + seed_offset);
  if (rep.stored.seq_index >= recs.size()) throw ConfigError("record", "sequence index out of range");
  rep.recomputed = recs[rep.stored.seq_index];

  const json a = json::parse(rep.stored.to_json());
  const json b = json::parse(rep.recomputed.to_json());
  for (auto it = a.begin(); it != a.end(); ++it) {
    if (!b.contains(it.key()) || b.at(it.key()) != it.value()) rep.differences.push_back(it.key());
  }
  rep.identical = rep.differences.empty();
  return rep;
}

}  // namespace hvqe
