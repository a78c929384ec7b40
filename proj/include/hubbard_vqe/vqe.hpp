#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hubbard_vqe/ansatz.hpp"
#include "hubbard_vqe/pauli.hpp"
#include "hubbard_vqe/rng.hpp"
#include "hubbard_vqe/simulator.hpp"

namespace hvqe {

enum class OptimizerKind : std::uint8_t { spsa, simplex };
std::string to_string(OptimizerKind k);
OptimizerKind parse_optimizer(const std::string& name);

struct SpsaOptions {
  std::size_t max_iters = 100;
  double a = 0.0;            // 0 selects calibration against target_step
  double c = 0.1;
  double alpha = 0.602;
  double gamma = 0.101;
  double stability = -1.0;   // A; negative selects 0.1 * max_iters
  double target_step = 0.1;  // calibrated magnitude of the first update per coordinate
  std::size_t calibration_samples = 5;
  std::size_t final_shot_multiplier = 4;
};

struct SimplexOptions {
  std::size_t max_evaluations = 20000;
  double initial_step = 0.5;
  double diameter_tolerance = 1e-8;
  std::size_t restarts = 3;  // fresh simplices around the incumbent after convergence
};

struct VqeConfig {
  std::size_t n_cz = 3;
  std::size_t n_c = 4;        // sequence pool size
  std::size_t n_init = 5;     // restarts per sequence
  std::size_t shots = 1024;   // per measurement group; 0 = exact
  OptimizerKind optimizer = OptimizerKind::spsa;
  double penalty = 0.05;      // f in f (N - n_sites)^2
  std::size_t repeats = 5;    // K
  std::uint64_t seed = 1;
  SpsaOptions spsa;
  SimplexOptions simplex;

  void validate() const;
};

struct TraceRow {
  std::size_t iter;
  double cost;
  double sigma;
};

struct OptimizationTrace {
  std::vector<TraceRow> rows;
  /// CSV with header `iter,cost,sigma`.
  void write_csv(std::ostream& out) const;
};

struct OptimizeResult {
  std::vector<double> theta;
  EnergyEstimate value;
  OptimizationTrace trace;
  std::size_t evaluations = 0;
};

/// theta, shot multiplier, generator -> estimate.
using StochasticCost =
    std::function<EnergyEstimate(std::span<const double>, std::size_t, CounterRng&)>;
using DeterministicCost = std::function<double(std::span<const double>)>;

/// SPSA with gains a_k = a/(k+1+A)^alpha and c_k = c/(k+1)^gamma and
/// Rademacher perturbations. The returned theta is the best of the last
/// quarter of iterates, re-evaluated with final_shot_multiplier times the shots.
OptimizeResult spsa_minimize(const StochasticCost& cost, std::vector<double> theta0,
                             const SpsaOptions& opt, CounterRng& rng);

/// Nelder-Mead with dimension-adapted coefficients and restarts. Stops when the
/// simplex diameter falls below the tolerance or the evaluation budget is spent.
/// Never returns a point worse than theta0.
OptimizeResult simplex_minimize(const DeterministicCost& cost, std::vector<double> theta0,
                                const SimplexOptions& opt);

/// Penalized cost L = H + f (N - n_target)^2 for one ansatz.
class CostModel {
 public:
  CostModel(PauliSum h, PauliSum number, double n_target, double penalty, ParametrizedCircuit ansatz);

  const PauliSum& hamiltonian() const { return h_; }
  const PauliSum& number() const { return n_; }
  const PauliSum& cost_operator() const { return cost_op_; }
  const ParametrizedCircuit& ansatz() const { return ansatz_; }
  std::size_t n_parameters() const { return ansatz_.n_parameters(); }

  Statevector state(std::span<const double> theta) const;
  /// Exact L(theta).
  double exact(std::span<const double> theta) const;
  /// Exact <H>, <N> and <(N - n)^2> of the prepared state.
  double exact_energy(std::span<const double> theta) const;
  double exact_number(std::span<const double> theta) const;
  double exact_filling_violation(std::span<const double> theta) const;
  /// Shot estimate of L(theta); shots = 0 gives the exact value.
  EnergyEstimate sampled(std::span<const double> theta, std::size_t shots, const NoiseModel& noise,
                         CounterRng& rng) const;

 private:
  PauliSum h_, n_, cost_op_, violation_;
  double n_target_;
  ParametrizedCircuit ansatz_;
  Eigen::MatrixXcd dense_cost_, dense_h_, dense_n_, dense_violation_;
};

struct RestartResult {
  std::vector<double> theta0;
  OptimizeResult result;
};

struct SequenceResult {
  CZSequence sequence;
  std::vector<RestartResult> restarts;
  std::size_t best_restart = 0;
  const OptimizeResult& best() const { return restarts.at(best_restart).result; }
};

struct VqeResult {
  std::vector<SequenceResult> pool;
  std::size_t best_sequence = 0;  // lowest index among equal minima
  const SequenceResult& best() const { return pool.at(best_sequence); }
};

/// Builds one cost model per candidate sequence.
using CostModelFactory = std::function<CostModel(const CZSequence&)>;

/// Draws n_c sequences, runs n_init restarts each with theta0 ~ U[0, 2 pi),
/// keeps the best restart per sequence and the best sequence overall. The
/// optimizer sees the exact cost when cfg.shots = 0 or the optimizer is the
/// simplex, otherwise shot estimates under `noise`.
VqeResult random_search(const CostModelFactory& factory, const CouplingMap& map,
                        const VqeConfig& cfg, const NoiseModel& noise);

/// Optimizes one fixed sequence (the body of random_search for one pool member).
SequenceResult optimize_sequence(const CostModel& model, const CZSequence& seq,
                                 const VqeConfig& cfg, const NoiseModel& noise,
                                 CounterRng rng);

/// JSON array of the angles in declaration order.
std::string theta_to_json(std::span<const double> theta);
std::vector<double> theta_from_json(const std::string& text);

}  // namespace hvqe
