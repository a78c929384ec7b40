#pragma once

#include <string>
#include <vector>

#include "hubbard_vqe/pauli.hpp"
#include "hubbard_vqe/rng.hpp"
#include "hubbard_vqe/simulator.hpp"

namespace hvqe {

/// Directed (control, target) pairs available to entangling gates.
struct CouplingMap {
  std::size_t n_qubits = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  /// Throws DomainError on repeated pairs, self loops or out-of-range qubits.
  void validate() const;

  /// Five-qubit T-shaped device: 0:(0,1) 1:(1,0) 2:(1,2) 3:(1,3) 4:(2,1) 5:(3,1).
  /// Qubit 4 hangs off qubit 3 on the device but is never used here.
  static CouplingMap ourense();
  /// Chain 0-1-...-(n-1), both directions: index 2i is (i, i+1), 2i+1 is (i+1, i).
  static CouplingMap linear(std::size_t n_qubits);
  /// Every ordered pair (a, b), a != b, in lexicographic order.
  static CouplingMap all_to_all(std::size_t n_qubits);

  /// Same device with qubits renamed: physical qubit p becomes logical_of_physical[p].
  CouplingMap relabeled(const std::vector<std::size_t>& logical_of_physical) const;
  /// Number of distinct neighbours of each qubit.
  std::vector<std::size_t> degrees() const;
};

/// Layout heuristic: logical qubits sorted by the summed |coefficient| of the
/// multi-qubit terms of `h` they take part in go, in that order, onto physical
/// qubits sorted by degree. Ties keep the lower index first. Returns
/// logical_of_physical for use with CouplingMap::relabeled.
std::vector<std::size_t> interaction_layout(const PauliSum& h, const CouplingMap& map);

/// Ordered coupling-map indices; repeats allowed.
struct CZSequence {
  std::vector<std::size_t> indices;

  std::size_t size() const { return indices.size(); }
  /// Compact form: one digit per index when every index is below 10,
  /// otherwise a JSON array.
  std::string to_string() const;

  /// "021" -> {0, 2, 1}. Throws DomainError on non-digits.
  static CZSequence from_digits(const std::string& digits);
  /// "[0, 2, 1]" -> {0, 2, 1}.
  static CZSequence from_json(const std::string& text);
  /// Either form, chosen by the first non-space character.
  static CZSequence parse(const std::string& text);
  /// "505441031454" with group size 3 -> "505", "441", "031", "454".
  static std::vector<CZSequence> split_digits(const std::string& digits, std::size_t group_size);
};

/// Uniform i.i.d. draws over map indices.
CZSequence random_sequence(const CouplingMap& map, std::size_t n_cz, CounterRng& rng);

/// Gate template with free rotation angles. Slot -1 marks a fixed gate.
class ParametrizedCircuit {
 public:
  ParametrizedCircuit(std::size_t n_qubits, std::vector<Gate> gates, std::vector<int> slots);

  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t n_parameters() const { return n_params_; }
  std::size_t n_entanglers() const;
  const std::vector<Gate>& gates() const { return gates_; }

  /// Gates with parameter i substituted into the i-th declared rotation.
  /// Throws DimensionError if theta has the wrong length.
  std::vector<Gate> bind(std::span<const double> theta) const;
  /// Like bind, into a caller-owned buffer (avoids reallocation in hot loops).
  void bind_into(std::span<const double> theta, std::vector<Gate>& out) const;

 private:
  std::size_t n_qubits_;
  std::size_t n_params_ = 0;
  std::vector<Gate> gates_;
  std::vector<int> slots_;
};

/// Ry, Rz on every active qubit (ascending), then per CZ: CZ(c, t), Ry, Rz on c,
/// Ry, Rz on t. 2 n_active + 4 n_CZ parameters.
ParametrizedCircuit build_adaptive_ryrz(std::size_t n_active, const CZSequence& seq,
                                        const CouplingMap& map);

/// Fixed-layout baseline: Ry, Rz on all qubits, then `layers` times a CZ
/// ladder (0,1), (1,2), ... followed by Ry, Rz on all qubits.
ParametrizedCircuit build_linear_ryrz(std::size_t n_qubits, std::size_t layers);

}  // namespace hvqe
