#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hubbard_vqe/common.hpp"
#include "hubbard_vqe/pauli.hpp"
#include "hubbard_vqe/rng.hpp"
#include "hubbard_vqe/statevector.hpp"

namespace hvqe {

enum class GateKind : std::uint8_t { ry, rz, x, z, cz, cx, unitary2 };

/// One gate. For cx, q0 is the control and q1 the target. For unitary2 the
/// 4x4 row-major matrix acts on the index (bit q0) + 2 (bit q1).
struct Gate {
  GateKind kind = GateKind::x;
  std::size_t q0 = 0;
  std::size_t q1 = 0;
  double theta = 0.0;
  std::array<complex_t, 16> matrix{};

  static Gate ry(std::size_t q, double theta);
  static Gate rz(std::size_t q, double theta);
  static Gate x(std::size_t q);
  static Gate z(std::size_t q);
  static Gate cz(std::size_t a, std::size_t b);
  static Gate cx(std::size_t control, std::size_t target);
  /// Throws DomainError unless the matrix is unitary to 1e-12.
  static Gate unitary2(std::size_t q0, std::size_t q1, const std::array<complex_t, 16>& m);

  bool two_qubit() const {
    return kind == GateKind::cz || kind == GateKind::cx || kind == GateKind::unitary2;
  }
  std::string to_string() const;
};

/// Applies one gate in place. Throws DimensionError for targets out of range.
void apply_gate(Statevector& psi, const Gate& g);

/// Exact evolution of `initial` (or |0...0> on n_qubits) through the circuit.
Statevector run(std::span<const Gate> circuit, const Statevector& initial);
Statevector run(std::span<const Gate> circuit, std::size_t n_qubits);

/// Depolarizing gate errors and symmetric readout flips.
///
/// After a gate on k qubits, with probability p1 (k = 1) or p2 (k = 2) a Pauli
/// drawn uniformly from all 4^k strings (identity included) is applied. This
/// is the channel rho -> (1 - p) rho + p I/2^k, so p = 1 fully depolarizes.
struct NoiseModel {
  double p1 = 0.001;
  double p2 = 0.01;
  double readout = 0.03;

  static NoiseModel none() { return {0.0, 0.0, 0.0}; }
  bool is_noiseless() const { return p1 == 0.0 && p2 == 0.0 && readout == 0.0; }
  bool has_gate_noise() const { return p1 > 0.0 || p2 > 0.0; }
  /// Throws DomainError unless all probabilities are in [0, 1].
  void validate() const;
};

/// Measurement outcomes keyed by basis index (bit k = qubit k).
struct ShotCounts {
  std::size_t n_qubits = 0;
  std::map<std::uint64_t, std::uint64_t> counts;
  std::uint64_t total = 0;

  void add(std::uint64_t outcome, std::uint64_t n = 1);
  std::uint64_t count(std::uint64_t outcome) const;
  /// Bitstring with qubit 0 rightmost.
  std::string bitstring(std::uint64_t outcome) const;
};

/// Samples the Born distribution of psi; readout flips from `noise` if given.
ShotCounts sample(const Statevector& psi, std::size_t shots, const NoiseModel& noise,
                  CounterRng& rng);

/// One stochastic trajectory of the circuit under gate noise (readout is not
/// applied; it belongs to measurement).
Statevector noisy_run(std::span<const Gate> circuit, const Statevector& initial,
                      const NoiseModel& noise, CounterRng& rng);

/// Shots of a circuit where every shot follows its own noise trajectory.
/// Shots whose trajectory draws no error are sampled from the ideal output.
ShotCounts sample_circuit(std::span<const Gate> circuit, const Statevector& initial,
                          std::size_t shots, const NoiseModel& noise, CounterRng& rng);

/// Terms measurable in one shared local basis.
struct MeasurementGroup {
  std::vector<char> basis;  // per qubit: 'X', 'Y', 'Z' or 'I' (unconstrained)
  std::vector<PauliTerm> terms;
};

/// Greedy qubit-wise commuting grouping of the non-identity terms, in term
/// order. The identity coefficient is not part of any group.
std::vector<MeasurementGroup> group_qubitwise(const PauliSum& op);

/// Gates rotating `basis` onto Z: X via Ry(-pi/2), Y via Rz(-pi/2) then Ry(-pi/2).
std::vector<Gate> basis_rotation(const std::vector<char>& basis);

/// Shot-based estimate of a Hermitian op after the circuit. Every group gets
/// `shots` shots; sigma^2 = sum over groups of the per-shot sample variance
/// divided by shots. With `shots` = 0 the exact expectation and sigma = 0 are
/// returned.
EnergyEstimate estimate_expectation(std::span<const Gate> circuit, const Statevector& initial,
                                    const PauliSum& op, std::size_t shots,
                                    const NoiseModel& noise, CounterRng& rng);

/// Mean and standard error of a group's observable from counts taken in the
/// group's rotated basis.
EnergyEstimate group_estimate(const MeasurementGroup& group, const ShotCounts& counts);

}  // namespace hvqe
