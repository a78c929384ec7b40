#pragma once

#include <string>
#include <vector>

#include "hubbard_vqe/fermion.hpp"
#include "hubbard_vqe/pauli.hpp"
#include "hubbard_vqe/simulator.hpp"
#include "hubbard_vqe/statevector.hpp"

namespace hvqe {

struct TaperedSymmetry {
  PauliString generator;  // Z/I string
  std::size_t qubit;      // designated qubit k_S
  int eigenvalue = 1;     // s_S
};

/// Z2 symmetries with their designated qubits and sector eigenvalues.
///
/// The Clifford U = prod_S (X_{k_S} + S)/sqrt2 maps every S to X_{k_S}. All
/// factors commute and U is Hermitian, so U = U^dagger.
class TaperingPlan {
 public:
  TaperingPlan() = default;
  TaperingPlan(std::size_t n_qubits, std::vector<TaperedSymmetry> symmetries);

  std::size_t n_qubits() const { return n_; }
  std::size_t n_reduced() const { return n_ - symmetries_.size(); }
  const std::vector<TaperedSymmetry>& symmetries() const { return symmetries_; }
  /// Full-register qubits that survive, ascending; reduced qubit i is kept()[i].
  const std::vector<std::size_t>& kept() const { return kept_; }

  /// Copy with new sector eigenvalues, one per symmetry.
  TaperingPlan with_eigenvalues(const std::vector<int>& eigenvalues) const;

  PauliSum clifford() const;

  /// {"n_qubits":..,"symmetries":[{"string":..,"qubit":..,"eigenvalue":..}]}
  std::string to_json() const;
  static TaperingPlan from_json(const std::string& text);

 private:
  std::size_t n_ = 0;
  std::vector<TaperedSymmetry> symmetries_;
  std::vector<std::size_t> kept_;
};

/// Assigns each symmetry, in the given order, the highest qubit in its support
/// that no other listed symmetry touches. Throws DomainError if a symmetry is
/// not diagonal, fails to commute with h or with another symmetry, or has no
/// admissible qubit.
TaperingPlan build_plan(const PauliSum& h, const std::vector<PauliString>& symmetries,
                        const std::vector<int>& eigenvalues = {});

/// U op U with every X_{k_S} replaced by s_S and the designated qubits removed.
/// Throws NumericalError if op does not commute with the plan's symmetries.
PauliSum taper(const PauliSum& op, const TaperingPlan& plan);

/// U (|phi> (x) |x_S = s_S> on the designated qubits).
Statevector untaper_state(const Statevector& reduced, const TaperingPlan& plan);

/// Reduced state of a full-register state lying in the plan's sector; up to a
/// global phase this inverts untaper_state. Throws DomainError if the state has
/// weight outside the sector above `tol`.
Statevector taper_state(const Statevector& full, const TaperingPlan& plan, double tol = 1e-8);

/// Gate-level untapering. Run on reduced (x) |0> with the reduced qubits placed
/// at kept() and the ancillas at the designated qubits. Per symmetry: X on the
/// ancilla when s_S = -1, one CX from every other qubit in S onto the ancilla,
/// and for s_S = -1 a Z on each kept qubit of S (restores the relative sign of
/// the U-image).
std::vector<Gate> untapering_circuit(const TaperingPlan& plan);

/// Places reduced qubit i on full qubit kept()[i], designated qubits in |0>.
Statevector embed_reduced(const Statevector& reduced, const TaperingPlan& plan);

/// Two-qubit unitaries V that turn each even/odd pair of a symmetry-basis
/// ordering back into the conjugate momentum pair (m = p, m = n - p). Acting
/// on (lower, upper) = (even, odd) qubits.
std::vector<Gate> momentum_restoring_gates(const ModeOrdering& ordering);

/// Probability of each rotation eigenvalue lambda_k = exp(2 pi i k / n),
/// indexed by k. For n = 4: index 0 -> 1, 1 -> i, 2 -> -1, 3 -> -i.
struct RotationDistribution {
  std::size_t n_sites = 0;
  std::vector<double> probability;
  double minus_one() const { return probability.at(n_sites / 2); }
};

/// Exact distribution from a momentum-basis state (restoring gates applied).
/// `momentum` must be the restored_momentum() ordering of the register.
RotationDistribution measure_c4(const Statevector& psi_momentum, const ModeOrdering& momentum);

/// Distribution read off computational-basis counts of a momentum-basis state.
RotationDistribution rotation_from_counts(const ShotCounts& counts, const ModeOrdering& momentum);

/// Rotation eigenvalue index of one momentum-basis computational state.
std::size_t rotation_index(std::uint64_t basis_index, const ModeOrdering& momentum);

}  // namespace hvqe
