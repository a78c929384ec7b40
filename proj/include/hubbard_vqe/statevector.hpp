#pragma once

#include <span>
#include <vector>

#include "hubbard_vqe/common.hpp"

namespace hvqe {

/// Normalized amplitude vector over 2^n computational basis states.
/// Basis index bit k is the value of qubit k (qubit 0 least significant).
class Statevector {
 public:
  static constexpr double kNormTolerance = 1e-10;

  Statevector() : Statevector(0) {}
  /// |0...0> on n qubits.
  explicit Statevector(std::size_t n_qubits);

  /// Takes ownership of `amplitudes`; length must be 2^n and the norm 1.
  static Statevector from_amplitudes(std::vector<complex_t> amplitudes);
  /// Normalizes first; throws on a zero vector.
  static Statevector normalized(std::vector<complex_t> amplitudes);
  static Statevector basis_state(std::size_t n_qubits, std::uint64_t index);

  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t dimension() const { return amps_.size(); }
  std::span<const complex_t> amplitudes() const { return amps_; }
  complex_t operator[](std::size_t i) const { return amps_[i]; }

  double norm() const;
  complex_t inner(const Statevector& other) const;  // <this|other>
  std::vector<double> probabilities() const;

  /// Raw access for in-place gate application. Callers keep the norm.
  std::vector<complex_t>& mutable_amplitudes() { return amps_; }

 private:
  std::size_t n_qubits_ = 0;
  std::vector<complex_t> amps_;
};

}  // namespace hvqe
