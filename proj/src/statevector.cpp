#include "hubbard_vqe/statevector.hpp"

#include <cmath>
#include <string>

namespace hvqe {
namespace {

std::size_t qubits_for_length(std::size_t length) {
  if (length == 0 || (length & (length - 1)) != 0) {
    throw DimensionError("amplitude vector length " + std::to_string(length) +
                         " is not a power of two");
  }
  std::size_t n = 0;
  while ((std::size_t{1} << n) < length) ++n;
  return n;
}

double squared_norm(const std::vector<complex_t>& a) {
  double s = 0.0;
  for (const auto& v : a) s += std::norm(v);
  return s;
}

}  // namespace

Statevector::Statevector(std::size_t n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits > 30) throw DimensionError("statevector limited to 30 qubits");
  amps_.assign(std::size_t{1} << n_qubits, complex_t{0.0, 0.0});
  amps_[0] = 1.0;
}

Statevector Statevector::from_amplitudes(std::vector<complex_t> amplitudes) {
  Statevector s;
  s.n_qubits_ = qubits_for_length(amplitudes.size());
  const double n = std::sqrt(squared_norm(amplitudes));
  if (std::abs(n - 1.0) > kNormTolerance) {
    throw DomainError("statevector norm " + std::to_string(n) + " deviates from 1");
  }
  s.amps_ = std::move(amplitudes);
  return s;
}

Statevector Statevector::normalized(std::vector<complex_t> amplitudes) {
  const double n = std::sqrt(squared_norm(amplitudes));
  if (n == 0.0) throw DomainError("cannot normalize a zero vector");
  for (auto& a : amplitudes) a /= n;
  return from_amplitudes(std::move(amplitudes));
}

Statevector Statevector::basis_state(std::size_t n_qubits, std::uint64_t index) {
  Statevector s(n_qubits);
  if (index >= s.amps_.size()) throw DimensionError("basis index out of range");
  s.amps_[0] = 0.0;
  s.amps_[index] = 1.0;
  return s;
}

double Statevector::norm() const { return std::sqrt(squared_norm(amps_)); }

complex_t Statevector::inner(const Statevector& other) const {
  if (other.amps_.size() != amps_.size()) throw DimensionError("inner product size mismatch");
  complex_t s = 0.0;
  for (std::size_t i = 0; i < amps_.size(); ++i) s += std::conj(amps_[i]) * other.amps_[i];
  return s;
}

std::vector<double> Statevector::probabilities() const {
  std::vector<double> p(amps_.size());
  for (std::size_t i = 0; i < amps_.size(); ++i) p[i] = std::norm(amps_[i]);
  return p;
}

}  // namespace hvqe
