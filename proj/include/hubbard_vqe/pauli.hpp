#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hubbard_vqe/common.hpp"
#include "hubbard_vqe/statevector.hpp"

namespace hvqe {

/// Tensor product of single-qubit Paulis in symplectic form.
///
/// Qubit k carries X if bit k of `x` is set, Z if bit k of `z` is set, and Y
/// when both are set. The operator is i^{|x&z|} X^x Z^z, so a set of bits
/// always denotes a Hermitian string with unit coefficient.
class PauliString {
 public:
  PauliString() = default;
  /// Identity on `n_qubits`.
  explicit PauliString(std::size_t n_qubits);
  PauliString(std::size_t n_qubits, std::uint64_t x, std::uint64_t z);

  /// Parses letters from {I,X,Y,Z}; the rightmost letter acts on qubit 0.
  static PauliString from_letters(std::string_view letters);
  static PauliString single(std::size_t n_qubits, std::size_t qubit, char letter);

  std::size_t n_qubits() const { return n_; }
  std::uint64_t x_bits() const { return x_; }
  std::uint64_t z_bits() const { return z_; }
  std::uint64_t support() const { return x_ | z_; }

  char letter(std::size_t qubit) const;
  void set_letter(std::size_t qubit, char letter);

  bool is_identity() const { return (x_ | z_) == 0; }
  /// True when only I and Z appear (the string is diagonal).
  bool is_diagonal() const { return x_ == 0; }
  std::size_t weight() const;

  std::string to_string() const;

  bool operator==(const PauliString&) const = default;
  /// Lexicographic over the printed letters (highest qubit first, I<X<Y<Z).
  std::strong_ordering operator<=>(const PauliString& other) const;

 private:
  std::size_t n_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
};

struct PauliStringHash {
  std::size_t operator()(const PauliString& p) const noexcept;
};

struct PauliProduct {
  complex_t phase;  // one of 1, -1, i, -i
  PauliString product;
};

/// a*b = phase * product.
PauliProduct multiply(const PauliString& a, const PauliString& b);

/// True iff a and b commute.
bool commutes(const PauliString& a, const PauliString& b);

/// (-1)^{|z & bits|}: eigenvalue of a diagonal string on a basis state.
double diagonal_value(const PauliString& diagonal, std::uint64_t basis_index);

struct PauliTerm {
  PauliString string;
  complex_t coeff;
};

/// Weighted sum of Pauli strings in canonical form: sorted, no duplicate
/// strings, no coefficient of modulus below kDropTolerance.
class PauliSum {
 public:
  static constexpr double kDropTolerance = 1e-12;

  PauliSum() = default;
  explicit PauliSum(std::size_t n_qubits) : n_(n_qubits) {}
  PauliSum(std::size_t n_qubits, std::vector<PauliTerm> terms);
  PauliSum(const PauliString& p, complex_t coeff = 1.0);  // NOLINT(implicit)

  static PauliSum identity(std::size_t n_qubits, complex_t coeff = 1.0);

  std::size_t n_qubits() const { return n_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::vector<PauliTerm>& terms() const { return terms_; }

  complex_t coefficient(const PauliString& p) const;
  /// All coefficients real to within kDropTolerance.
  bool is_hermitian() const;
  /// Only I/Z letters in every term.
  bool is_diagonal() const;
  PauliSum adjoint() const;
  /// Drops imaginary parts. Throws NumericalError if any exceeds `tol`.
  PauliSum hermitian_part_checked(double tol = 1e-10) const;

  PauliSum& operator+=(const PauliSum& other);
  PauliSum& operator-=(const PauliSum& other);
  PauliSum& operator*=(complex_t scalar);

  friend PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }
  friend PauliSum operator-(PauliSum a, const PauliSum& b) { return a -= b; }
  friend PauliSum operator*(PauliSum a, complex_t s) { return a *= s; }
  friend PauliSum operator*(complex_t s, PauliSum a) { return a *= s; }
  friend PauliSum operator*(const PauliSum& a, const PauliSum& b);

  /// Value of a diagonal sum on a computational basis state.
  double diagonal_value(std::uint64_t basis_index) const;

  /// Dense 2^n x 2^n matrix. Intended for n <= 12.
  Eigen::MatrixXcd to_dense() const;
  /// op|psi> as a raw amplitude vector (not normalized).
  std::vector<complex_t> apply(std::span<const complex_t> amplitudes) const;

  /// One term per line: "<re> <im> <letters>", preceded by a header comment.
  std::string to_text() const;
  static PauliSum from_text(std::string_view text);

  bool operator==(const PauliSum& other) const;

 private:
  void canonicalize();

  std::size_t n_ = 0;
  std::vector<PauliTerm> terms_;
};

/// Operator product a*b in canonical form.
PauliSum sum_product(const PauliSum& a, const PauliSum& b);

/// <psi|op|psi>. Throws on size mismatch or an unnormalized state.
complex_t expectation(const PauliSum& op, const Statevector& psi);

/// Real expectation of a Hermitian op; a non-Hermitian op raises DomainError.
double real_expectation(const PauliSum& op, const Statevector& psi);

}  // namespace hvqe
