#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hubbard_vqe/common.hpp"
#include "hubbard_vqe/pauli.hpp"

namespace hvqe {

struct LadderOp {
  std::size_t mode;
  bool dagger;
  bool operator==(const LadderOp&) const = default;
};

struct FermionTerm {
  complex_t coeff;
  std::vector<LadderOp> ops;  // applied right to left, as written
};

/// Sum of products of creation/annihilation operators over labelled modes.
/// Terms are kept as written; no normal ordering is imposed.
class FermionOperator {
 public:
  explicit FermionOperator(std::size_t n_modes);

  static FermionOperator identity(std::size_t n_modes, complex_t coeff = 1.0);
  static FermionOperator ladder(std::size_t n_modes, std::size_t mode, bool dagger);
  /// c_mode^dagger c_mode
  static FermionOperator number(std::size_t n_modes, std::size_t mode);

  std::size_t n_modes() const { return n_modes_; }
  const std::vector<FermionTerm>& terms() const { return terms_; }

  /// Throws DomainError if any mode index is out of range.
  void add_term(complex_t coeff, std::vector<LadderOp> ops);

  FermionOperator adjoint() const;
  /// Merges identical monomials and drops coefficients below 1e-14.
  FermionOperator simplified() const;

  FermionOperator& operator+=(const FermionOperator& other);
  FermionOperator& operator*=(complex_t scalar);
  friend FermionOperator operator+(FermionOperator a, const FermionOperator& b) { return a += b; }
  friend FermionOperator operator*(FermionOperator a, complex_t s) { return a *= s; }
  friend FermionOperator operator*(complex_t s, FermionOperator a) { return a *= s; }
  /// Operator product (monomials concatenated).
  friend FermionOperator operator*(const FermionOperator& a, const FermionOperator& b);

 private:
  std::size_t n_modes_;
  std::vector<FermionTerm> terms_;
};

enum class Spin : std::uint8_t { up = 0, down = 1 };

/// Single-particle bases of the ring. Orbital numbering per spin, n = n_sites:
///   site      orbital j is site j
///   momentum  orbital m has C_n eigenvalue lambda_m = exp(2 pi i m / n)
///   symmetry  0: lambda = +1, 1: lambda = -1, 2p / 2p+1: even / odd real
///             combinations of the conjugate pair (m = p, m = n - p)
/// Mode index = orbital + n_sites * spin.
enum class Basis : std::uint8_t { site, momentum, symmetry };

std::string to_string(Basis b);

struct ModeLabel {
  Basis basis;
  std::size_t orbital;
  Spin spin;
  std::string to_string(std::size_t n_sites) const;
};

inline std::size_t mode_index(std::size_t n_sites, std::size_t orbital, Spin spin) {
  return orbital + n_sites * static_cast<std::size_t>(spin);
}

/// Bijection k from modes (orbital, spin) to qubits.
class ModeOrdering {
 public:
  ModeOrdering(Basis basis, std::size_t n_sites, std::vector<std::size_t> qubit_of_mode);

  /// qubit = mode index.
  static ModeOrdering natural(Basis basis, std::size_t n_sites);
  /// Symmetry-basis ordering used for tapering: the four designated modes on
  /// the highest qubits and each even/odd pair on adjacent qubits.
  static ModeOrdering tapering_friendly(std::size_t n_sites);

  Basis basis() const { return basis_; }
  std::size_t n_sites() const { return n_sites_; }
  std::size_t n_modes() const { return qubit_of_mode_.size(); }
  std::size_t qubit(std::size_t mode) const { return qubit_of_mode_.at(mode); }
  std::size_t qubit(std::size_t orbital, Spin spin) const {
    return qubit(mode_index(n_sites_, orbital, spin));
  }
  std::size_t mode_at(std::size_t qubit) const { return mode_of_qubit_.at(qubit); }
  ModeLabel label_at(std::size_t qubit) const;

  /// For a symmetry-basis ordering: the momentum-basis ordering obtained by
  /// rotating each even/odd pair back in place (even -> m = p, odd -> m = n - p).
  ModeOrdering restored_momentum() const;

 private:
  Basis basis_;
  std::size_t n_sites_;
  std::vector<std::size_t> qubit_of_mode_;
  std::vector<std::size_t> mode_of_qubit_;
};

/// Single-particle basis change, old mode a = sum_b u(a, b) * new mode b.
struct BasisChange {
  Basis from;
  Basis to;
  std::size_t n_sites;
  Eigen::MatrixXcd u;  // (2 n_sites) x (2 n_sites), block diagonal in spin

  FermionOperator apply(const FermionOperator& op) const;
  /// This change followed by `next`.
  BasisChange then(const BasisChange& next) const;
};

/// Site to momentum basis: c_j = n^{-1/2} sum_m lambda_m^j c~_m.
BasisChange momentum_basis(std::size_t n_sites);
/// Momentum to symmetry basis: c~_{+-1} = d_{+-1}, c~_p = (d_e + d_o)/sqrt2,
/// c~_{n-p} = (d_e - d_o)/sqrt2.
BasisChange symmetry_eigenbasis(std::size_t n_sites);

/// Jordan-Wigner image: c_k = 1/2 (X_k + i Y_k) Z_{k-1} ... Z_0 with k the
/// qubit assigned to the mode by `ordering`.
PauliSum jordan_wigner(const FermionOperator& op, const ModeOrdering& ordering);

/// Image of one ladder operator on `n_qubits` qubits.
PauliSum jordan_wigner_ladder(std::size_t n_qubits, std::size_t qubit, bool dagger);

}  // namespace hvqe
