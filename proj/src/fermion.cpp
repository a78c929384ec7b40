#include "hubbard_vqe/fermion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace hvqe {
namespace {

constexpr double kTermDrop = 1e-14;

void require_supported_ring(std::size_t n_sites) {
  if (n_sites != 4 && n_sites != 6) {
    throw DomainError("ring basis changes support 4 or 6 sites, got " + std::to_string(n_sites));
  }
}

using Monomial = std::vector<LadderOp>;

struct MonomialLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    return std::lexicographical_compare(
        a.begin(), a.end(), b.begin(), b.end(), [](const LadderOp& x, const LadderOp& y) {
          return x.mode != y.mode ? x.mode < y.mode : (x.dagger < y.dagger);
        });
  }
};

// Symmetry-basis orbital matching a momentum orbital after restoring pairs.
std::size_t symmetry_orbital_of_momentum(std::size_t n, std::size_t m) {
  if (m == 0) return 0;
  if (m == n / 2) return 1;
  return m < n / 2 ? 2 * m : 2 * (n - m) + 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// FermionOperator

FermionOperator::FermionOperator(std::size_t n_modes) : n_modes_(n_modes) {
  if (n_modes == 0 || n_modes > kMaxQubits) throw DomainError("invalid number of fermionic modes");
}

FermionOperator FermionOperator::identity(std::size_t n_modes, complex_t coeff) {
  FermionOperator op(n_modes);
  op.add_term(coeff, {});
  return op;
}

FermionOperator FermionOperator::ladder(std::size_t n_modes, std::size_t mode, bool dagger) {
  FermionOperator op(n_modes);
  op.add_term(1.0, {{mode, dagger}});
  return op;
}

FermionOperator FermionOperator::number(std::size_t n_modes, std::size_t mode) {
  FermionOperator op(n_modes);
  op.add_term(1.0, {{mode, true}, {mode, false}});
  return op;
}

void FermionOperator::add_term(complex_t coeff, std::vector<LadderOp> ops) {
  for (const auto& o : ops) {
    if (o.mode >= n_modes_) {
      throw DomainError("mode index " + std::to_string(o.mode) + " out of range for " +
                        std::to_string(n_modes_) + " modes");
    }
  }
  terms_.push_back({coeff, std::move(ops)});
}

FermionOperator FermionOperator::adjoint() const {
  FermionOperator out(n_modes_);
  for (const auto& t : terms_) {
    std::vector<LadderOp> ops(t.ops.rbegin(), t.ops.rend());
    for (auto& o : ops) o.dagger = !o.dagger;
    out.terms_.push_back({std::conj(t.coeff), std::move(ops)});
  }
  return out;
}

FermionOperator FermionOperator::simplified() const {
  std::map<Monomial, complex_t, MonomialLess> acc;
  for (const auto& t : terms_) acc[t.ops] += t.coeff;
  FermionOperator out(n_modes_);
  for (auto& [ops, c] : acc) {
    if (std::abs(c) >= kTermDrop) out.terms_.push_back({c, ops});
  }
  return out;
}

FermionOperator& FermionOperator::operator+=(const FermionOperator& other) {
  if (other.n_modes_ != n_modes_) throw DimensionError("fermion operators over different modes");
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

FermionOperator& FermionOperator::operator*=(complex_t scalar) {
  for (auto& t : terms_) t.coeff *= scalar;
  return *this;
}

FermionOperator operator*(const FermionOperator& a, const FermionOperator& b) {
  if (a.n_modes_ != b.n_modes_) throw DimensionError("fermion operators over different modes");
  FermionOperator out(a.n_modes_);
  out.terms_.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& ta : a.terms_) {
    for (const auto& tb : b.terms_) {
      std::vector<LadderOp> ops = ta.ops;
      ops.insert(ops.end(), tb.ops.begin(), tb.ops.end());
      out.terms_.push_back({ta.coeff * tb.coeff, std::move(ops)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Labels and orderings

std::string to_string(Basis b) {
  switch (b) {
    case Basis::site: return "site";
    case Basis::momentum: return "momentum";
    case Basis::symmetry: return "symmetry";
  }
  return "?";
}

std::string ModeLabel::to_string(std::size_t n_sites) const {
  std::string s;
  switch (basis) {
    case Basis::site: s = "j" + std::to_string(orbital); break;
    case Basis::momentum: s = "m" + std::to_string(orbital) + "/" + std::to_string(n_sites); break;
    case Basis::symmetry:
      if (orbital == 0) s = "+1";
      else if (orbital == 1) s = "-1";
      else s = (orbital % 2 == 0 ? "e" : "o") + std::to_string(orbital / 2);
      break;
  }
  return s + (spin == Spin::up ? "u" : "d");
}

ModeOrdering::ModeOrdering(Basis basis, std::size_t n_sites, std::vector<std::size_t> qubit_of_mode)
    : basis_(basis), n_sites_(n_sites), qubit_of_mode_(std::move(qubit_of_mode)) {
  if (qubit_of_mode_.size() != 2 * n_sites) {
    throw DimensionError("mode ordering must cover 2 * n_sites modes");
  }
  mode_of_qubit_.assign(qubit_of_mode_.size(), qubit_of_mode_.size());
  for (std::size_t m = 0; m < qubit_of_mode_.size(); ++m) {
    const std::size_t q = qubit_of_mode_[m];
    if (q >= qubit_of_mode_.size() || mode_of_qubit_[q] != qubit_of_mode_.size()) {
      throw DomainError("mode ordering is not a bijection");
    }
    mode_of_qubit_[q] = m;
  }
}

ModeOrdering ModeOrdering::natural(Basis basis, std::size_t n_sites) {
  std::vector<std::size_t> q(2 * n_sites);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = i;
  return ModeOrdering(basis, n_sites, std::move(q));
}

ModeOrdering ModeOrdering::tapering_friendly(std::size_t n_sites) {
  require_supported_ring(n_sites);
  const auto up = [&](std::size_t orb) { return mode_index(n_sites, orb, Spin::up); };
  const auto dn = [&](std::size_t orb) { return mode_index(n_sites, orb, Spin::down); };
  // Modes listed from qubit 0 upwards.
  std::vector<std::size_t> modes;
  if (n_sites == 4) {
    modes = {dn(2), dn(3), dn(1), up(1), dn(0), up(0), up(2), up(3)};
  } else {
    modes = {dn(2), dn(3), dn(4), dn(5), dn(1), up(1), up(4), up(5), dn(0), up(0), up(2), up(3)};
  }
  std::vector<std::size_t> qubit_of_mode(modes.size());
  for (std::size_t q = 0; q < modes.size(); ++q) qubit_of_mode[modes[q]] = q;
  return ModeOrdering(Basis::symmetry, n_sites, std::move(qubit_of_mode));
}

ModeLabel ModeOrdering::label_at(std::size_t qubit) const {
  const std::size_t m = mode_at(qubit);
  return {basis_, m % n_sites_, m < n_sites_ ? Spin::up : Spin::down};
}

ModeOrdering ModeOrdering::restored_momentum() const {
  if (basis_ != Basis::symmetry) throw DomainError("restored_momentum needs a symmetry-basis ordering");
  std::vector<std::size_t> q(2 * n_sites_);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t m = 0; m < n_sites_; ++m) {
      const auto spin = static_cast<Spin>(s);
      q[mode_index(n_sites_, m, spin)] = qubit(symmetry_orbital_of_momentum(n_sites_, m), spin);
    }
  }
  return ModeOrdering(Basis::momentum, n_sites_, std::move(q));
}

// ---------------------------------------------------------------------------
// Basis changes

FermionOperator BasisChange::apply(const FermionOperator& op) const {
  const auto n_modes = static_cast<std::size_t>(u.rows());
  if (op.n_modes() != n_modes) throw DimensionError("basis change over a different mode count");
  // Expansion of each old mode into new modes.
  std::vector<std::vector<std::pair<std::size_t, complex_t>>> image(n_modes);
  for (std::size_t a = 0; a < n_modes; ++a) {
    for (std::size_t b = 0; b < n_modes; ++b) {
      const complex_t c = u(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (std::abs(c) > kTermDrop) image[a].emplace_back(b, c);
    }
  }
  std::map<Monomial, complex_t, MonomialLess> acc;
  Monomial current;
  for (const auto& term : op.terms()) {
    current.assign(term.ops.size(), LadderOp{0, false});
    // Depth-first expansion over the product of images.
    auto expand = [&](auto&& self, std::size_t pos, complex_t coeff) -> void {
      if (std::abs(coeff) < kTermDrop) return;
      if (pos == term.ops.size()) {
        acc[current] += coeff;
        return;
      }
      const LadderOp& o = term.ops[pos];
      for (const auto& [b, c] : image[o.mode]) {
        current[pos] = {b, o.dagger};
        self(self, pos + 1, coeff * (o.dagger ? std::conj(c) : c));
      }
    };
    expand(expand, 0, term.coeff);
  }
  FermionOperator out(n_modes);
  for (auto& [ops, c] : acc) {
    if (std::abs(c) >= kTermDrop) out.add_term(c, ops);
  }
  return out;
}

BasisChange BasisChange::then(const BasisChange& next) const {
  if (next.from != to || next.n_sites != n_sites) throw DomainError("incompatible basis changes");
  return {from, next.to, n_sites, u * next.u};
}

BasisChange momentum_basis(std::size_t n_sites) {
  require_supported_ring(n_sites);
  const auto n = static_cast<Eigen::Index>(n_sites);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n_sites));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index m = 0; m < n; ++m) {
      // lambda_m^j with the phase reduced mod n to keep roots exact.
      const auto k = static_cast<double>((j * m) % n);
      const double phi = 2.0 * std::numbers::pi * k / static_cast<double>(n);
      complex_t v{std::cos(phi), std::sin(phi)};
      if (std::abs(v.real()) < 1e-15) v.real(0.0);
      if (std::abs(v.imag()) < 1e-15) v.imag(0.0);
      u(j, m) = norm * v;
      u(j + n, m + n) = norm * v;
    }
  }
  return {Basis::site, Basis::momentum, n_sites, u};
}

BasisChange symmetry_eigenbasis(std::size_t n_sites) {
  require_supported_ring(n_sites);
  const auto n = static_cast<Eigen::Index>(n_sites);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  const double r = 1.0 / std::numbers::sqrt2;
  for (Eigen::Index s = 0; s < 2; ++s) {
    const Eigen::Index off = s * n;
    u(off + 0, off + 0) = 1.0;
    u(off + n / 2, off + 1) = 1.0;
    for (Eigen::Index p = 1; p < n / 2; ++p) {
      const Eigen::Index even = 2 * p, odd = 2 * p + 1;
      u(off + p, off + even) = r;
      u(off + p, off + odd) = r;
      u(off + n - p, off + even) = r;
      u(off + n - p, off + odd) = -r;
    }
  }
  return {Basis::momentum, Basis::symmetry, n_sites, u};
}

// ---------------------------------------------------------------------------
// Jordan-Wigner

PauliSum jordan_wigner_ladder(std::size_t n_qubits, std::size_t qubit, bool dagger) {
  if (qubit >= n_qubits) throw DomainError("ladder operator beyond register");
  const std::uint64_t below = (std::uint64_t{1} << qubit) - 1;
  const std::uint64_t bit = std::uint64_t{1} << qubit;
  const PauliString x_part(n_qubits, bit, below);
  const PauliString y_part(n_qubits, bit, below | bit);
  // Z-string times X_k is still written X_k Z_{<k}: the letters act on
  // different qubits, so no phase arises.
  const complex_t half{0.5, 0.0};
  const complex_t ihalf{0.0, dagger ? -0.5 : 0.5};
  return PauliSum(n_qubits, {{x_part, half}, {y_part, ihalf}});
}

PauliSum jordan_wigner(const FermionOperator& op, const ModeOrdering& ordering) {
  if (op.n_modes() != ordering.n_modes()) {
    throw DimensionError("operator and ordering cover different mode counts");
  }
  const std::size_t n = op.n_modes();
  std::vector<PauliSum> annihilate(n), create(n);
  for (std::size_t m = 0; m < n; ++m) {
    annihilate[m] = jordan_wigner_ladder(n, ordering.qubit(m), false);
    create[m] = jordan_wigner_ladder(n, ordering.qubit(m), true);
  }
  std::vector<PauliTerm> collected;
  for (const auto& term : op.terms()) {
    PauliSum product = PauliSum::identity(n, term.coeff);
    for (const auto& o : term.ops) {
      product = sum_product(product, o.dagger ? create[o.mode] : annihilate[o.mode]);
      if (product.empty()) break;
    }
    collected.insert(collected.end(), product.terms().begin(), product.terms().end());
  }
  return PauliSum(n, std::move(collected));
}

}  // namespace hvqe
