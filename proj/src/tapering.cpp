#include "hubbard_vqe/tapering.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <json.hpp>

namespace hvqe {
namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

std::uint64_t bit(std::size_t q) { return std::uint64_t{1} << q; }

// Moves bits of `full` at kept[i] down to position i.
std::uint64_t compress(std::uint64_t full, const std::vector<std::size_t>& kept) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < kept.size(); ++i) out |= ((full >> kept[i]) & 1U) << i;
  return out;
}

std::uint64_t expand(std::uint64_t reduced, const std::vector<std::size_t>& kept) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < kept.size(); ++i) out |= ((reduced >> i) & 1U) << kept[i];
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Plan

TaperingPlan::TaperingPlan(std::size_t n_qubits, std::vector<TaperedSymmetry> symmetries)
    : n_(n_qubits), symmetries_(std::move(symmetries)) {
  std::uint64_t designated = 0;
  for (const auto& s : symmetries_) {
    if (s.generator.n_qubits() != n_) throw DimensionError("symmetry on a different register");
    if (!s.generator.is_diagonal()) throw DomainError("tapering symmetries must be Z/I strings");
    if (s.qubit >= n_ || !(s.generator.z_bits() & bit(s.qubit))) {
      throw DomainError("designated qubit outside the symmetry's support");
    }
    if (designated & bit(s.qubit)) throw DomainError("designated qubits must be distinct");
    if (s.eigenvalue != 1 && s.eigenvalue != -1) throw DomainError("eigenvalues must be +1 or -1");
    designated |= bit(s.qubit);
  }
  for (const auto& s : symmetries_) {
    for (const auto& other : symmetries_) {
      if (&s != &other && (other.generator.z_bits() & bit(s.qubit))) {
        throw DomainError("designated qubit " + std::to_string(s.qubit) +
                          " is touched by another symmetry");
      }
    }
  }
  for (std::size_t q = 0; q < n_; ++q) {
    if (!(designated & bit(q))) kept_.push_back(q);
  }
}

TaperingPlan TaperingPlan::with_eigenvalues(const std::vector<int>& eigenvalues) const {
  if (eigenvalues.size() != symmetries_.size()) {
    throw DimensionError("need one eigenvalue per tapered symmetry");
  }
  std::vector<TaperedSymmetry> s = symmetries_;
  for (std::size_t i = 0; i < s.size(); ++i) s[i].eigenvalue = eigenvalues[i];
  return TaperingPlan(n_, std::move(s));
}

PauliSum TaperingPlan::clifford() const {
  PauliSum u = PauliSum::identity(n_);
  for (const auto& s : symmetries_) {
    PauliSum factor(n_, {{PauliString::single(n_, s.qubit, 'X'), kInvSqrt2},
                         {s.generator, kInvSqrt2}});
    u = sum_product(u, factor);
  }
  return u;
}

std::string TaperingPlan::to_json() const {
  nlohmann::json j;
  j["n_qubits"] = n_;
  j["symmetries"] = nlohmann::json::array();
  for (const auto& s : symmetries_) {
    j["symmetries"].push_back(
        {{"string", s.generator.to_string()}, {"qubit", s.qubit}, {"eigenvalue", s.eigenvalue}});
  }
  return j.dump(2);
}

TaperingPlan TaperingPlan::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    std::vector<TaperedSymmetry> syms;
    for (const auto& s : j.at("symmetries")) {
      syms.push_back({PauliString::from_letters(s.at("string").get<std::string>()),
                      s.at("qubit").get<std::size_t>(), s.at("eigenvalue").get<int>()});
    }
    return TaperingPlan(j.at("n_qubits").get<std::size_t>(), std::move(syms));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("tapering_plan", e.what());
  }
}

TaperingPlan build_plan(const PauliSum& h, const std::vector<PauliString>& symmetries,
                        const std::vector<int>& eigenvalues) {
  const std::size_t n = h.n_qubits();
  if (!eigenvalues.empty() && eigenvalues.size() != symmetries.size()) {
    throw DimensionError("need one eigenvalue per symmetry");
  }
  for (std::size_t i = 0; i < symmetries.size(); ++i) {
    const auto& s = symmetries[i];
    if (s.n_qubits() != n) throw DimensionError("symmetry and Hamiltonian registers differ");
    if (!s.is_diagonal()) throw DomainError("symmetry " + s.to_string() + " is not a Z/I string");
    for (const auto& term : h.terms()) {
      if (!commutes(term.string, s)) {
        throw DomainError("symmetry " + s.to_string() + " does not commute with the Hamiltonian");
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (!commutes(s, symmetries[j])) throw DomainError("symmetries do not commute");
    }
  }
  std::vector<TaperedSymmetry> out;
  std::uint64_t used = 0;
  for (std::size_t i = 0; i < symmetries.size(); ++i) {
    std::uint64_t others = 0;
    for (std::size_t j = 0; j < symmetries.size(); ++j) {
      if (j != i) others |= symmetries[j].z_bits();
    }
    const std::uint64_t admissible = symmetries[i].z_bits() & ~others & ~used;
    if (admissible == 0) {
      throw DomainError("no admissible designated qubit for " + symmetries[i].to_string());
    }
    const std::size_t q = 63 - static_cast<std::size_t>(std::countl_zero(admissible));
    used |= bit(q);
    out.push_back({symmetries[i], q, eigenvalues.empty() ? 1 : eigenvalues[i]});
  }
  return TaperingPlan(n, std::move(out));
}

// ---------------------------------------------------------------------------
// Operators

PauliSum taper(const PauliSum& op, const TaperingPlan& plan) {
  if (op.n_qubits() != plan.n_qubits()) throw DimensionError("plan and operator registers differ");
  const std::size_t n = plan.n_qubits();
  // U is a Clifford, so conjugate one factor at a time to keep sums small.
  PauliSum rotated = op;
  for (const auto& s : plan.symmetries()) {
    PauliSum factor(n, {{PauliString::single(n, s.qubit, 'X'), kInvSqrt2},
                        {s.generator, kInvSqrt2}});
    rotated = sum_product(factor, sum_product(rotated, factor));
  }
  std::vector<PauliTerm> reduced;
  reduced.reserve(rotated.size());
  for (const auto& term : rotated.terms()) {
    complex_t c = term.coeff;
    for (const auto& s : plan.symmetries()) {
      const char l = term.string.letter(s.qubit);
      if (l == 'X') {
        c *= static_cast<double>(s.eigenvalue);
      } else if (l != 'I') {
        throw NumericalError("operator does not commute with symmetry " + s.generator.to_string());
      }
    }
    const auto& kept = plan.kept();
    reduced.push_back({PauliString(kept.size(), compress(term.string.x_bits(), kept),
                                   compress(term.string.z_bits(), kept)),
                       c});
  }
  return PauliSum(plan.n_reduced(), std::move(reduced));
}

// ---------------------------------------------------------------------------
// States

Statevector embed_reduced(const Statevector& reduced, const TaperingPlan& plan) {
  if (reduced.n_qubits() != plan.n_reduced()) {
    throw DimensionError("reduced state has " + std::to_string(reduced.n_qubits()) +
                         " qubits, plan expects " + std::to_string(plan.n_reduced()));
  }
  std::vector<complex_t> amps(std::size_t{1} << plan.n_qubits(), complex_t{0.0, 0.0});
  for (std::uint64_t r = 0; r < reduced.dimension(); ++r) amps[expand(r, plan.kept())] = reduced[r];
  return Statevector::from_amplitudes(std::move(amps));
}

Statevector untaper_state(const Statevector& reduced, const TaperingPlan& plan) {
  if (reduced.n_qubits() != plan.n_reduced()) {
    throw DimensionError("reduced state does not match the plan");
  }
  const std::size_t n_sym = plan.symmetries().size();
  std::vector<complex_t> amps(std::size_t{1} << plan.n_qubits(), complex_t{0.0, 0.0});
  // |x = s> = (|0> + s |1>)/sqrt2 on every designated qubit.
  const double norm = std::pow(kInvSqrt2, static_cast<double>(n_sym));
  for (std::uint64_t r = 0; r < reduced.dimension(); ++r) {
    const std::uint64_t base = expand(r, plan.kept());
    for (std::uint64_t d = 0; d < (std::uint64_t{1} << n_sym); ++d) {
      std::uint64_t idx = base;
      double sign = norm;
      for (std::size_t i = 0; i < n_sym; ++i) {
        if ((d >> i) & 1U) {
          idx |= bit(plan.symmetries()[i].qubit);
          sign *= plan.symmetries()[i].eigenvalue;
        }
      }
      amps[idx] = sign * reduced[r];
    }
  }
  return Statevector::normalized(plan.clifford().apply(amps));
}

Statevector taper_state(const Statevector& full, const TaperingPlan& plan, double tol) {
  if (full.n_qubits() != plan.n_qubits()) throw DimensionError("full state does not match the plan");
  const std::vector<complex_t> rotated = plan.clifford().apply(full.amplitudes());
  const std::size_t n_sym = plan.symmetries().size();
  const double norm = std::pow(kInvSqrt2, static_cast<double>(n_sym));
  std::vector<complex_t> amps(std::size_t{1} << plan.n_reduced(), complex_t{0.0, 0.0});
  double weight = 0.0;
  for (std::uint64_t r = 0; r < amps.size(); ++r) {
    const std::uint64_t base = expand(r, plan.kept());
    complex_t acc = 0.0;
    for (std::uint64_t d = 0; d < (std::uint64_t{1} << n_sym); ++d) {
      std::uint64_t idx = base;
      double sign = norm;
      for (std::size_t i = 0; i < n_sym; ++i) {
        if ((d >> i) & 1U) {
          idx |= bit(plan.symmetries()[i].qubit);
          sign *= plan.symmetries()[i].eigenvalue;
        }
      }
      acc += sign * rotated[idx];
    }
    amps[r] = acc;
    weight += std::norm(acc);
  }
  if (std::abs(weight - 1.0) > tol) {
    throw DomainError("state has weight " + std::to_string(1.0 - weight) + " outside the sector");
  }
  return Statevector::normalized(std::move(amps));
}

std::vector<Gate> untapering_circuit(const TaperingPlan& plan) {
  std::vector<Gate> gates;
  for (const auto& s : plan.symmetries()) {
    if (s.eigenvalue < 0) gates.push_back(Gate::x(s.qubit));
  }
  for (const auto& s : plan.symmetries()) {
    for (std::size_t q = 0; q < plan.n_qubits(); ++q) {
      if (q != s.qubit && (s.generator.z_bits() & bit(q))) gates.push_back(Gate::cx(q, s.qubit));
    }
  }
  for (const auto& s : plan.symmetries()) {
    if (s.eigenvalue > 0) continue;
    for (std::size_t q = 0; q < plan.n_qubits(); ++q) {
      if (q != s.qubit && (s.generator.z_bits() & bit(q))) gates.push_back(Gate::z(q));
    }
  }
  return gates;
}

// ---------------------------------------------------------------------------
// Rotation eigenvalue

std::vector<Gate> momentum_restoring_gates(const ModeOrdering& ordering) {
  if (ordering.basis() != Basis::symmetry) {
    throw DomainError("restoring gates need a symmetry-basis ordering");
  }
  const complex_t r = kInvSqrt2;
  // Columns: |00> -> |00>, even -> (p + (n-p))/sqrt2, odd -> (p - (n-p))/sqrt2,
  // both occupied -> -|11> (d_e^+ d_o^+ = -c_p^+ c_{n-p}^+).
  const std::array<complex_t, 16> v = {1, 0, 0, 0,   //
                                       0, r, r, 0,   //
                                       0, r, -r, 0,  //
                                       0, 0, 0, -1};
  std::vector<Gate> gates;
  const std::size_t n = ordering.n_sites();
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t p = 1; p < n / 2; ++p) {
      const std::size_t qe = ordering.qubit(2 * p, static_cast<Spin>(s));
      const std::size_t qo = ordering.qubit(2 * p + 1, static_cast<Spin>(s));
      gates.push_back(Gate::unitary2(qe, qo, v));
    }
  }
  return gates;
}

std::size_t rotation_index(std::uint64_t basis_index, const ModeOrdering& momentum) {
  if (momentum.basis() != Basis::momentum) throw DomainError("rotation index needs a momentum ordering");
  const std::size_t n = momentum.n_sites();
  std::size_t k = 0;
  for (std::size_t q = 0; q < momentum.n_modes(); ++q) {
    if ((basis_index >> q) & 1U) k += momentum.mode_at(q) % n;
  }
  return k % n;
}

RotationDistribution measure_c4(const Statevector& psi, const ModeOrdering& momentum) {
  if (psi.n_qubits() != momentum.n_modes()) {
    throw DimensionError("state register does not match the mode ordering");
  }
  RotationDistribution d{momentum.n_sites(), std::vector<double>(momentum.n_sites(), 0.0)};
  for (std::uint64_t b = 0; b < psi.dimension(); ++b) {
    d.probability[rotation_index(b, momentum)] += std::norm(psi[b]);
  }
  return d;
}

RotationDistribution rotation_from_counts(const ShotCounts& counts, const ModeOrdering& momentum) {
  if (counts.n_qubits != momentum.n_modes()) {
    throw DimensionError("counts register does not match the mode ordering");
  }
  if (counts.total == 0) throw DomainError("no shots to read the rotation eigenvalue from");
  RotationDistribution d{momentum.n_sites(), std::vector<double>(momentum.n_sites(), 0.0)};
  for (const auto& [b, c] : counts.counts) {
    d.probability[rotation_index(b, momentum)] += static_cast<double>(c);
  }
  for (auto& p : d.probability) p /= static_cast<double>(counts.total);
  return d;
}

}  // namespace hvqe
