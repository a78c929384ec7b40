#include "hubbard_vqe/ansatz.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

namespace hvqe {

void CouplingMap::validate() const {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [c, t] : pairs) {
    if (c == t) throw DomainError("coupling pair acts on a single qubit");
    if (c >= n_qubits || t >= n_qubits) throw DomainError("coupling pair outside the register");
    if (!seen.insert({c, t}).second) throw DomainError("coupling pairs must be distinct");
  }
}

CouplingMap CouplingMap::ourense() {
  return {4, {{0, 1}, {1, 0}, {1, 2}, {1, 3}, {2, 1}, {3, 1}}};
}

CouplingMap CouplingMap::linear(std::size_t n_qubits) {
  CouplingMap m{n_qubits, {}};
  for (std::size_t i = 0; i + 1 < n_qubits; ++i) {
    m.pairs.emplace_back(i, i + 1);
    m.pairs.emplace_back(i + 1, i);
  }
  return m;
}

CouplingMap CouplingMap::all_to_all(std::size_t n_qubits) {
  CouplingMap m{n_qubits, {}};
  for (std::size_t a = 0; a < n_qubits; ++a) {
    for (std::size_t b = 0; b < n_qubits; ++b) {
      if (a != b) m.pairs.emplace_back(a, b);
    }
  }
  return m;
}

CouplingMap CouplingMap::relabeled(const std::vector<std::size_t>& logical_of_physical) const {
  if (logical_of_physical.size() != n_qubits) throw DimensionError("layout must cover every qubit");
  std::vector<bool> seen(n_qubits, false);
  for (auto l : logical_of_physical) {
    if (l >= n_qubits || seen[l]) throw DomainError("layout is not a permutation");
    seen[l] = true;
  }
  CouplingMap out{n_qubits, {}};
  for (const auto& [c, t] : pairs) out.pairs.emplace_back(logical_of_physical[c], logical_of_physical[t]);
  return out;
}

std::vector<std::size_t> CouplingMap::degrees() const {
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& [c, t] : pairs) edges.insert({std::min(c, t), std::max(c, t)});
  std::vector<std::size_t> d(n_qubits, 0);
  for (const auto& [a, b] : edges) {
    ++d[a];
    ++d[b];
  }
  return d;
}

std::vector<std::size_t> interaction_layout(const PauliSum& h, const CouplingMap& map) {
  if (h.n_qubits() != map.n_qubits) throw DimensionError("Hamiltonian and device sizes differ");
  const std::size_t n = map.n_qubits;
  std::vector<double> weight(n, 0.0);
  for (const auto& term : h.terms()) {
    if (term.string.weight() < 2) continue;
    for (std::size_t q = 0; q < n; ++q) {
      if (term.string.letter(q) != 'I') weight[q] += std::abs(term.coeff);
    }
  }
  // Weights are compared with a relative tolerance so that symmetric pairs
  // of qubits tie exactly and fall back to index order.
  auto heavier = [&](std::size_t a, std::size_t b) {
    const double scale = std::max({1.0, weight[a], weight[b]});
    if (std::abs(weight[a] - weight[b]) > 1e-9 * scale) return weight[a] > weight[b];
    return a < b;
  };
  std::vector<std::size_t> logical(n), physical(n);
  std::iota(logical.begin(), logical.end(), 0);
  std::iota(physical.begin(), physical.end(), 0);
  std::sort(logical.begin(), logical.end(), heavier);
  const auto deg = map.degrees();
  std::stable_sort(physical.begin(), physical.end(),
                   [&](std::size_t a, std::size_t b) { return deg[a] > deg[b]; });
  std::vector<std::size_t> logical_of_physical(n);
  for (std::size_t i = 0; i < n; ++i) logical_of_physical[physical[i]] = logical[i];
  return logical_of_physical;
}

// ---------------------------------------------------------------------------

std::string CZSequence::to_string() const {
  const bool digits = std::all_of(indices.begin(), indices.end(), [](auto i) { return i < 10; });
  if (digits) {
    std::string s;
    for (auto i : indices) s.push_back(static_cast<char>('0' + i));
    return s;
  }
  return nlohmann::json(indices).dump();
}

CZSequence CZSequence::from_digits(const std::string& digits) {
  CZSequence s;
  for (char ch : digits) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) {
      throw DomainError("sequence literal '" + digits + "' contains a non-digit");
    }
    s.indices.push_back(static_cast<std::size_t>(ch - '0'));
  }
  return s;
}

CZSequence CZSequence::from_json(const std::string& text) {
  try {
    return {nlohmann::json::parse(text).get<std::vector<std::size_t>>()};
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("invalid sequence array: ") + e.what());
  }
}

CZSequence CZSequence::parse(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\n");
  if (first != std::string::npos && text[first] == '[') return from_json(text);
  std::string trimmed;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) trimmed.push_back(ch);
  }
  return from_digits(trimmed);
}

std::vector<CZSequence> CZSequence::split_digits(const std::string& digits, std::size_t group) {
  if (group == 0 || digits.size() % group != 0) {
    throw DomainError("sequence literal length is not a multiple of the group size");
  }
  std::vector<CZSequence> out;
  for (std::size_t i = 0; i < digits.size(); i += group) {
    out.push_back(from_digits(digits.substr(i, group)));
  }
  return out;
}

CZSequence random_sequence(const CouplingMap& map, std::size_t n_cz, CounterRng& rng) {
  if (map.pairs.empty()) throw DomainError("coupling map is empty");
  CZSequence s;
  s.indices.reserve(n_cz);
  for (std::size_t i = 0; i < n_cz; ++i) s.indices.push_back(rng.below(map.pairs.size()));
  return s;
}

// ---------------------------------------------------------------------------

ParametrizedCircuit::ParametrizedCircuit(std::size_t n_qubits, std::vector<Gate> gates,
                                         std::vector<int> slots)
    : n_qubits_(n_qubits), gates_(std::move(gates)), slots_(std::move(slots)) {
  if (gates_.size() != slots_.size()) throw DimensionError("one slot entry per gate required");
  int next = 0;
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    if (slots_[i] < 0) continue;
    if (slots_[i] != next) throw DomainError("parameter slots must be declared in order");
    if (gates_[i].kind != GateKind::ry && gates_[i].kind != GateKind::rz) {
      throw DomainError("only rotations can carry parameters");
    }
    ++next;
  }
  n_params_ = static_cast<std::size_t>(next);
}

std::size_t ParametrizedCircuit::n_entanglers() const {
  return static_cast<std::size_t>(
      std::count_if(gates_.begin(), gates_.end(), [](const Gate& g) { return g.two_qubit(); }));
}

std::vector<Gate> ParametrizedCircuit::bind(std::span<const double> theta) const {
  std::vector<Gate> out;
  bind_into(theta, out);
  return out;
}

void ParametrizedCircuit::bind_into(std::span<const double> theta, std::vector<Gate>& out) const {
  if (theta.size() != n_params_) {
    throw DimensionError("expected " + std::to_string(n_params_) + " parameters, got " +
                         std::to_string(theta.size()));
  }
  out = gates_;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (slots_[i] >= 0) out[i].theta = theta[static_cast<std::size_t>(slots_[i])];
  }
}

namespace {

void push_rotations(std::size_t q, std::vector<Gate>& gates, std::vector<int>& slots, int& next) {
  gates.push_back(Gate::ry(q, 0.0));
  slots.push_back(next++);
  gates.push_back(Gate::rz(q, 0.0));
  slots.push_back(next++);
}

}  // namespace

ParametrizedCircuit build_adaptive_ryrz(std::size_t n_active, const CZSequence& seq,
                                        const CouplingMap& map) {
  if (n_active == 0) throw DomainError("ansatz needs at least one qubit");
  map.validate();
  std::vector<Gate> gates;
  std::vector<int> slots;
  int next = 0;
  for (std::size_t q = 0; q < n_active; ++q) push_rotations(q, gates, slots, next);
  for (auto idx : seq.indices) {
    if (idx >= map.pairs.size()) {
      throw DomainError("sequence index " + std::to_string(idx) + " not in the coupling map");
    }
    const auto [c, t] = map.pairs[idx];
    if (c >= n_active || t >= n_active) {
      throw DomainError("sequence index " + std::to_string(idx) + " touches an inactive qubit");
    }
    gates.push_back(Gate::cz(c, t));
    slots.push_back(-1);
    push_rotations(c, gates, slots, next);
    push_rotations(t, gates, slots, next);
  }
  return ParametrizedCircuit(n_active, std::move(gates), std::move(slots));
}

ParametrizedCircuit build_linear_ryrz(std::size_t n_qubits, std::size_t layers) {
  if (n_qubits == 0) throw DomainError("ansatz needs at least one qubit");
  std::vector<Gate> gates;
  std::vector<int> slots;
  int next = 0;
  for (std::size_t q = 0; q < n_qubits; ++q) push_rotations(q, gates, slots, next);
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t q = 0; q + 1 < n_qubits; ++q) {
      gates.push_back(Gate::cz(q, q + 1));
      slots.push_back(-1);
    }
    for (std::size_t q = 0; q < n_qubits; ++q) push_rotations(q, gates, slots, next);
  }
  return ParametrizedCircuit(n_qubits, std::move(gates), std::move(slots));
}

}  // namespace hvqe
