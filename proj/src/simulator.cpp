#include "hubbard_vqe/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace hvqe {
namespace {

void check_qubit(const Statevector& psi, std::size_t q) {
  if (q >= psi.n_qubits()) {
    throw DimensionError("gate target " + std::to_string(q) + " outside a " +
                         std::to_string(psi.n_qubits()) + "-qubit register");
  }
}

// Applies the 2x2 matrix [[a, b], [c, d]] to qubit q.
void apply_1q(std::vector<complex_t>& amps, std::size_t q, complex_t a, complex_t b, complex_t c,
              complex_t d) {
  const std::size_t stride = std::size_t{1} << q;
  for (std::size_t base = 0; base < amps.size(); base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const complex_t v0 = amps[i];
      const complex_t v1 = amps[i + stride];
      amps[i] = a * v0 + b * v1;
      amps[i + stride] = c * v0 + d * v1;
    }
  }
}

void apply_pauli_letter(std::vector<complex_t>& amps, std::size_t q, int letter) {
  switch (letter) {
    case 1: apply_1q(amps, q, 0, 1, 1, 0); break;                                  // X
    case 2: apply_1q(amps, q, 0, complex_t{0, -1}, complex_t{0, 1}, 0); break;     // Y
    case 3: apply_1q(amps, q, 1, 0, 0, -1); break;                                 // Z
    default: break;
  }
}

std::size_t draw_from_cdf(const std::vector<double>& cdf, double u) {
  const double target = u * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.end()) --it;
  return static_cast<std::size_t>(it - cdf.begin());
}

std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) c[i] = (s += p[i]);
  return c;
}

// Readout flip masks drawn from the product distribution over qubits.
class ReadoutSampler {
 public:
  ReadoutSampler(std::size_t n, double r) : n_(n), r_(r) {
    if (r_ > 0.0 && n_ <= 12) {
      std::vector<double> p(std::size_t{1} << n_);
      for (std::uint64_t m = 0; m < p.size(); ++m) {
        const int k = std::popcount(m);
        p[m] = std::pow(r_, k) * std::pow(1.0 - r_, static_cast<int>(n_) - k);
      }
      cdf_ = cumulative(p);
    }
  }
  std::uint64_t draw(CounterRng& rng) const {
    if (r_ == 0.0) return 0;
    if (!cdf_.empty()) return draw_from_cdf(cdf_, rng.uniform());
    std::uint64_t m = 0;
    for (std::size_t q = 0; q < n_; ++q) {
      if (rng.uniform() < r_) m |= std::uint64_t{1} << q;
    }
    return m;
  }

 private:
  std::size_t n_;
  double r_;
  std::vector<double> cdf_;
};

double gate_error_probability(const Gate& g, const NoiseModel& noise) {
  return g.two_qubit() ? noise.p2 : noise.p1;
}

// Applies a uniformly drawn Pauli (identity included) to the gate's qubits.
void apply_random_pauli(Statevector& psi, const Gate& g, CounterRng& rng) {
  auto& amps = psi.mutable_amplitudes();
  if (g.two_qubit()) {
    const auto draw = rng.below(16);
    apply_pauli_letter(amps, g.q0, static_cast<int>(draw & 3U));
    apply_pauli_letter(amps, g.q1, static_cast<int>(draw >> 2));
  } else {
    apply_pauli_letter(amps, g.q0, static_cast<int>(rng.below(4)));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Gates

Gate Gate::ry(std::size_t q, double theta) { return {GateKind::ry, q, q, theta, {}}; }
Gate Gate::rz(std::size_t q, double theta) { return {GateKind::rz, q, q, theta, {}}; }
Gate Gate::x(std::size_t q) { return {GateKind::x, q, q, 0.0, {}}; }
Gate Gate::z(std::size_t q) { return {GateKind::z, q, q, 0.0, {}}; }

Gate Gate::cz(std::size_t a, std::size_t b) {
  if (a == b) throw DomainError("CZ needs two distinct qubits");
  return {GateKind::cz, a, b, 0.0, {}};
}

Gate Gate::cx(std::size_t control, std::size_t target) {
  if (control == target) throw DomainError("CX needs two distinct qubits");
  return {GateKind::cx, control, target, 0.0, {}};
}

Gate Gate::unitary2(std::size_t q0, std::size_t q1, const std::array<complex_t, 16>& m) {
  if (q0 == q1) throw DomainError("two-qubit unitary needs two distinct qubits");
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      complex_t s = 0.0;
      for (int k = 0; k < 4; ++k) s += std::conj(m[4 * k + r]) * m[4 * k + c];
      if (std::abs(s - (r == c ? 1.0 : 0.0)) > 1e-12) {
        throw DomainError("two-qubit gate matrix is not unitary");
      }
    }
  }
  return {GateKind::unitary2, q0, q1, 0.0, m};
}

std::string Gate::to_string() const {
  char buf[96];
  switch (kind) {
    case GateKind::ry: std::snprintf(buf, sizeof buf, "ry(%.17g) q%zu", theta, q0); break;
    case GateKind::rz: std::snprintf(buf, sizeof buf, "rz(%.17g) q%zu", theta, q0); break;
    case GateKind::x: std::snprintf(buf, sizeof buf, "x q%zu", q0); break;
    case GateKind::z: std::snprintf(buf, sizeof buf, "z q%zu", q0); break;
    case GateKind::cz: std::snprintf(buf, sizeof buf, "cz q%zu,q%zu", q0, q1); break;
    case GateKind::cx: std::snprintf(buf, sizeof buf, "cx q%zu,q%zu", q0, q1); break;
    case GateKind::unitary2: std::snprintf(buf, sizeof buf, "u2 q%zu,q%zu", q0, q1); break;
  }
  return buf;
}

void apply_gate(Statevector& psi, const Gate& g) {
  check_qubit(psi, g.q0);
  if (g.two_qubit()) check_qubit(psi, g.q1);
  auto& amps = psi.mutable_amplitudes();
  switch (g.kind) {
    case GateKind::ry: {
      const double c = std::cos(0.5 * g.theta), s = std::sin(0.5 * g.theta);
      apply_1q(amps, g.q0, c, -s, s, c);
      break;
    }
    case GateKind::rz: {
      const complex_t e0 = std::polar(1.0, -0.5 * g.theta), e1 = std::polar(1.0, 0.5 * g.theta);
      const std::size_t m = std::size_t{1} << g.q0;
      for (std::size_t i = 0; i < amps.size(); ++i) amps[i] *= (i & m) ? e1 : e0;
      break;
    }
    case GateKind::x: apply_pauli_letter(amps, g.q0, 1); break;
    case GateKind::z: apply_pauli_letter(amps, g.q0, 3); break;
    case GateKind::cz: {
      const std::size_t m = (std::size_t{1} << g.q0) | (std::size_t{1} << g.q1);
      for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & m) == m) amps[i] = -amps[i];
      }
      break;
    }
    case GateKind::cx: {
      const std::size_t c = std::size_t{1} << g.q0, t = std::size_t{1} << g.q1;
      for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & c) && !(i & t)) std::swap(amps[i], amps[i | t]);
      }
      break;
    }
    case GateKind::unitary2: {
      const std::size_t b0 = std::size_t{1} << g.q0, b1 = std::size_t{1} << g.q1;
      for (std::size_t i = 0; i < amps.size(); ++i) {
        if (i & (b0 | b1)) continue;
        const std::size_t idx[4] = {i, i | b0, i | b1, i | b0 | b1};
        complex_t in[4], out[4];
        for (int k = 0; k < 4; ++k) in[k] = amps[idx[k]];
        for (int r = 0; r < 4; ++r) {
          out[r] = 0.0;
          for (int k = 0; k < 4; ++k) out[r] += g.matrix[4 * r + k] * in[k];
        }
        for (int k = 0; k < 4; ++k) amps[idx[k]] = out[k];
      }
      break;
    }
  }
}

Statevector run(std::span<const Gate> circuit, const Statevector& initial) {
  Statevector psi = initial;
  for (const auto& g : circuit) apply_gate(psi, g);
  return psi;
}

Statevector run(std::span<const Gate> circuit, std::size_t n_qubits) {
  return run(circuit, Statevector(n_qubits));
}

// ---------------------------------------------------------------------------
// Noise and sampling

void NoiseModel::validate() const {
  for (double p : {p1, p2, readout}) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("noise probabilities must lie in [0, 1]");
  }
}

void ShotCounts::add(std::uint64_t outcome, std::uint64_t n) {
  counts[outcome] += n;
  total += n;
}

std::uint64_t ShotCounts::count(std::uint64_t outcome) const {
  auto it = counts.find(outcome);
  return it == counts.end() ? 0 : it->second;
}

std::string ShotCounts::bitstring(std::uint64_t outcome) const {
  std::string s(n_qubits, '0');
  for (std::size_t q = 0; q < n_qubits; ++q) {
    if ((outcome >> q) & 1U) s[n_qubits - 1 - q] = '1';
  }
  return s;
}

namespace {

// Dense tally converted to ShotCounts at the end.
class Tally {
 public:
  explicit Tally(std::size_t n) : n_(n), dense_(std::size_t{1} << n, 0) {}
  void add(std::uint64_t b) { ++dense_[b]; }
  ShotCounts finish() const {
    ShotCounts c;
    c.n_qubits = n_;
    for (std::uint64_t b = 0; b < dense_.size(); ++b) {
      if (dense_[b]) c.add(b, dense_[b]);
    }
    return c;
  }

 private:
  std::size_t n_;
  std::vector<std::uint64_t> dense_;
};

}  // namespace

ShotCounts sample(const Statevector& psi, std::size_t shots, const NoiseModel& noise,
                  CounterRng& rng) {
  if (shots == 0) throw DomainError("need at least one shot");
  noise.validate();
  const auto cdf = cumulative(psi.probabilities());
  const ReadoutSampler readout(psi.n_qubits(), noise.readout);
  Tally tally(psi.n_qubits());
  for (std::size_t s = 0; s < shots; ++s) {
    tally.add(draw_from_cdf(cdf, rng.uniform()) ^ readout.draw(rng));
  }
  return tally.finish();
}

Statevector noisy_run(std::span<const Gate> circuit, const Statevector& initial,
                      const NoiseModel& noise, CounterRng& rng) {
  noise.validate();
  Statevector psi = initial;
  for (const auto& g : circuit) {
    apply_gate(psi, g);
    const double p = gate_error_probability(g, noise);
    if (p > 0.0 && rng.uniform() < p) apply_random_pauli(psi, g, rng);
  }
  return psi;
}

ShotCounts sample_circuit(std::span<const Gate> circuit, const Statevector& initial,
                          std::size_t shots, const NoiseModel& noise, CounterRng& rng) {
  if (shots == 0) throw DomainError("need at least one shot");
  noise.validate();
  const Statevector ideal = run(circuit, initial);
  if (!noise.has_gate_noise()) return sample(ideal, shots, noise, rng);

  const auto ideal_cdf = cumulative(ideal.probabilities());
  const ReadoutSampler readout(initial.n_qubits(), noise.readout);
  // clean[i] = probability that gates i.. draw no error event.
  const std::size_t n_gates = circuit.size();
  std::vector<double> p(n_gates), clean(n_gates + 1, 1.0);
  for (std::size_t i = 0; i < n_gates; ++i) p[i] = gate_error_probability(circuit[i], noise);
  for (std::size_t i = n_gates; i-- > 0;) clean[i] = clean[i + 1] * (1.0 - p[i]);

  Tally tally(initial.n_qubits());
  std::vector<bool> error_at(n_gates);
  for (std::size_t s = 0; s < shots; ++s) {
    std::uint64_t outcome;
    if (rng.uniform() < clean[0]) {
      outcome = draw_from_cdf(ideal_cdf, rng.uniform());
    } else {
      // Error pattern conditioned on at least one event: walk forward while
      // the condition is still open, then draw the rest unconditioned.
      bool open = true;
      for (std::size_t i = 0; i < n_gates; ++i) {
        const double q = open ? p[i] / (1.0 - clean[i]) : p[i];
        error_at[i] = rng.uniform() < q;
        if (error_at[i]) open = false;
      }
      Statevector psi = initial;
      for (std::size_t i = 0; i < n_gates; ++i) {
        apply_gate(psi, circuit[i]);
        if (error_at[i]) apply_random_pauli(psi, circuit[i], rng);
      }
      outcome = draw_from_cdf(cumulative(psi.probabilities()), rng.uniform());
    }
    tally.add(outcome ^ readout.draw(rng));
  }
  return tally.finish();
}

// ---------------------------------------------------------------------------
// Expectation estimation

std::vector<MeasurementGroup> group_qubitwise(const PauliSum& op) {
  const std::size_t n = op.n_qubits();
  std::vector<MeasurementGroup> groups;
  for (const auto& term : op.terms()) {
    if (term.string.is_identity()) continue;
    bool placed = false;
    for (auto& g : groups) {
      bool fits = true;
      for (std::size_t q = 0; q < n && fits; ++q) {
        const char l = term.string.letter(q);
        fits = l == 'I' || g.basis[q] == 'I' || g.basis[q] == l;
      }
      if (!fits) continue;
      for (std::size_t q = 0; q < n; ++q) {
        if (term.string.letter(q) != 'I') g.basis[q] = term.string.letter(q);
      }
      g.terms.push_back(term);
      placed = true;
      break;
    }
    if (!placed) {
      MeasurementGroup g;
      g.basis.assign(n, 'I');
      for (std::size_t q = 0; q < n; ++q) g.basis[q] = term.string.letter(q);
      g.terms.push_back(term);
      groups.push_back(std::move(g));
    }
  }
  return groups;
}

std::vector<Gate> basis_rotation(const std::vector<char>& basis) {
  std::vector<Gate> gates;
  for (std::size_t q = 0; q < basis.size(); ++q) {
    if (basis[q] == 'X') {
      gates.push_back(Gate::ry(q, -std::numbers::pi / 2));
    } else if (basis[q] == 'Y') {
      gates.push_back(Gate::rz(q, -std::numbers::pi / 2));
      gates.push_back(Gate::ry(q, -std::numbers::pi / 2));
    }
  }
  return gates;
}

EnergyEstimate group_estimate(const MeasurementGroup& group, const ShotCounts& counts) {
  if (counts.total == 0) throw DomainError("no shots for the group estimate");
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& [b, c] : counts.counts) {
    double v = 0.0;
    for (const auto& t : group.terms) {
      const std::uint64_t support = t.string.support();
      v += t.coeff.real() * ((std::popcount(b & support) & 1) ? -1.0 : 1.0);
    }
    sum += static_cast<double>(c) * v;
    sum_sq += static_cast<double>(c) * v * v;
  }
  const double n = static_cast<double>(counts.total);
  const double mean = sum / n;
  const double var = counts.total > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n)};
}

EnergyEstimate estimate_expectation(std::span<const Gate> circuit, const Statevector& initial,
                                    const PauliSum& op, std::size_t shots,
                                    const NoiseModel& noise, CounterRng& rng) {
  if (op.n_qubits() != initial.n_qubits()) throw DimensionError("operator and state registers differ");
  if (!op.is_hermitian()) throw DomainError("expectation estimates need a Hermitian operator");
  if (shots == 0) return {real_expectation(op, run(circuit, initial)), 0.0};

  EnergyEstimate total{op.coefficient(PauliString(op.n_qubits())).real(), 0.0};
  double var = 0.0;
  std::vector<Gate> gates(circuit.begin(), circuit.end());
  const std::size_t prefix = gates.size();
  for (const auto& group : group_qubitwise(op)) {
    gates.resize(prefix);
    const auto rot = basis_rotation(group.basis);
    gates.insert(gates.end(), rot.begin(), rot.end());
    const EnergyEstimate e = group_estimate(group, sample_circuit(gates, initial, shots, noise, rng));
    total.value += e.value;
    var += e.sigma * e.sigma;
  }
  total.sigma = std::sqrt(var);
  return total;
}

}  // namespace hvqe
