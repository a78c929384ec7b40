#include "hubbard_vqe/mitigation.hpp"

#include <cmath>

#include <json.hpp>

namespace hvqe {

MomentOperators MomentOperators::build(const PauliSum& h) {
  if (!h.is_hermitian()) throw DomainError("moments need a Hermitian operator");
  MomentOperators ops;
  ops.h = h;
  ops.h2 = sum_product(h, h);
  // |H^2| * |H| bounds the cube's size before any multiplication happens.
  if (ops.h2.size() > kMaxTerms || ops.h2.size() * h.size() > 50 * kMaxTerms) {
    throw NumericalError("H^3 would exceed the term limit");
  }
  ops.h3 = sum_product(ops.h2, h);
  if (ops.h3.size() > kMaxTerms) throw NumericalError("H^3 exceeds the term limit");
  ops.h2 = ops.h2.hermitian_part_checked();
  ops.h3 = ops.h3.hermitian_part_checked();
  return ops;
}

MomentEstimates measure_moments(std::span<const Gate> state_prep, const Statevector& initial,
                                const MomentOperators& ops, std::size_t shots,
                                const NoiseModel& noise, CounterRng& rng) {
  MomentEstimates m;
  m.m1 = estimate_expectation(state_prep, initial, ops.h, shots, noise, rng);
  m.m2 = estimate_expectation(state_prep, initial, ops.h2, shots, noise, rng);
  m.m3 = estimate_expectation(state_prep, initial, ops.h3, shots, noise, rng);
  return m;
}

MomentEstimates exact_moments(const Statevector& psi, const MomentOperators& ops) {
  return {{real_expectation(ops.h, psi), 0.0},
          {real_expectation(ops.h2, psi), 0.0},
          {real_expectation(ops.h3, psi), 0.0}};
}

double lanczos_energy(double m1, double m2, double m3) {
  const double v = m2 - m1 * m1;
  const double alpha2 = (m3 - 2.0 * m1 * m2 + m1 * m1 * m1) / v;
  const double mean = 0.5 * (m1 + alpha2);
  const double half_gap = 0.5 * (m1 - alpha2);
  return mean - std::sqrt(half_gap * half_gap + v);
}

LanczosResult lanczos_estimate(const MomentEstimates& m) {
  const double v = m.m2.value - m.m1.value * m.m1.value;
  const double floor = std::max(2.0 * m.m2.sigma, 1e-10 * std::max(1.0, std::abs(m.m2.value)));
  if (!(v > floor)) return {m.m1, true};

  const double e = lanczos_energy(m.m1.value, m.m2.value, m.m3.value);
  const double x[3] = {m.m1.value, m.m2.value, m.m3.value};
  const double s[3] = {m.m1.sigma, m.m2.sigma, m.m3.sigma};
  double var = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (s[i] == 0.0) continue;
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    double up[3] = {x[0], x[1], x[2]}, dn[3] = {x[0], x[1], x[2]};
    up[i] += h;
    dn[i] -= h;
    const double d = (lanczos_energy(up[0], up[1], up[2]) - lanczos_energy(dn[0], dn[1], dn[2])) /
                     (2.0 * h);
    var += d * d * s[i] * s[i];
  }
  return {{e, std::sqrt(var)}, false};
}

WeightedAverage weighted_average(std::span<const EnergyEstimate> xs) {
  if (xs.empty()) throw DomainError("weighted average of an empty list");
  double exact_sum = 0.0;
  std::size_t exact_count = 0;
  double w_sum = 0.0, wx_sum = 0.0;
  for (const auto& x : xs) {
    if (x.sigma < 0.0 || !std::isfinite(x.sigma)) throw DomainError("sigma must be finite and >= 0");
    if (x.sigma == 0.0) {
      exact_sum += x.value;
      ++exact_count;
      continue;
    }
    const double w = 1.0 / (x.sigma * x.sigma);
    w_sum += w;
    wx_sum += w * x.value;
  }
  if (exact_count > 0) return {{exact_sum / static_cast<double>(exact_count), 0.0}, true};
  return {{wx_sum / w_sum, 1.0 / std::sqrt(w_sum)}, false};
}

PostselectResult symmetry_postselect(const ShotCounts& counts,
                                     std::span<const ParityConstraint> known) {
  for (const auto& k : known) {
    if (!k.z.is_diagonal()) throw DomainError("post-selection needs Z/I strings");
    if (k.z.n_qubits() != counts.n_qubits) throw DimensionError("constraint on another register");
  }
  PostselectResult out;
  out.counts.n_qubits = counts.n_qubits;
  for (const auto& [b, c] : counts.counts) {
    bool keep = true;
    for (const auto& k : known) {
      if (diagonal_value(k.z, b) != static_cast<double>(k.eigenvalue)) {
        keep = false;
        break;
      }
    }
    if (keep) out.counts.add(b, c);
  }
  out.retained_fraction =
      counts.total ? static_cast<double>(out.counts.total) / static_cast<double>(counts.total) : 0.0;
  if (out.counts.total == 0) throw PostselectionError(out.retained_fraction);
  return out;
}

std::string MitigationReport::to_json() const {
  auto est = [](const EnergyEstimate& e) { return nlohmann::json{{"value", e.value}, {"sigma", e.sigma}}; };
  nlohmann::json j;
  j["raw"] = est(raw);
  j["moments"] = {{"m1", est(moments.m1)}, {"m2", est(moments.m2)}, {"m3", est(moments.m3)}};
  j["lanczos"] = est(lanczos.energy);
  j["lanczos_degenerate"] = lanczos.degenerate;
  j["retained_fraction"] = retained_fraction;
  j["flags"] = flags;
  return j.dump();
}

}  // namespace hvqe
