#include "hubbard_vqe/vqe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <ostream>

#include <json.hpp>

namespace hvqe {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::spsa ? "spsa" : "simplex"; }

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "spsa") return OptimizerKind::spsa;
  if (name == "simplex") return OptimizerKind::simplex;
  throw DomainError("unknown optimizer '" + name + "' (expected spsa or simplex)");
}

void VqeConfig::validate() const {
  if (n_c == 0 || n_init == 0 || repeats == 0) {
    throw DomainError("n_c, n_init and repeats must be positive");
  }
  if (!(penalty >= 0.0)) throw DomainError("penalty weight must be non-negative");
  if (spsa.max_iters == 0) throw DomainError("max_iters must be positive");
  if (!(spsa.c > 0.0) || !(spsa.target_step > 0.0)) throw DomainError("SPSA gains must be positive");
  if (simplex.max_evaluations == 0 || !(simplex.initial_step > 0.0)) {
    throw DomainError("simplex budget and step must be positive");
  }
}

void OptimizationTrace::write_csv(std::ostream& out) const {
  out << "iter,cost,sigma\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", r.iter, r.cost, r.sigma);
    out << buf;
  }
}

// ---------------------------------------------------------------------------
// SPSA

OptimizeResult spsa_minimize(const StochasticCost& cost, std::vector<double> theta,
                             const SpsaOptions& opt, CounterRng& rng) {
  const std::size_t dim = theta.size();
  if (dim == 0) throw DimensionError("nothing to optimize");
  OptimizeResult out;
  const double big_a = opt.stability >= 0.0 ? opt.stability : 0.1 * static_cast<double>(opt.max_iters);

  std::vector<double> delta(dim), plus(dim), minus(dim);
  auto perturb = [&](double ck) {
    for (std::size_t i = 0; i < dim; ++i) {
      delta[i] = (rng() >> 63) ? 1.0 : -1.0;
      plus[i] = theta[i] + ck * delta[i];
      minus[i] = theta[i] - ck * delta[i];
    }
  };

  double a = opt.a;
  if (a <= 0.0) {
    // Mean gradient magnitude along random directions sets the first step.
    double mean_grad = 0.0;
    const std::size_t samples = std::max<std::size_t>(1, opt.calibration_samples);
    for (std::size_t s = 0; s < samples; ++s) {
      perturb(opt.c);
      const double fp = cost(plus, 1, rng).value;
      const double fm = cost(minus, 1, rng).value;
      out.evaluations += 2;
      mean_grad += std::abs(fp - fm) / (2.0 * opt.c);
    }
    mean_grad /= static_cast<double>(samples);
    a = mean_grad > 0.0 ? opt.target_step * std::pow(1.0 + big_a, opt.alpha) / mean_grad
                        : opt.target_step;
  }

  std::vector<std::vector<double>> iterates;
  iterates.reserve(opt.max_iters);
  for (std::size_t k = 0; k < opt.max_iters; ++k) {
    const double ak = a / std::pow(static_cast<double>(k) + 1.0 + big_a, opt.alpha);
    const double ck = opt.c / std::pow(static_cast<double>(k) + 1.0, opt.gamma);
    perturb(ck);
    const EnergyEstimate fp = cost(plus, 1, rng);
    const EnergyEstimate fm = cost(minus, 1, rng);
    out.evaluations += 2;
    const double g = (fp.value - fm.value) / (2.0 * ck);
    for (std::size_t i = 0; i < dim; ++i) theta[i] -= ak * g * delta[i];
    out.trace.rows.push_back({k, 0.5 * (fp.value + fm.value),
                              0.5 * std::sqrt(fp.sigma * fp.sigma + fm.sigma * fm.sigma)});
    iterates.push_back(theta);
  }

  const std::size_t tail = std::max<std::size_t>(1, opt.max_iters / 4);
  const std::size_t mult = std::max<std::size_t>(1, opt.final_shot_multiplier);
  bool first = true;
  for (std::size_t i = iterates.size() - tail; i < iterates.size(); ++i) {
    const EnergyEstimate e = cost(iterates[i], mult, rng);
    ++out.evaluations;
    if (first || e.value < out.value.value) {
      out.value = e;
      out.theta = iterates[i];
      first = false;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nelder-Mead

namespace {

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;
};

double diameter(const Simplex& s, std::size_t best) {
  double d = 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < s.x[i].size(); ++k) {
      const double diff = s.x[i][k] - s.x[best][k];
      acc += diff * diff;
    }
    d = std::max(d, std::sqrt(acc));
  }
  return d;
}

}  // namespace

OptimizeResult simplex_minimize(const DeterministicCost& cost, std::vector<double> theta0,
                                const SimplexOptions& opt) {
  const std::size_t n = theta0.size();
  if (n == 0) throw DimensionError("nothing to optimize");
  const double nd = static_cast<double>(n);
  const double alpha = 1.0, beta = 1.0 + 2.0 / nd, gamma = 0.75 - 1.0 / (2.0 * nd),
               delta = 1.0 - 1.0 / nd;

  OptimizeResult out;
  auto eval = [&](const std::vector<double>& x) {
    ++out.evaluations;
    return cost(x);
  };
  out.theta = theta0;
  out.value = {eval(theta0), 0.0};
  std::size_t iter = 0;
  out.trace.rows.push_back({iter, out.value.value, 0.0});

  for (std::size_t round = 0; round <= opt.restarts; ++round) {
    if (out.evaluations + n + 1 > opt.max_evaluations) break;
    Simplex s;
    s.x.assign(n + 1, out.theta);
    s.f.assign(n + 1, out.value.value);
    for (std::size_t i = 0; i < n; ++i) {
      s.x[i + 1][i] += opt.initial_step;
      s.f[i + 1] = eval(s.x[i + 1]);
    }
    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    const double start_value = out.value.value;
    while (out.evaluations < opt.max_evaluations) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return s.f[a] < s.f[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
      if (s.f[best] < out.value.value) {
        out.value.value = s.f[best];
        out.theta = s.x[best];
        out.trace.rows.push_back({iter, out.value.value, 0.0});
      }
      if (diameter(s, best) < opt.diameter_tolerance) break;
      ++iter;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) centroid[k] += s.x[order[i]][k];
      }
      for (auto& c : centroid) c /= nd;

      for (std::size_t k = 0; k < n; ++k) xr[k] = centroid[k] + alpha * (centroid[k] - s.x[worst][k]);
      const double fr = eval(xr);
      if (fr < s.f[best]) {
        for (std::size_t k = 0; k < n; ++k) xe[k] = centroid[k] + beta * (xr[k] - centroid[k]);
        const double fe = eval(xe);
        if (fe < fr) {
          s.x[worst] = xe;
          s.f[worst] = fe;
        } else {
          s.x[worst] = xr;
          s.f[worst] = fr;
        }
        continue;
      }
      if (fr < s.f[second]) {
        s.x[worst] = xr;
        s.f[worst] = fr;
        continue;
      }
      const bool outside = fr < s.f[worst];
      for (std::size_t k = 0; k < n; ++k) {
        xc[k] = outside ? centroid[k] + gamma * (xr[k] - centroid[k])
                        : centroid[k] + gamma * (s.x[worst][k] - centroid[k]);
      }
      const double fc = eval(xc);
      if (outside ? fc <= fr : fc < s.f[worst]) {
        s.x[worst] = xc;
        s.f[worst] = fc;
        continue;
      }
      for (std::size_t i = 1; i <= n; ++i) {
        auto& v = s.x[order[i]];
        for (std::size_t k = 0; k < n; ++k) v[k] = s.x[best][k] + delta * (v[k] - s.x[best][k]);
        s.f[order[i]] = eval(v);
      }
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (s.f[i] < out.value.value) {
        out.value.value = s.f[i];
        out.theta = s.x[i];
        out.trace.rows.push_back({iter, out.value.value, 0.0});
      }
    }
    // A restart that gains nothing means the incumbent is a genuine minimum.
    if (round > 0 && !(out.value.value < start_value - 1e-14)) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cost model

CostModel::CostModel(PauliSum h, PauliSum number, double n_target, double penalty,
                     ParametrizedCircuit ansatz)
    : h_(std::move(h)), n_(std::move(number)), n_target_(n_target), ansatz_(std::move(ansatz)) {
  if (h_.n_qubits() != n_.n_qubits() || h_.n_qubits() != ansatz_.n_qubits()) {
    throw DimensionError("Hamiltonian, number operator and ansatz registers differ");
  }
  if (penalty < 0.0) throw DomainError("penalty weight must be non-negative");
  const PauliSum shifted = n_ - PauliSum::identity(n_.n_qubits(), n_target);
  violation_ = sum_product(shifted, shifted);
  cost_op_ = h_ + violation_ * complex_t{penalty};
  if (h_.n_qubits() <= 12) {
    dense_cost_ = cost_op_.to_dense();
    dense_h_ = h_.to_dense();
    dense_n_ = n_.to_dense();
    dense_violation_ = violation_.to_dense();
  }
}

Statevector CostModel::state(std::span<const double> theta) const {
  thread_local std::vector<Gate> gates;
  ansatz_.bind_into(theta, gates);
  return run(gates, ansatz_.n_qubits());
}

namespace {

double dense_expectation(const Eigen::MatrixXcd& m, const Statevector& psi) {
  const auto amps = psi.amplitudes();
  const Eigen::Map<const Eigen::VectorXcd> v(amps.data(), static_cast<Eigen::Index>(amps.size()));
  return v.dot(m * v).real();
}

}  // namespace

double CostModel::exact(std::span<const double> theta) const {
  const Statevector psi = state(theta);
  return dense_cost_.size() ? dense_expectation(dense_cost_, psi) : real_expectation(cost_op_, psi);
}

double CostModel::exact_energy(std::span<const double> theta) const {
  const Statevector psi = state(theta);
  return dense_h_.size() ? dense_expectation(dense_h_, psi) : real_expectation(h_, psi);
}

double CostModel::exact_number(std::span<const double> theta) const {
  const Statevector psi = state(theta);
  return dense_n_.size() ? dense_expectation(dense_n_, psi) : real_expectation(n_, psi);
}

double CostModel::exact_filling_violation(std::span<const double> theta) const {
  const Statevector psi = state(theta);
  return dense_violation_.size() ? dense_expectation(dense_violation_, psi)
                                 : real_expectation(violation_, psi);
}

EnergyEstimate CostModel::sampled(std::span<const double> theta, std::size_t shots,
                                  const NoiseModel& noise, CounterRng& rng) const {
  if (shots == 0) return {exact(theta), 0.0};
  const auto gates = ansatz_.bind(theta);
  return estimate_expectation(gates, Statevector(ansatz_.n_qubits()), cost_op_, shots, noise, rng);
}

// ---------------------------------------------------------------------------
// Random search

SequenceResult optimize_sequence(const CostModel& model, const CZSequence& seq,
                                 const VqeConfig& cfg, const NoiseModel& noise, CounterRng rng) {
  SequenceResult out;
  out.sequence = seq;
  const std::size_t p = model.n_parameters();
  for (std::size_t r = 0; r < cfg.n_init; ++r) {
    CounterRng cell = rng.split(r);
    RestartResult rr;
    rr.theta0.resize(p);
    for (auto& v : rr.theta0) v = 2.0 * std::numbers::pi * cell.uniform();
    if (cfg.optimizer == OptimizerKind::simplex) {
      rr.result = simplex_minimize([&](std::span<const double> th) { return model.exact(th); },
                                   rr.theta0, cfg.simplex);
    } else {
      const StochasticCost cost = [&](std::span<const double> th, std::size_t mult,
                                      CounterRng& g) {
        return model.sampled(th, cfg.shots * mult, noise, g);
      };
      CounterRng opt_rng = cell.split(1);
      rr.result = spsa_minimize(cost, rr.theta0, cfg.spsa, opt_rng);
    }
    if (r == 0 || rr.result.value.value < out.restarts[out.best_restart].result.value.value) {
      out.best_restart = r;
    }
    out.restarts.push_back(std::move(rr));
  }
  return out;
}

VqeResult random_search(const CostModelFactory& factory, const CouplingMap& map,
                        const VqeConfig& cfg, const NoiseModel& noise) {
  cfg.validate();
  noise.validate();
  const CounterRng root(cfg.seed);
  CounterRng seq_rng = root.split(0);
  VqeResult out;
  for (std::size_t c = 0; c < cfg.n_c; ++c) {
    const CZSequence seq = random_sequence(map, cfg.n_cz, seq_rng);
    const CostModel model = factory(seq);
    out.pool.push_back(optimize_sequence(model, seq, cfg, noise, root.split(1).split(c)));
    if (out.pool[c].best().value.value < out.pool[out.best_sequence].best().value.value) {
      out.best_sequence = c;
    }
  }
  return out;
}

std::string theta_to_json(std::span<const double> theta) {
  return nlohmann::json(std::vector<double>(theta.begin(), theta.end())).dump();
}

std::vector<double> theta_from_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text).get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("theta", e.what());
  }
}

}  // namespace hvqe
