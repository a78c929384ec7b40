#pragma once

#include <span>
#include <string>
#include <vector>

#include "hubbard_vqe/pauli.hpp"
#include "hubbard_vqe/rng.hpp"
#include "hubbard_vqe/simulator.hpp"

namespace hvqe {

/// Estimates of <H>, <H^2>, <H^3>.
struct MomentEstimates {
  EnergyEstimate m1, m2, m3;
};

/// H with its square and cube, built once per Hamiltonian.
struct MomentOperators {
  static constexpr std::size_t kMaxTerms = 1'000'000;

  PauliSum h, h2, h3;

  /// Throws NumericalError if H^3 would exceed kMaxTerms terms.
  static MomentOperators build(const PauliSum& h);
};

/// Each moment measured from its own shot batches; shots = 0 gives exact
/// moments with zero sigma.
MomentEstimates measure_moments(std::span<const Gate> state_prep, const Statevector& initial,
                                const MomentOperators& ops, std::size_t shots,
                                const NoiseModel& noise, CounterRng& rng);

/// Exact moments of a given state.
MomentEstimates exact_moments(const Statevector& psi, const MomentOperators& ops);

struct LanczosResult {
  EnergyEstimate energy;
  bool degenerate = false;  // variance too small: raw <H> returned
};

/// Lower eigenvalue of [[m1, sqrt v], [sqrt v, alpha2]] with v = m2 - m1^2 and
/// alpha2 = (m3 - 2 m1 m2 + m1^3) / v. Falls back to (m1, sigma1) when
/// v < max(2 sigma2, 1e-10 max(1, |m2|)). Sigma by first-order propagation
/// with a central-difference Jacobian (relative step 1e-6).
LanczosResult lanczos_estimate(const MomentEstimates& m);

/// The bare map (m1, m2, m3) -> E_L, without fallback.
double lanczos_energy(double m1, double m2, double m3);

struct WeightedAverage {
  EnergyEstimate estimate;
  bool exact_entry = false;  // a zero-sigma entry took infinite weight
};

/// Inverse-variance weighted mean with sigma = (sum sigma_l^-2)^(-1/2).
/// Zero-sigma entries take infinite weight: their plain mean is returned with
/// sigma 0 and the flag set. Throws DomainError on an empty list.
WeightedAverage weighted_average(std::span<const EnergyEstimate> xs);

struct ParityConstraint {
  PauliString z;  // Z/I string
  int eigenvalue;
};

struct PostselectResult {
  ShotCounts counts;
  double retained_fraction = 0.0;
};

class PostselectionError : public Error {
 public:
  explicit PostselectionError(double retained)
      : Error("post-selection retained no shots"), retained_(retained) {}
  double retained_fraction() const { return retained_; }

 private:
  double retained_;
};

/// Drops outcomes whose parity on any constraint disagrees with its eigenvalue.
PostselectResult symmetry_postselect(const ShotCounts& counts,
                                     std::span<const ParityConstraint> known);

/// JSON report of one mitigated measurement.
struct MitigationReport {
  EnergyEstimate raw;
  MomentEstimates moments;
  LanczosResult lanczos;
  double retained_fraction = 1.0;
  std::vector<std::string> flags;

  std::string to_json() const;
};

}  // namespace hvqe
