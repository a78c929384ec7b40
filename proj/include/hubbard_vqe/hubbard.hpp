#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hubbard_vqe/fermion.hpp"
#include "hubbard_vqe/pauli.hpp"
#include "hubbard_vqe/statevector.hpp"

namespace hvqe {

/// Parameters of the Hubbard ring; energies in units of t.
struct HubbardParams {
  std::size_t n_sites = 4;
  double t = 1.0;
  double t_prime = 0.0;
  double u = 0.5;

  /// Throws DomainError for unsupported sizes or non-finite values.
  void validate() const;
};

/// H = -t sum c+_j c_{j+1} - t' sum c+_j c_{j+2} + h.c. + U sum n_{j,up} n_{j,dn}
/// in the site basis, periodic in j.
FermionOperator build_hamiltonian(const HubbardParams& p);

/// Total particle number in any basis (it is basis independent).
FermionOperator number_operator(std::size_t n_sites);

enum class Irrep : std::uint8_t { A1, A2, B1, B2, E };

std::string to_string(Irrep irrep);
/// Accepts "A1", "A2", "B1", "B2", "E". Throws DomainError otherwise.
Irrep parse_irrep(const std::string& name);

/// Eigenvalues of the commuting Z2 symmetries that fix a tapering sector.
struct SectorLabel {
  Irrep irrep = Irrep::A1;
  int s_c2 = 1;
  int s_m = 1;
  int s_p_up = 1;
  int s_p_down = 1;
  std::optional<complex_t> lambda;  // rotation eigenvalue when known

  /// Recombined eigenvalues used by the tapering generators.
  int s_a() const { return s_c2 * s_p_up; }
  int s_b() const { return s_c2 * s_m; }

  /// Half-filling sector hosting `irrep`. For irreps with complex rotation
  /// eigenvalues the mirror-even member is chosen; E on six sites uses the
  /// pair lambda = exp(+-2 pi i / 6), whose C2 eigenvalue is -1.
  static SectorLabel for_irrep(Irrep irrep, std::size_t n_sites);

  std::string to_string() const;
};

/// Symmetry operators in the symmetry eigenbasis after Jordan-Wigner.
struct SymmetryOperators {
  std::size_t n_sites = 0;
  PauliSum rotation;       // C_n, the elementary ring rotation
  PauliSum rotation_real;  // (C_n + C_n^dagger) / 2, commutes with the mirror
  PauliString c2;
  PauliString mirror;
  PauliString p_up;
  PauliString p_down;

  PauliString a() const;  // C2 P_up
  PauliString b() const;  // C2 M

  /// Generators in the order the tapering plan designates them: A, B, M, P_down.
  std::vector<PauliString> tapering_generators() const;
  /// Eigenvalues matching tapering_generators() for `sector`.
  static std::vector<int> tapering_eigenvalues(const SectorLabel& sector);
};

/// Builds the symmetries for a symmetry-basis ordering. Throws NumericalError
/// if any Z2 symmetry fails to come out as a single diagonal string.
SymmetryOperators build_symmetries(std::size_t n_sites, const ModeOrdering& ordering);

/// Mapped operators of one model instance.
struct MappedModel {
  HubbardParams params;
  ModeOrdering ordering;
  PauliSum hamiltonian;
  PauliSum number;
};

/// Basis change into `ordering.basis()` followed by Jordan-Wigner.
MappedModel map_model(const HubbardParams& p, const ModeOrdering& ordering);

/// Selects computational basis states by diagonal constraints.
struct BasisFilter {
  std::vector<std::pair<PauliString, int>> parities;  // Z-string and required sign
  std::optional<std::pair<PauliSum, double>> diagonal;  // diagonal operator and value

  bool accepts(std::uint64_t basis_index) const;

  static BasisFilter none() { return {}; }
  /// Half filling plus the sector's C2, M, P_up, P_down eigenvalues.
  static BasisFilter for_sector(const SymmetryOperators& sym, const PauliSum& number,
                                const SectorLabel& sector);
  /// Fixed particle number only.
  static BasisFilter for_filling(const PauliSum& number, double n_particles);
};

/// Eigen-decomposition restricted to the basis states accepted by a filter.
struct Spectrum {
  std::size_t n_qubits = 0;
  std::vector<std::uint64_t> basis;  // accepted basis indices
  Eigen::VectorXd energies;          // ascending
  Eigen::MatrixXcd vectors;          // columns over `basis`

  std::size_t size() const { return static_cast<std::size_t>(energies.size()); }
  /// Eigenvector `level` embedded in the full register.
  Statevector state(std::size_t level) const;
};

/// Dense Hermitian diagonalization of h on the filtered subspace. Throws
/// DimensionError above 12 qubits and DomainError if the filter is empty or
/// h couples accepted and rejected states.
Spectrum exact_diagonalize(const PauliSum& h, const BasisFilter& filter = BasisFilter::none());

/// A simultaneous eigenstate of the model symmetries.
struct ClassifiedState {
  double energy = 0.0;
  Statevector state;
  SectorLabel label;
};

/// Within every degenerate level (energies closer than `tol`) rotates the
/// eigenvectors so they diagonalize rotation_real, then classifies each.
/// Eigenvectors from the lowest up to index `max_levels` are processed; a
/// degenerate level reaching past that index is still processed in full.
std::vector<ClassifiedState> resolve_degeneracies(const Spectrum& spectrum,
                                                  const SymmetryOperators& sym,
                                                  std::size_t max_levels, double tol = 1e-8);

/// Raised when a state is not a simultaneous symmetry eigenstate.
class ClassificationError : public Error {
 public:
  ClassificationError(const std::string& what, std::vector<std::pair<std::string, double>> values);
  const std::vector<std::pair<std::string, double>>& measured() const { return measured_; }

 private:
  std::vector<std::pair<std::string, double>> measured_;
};

/// Eigenvalue tuple and irrep label of a symmetry eigenstate.
SectorLabel classify_state(const Statevector& psi, const SymmetryOperators& sym,
                           double tol = 1e-6);

/// Everything needed for sector-resolved exact energies of one parameter set.
class ModelOracle {
 public:
  explicit ModelOracle(const HubbardParams& p);

  const HubbardParams& params() const { return model_.params; }
  const MappedModel& model() const { return model_; }
  const SymmetryOperators& symmetries() const { return sym_; }

  /// Spectrum at half filling in the Z2 sector of `sector`.
  Spectrum sector_spectrum(const SectorLabel& sector) const;
  /// Lowest half-filling energy in the Z2 sector (what a tapered VQE targets).
  double sector_ground_energy(const SectorLabel& sector) const;
  /// Lowest energy of a state transforming as `irrep`; NumericalError if the
  /// sector has none among its lowest levels.
  double irrep_ground_energy(Irrep irrep) const;
  /// Lowest half-filling state overall, classified.
  ClassifiedState ground_state() const;

 private:
  MappedModel model_;
  SymmetryOperators sym_;
};

/// Bisection on the sign of E(first) - E(second) over t'/t in [lo, hi].
/// Throws DomainError if the difference does not change sign on the bracket.
double find_transition(const HubbardParams& base, Irrep first, Irrep second, double lo,
                       double hi, double tol = 1e-4);

struct SpectrumRow {
  double t_prime_over_t;
  std::string sector;
  std::size_t level_index;
  double energy;
};

/// CSV with header `t_prime_over_t,sector,level_index,energy`.
void write_spectrum_csv(std::ostream& out, const std::vector<SpectrumRow>& rows);

}  // namespace hvqe
