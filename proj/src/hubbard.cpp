#include "hubbard_vqe/hubbard.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace hvqe {
namespace {

int half_filling_parity(std::size_t n_sites) { return (n_sites / 2) % 2 == 0 ? 1 : -1; }

// Rotation eigenvalue of momentum orbital m.
complex_t root_of_unity(std::size_t n, std::size_t m) {
  const double phi = 2.0 * std::numbers::pi * static_cast<double>(m % n) / static_cast<double>(n);
  complex_t v{std::cos(phi), std::sin(phi)};
  if (std::abs(v.real()) < 1e-15) v.real(0.0);
  if (std::abs(v.imag()) < 1e-15) v.imag(0.0);
  return v;
}

PauliString z_string(std::size_t n_qubits, const std::vector<std::size_t>& qubits) {
  std::uint64_t z = 0;
  for (auto q : qubits) z |= std::uint64_t{1} << q;
  return PauliString(n_qubits, 0, z);
}

std::vector<complex_t> apply_to(const PauliSum& op, const Statevector& psi) {
  return op.apply(psi.amplitudes());
}

}  // namespace

void HubbardParams::validate() const {
  if (n_sites != 4 && n_sites != 6) {
    throw DomainError("n_sites must be 4 or 6, got " + std::to_string(n_sites));
  }
  if (!std::isfinite(t) || !std::isfinite(t_prime) || !std::isfinite(u)) {
    throw DomainError("Hubbard parameters must be finite");
  }
}

FermionOperator build_hamiltonian(const HubbardParams& p) {
  p.validate();
  const std::size_t n = p.n_sites;
  FermionOperator h(2 * n);
  for (std::size_t s = 0; s < 2; ++s) {
    const auto spin = static_cast<Spin>(s);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t here = mode_index(n, j, spin);
      for (const auto& [dist, amp] : {std::pair{std::size_t{1}, p.t}, {std::size_t{2}, p.t_prime}}) {
        if (amp == 0.0) continue;
        const std::size_t there = mode_index(n, (j + dist) % n, spin);
        h.add_term(-amp, {{here, true}, {there, false}});
        h.add_term(-amp, {{there, true}, {here, false}});
      }
    }
  }
  if (p.u != 0.0) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t up = mode_index(n, j, Spin::up);
      const std::size_t dn = mode_index(n, j, Spin::down);
      h.add_term(p.u, {{up, true}, {up, false}, {dn, true}, {dn, false}});
    }
  }
  return h.simplified();
}

FermionOperator number_operator(std::size_t n_sites) {
  FermionOperator n(2 * n_sites);
  for (std::size_t m = 0; m < 2 * n_sites; ++m) n += FermionOperator::number(2 * n_sites, m);
  return n;
}

// ---------------------------------------------------------------------------
// Irreps and sectors

std::string to_string(Irrep irrep) {
  switch (irrep) {
    case Irrep::A1: return "A1";
    case Irrep::A2: return "A2";
    case Irrep::B1: return "B1";
    case Irrep::B2: return "B2";
    case Irrep::E: return "E";
  }
  return "?";
}

Irrep parse_irrep(const std::string& name) {
  for (Irrep r : {Irrep::A1, Irrep::A2, Irrep::B1, Irrep::B2, Irrep::E}) {
    if (to_string(r) == name) return r;
  }
  throw DomainError("unknown irrep '" + name + "' (expected A1, A2, B1, B2 or E)");
}

SectorLabel SectorLabel::for_irrep(Irrep irrep, std::size_t n_sites) {
  if (n_sites != 4 && n_sites != 6) throw DomainError("unsupported ring size");
  SectorLabel s;
  s.irrep = irrep;
  s.s_p_up = s.s_p_down = half_filling_parity(n_sites);
  const int minus_one_c2 = half_filling_parity(n_sites);  // (-1)^{n/2}
  switch (irrep) {
    case Irrep::A1: s.s_c2 = 1; s.s_m = 1; s.lambda = 1.0; break;
    case Irrep::A2: s.s_c2 = 1; s.s_m = -1; s.lambda = 1.0; break;
    case Irrep::B1: s.s_c2 = minus_one_c2; s.s_m = -1; s.lambda = -1.0; break;
    case Irrep::B2: s.s_c2 = minus_one_c2; s.s_m = 1; s.lambda = -1.0; break;
    case Irrep::E: s.s_c2 = -1; s.s_m = 1; break;
  }
  return s;
}

std::string SectorLabel::to_string() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s(C2=%+d,M=%+d,Pu=%+d,Pd=%+d)", hvqe::to_string(irrep).c_str(),
                s_c2, s_m, s_p_up, s_p_down);
  return buf;
}

// ---------------------------------------------------------------------------
// Symmetries

PauliString SymmetryOperators::a() const { return multiply(c2, p_up).product; }
PauliString SymmetryOperators::b() const { return multiply(c2, mirror).product; }

std::vector<PauliString> SymmetryOperators::tapering_generators() const {
  return {a(), b(), mirror, p_down};
}

std::vector<int> SymmetryOperators::tapering_eigenvalues(const SectorLabel& s) {
  return {s.s_a(), s.s_b(), s.s_m, s.s_p_down};
}

SymmetryOperators build_symmetries(std::size_t n_sites, const ModeOrdering& ordering) {
  if (ordering.basis() != Basis::symmetry) {
    throw NumericalError("symmetries are diagonal only in the symmetry eigenbasis, got " +
                         to_string(ordering.basis()));
  }
  if (ordering.n_sites() != n_sites) throw DimensionError("ordering built for another ring size");
  const std::size_t nq = 2 * n_sites;
  const std::size_t half = n_sites / 2;

  SymmetryOperators sym;
  sym.n_sites = n_sites;

  std::vector<std::size_t> c2, mirror, up, down;
  for (std::size_t s = 0; s < 2; ++s) {
    const auto spin = static_cast<Spin>(s);
    for (std::size_t orb = 0; orb < n_sites; ++orb) {
      const std::size_t q = ordering.qubit(orb, spin);
      (spin == Spin::up ? up : down).push_back(q);
      if (orb == 1 && half % 2 == 1) c2.push_back(q);
      if (orb >= 2 && (orb / 2) % 2 == 1) c2.push_back(q);
      if (orb >= 2 && orb % 2 == 1) mirror.push_back(q);
    }
  }
  sym.c2 = z_string(nq, c2);
  sym.mirror = z_string(nq, mirror);
  sym.p_up = z_string(nq, up);
  sym.p_down = z_string(nq, down);

  // C_n = prod_m lambda_m^{n_m}, assembled per spin and per conjugate pair in
  // the momentum basis, then carried into the ordering's basis.
  const BasisChange to_symmetry = symmetry_eigenbasis(n_sites);
  PauliSum rotation = PauliSum::identity(nq);
  for (std::size_t s = 0; s < 2; ++s) {
    const auto spin = static_cast<Spin>(s);
    const std::size_t nm = 2 * n_sites;
    auto factor = [&](std::size_t m) {
      FermionOperator f = FermionOperator::identity(nm);
      f += FermionOperator::number(nm, mode_index(n_sites, m, spin)) * (root_of_unity(n_sites, m) - 1.0);
      return f;
    };
    std::vector<FermionOperator> groups;
    groups.push_back(factor(half));
    for (std::size_t p = 1; p < half; ++p) groups.push_back(factor(p) * factor(n_sites - p));
    for (const auto& g : groups) {
      rotation = sum_product(rotation, jordan_wigner(to_symmetry.apply(g.simplified()), ordering));
    }
  }
  sym.rotation = rotation;
  sym.rotation_real = (rotation + rotation.adjoint()) * complex_t{0.5};

  // Each Z2 symmetry must equal its fermionic definition prod (1 - 2 n_k).
  auto check = [&](const PauliString& z, const std::vector<std::size_t>& qubits, const char* name) {
    PauliSum product = PauliSum::identity(nq);
    for (auto q : qubits) {
      FermionOperator f = FermionOperator::identity(nq);
      f += FermionOperator::number(nq, ordering.mode_at(q)) * complex_t{-2.0};
      product = sum_product(product, jordan_wigner(f, ordering));
    }
    if (product.size() != 1 || !(product.terms()[0].string == z) ||
        std::abs(product.terms()[0].coeff - 1.0) > 1e-12) {
      throw NumericalError(std::string("symmetry ") + name + " is not a single diagonal string");
    }
  };
  check(sym.c2, c2, "C2");
  check(sym.mirror, mirror, "M");
  check(sym.p_up, up, "P_up");
  check(sym.p_down, down, "P_down");
  return sym;
}

MappedModel map_model(const HubbardParams& p, const ModeOrdering& ordering) {
  p.validate();
  if (ordering.n_sites() != p.n_sites) throw DimensionError("ordering built for another ring size");
  FermionOperator h = build_hamiltonian(p);
  FermionOperator n = number_operator(p.n_sites);
  switch (ordering.basis()) {
    case Basis::site: break;
    case Basis::momentum:
      h = momentum_basis(p.n_sites).apply(h);
      break;
    case Basis::symmetry:
      h = momentum_basis(p.n_sites).then(symmetry_eigenbasis(p.n_sites)).apply(h);
      break;
  }
  // N keeps its form under any unitary single-particle rotation.
  return {p, ordering, jordan_wigner(h, ordering).hermitian_part_checked(),
          jordan_wigner(n, ordering).hermitian_part_checked()};
}

// ---------------------------------------------------------------------------
// Exact diagonalization

bool BasisFilter::accepts(std::uint64_t b) const {
  for (const auto& [z, sign] : parities) {
    if (diagonal_value(z, b) != static_cast<double>(sign)) return false;
  }
  if (diagonal) {
    if (std::abs(diagonal->first.diagonal_value(b) - diagonal->second) > 1e-9) return false;
  }
  return true;
}

BasisFilter BasisFilter::for_sector(const SymmetryOperators& sym, const PauliSum& number,
                                    const SectorLabel& s) {
  BasisFilter f = for_filling(number, static_cast<double>(sym.n_sites));
  f.parities = {{sym.c2, s.s_c2}, {sym.mirror, s.s_m}, {sym.p_up, s.s_p_up}, {sym.p_down, s.s_p_down}};
  return f;
}

BasisFilter BasisFilter::for_filling(const PauliSum& number, double n_particles) {
  if (!number.is_diagonal()) throw DomainError("filling filter needs a diagonal number operator");
  BasisFilter f;
  f.diagonal = std::make_pair(number, n_particles);
  return f;
}

Statevector Spectrum::state(std::size_t level) const {
  if (level >= size()) throw DomainError("spectrum level out of range");
  std::vector<complex_t> amps(std::size_t{1} << n_qubits, complex_t{0.0, 0.0});
  for (std::size_t i = 0; i < basis.size(); ++i) {
    amps[basis[i]] = vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(level));
  }
  return Statevector::normalized(std::move(amps));
}

Spectrum exact_diagonalize(const PauliSum& h, const BasisFilter& filter) {
  const std::size_t n = h.n_qubits();
  if (n > 12) throw DimensionError("exact diagonalization limited to 12 qubits");
  if (!h.is_hermitian()) throw DomainError("exact diagonalization needs a Hermitian operator");
  const std::size_t dim = std::size_t{1} << n;

  Spectrum out;
  out.n_qubits = n;
  std::vector<std::int64_t> position(dim, -1);
  for (std::uint64_t b = 0; b < dim; ++b) {
    if (filter.accepts(b)) {
      position[b] = static_cast<std::int64_t>(out.basis.size());
      out.basis.push_back(b);
    }
  }
  if (out.basis.empty()) throw DomainError("basis filter accepts no states");

  const auto k = static_cast<Eigen::Index>(out.basis.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(k, k);
  std::vector<complex_t> column(dim);
  std::vector<std::uint64_t> touched;
  for (Eigen::Index c = 0; c < k; ++c) {
    const std::uint64_t b = out.basis[static_cast<std::size_t>(c)];
    touched.clear();
    for (const auto& term : h.terms()) {
      const auto& s = term.string;
      const int y_count = std::popcount(s.x_bits() & s.z_bits());
      const int z_sign = std::popcount(s.z_bits() & b) & 1;
      // i^{y_count} * (-1)^{z_sign}
      static constexpr complex_t kI[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
      const complex_t phase = kI[(y_count + 2 * z_sign) & 3];
      const std::uint64_t target = b ^ s.x_bits();
      if (column[target] == complex_t{0.0, 0.0}) touched.push_back(target);
      column[target] += term.coeff * phase;
    }
    double leaked = 0.0;
    for (auto target : touched) {
      const complex_t v = column[target];
      column[target] = 0.0;
      if (position[target] < 0) {
        leaked += std::norm(v);
      } else {
        m(position[target], c) += v;
      }
    }
    if (leaked > 1e-18) {
      throw DomainError("operator couples filtered states to rejected states");
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  out.energies = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  return out;
}

// ---------------------------------------------------------------------------
// Classification

ClassificationError::ClassificationError(const std::string& what,
                                         std::vector<std::pair<std::string, double>> values)
    : Error([&] {
        std::string msg = what + " [";
        for (std::size_t i = 0; i < values.size(); ++i) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "%s%s=%.6g", i ? ", " : "", values[i].first.c_str(),
                        values[i].second);
          msg += buf;
        }
        return msg + "]";
      }()),
      measured_(std::move(values)) {}

SectorLabel classify_state(const Statevector& psi, const SymmetryOperators& sym, double tol) {
  std::vector<std::pair<std::string, double>> measured;
  auto z_value = [&](const PauliString& z, const char* name) {
    const double v = real_expectation(PauliSum(z), psi);
    measured.emplace_back(name, v);
    return v;
  };
  const double c2 = z_value(sym.c2, "C2");
  const double m = z_value(sym.mirror, "M");
  const double pu = z_value(sym.p_up, "P_up");
  const double pd = z_value(sym.p_down, "P_down");

  const std::vector<complex_t> r_psi = apply_to(sym.rotation_real, psi);
  double r = 0.0, r2 = 0.0;
  for (std::size_t i = 0; i < r_psi.size(); ++i) {
    r += (std::conj(psi[i]) * r_psi[i]).real();
    r2 += std::norm(r_psi[i]);
  }
  measured.emplace_back("Re(C_n)", r);
  measured.emplace_back("Var(Re(C_n))", r2 - r * r);
  const complex_t rot = expectation(sym.rotation, psi);
  measured.emplace_back("|C_n|", std::abs(rot));

  for (double v : {c2, m, pu, pd}) {
    if (std::abs(std::abs(v) - 1.0) > tol) {
      throw ClassificationError("state is not a Z2 symmetry eigenstate", measured);
    }
  }
  if (r2 - r * r > tol) {
    throw ClassificationError("state is not an eigenstate of the rotation class", measured);
  }

  SectorLabel label;
  label.s_c2 = c2 > 0 ? 1 : -1;
  label.s_m = m > 0 ? 1 : -1;
  label.s_p_up = pu > 0 ? 1 : -1;
  label.s_p_down = pd > 0 ? 1 : -1;
  if (std::abs(r - 1.0) <= tol) {
    label.irrep = label.s_m > 0 ? Irrep::A1 : Irrep::A2;
    label.lambda = 1.0;
  } else if (std::abs(r + 1.0) <= tol) {
    label.irrep = label.s_m > 0 ? Irrep::B2 : Irrep::B1;
    label.lambda = -1.0;
  } else {
    label.irrep = Irrep::E;
    if (std::abs(std::abs(rot) - 1.0) <= tol) {
      // Snap to the nearest n-th root of unity.
      const double n = static_cast<double>(sym.n_sites);
      const double k = std::round(std::arg(rot) * n / (2.0 * std::numbers::pi));
      label.lambda = root_of_unity(sym.n_sites,
                                   static_cast<std::size_t>(std::fmod(k + n, n)));
    }
  }
  return label;
}

std::vector<ClassifiedState> resolve_degeneracies(const Spectrum& spectrum,
                                                  const SymmetryOperators& sym,
                                                  std::size_t max_levels, double tol) {
  const std::size_t limit = std::min(max_levels, spectrum.size());
  // A weighted sum of commuting symmetries separates every label combination:
  // each weight exceeds the total spread of the lighter ones.
  const PauliSum probe = sym.rotation_real + PauliSum(sym.mirror, 5.0) + PauliSum(sym.c2, 17.0) +
                         PauliSum(sym.p_up, 53.0) + PauliSum(sym.p_down, 161.0);
  std::vector<ClassifiedState> out;
  std::size_t i = 0;
  while (i < limit) {
    std::size_t j = i + 1;
    while (j < spectrum.size() && std::abs(spectrum.energies[static_cast<Eigen::Index>(j)] -
                                           spectrum.energies[static_cast<Eigen::Index>(i)]) < tol) {
      ++j;
    }
    std::vector<Statevector> block;
    for (std::size_t l = i; l < j; ++l) block.push_back(spectrum.state(l));
    if (block.size() > 1) {
      const auto d = static_cast<Eigen::Index>(block.size());
      Eigen::MatrixXcd pm(d, d);
      std::vector<std::vector<complex_t>> images;
      for (const auto& v : block) images.push_back(apply_to(probe, v));
      for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
          complex_t s = 0.0;
          const auto& va = block[static_cast<std::size_t>(a)];
          const auto& img = images[static_cast<std::size_t>(b)];
          for (std::size_t x = 0; x < img.size(); ++x) s += std::conj(va[x]) * img[x];
          pm(a, b) = s;
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(pm);
      std::vector<Statevector> rotated;
      for (Eigen::Index c = 0; c < d; ++c) {
        std::vector<complex_t> amps(block[0].dimension(), complex_t{0.0, 0.0});
        for (Eigen::Index a = 0; a < d; ++a) {
          const complex_t w = solver.eigenvectors()(a, c);
          const auto& va = block[static_cast<std::size_t>(a)];
          for (std::size_t x = 0; x < amps.size(); ++x) amps[x] += w * va[x];
        }
        rotated.push_back(Statevector::normalized(std::move(amps)));
      }
      block = std::move(rotated);
    }
    for (auto& v : block) {
      const double e = spectrum.energies[static_cast<Eigen::Index>(i)];
      SectorLabel label = classify_state(v, sym);
      out.push_back({e, std::move(v), label});
    }
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Oracle

ModelOracle::ModelOracle(const HubbardParams& p)
    : model_(map_model(p, ModeOrdering::tapering_friendly(p.n_sites))),
      sym_(build_symmetries(p.n_sites, model_.ordering)) {}

Spectrum ModelOracle::sector_spectrum(const SectorLabel& sector) const {
  return exact_diagonalize(model_.hamiltonian, BasisFilter::for_sector(sym_, model_.number, sector));
}

double ModelOracle::sector_ground_energy(const SectorLabel& sector) const {
  return sector_spectrum(sector).energies[0];
}

double ModelOracle::irrep_ground_energy(Irrep irrep) const {
  const Spectrum s = sector_spectrum(SectorLabel::for_irrep(irrep, params().n_sites));
  for (const auto& c : resolve_degeneracies(s, sym_, 64)) {
    if (c.label.irrep == irrep) return c.energy;
  }
  throw NumericalError("no " + to_string(irrep) + " state among the lowest sector levels");
}

ClassifiedState ModelOracle::ground_state() const {
  const Spectrum s = exact_diagonalize(
      model_.hamiltonian,
      BasisFilter::for_filling(model_.number, static_cast<double>(params().n_sites)));
  return resolve_degeneracies(s, sym_, 1).front();
}

double find_transition(const HubbardParams& base, Irrep first, Irrep second, double lo, double hi,
                       double tol) {
  if (!(lo < hi) || tol <= 0.0) throw DomainError("invalid bisection bracket");
  auto gap = [&](double tp) {
    HubbardParams p = base;
    p.t_prime = tp * base.t;
    const ModelOracle oracle(p);
    return oracle.irrep_ground_energy(first) - oracle.irrep_ground_energy(second);
  };
  double g_lo = gap(lo);
  const double g_hi = gap(hi);
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if ((g_lo > 0) == (g_hi > 0)) {
    throw DomainError("energy difference does not change sign on the bracket");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double g = gap(mid);
    if (g == 0.0) return mid;
    if ((g > 0) == (g_lo > 0)) {
      lo = mid;
      g_lo = g;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void write_spectrum_csv(std::ostream& out, const std::vector<SpectrumRow>& rows) {
  out << "t_prime_over_t,sector,level_index,energy\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6g,%s,%zu,%.12g\n", r.t_prime_over_t, r.sector.c_str(),
                  r.level_index, r.energy);
    out << buf;
  }
}

}  // namespace hvqe
