#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hubbard_vqe/hubbard.hpp"
#include "oracles.hpp"

using namespace hvqe;
using oracle::Mat;

namespace {

MappedModel mapped(double t, double t_prime, double u, std::size_t n = 4) {
  return map_model(HubbardParams{n, t, t_prime, u}, ModeOrdering::tapering_friendly(n));
}

Spectrum at_filling(const MappedModel& m, double n_particles) {
  return exact_diagonalize(m.hamiltonian, BasisFilter::for_filling(m.number, n_particles));
}

double variance(const PauliSum& h, const Statevector& psi) {
  const double e = real_expectation(h, psi);
  return real_expectation(sum_product(h, h), psi) - e * e;
}

/// Product of momentum-basis creation operators applied to the vacuum,
/// expressed in the tapering-friendly symmetry basis.
/// Each entry lists (momentum orbital m, spin) pairs in the written order.
Statevector momentum_slater_sum(const std::vector<std::pair<double, std::vector<std::pair<std::size_t, Spin>>>>& terms) {
  FermionOperator op(8);
  for (const auto& [coeff, factors] : terms) {
    std::vector<LadderOp> ops;
    for (const auto& [m, s] : factors) ops.push_back({mode_index(4, m, s), true});
    op.add_term(coeff, ops);
  }
  const auto in_symmetry_basis = symmetry_eigenbasis(4).apply(op);
  const auto image = jordan_wigner(in_symmetry_basis, ModeOrdering::tapering_friendly(4));
  const Statevector vacuum(8);
  return Statevector::normalized(image.apply(vacuum.amplitudes()));
}

}  // namespace

TEST(HubbardParams, ValidationRejectsUnsupportedInput) {
  EXPECT_NO_THROW((HubbardParams{4, 1.0, 0.3, 0.5}.validate()));
  EXPECT_NO_THROW((HubbardParams{6, 1.0, 0.3, 1.5}.validate()));
  EXPECT_THROW((HubbardParams{5, 1.0, 0.3, 0.5}.validate()), DomainError);
  EXPECT_THROW((HubbardParams{4, std::nan(""), 0.3, 0.5}.validate()), DomainError);
  EXPECT_THROW((HubbardParams{4, 1.0, INFINITY, 0.5}.validate()), DomainError);
}

TEST(Irrep, ParsingAndPrinting) {
  for (Irrep ir : {Irrep::A1, Irrep::A2, Irrep::B1, Irrep::B2, Irrep::E}) {
    EXPECT_EQ(parse_irrep(to_string(ir)), ir);
  }
  EXPECT_THROW(parse_irrep("A3"), DomainError);
}

TEST(SectorLabel, EigenvaluesMatchIrrep) {
  const auto a1 = SectorLabel::for_irrep(Irrep::A1, 4);
  EXPECT_EQ(a1.s_c2, 1);
  EXPECT_EQ(a1.s_m, 1);
  const auto b1 = SectorLabel::for_irrep(Irrep::B1, 4);
  EXPECT_EQ(b1.s_c2, 1);  // lambda = -1 squares to +1
  EXPECT_EQ(b1.s_m, -1);
  const auto e = SectorLabel::for_irrep(Irrep::E, 4);
  EXPECT_EQ(e.s_c2, -1);  // lambda = +-i squares to -1
  EXPECT_EQ(e.s_a(), e.s_c2 * e.s_p_up);
  EXPECT_EQ(e.s_b(), e.s_c2 * e.s_m);
}

TEST(Hamiltonian, HermitianAndNumberConserving) {
  const auto m = mapped(1.0, 0.3, 0.5);
  EXPECT_TRUE(m.hamiltonian.is_hermitian());
  const Mat h = oracle::dense(m.hamiltonian), n = oracle::dense(m.number);
  EXPECT_LT((h - h.adjoint()).norm(), 1e-12);
  EXPECT_LT((h * n - n * h).norm(), 1e-10);
}

TEST(Hamiltonian, RingIsPeriodic) {
  // One spin-up particle in the site basis: basis index 1 << j puts it on site j.
  const auto h = oracle::dense(jordan_wigner(build_hamiltonian(HubbardParams{4, 1.0, 0.25, 0.0}),
                                             ModeOrdering::natural(Basis::site, 4)));
  EXPECT_NEAR(h(1 << 0, 1 << 1).real(), -1.0, 1e-12);
  EXPECT_NEAR(h(1 << 0, 1 << 3).real(), -1.0, 1e-12);  // wraps around
  // On four sites j -> j+2 and j+2 -> j+4 link the same pair twice.
  EXPECT_NEAR(h(1 << 0, 1 << 2).real(), -0.5, 1e-12);
}

TEST(Hamiltonian, DegenerateHalfFillingWithoutNextNearestHopping) {
  const auto s = at_filling(mapped(1.0, 0.0, 0.0), 4.0);
  EXPECT_LT(s.energies(1) - s.energies(0), 1e-9);
}

TEST(Hamiltonian, NonDegenerateHalfFillingWithLargeNextNearestHopping) {
  const auto s = at_filling(mapped(1.0, 1.0, 0.0), 4.0);
  EXPECT_GT(s.energies(1) - s.energies(0), 1e-3);
}

TEST(Hamiltonian, PureInteractionCostsOnlyDoubleOccupancy) {
  const auto m = mapped(0.0, 0.0, 1.0);
  for (int n = 0; n <= 8; ++n) {
    const auto s = at_filling(m, n);
    EXPECT_NEAR(s.energies(0), std::max(0, n - 4), 1e-12) << n;
  }
}

TEST(Hamiltonian, FreeSpectrumIsAllFillingsOfSingleParticleLevels) {
  for (double tp : {0.0, 0.3, 0.8}) {
    // Single-particle hopping matrix of one spin species, built directly.
    Eigen::Matrix4d k = Eigen::Matrix4d::Zero();
    for (int j = 0; j < 4; ++j) {
      k(j, (j + 1) % 4) -= 1.0;
      k((j + 1) % 4, j) -= 1.0;
      k(j, (j + 2) % 4) -= tp;
      k((j + 2) % 4, j) -= tp;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(k);
    std::vector<double> eps;
    for (int s = 0; s < 2; ++s)
      for (int i = 0; i < 4; ++i) eps.push_back(es.eigenvalues()(i));
    std::vector<double> expected;
    for (unsigned occ = 0; occ < 256; ++occ) {
      double e = 0;
      for (int b = 0; b < 8; ++b)
        if (occ >> b & 1) e += eps[b];
      expected.push_back(e);
    }
    std::sort(expected.begin(), expected.end());
    const auto s = exact_diagonalize(mapped(1.0, tp, 0.0).hamiltonian);
    ASSERT_EQ(s.size(), 256u);
    for (std::size_t i = 0; i < 256; ++i) EXPECT_NEAR(s.energies(i), expected[i], 1e-10);
  }
}

TEST(Hamiltonian, SlaterGroundStateHasZeroVarianceAtLargeNextNearestHopping) {
  // At U = 0 and t'/t > 1/2 the lowest orbitals per spin are lambda = +1 and
  // lambda = -1, which are symmetry orbitals 0 and 1.
  const double tp = 0.8;
  const auto m = mapped(1.0, tp, 0.0);
  std::uint64_t idx = 0;
  for (Spin s : {Spin::up, Spin::down})
    for (std::size_t orb : {0u, 1u}) idx |= std::uint64_t{1} << m.ordering.qubit(orb, s);
  const auto psi = Statevector::basis_state(8, idx);
  EXPECT_NEAR(variance(m.hamiltonian, psi), 0.0, 1e-10);
  EXPECT_NEAR(real_expectation(m.hamiltonian, psi), 2 * ((-2 - 2 * tp) + (2 - 2 * tp)), 1e-10);
  EXPECT_NEAR(real_expectation(m.hamiltonian, psi), at_filling(m, 4).energies(0), 1e-10);
}

TEST(Symmetries, AllCommuteWithHamiltonian) {
  const auto m = mapped(1.0, 0.3, 0.5);
  const auto sym = build_symmetries(4, m.ordering);
  const Mat h = oracle::dense(m.hamiltonian);
  std::vector<Mat> ops{oracle::dense(sym.rotation), oracle::dense(sym.c2), oracle::dense(sym.mirror),
                       oracle::dense(sym.p_up), oracle::dense(sym.p_down)};
  for (const auto& s : ops) EXPECT_LT((h * s - s * h).norm(), 1e-10);
  for (const auto& z : {sym.c2, sym.mirror, sym.p_up, sym.p_down, sym.a(), sym.b()}) {
    EXPECT_TRUE(z.is_diagonal());
    EXPECT_TRUE(multiply(z, z).product.is_identity());
  }
}

TEST(Symmetries, SpinParityIsZOnThatSpinsModes) {
  const auto ord = ModeOrdering::tapering_friendly(4);
  const auto sym = build_symmetries(4, ord);
  std::uint64_t up = 0, down = 0;
  for (std::size_t o = 0; o < 4; ++o) {
    up |= std::uint64_t{1} << ord.qubit(o, Spin::up);
    down |= std::uint64_t{1} << ord.qubit(o, Spin::down);
  }
  EXPECT_EQ(sym.p_up, PauliString(8, 0, up));
  EXPECT_EQ(sym.p_down, PauliString(8, 0, down));
}

TEST(Symmetries, RotationPowersGiveTwoFoldRotation) {
  const auto sym4 = build_symmetries(4, ModeOrdering::tapering_friendly(4));
  EXPECT_LT((oracle::dense(sum_product(sym4.rotation, sym4.rotation)) - oracle::dense(sym4.c2)).norm(), 1e-10);
  const Mat r = oracle::dense(sym4.rotation);
  EXPECT_LT((r.adjoint() * r - Mat::Identity(256, 256)).norm(), 1e-10);

  // Six sites: C6^3 = C2, checked symbolically on twelve qubits.
  const auto sym6 = build_symmetries(6, ModeOrdering::tapering_friendly(6));
  const auto cube = sum_product(sum_product(sym6.rotation, sym6.rotation), sym6.rotation);
  const auto diff = cube - PauliSum(sym6.c2);
  for (const auto& t : diff.terms()) EXPECT_LT(std::abs(t.coeff), 1e-10);
}

TEST(ExactDiagonalization, SmallNextNearestHoppingFavoursB1) {
  ModelOracle o(HubbardParams{4, 1.0, 0.0, 0.5});
  EXPECT_LT(o.irrep_ground_energy(Irrep::B1), o.irrep_ground_energy(Irrep::A1));
  EXPECT_EQ(o.ground_state().label.irrep, Irrep::B1);
}

TEST(ExactDiagonalization, LargeNextNearestHoppingFavoursA1) {
  ModelOracle o(HubbardParams{4, 1.0, 1.0, 0.5});
  EXPECT_LT(o.irrep_ground_energy(Irrep::A1), o.irrep_ground_energy(Irrep::B1));
  EXPECT_EQ(o.ground_state().label.irrep, Irrep::A1);
}

TEST(ExactDiagonalization, EigenvectorsOrthonormalAndSorted) {
  const auto m = mapped(1.0, 0.3, 0.5);
  const auto s = at_filling(m, 4);
  EXPECT_EQ(s.size(), 70u);  // C(8, 4)
  for (Eigen::Index i = 1; i < s.energies.size(); ++i) EXPECT_LE(s.energies(i - 1), s.energies(i));
  const Mat gram = s.vectors.adjoint() * s.vectors;
  EXPECT_LT((gram - Mat::Identity(70, 70)).norm(), 1e-10);
  const auto psi = s.state(3);
  EXPECT_NEAR(real_expectation(m.hamiltonian, psi), s.energies(3), 1e-10);
}

TEST(ExactDiagonalization, Errors) {
  EXPECT_THROW(exact_diagonalize(PauliSum::identity(13)), DimensionError);
  const auto m = mapped(1.0, 0.3, 0.5);
  EXPECT_THROW(exact_diagonalize(m.hamiltonian, BasisFilter::for_filling(m.number, 9)), DomainError);
}

TEST(ExactDiagonalization, SpectrumIndependentOfModeOrdering) {
  const HubbardParams p{4, 1.0, 0.3, 0.5};
  const auto ref = exact_diagonalize(map_model(p, ModeOrdering::natural(Basis::site, 4)).hamiltonian);
  for (const auto& ord : {ModeOrdering::natural(Basis::momentum, 4), ModeOrdering::natural(Basis::symmetry, 4),
                          ModeOrdering::tapering_friendly(4)}) {
    const auto s = exact_diagonalize(map_model(p, ord).hamiltonian);
    EXPECT_LT((s.energies - ref.energies).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Classification, GroundStatesOnEitherSideOfTheTransition) {
  {
    const auto g = ModelOracle(HubbardParams{4, 1.0, 0.3, 0.5}).ground_state();
    EXPECT_EQ(g.label.irrep, Irrep::B1);
    EXPECT_EQ(g.label.s_m, -1);
    ASSERT_TRUE(g.label.lambda.has_value());
    EXPECT_LT(std::abs(*g.label.lambda - complex_t(-1.0)), 1e-8);
  }
  {
    const auto g = ModelOracle(HubbardParams{4, 1.0, 0.8, 0.5}).ground_state();
    EXPECT_EQ(g.label.irrep, Irrep::A1);
    EXPECT_EQ(g.label.s_m, 1);
    ASSERT_TRUE(g.label.lambda.has_value());
    EXPECT_LT(std::abs(*g.label.lambda - complex_t(1.0)), 1e-8);
  }
}

TEST(Classification, QuotedSmallInteractionStateIsB1) {
  using S = Spin;
  // Orbitals: m = 0, 1, 2, 3 carry lambda = 1, i, -1, -i.
  const auto literal = momentum_slater_sum({
      {1.0, {{1, S::up}, {2, S::up}, {1, S::down}, {2, S::down}}},
      {-1.0, {{2, S::up}, {3, S::up}, {2, S::down}, {3, S::down}}},
  });
  const auto sym = build_symmetries(4, ModeOrdering::tapering_friendly(4));
  const auto label = classify_state(literal, sym);
  EXPECT_EQ(label.irrep, Irrep::B1);
  EXPECT_EQ(label.s_m, -1);
}

TEST(Classification, SmallInteractionGroundStateIsTheLowestShellPairing) {
  // With lambda = +1 in place of lambda = -1 the same construction is the
  // perturbative ground state: lambda = 1 is the lowest single-particle level
  // and lambda = +-i the degenerate shell above it.
  using S = Spin;
  const auto state = momentum_slater_sum({
      {1.0, {{1, S::up}, {0, S::up}, {1, S::down}, {0, S::down}}},
      {-1.0, {{0, S::up}, {3, S::up}, {0, S::down}, {3, S::down}}},
  });
  const auto sym = build_symmetries(4, ModeOrdering::tapering_friendly(4));
  EXPECT_EQ(classify_state(state, sym).irrep, Irrep::B1);
  ModelOracle o(HubbardParams{4, 1.0, 0.3, 0.01});
  const auto g = o.ground_state();
  EXPECT_GT(std::norm(g.state.inner(state)), 0.999);
}

TEST(Classification, SuperpositionAcrossSectorsIsRejected) {
  const auto a1 = ModelOracle(HubbardParams{4, 1.0, 0.8, 0.5}).ground_state().state;
  const auto b1 = ModelOracle(HubbardParams{4, 1.0, 0.3, 0.5}).ground_state().state;
  std::vector<complex_t> mix(a1.dimension());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a1[i] + b1[i];
  const auto psi = Statevector::normalized(mix);
  const auto sym = build_symmetries(4, ModeOrdering::tapering_friendly(4));
  try {
    classify_state(psi, sym);
    FAIL() << "expected ClassificationError";
  } catch (const ClassificationError& e) {
    EXPECT_FALSE(e.measured().empty());
  }
}

TEST(Classification, DegenerateLevelsAreResolved) {
  // U = 0, t' = 0: the half-filling ground level is degenerate; every resolved
  // vector must still classify cleanly.
  ModelOracle o(HubbardParams{4, 1.0, 0.0, 0.0});
  const auto m = o.model();
  const auto s = exact_diagonalize(m.hamiltonian, BasisFilter::for_filling(m.number, 4));
  // Lambda = 1 is doubly occupied and two particles share the four lambda = +-i
  // spin orbitals: C(4, 2) = 6 degenerate ground states.
  EXPECT_LT(s.energies(5) - s.energies(0), 1e-9);
  EXPECT_GT(s.energies(6) - s.energies(0), 1e-3);
  const auto states = resolve_degeneracies(s, o.symmetries(), 4);
  EXPECT_GE(states.size(), 6u);  // the level is never cut in half
  for (const auto& c : states) EXPECT_NO_THROW(classify_state(c.state, o.symmetries()));
}

TEST(Transition, CrossingLiesBetween048And052) {
  const double x = find_transition(HubbardParams{4, 1.0, 0.0, 0.5}, Irrep::B1, Irrep::A1, 0.3, 0.7, 1e-4);
  EXPECT_GT(x, 0.48);
  EXPECT_LT(x, 0.52);
  const HubbardParams lo{4, 1.0, x - 2e-4, 0.5}, hi{4, 1.0, x + 2e-4, 0.5};
  EXPECT_LT(ModelOracle(lo).irrep_ground_energy(Irrep::B1), ModelOracle(lo).irrep_ground_energy(Irrep::A1));
  EXPECT_GT(ModelOracle(hi).irrep_ground_energy(Irrep::B1), ModelOracle(hi).irrep_ground_energy(Irrep::A1));
  EXPECT_THROW(find_transition(HubbardParams{4, 1.0, 0.0, 0.5}, Irrep::B1, Irrep::A1, 0.6, 0.9), DomainError);
}

TEST(Oracle, SectorEnergiesMatchFilteredDiagonalization) {
  ModelOracle o(HubbardParams{4, 1.0, 0.44, 0.5});
  double lowest = 1e9;
  for (Irrep ir : {Irrep::A1, Irrep::B1, Irrep::E}) {
    const double e = o.sector_ground_energy(SectorLabel::for_irrep(ir, 4));
    EXPECT_LE(e, o.irrep_ground_energy(ir) + 1e-12);
    lowest = std::min(lowest, e);
  }
  EXPECT_NEAR(lowest, o.ground_state().energy, 1e-10);
}

TEST(SpectrumCsv, HeaderAndRows) {
  std::ostringstream out;
  write_spectrum_csv(out, {{0.5, "A1", 0, -1.25}, {0.5, "B1", 1, 2.0}});
  const auto text = out.str();
  EXPECT_EQ(text.rfind("t_prime_over_t,sector,level_index,energy\n", 0), 0u);
  EXPECT_NE(text.find("0.5,A1,0,"), std::string::npos);
  EXPECT_NE(text.find("0.5,B1,1,"), std::string::npos);
}
