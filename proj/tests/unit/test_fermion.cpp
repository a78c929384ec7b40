#include <gtest/gtest.h>

#include <numbers>

#include "hubbard_vqe/fermion.hpp"
#include "hubbard_vqe/hubbard.hpp"
#include "oracles.hpp"

using namespace hvqe;
using oracle::Mat;

namespace {

/// Dense image of a fermion operator built from explicit Kronecker ladder matrices,
/// with mode m living on qubit ordering.qubit(m).
Mat fermion_dense(const FermionOperator& op, const ModeOrdering& ordering) {
  const std::size_t n = op.n_modes();
  const auto dim = Eigen::Index{1} << n;
  Mat out = Mat::Zero(dim, dim);
  for (const auto& term : op.terms()) {
    Mat m = Mat::Identity(dim, dim);
    for (const auto& l : term.ops) {
      const Mat a = oracle::annihilation(n, ordering.qubit(l.mode));
      m = m * (l.dagger ? Mat(a.adjoint()) : a);
    }
    out += term.coeff * m;
  }
  return out;
}

FermionOperator random_hermitian(std::size_t n_modes, CounterRng& rng) {
  FermionOperator op(n_modes);
  for (int k = 0; k < 6; ++k) {
    const std::size_t i = rng.below(n_modes), j = rng.below(n_modes);
    const complex_t c(rng.uniform() - 0.5, rng.uniform() - 0.5);
    FermionOperator t(n_modes);
    t.add_term(c, {{i, true}, {j, false}});
    op += t + t.adjoint();
  }
  for (int k = 0; k < 3; ++k) {
    const std::size_t i = rng.below(n_modes), j = rng.below(n_modes);
    FermionOperator t(n_modes);
    t.add_term(rng.uniform(), {{i, true}, {i, false}, {j, true}, {j, false}});
    op += t;
  }
  return op;
}

/// Nearest-neighbour (distance 1) or next-nearest (distance 2) ring hopping
/// sum_j c+_j c_{j+d} + h.c. for both spins, site basis.
FermionOperator ring_hopping(std::size_t n, std::size_t distance) {
  FermionOperator op(2 * n);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t a = j + n * s, b = (j + distance) % n + n * s;
      op.add_term(1.0, {{a, true}, {b, false}});
      op.add_term(1.0, {{b, true}, {a, false}});
    }
  }
  return op;
}

Mat number_dense(std::size_t n_modes, std::size_t qubit) {
  const Mat a = oracle::annihilation(n_modes, qubit);
  return a.adjoint() * a;
}

}  // namespace

TEST(JordanWigner, SingleModeAnnihilationIsHalfXPlusHalfIY) {
  const auto c0 = jordan_wigner_ladder(1, 0, false);
  EXPECT_EQ(c0.size(), 2u);
  EXPECT_EQ(c0.coefficient(PauliString::from_letters("X")), complex_t(0.5, 0));
  EXPECT_EQ(c0.coefficient(PauliString::from_letters("Y")), complex_t(0, 0.5));
}

TEST(JordanWigner, SecondModeCarriesZString) {
  // Two modes as one site with both spins; mode 1 sits on qubit 1.
  const auto c1 = jordan_wigner(FermionOperator::ladder(2, 1, false), ModeOrdering::natural(Basis::site, 1));
  EXPECT_EQ(c1.size(), 2u);
  EXPECT_EQ(c1.coefficient(PauliString::from_letters("XZ")), complex_t(0.5, 0));
  EXPECT_EQ(c1.coefficient(PauliString::from_letters("YZ")), complex_t(0, 0.5));
}

TEST(JordanWigner, CanonicalAnticommutation) {
  const auto ord = ModeOrdering::natural(Basis::site, 1);
  const auto c0 = FermionOperator::ladder(2, 0, false);
  const auto c1d = FermionOperator::ladder(2, 1, true);
  const auto c0d = FermionOperator::ladder(2, 0, true);
  EXPECT_TRUE(jordan_wigner(c0 * c1d + c1d * c0, ord).empty());
  EXPECT_EQ(jordan_wigner(c0 * c0d + c0d * c0, ord), PauliSum::identity(2));
}

TEST(JordanWigner, MatchesExplicitFermionMatricesForRandomOperators) {
  CounterRng rng(41);
  for (std::size_t n_sites : {1u, 2u, 3u}) {
    const std::size_t m = 2 * n_sites;
    // A shuffled ordering exercises the mode-to-qubit bijection.
    std::vector<std::size_t> perm(m);
    for (std::size_t i = 0; i < m; ++i) perm[i] = i;
    for (std::size_t i = m; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    for (const auto& ord : {ModeOrdering::natural(Basis::site, n_sites), ModeOrdering(Basis::site, n_sites, perm)}) {
      for (int trial = 0; trial < 5; ++trial) {
        const auto op = random_hermitian(m, rng);
        const auto mapped = jordan_wigner(op, ord);
        EXPECT_TRUE(mapped.is_hermitian());
        EXPECT_LT((oracle::dense(mapped) - fermion_dense(op, ord)).norm(), 1e-12);
      }
    }
  }
}

TEST(JordanWigner, RejectsOutOfRangeModes) {
  FermionOperator op(4);
  EXPECT_THROW(op.add_term(1.0, {{4, false}}), DomainError);
  EXPECT_THROW(jordan_wigner(FermionOperator(4), ModeOrdering::natural(Basis::site, 4)), DimensionError);
}

TEST(JordanWigner, NumberOperatorIsSumOfHalfIMinusZ) {
  const auto n_op = number_operator(4);
  for (const auto& ord : {ModeOrdering::natural(Basis::site, 4), ModeOrdering::tapering_friendly(4)}) {
    PauliSum expected(8);
    for (std::size_t k = 0; k < 8; ++k) {
      expected += PauliSum::identity(8, 0.5) - PauliSum(PauliString::single(8, k, 'Z'), 0.5);
    }
    EXPECT_EQ(jordan_wigner(n_op, ord), expected);
  }
}

TEST(MomentumBasis, IsUnitaryAndRejectsOtherSizes) {
  for (std::size_t n : {4u, 6u}) {
    const auto bc = momentum_basis(n);
    EXPECT_LT((bc.u.adjoint() * bc.u - Mat::Identity(2 * n, 2 * n)).norm(), 1e-12);
    const auto sb = symmetry_eigenbasis(n);
    EXPECT_LT((sb.u.adjoint() * sb.u - Mat::Identity(2 * n, 2 * n)).norm(), 1e-12);
  }
  EXPECT_THROW(momentum_basis(5), DomainError);
  EXPECT_THROW(symmetry_eigenbasis(3), DomainError);
}

TEST(MomentumBasis, NearestHoppingBecomesTwoCosineBand) {
  // -t (lambda + lambda*) per momentum mode, checked densely on four sites.
  const std::size_t n = 4;
  const auto mapped = jordan_wigner(momentum_basis(n).apply(ring_hopping(n, 1) * complex_t(-1.0)),
                                    ModeOrdering::natural(Basis::momentum, n));
  Mat expected = Mat::Zero(256, 256);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t m = 0; m < n; ++m) {
      const double eps = -2.0 * std::cos(2 * std::numbers::pi * m / n);
      expected += eps * number_dense(2 * n, m + n * s);
    }
  }
  EXPECT_LT((oracle::dense(mapped) - expected).norm(), 1e-10);
}

TEST(MomentumBasis, SixSiteHoppingIsDiagonalInMomentum) {
  // Twelve qubits are too many for dense oracles; compare against the
  // number-operator form sum_m eps_m (I - Z_m) / 2 term by term.
  const std::size_t n = 6;
  const auto h = ring_hopping(n, 1) * complex_t(-1.0) + ring_hopping(n, 2) * complex_t(-0.3);
  const auto mapped = jordan_wigner(momentum_basis(n).apply(h), ModeOrdering::natural(Basis::momentum, n));
  PauliSum expected(2 * n);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t m = 0; m < n; ++m) {
      const double eps = -2.0 * std::cos(2 * std::numbers::pi * m / n) - 0.6 * std::cos(4 * std::numbers::pi * m / n);
      const std::size_t q = m + n * s;
      expected += PauliSum::identity(2 * n, eps / 2) - PauliSum(PauliString::single(2 * n, q, 'Z'), eps / 2);
    }
  }
  const auto diff = mapped - expected;
  for (const auto& t : diff.terms()) EXPECT_LT(std::abs(t.coeff), 1e-10) << t.string.to_string();
}

TEST(MomentumBasis, NextNearestHoppingSignConvention) {
  // -t' (lambda^2 + lambda*^2): for lambda = +-1 the level sits at -2t', the
  // opposite sign of a literal "+2 lambda^2" reading.
  const std::size_t n = 4;
  const auto mapped = jordan_wigner(momentum_basis(n).apply(ring_hopping(n, 2) * complex_t(-1.0)),
                                    ModeOrdering::natural(Basis::momentum, n));
  Mat expected = Mat::Zero(256, 256);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t m = 0; m < n; ++m) {
      const double eps = -2.0 * std::cos(4 * std::numbers::pi * m / n);
      expected += eps * number_dense(2 * n, m + n * s);
    }
  }
  EXPECT_LT((oracle::dense(mapped) - expected).norm(), 1e-10);
  // Single-particle check on lambda = 1 (m = 0, spin up).
  const Mat one_particle = oracle::dense(mapped);
  EXPECT_NEAR(one_particle(1, 1).real(), -2.0, 1e-12);
}

TEST(MomentumBasis, NumberOperatorIsInvariant) {
  const auto n_site = number_operator(4);
  const auto transformed = momentum_basis(4).then(symmetry_eigenbasis(4)).apply(n_site);
  const auto ord = ModeOrdering::natural(Basis::site, 4);
  EXPECT_LT((oracle::dense(jordan_wigner(transformed, ord)) - oracle::dense(jordan_wigner(n_site, ord))).norm(), 1e-12);
}

TEST(SymmetryBasis, EvenModeIsSymmetricCombinationOfConjugatePair) {
  const auto sb = symmetry_eigenbasis(4);
  const Mat inv = sb.u.adjoint();  // new mode = sum_a inv(new, a) old mode a
  const double r = 1.0 / std::sqrt(2.0);
  // Orbital 2 is d_e; momentum orbitals 1 and 3 carry lambda = i and -i.
  EXPECT_NEAR(std::abs(inv(2, 1) - r), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(inv(2, 3) - r), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(inv(3, 1) - r), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(inv(3, 3) + r), 0.0, 1e-15);
  // d_{+1} and d_{-1} are the lambda = 1 and lambda = -1 momentum modes.
  EXPECT_NEAR(std::abs(inv(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(inv(1, 2) - 1.0), 0.0, 1e-15);
}

TEST(SymmetryBasis, MirrorIsDiagonalAfterMapping) {
  for (std::size_t n : {4u, 6u}) {
    const auto sym = build_symmetries(n, ModeOrdering::tapering_friendly(n));
    EXPECT_TRUE(sym.mirror.is_diagonal());
    EXPECT_FALSE(sym.mirror.is_identity());
  }
}

TEST(SymmetryBasis, TransformPreservesAnticommutation) {
  const auto full = momentum_basis(4).then(symmetry_eigenbasis(4));
  const auto ord = ModeOrdering::natural(Basis::site, 4);
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      const auto a = full.apply(FermionOperator::ladder(8, i, false));
      const auto bd = full.apply(FermionOperator::ladder(8, j, true));
      const Mat anti = oracle::dense(jordan_wigner(a * bd + bd * a, ord));
      const Mat expected = (i == j ? 1.0 : 0.0) * Mat::Identity(256, 256);
      EXPECT_LT((anti - expected).norm(), 1e-12) << i << "," << j;
    }
  }
}

TEST(SymmetryBasis, BasisChangesPreserveSpectra) {
  CounterRng rng(43);
  const auto op = random_hermitian(8, rng);
  const auto ord = ModeOrdering::natural(Basis::site, 4);
  const auto ref = oracle::sorted_eigenvalues(oracle::dense(jordan_wigner(op, ord)));
  const auto mom = momentum_basis(4).apply(op);
  const auto sym = symmetry_eigenbasis(4).apply(mom);
  for (const auto& changed : {mom, sym}) {
    const auto ev = oracle::sorted_eigenvalues(oracle::dense(jordan_wigner(changed, ord)));
    for (std::size_t k = 0; k < ev.size(); ++k) EXPECT_NEAR(ev[k], ref[k], 1e-10);
  }
}

TEST(ModeOrdering, TaperingFriendlyIsABijectionWithAdjacentPairs) {
  for (std::size_t n : {4u, 6u}) {
    const auto ord = ModeOrdering::tapering_friendly(n);
    EXPECT_EQ(ord.basis(), Basis::symmetry);
    std::vector<bool> seen(2 * n, false);
    for (std::size_t m = 0; m < 2 * n; ++m) {
      EXPECT_FALSE(seen[ord.qubit(m)]);
      seen[ord.qubit(m)] = true;
      EXPECT_EQ(ord.mode_at(ord.qubit(m)), m);
    }
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t p = 1; p < n / 2; ++p) {
        const auto sp = static_cast<Spin>(s);
        const auto e = ord.qubit(2 * p, sp), o = ord.qubit(2 * p + 1, sp);
        EXPECT_EQ(std::max(e, o) - std::min(e, o), 1u);
      }
    }
  }
  EXPECT_THROW(ModeOrdering(Basis::site, 2, {0, 1, 1, 2}), DomainError);
  EXPECT_THROW(ModeOrdering(Basis::site, 2, {0, 1, 2}), DimensionError);
}
