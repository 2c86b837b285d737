#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "dlab/dilation.hpp"
#include "dlab/random.hpp"

using namespace dlab;

TEST(StaticDilation, ReproducesRandomChannels) {
  Rng rng(31);
  for (int n : {2, 3}) {
    for (int i = 0; i < 5; ++i) {
      const ChannelRep rep = random_cptp(n, rng);
      const StinespringDilation dil = static_dilation(rep);
      EXPECT_EQ(dil.ancilla_dim, n * n);
      const VerifyReport v = verify_dilation(dil, rep, 4, 99);
      EXPECT_LT(v.max_residual, 1e-12);
      EXPECT_LT(v.unitarity_residual, 1e-12);
      EXPECT_EQ(v.checks, n * n + 4);
    }
  }
}

TEST(StaticDilation, NonzeroOmegaAndLargerAncilla) {
  Rng rng(32);
  const ChannelRep rep = ChannelRep::from_kraus(random_kraus(2, 2, rng));
  const StinespringDilation dil = static_dilation(rep, 3, 2);
  EXPECT_LT(verify_dilation(dil, rep).max_residual, 1e-12);
}

TEST(StaticDilation, AncillaTooSmallForKrausRank) {
  Rng rng(33);
  const ChannelRep rep = ChannelRep::from_kraus(random_kraus(2, 4, rng));
  EXPECT_THROW(static_dilation(rep, 2), NumericalError);
}

TEST(StaticDilation, AncillaGaugeLeavesChannelInvariant) {
  Rng rng(34);
  const ChannelRep rep = random_cptp(2, rng);
  StinespringDilation dil = static_dilation(rep);
  dil.unitary = kron(CMatrix::Identity(2, 2), random_unitary(4, rng)) * dil.unitary;
  EXPECT_LT(verify_dilation(dil, rep).max_residual, 1e-12);
}

TEST(Layout, IsometryKrausRoundTrip) {
  Rng rng(35);
  const KrausSet k = random_kraus(3, 2, rng);
  const CMatrix v = isometry_from_kraus(k, 4);
  EXPECT_EQ(v.rows(), 12);
  EXPECT_LT(unitarity_residual(v), 1e-13);
  const KrausSet back = kraus_from_isometry(v, 3, 4);
  ASSERT_EQ(back.operators.size(), 4u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_TRUE((back.operators[i]) == (k.operators[i]));
  for (std::size_t i = 2; i < 4; ++i) EXPECT_EQ(back.operators[i].norm(), 0.0);
}

TEST(Layout, EmbedExtractInverse) {
  Rng rng(36);
  const CMatrix u = random_unitary(6, rng);
  const CMatrix e = embed_completion(u, 2, 3, 1);
  EXPECT_TRUE((extract_completion(e, 2, 3, 1)) == (u));
  const auto cols = omega_columns(2, 3, 1);
  ASSERT_EQ(cols.size(), 2u);
  EXPECT_EQ(cols[0], 1);
  EXPECT_EQ(cols[1], 4);
  EXPECT_TRUE((e.col(4)) == (u.col(1)));
}

TEST(EigenpathMatch, UndoesPermutationAndPhases) {
  Rng rng(37);
  const HermEig prev = herm_eig(random_cptp(2, rng).choi_matrix());
  HermEig next = prev;
  const std::vector<int> perm{2, 0, 3, 1};
  for (int i = 0; i < 4; ++i) {
    next.eigenvalues(i) = prev.eigenvalues(perm[static_cast<std::size_t>(i)]);
    next.eigenvectors.col(i) = std::exp(kI * (0.3 + i)) * prev.eigenvectors.col(perm[static_cast<std::size_t>(i)]);
  }
  const MatchResult m = eigenpath_match(prev, next);
  EXPECT_LT((m.matched.eigenvalues - prev.eigenvalues).norm(), 1e-14);
  EXPECT_LT((m.matched.eigenvectors - prev.eigenvectors).norm(), 1e-12);
  EXPECT_TRUE(m.warnings.empty());
}

TEST(EigenpathMatch, DegenerateClusterFollowsPreviousBasis) {
  Rng rng(38);
  const CMatrix q = random_unitary(4, rng);
  HermEig prev;
  prev.eigenvalues = RVector(4);
  prev.eigenvalues << 2.0, 1.0, 1.0, 0.5;
  prev.eigenvectors = q;
  HermEig next = prev;
  next.eigenvectors.middleCols(1, 2) = q.middleCols(1, 2) * random_unitary(2, rng);
  const MatchResult m = eigenpath_match(prev, next);
  EXPECT_LT((m.matched.eigenvectors - prev.eigenvectors).norm(), 1e-12);
}

TEST(EigenpathMatch, RejectsSizeMismatch) {
  HermEig a{RVector::Zero(2), CMatrix::Identity(2, 2)};
  HermEig b{RVector::Zero(3), CMatrix::Identity(3, 3)};
  EXPECT_THROW(eigenpath_match(a, b), DimensionError);
}

namespace {

ExactDilation dephasing_curve(int points) {
  return exact_dilation_curve(CurveSource::builtin(BuiltinKind::dephasing, 1.0),
                              TimeGrid::uniform(0.1, 2.0, points));
}

}  // namespace

TEST(ExactCurve, DephasingVerifiesEverywhere) {
  const ExactDilation ex = dephasing_curve(40);
  const auto& r = ex.report;
  EXPECT_TRUE(r.all_verified);
  EXPECT_TRUE(r.continuity_ok);
  EXPECT_FALSE(r.starts_at_zero);
  EXPECT_EQ(r.ancilla_dim, 4);
  EXPECT_EQ(r.max_kraus_rank, 2);
  ASSERT_EQ(r.verify_residuals.size(), 40u);
  for (double x : r.verify_residuals) EXPECT_LE(x, 1e-9);
  EXPECT_EQ(r.unitary_jumps.size(), 39u);
}

TEST(ExactCurve, JumpsScaleWithGridSpacing) {
  const double coarse = dephasing_curve(40).report.max_unitary_jump;
  const double fine = dephasing_curve(79).report.max_unitary_jump;
  EXPECT_GT(coarse / fine, 1.6);
  EXPECT_LT(coarse / fine, 2.4);
}

TEST(ExactCurve, KrausFamiliesFollowClosedForm) {
  // Dephasing Kraus operators are sqrt((1 +- a)/2) {I, sigma_z} with a = e^{-t}.
  const ExactDilation ex = dephasing_curve(12);
  for (std::size_t k = 0; k < ex.kraus.grid.size(); ++k) {
    const double a = std::exp(-ex.kraus.grid.points[k]);
    const auto& ops = ex.kraus.families[k].operators;
    ASSERT_EQ(ops.size(), 4u);
    EXPECT_LT((ops[0] - std::sqrt((1 + a) / 2) * CMatrix::Identity(2, 2)).norm(), 1e-12);
    EXPECT_LT((ops[1] - std::sqrt((1 - a) / 2) * pauli::z()).norm(), 1e-12);
    EXPECT_EQ(ops[2].norm(), 0.0);
  }
}

TEST(ExactCurve, RandomSemigroupWithFullRank) {
  Rng rng(39);
  const CurveSource src = CurveSource::semigroup(random_lindblad(2, 3, rng));
  const ExactDilation ex = exact_dilation_curve(src, TimeGrid::uniform(0.2, 1.0, 30));
  EXPECT_TRUE(ex.report.all_verified);
  EXPECT_LT(ex.report.max_verify_residual, 1e-9);
  EXPECT_LT(ex.report.max_unitary_jump, 0.5);
}

TEST(ExactCurve, StartingAtZeroIsFlagged) {
  const ExactDilation ex =
      exact_dilation_curve(CurveSource::builtin(BuiltinKind::dephasing, 1.0), TimeGrid::uniform(0.0, 1.0, 11));
  EXPECT_TRUE(ex.report.starts_at_zero);
  EXPECT_FALSE(ex.report.warnings.empty());
  EXPECT_TRUE(ex.report.all_verified);
}
