#include <cmath>

#include <gtest/gtest.h>

#include "dlab/channels.hpp"
#include "dlab/random.hpp"

using namespace dlab;

namespace {

// rho -> rho^T written out entry by entry on vec(rho).
CMatrix transpose_superop(int n) {
  CMatrix s = CMatrix::Zero(n * n, n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) s(a * n + b, b * n + a) = 1.0;
  return s;
}

CMatrix kraus_sum(const KrausSet& k, const CMatrix& rho) {
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& op : k.operators) out += op * rho * op.adjoint();
  return out;
}

}  // namespace

TEST(ChannelRep, IdentityChoiIsMaximallyEntangledProjector) {
  const int n = 3;
  const CMatrix j = ChannelRep::identity(n).choi_matrix();
  CVector omega = CVector::Zero(n * n);
  for (int i = 0; i < n; ++i) omega(i * n + i) = 1.0;
  EXPECT_LT((j - omega * omega.adjoint()).norm(), 1e-15);
}

TEST(ChannelRep, KrausFormAgreesEverywhere) {
  Rng rng(11);
  const KrausSet k = random_kraus(3, 4, rng);
  const ChannelRep rep = ChannelRep::from_kraus(k);
  const CMatrix rho = random_density(3, rng);
  EXPECT_LT((dlab::apply(rep, rho) - kraus_sum(k, rho)).norm(), 1e-13);
  EXPECT_LT((ChannelRep::from_choi(choi_of(rep)).superop() - rep.superop()).norm(), 1e-13);
  EXPECT_LT((ChannelRep::from_superop(rep.superop()).choi_matrix() - rep.choi_matrix()).norm(), 1e-13);
  EXPECT_LT((kraus_to_choi(k).matrix - rep.choi_matrix()).norm(), 1e-13);
}

TEST(ChannelRep, UnitaryFormIsConjugation) {
  Rng rng(12);
  const CMatrix u = random_unitary(2, rng);
  const CMatrix rho = random_density(2, rng);
  const ChannelRep rep = ChannelRep::from_unitary(u);
  EXPECT_EQ(rep.kind(), RepKind::unitary);
  EXPECT_LT((dlab::apply(rep, rho) - u * rho * u.adjoint()).norm(), 1e-14);
  EXPECT_EQ(rep.kraus().operators.size(), 1u);
}

TEST(ChannelRep, RejectsMalformedInput) {
  EXPECT_THROW(ChannelRep::from_superop(CMatrix::Zero(3, 3)), DimensionError);
  EXPECT_THROW(ChannelRep::from_kraus(KrausSet{2, {}}), ValidationError);
  EXPECT_THROW(kraus_to_choi(KrausSet{2, {2.0 * CMatrix::Identity(2, 2)}}), ValidationError);
}

TEST(IsCptp, TransposeMapIsPositiveButNotCompletelyPositive) {
  const ChannelRep t = ChannelRep::from_superop(transpose_superop(2));
  CMatrix rho(2, 2);
  rho << 0.7, cplx(0.1, 0.2), cplx(0.1, -0.2), 0.3;
  EXPECT_LT((dlab::apply(t, rho) - rho.transpose()).norm(), 1e-15);
  const CptpReport r = is_cptp(t);
  EXPECT_FALSE(r.cp_ok);
  EXPECT_TRUE(r.tp_ok);
  // The Choi matrix of the transpose is the swap, with spectrum {1, 1, 1, -1}.
  EXPECT_NEAR(r.min_choi_eig, -1.0, 1e-14);
  EXPECT_THROW(choi_to_kraus(choi_of(t)), NumericalError);
}

TEST(IsCptp, RandomChannelsPass) {
  Rng rng(13);
  for (int i = 0; i < 10; ++i) {
    const CptpReport r = is_cptp(random_cptp(2 + i % 2, rng));
    EXPECT_TRUE(r.cp_ok);
    EXPECT_TRUE(r.tp_ok);
  }
}

TEST(ChoiKraus, RoundTripAndRank) {
  Rng rng(14);
  for (int count : {1, 2, 3, 5}) {
    const KrausSet k = random_kraus(3, count, rng);
    const ChoiMatrix j = kraus_to_choi(k);
    const KrausSet back = choi_to_kraus(j);
    EXPECT_EQ(static_cast<int>(back.operators.size()), count);
    EXPECT_LT((kraus_to_choi(back).matrix - j.matrix).norm(), 1e-12);
  }
}

TEST(Compose, SecondArgumentActsFirst) {
  Rng rng(15);
  const ChannelRep a = random_cptp(2, rng);
  const ChannelRep b = random_cptp(2, rng);
  const CMatrix rho = random_density(2, rng);
  EXPECT_LT((dlab::apply(compose(a, b), rho) - dlab::apply(a, dlab::apply(b, rho))).norm(), 1e-14);
}

TEST(Distance, IdentityVersusCompletelyDepolarizing) {
  const int n = 2;
  const ChannelRep id = ChannelRep::identity(n);
  const ChannelRep dep = ChannelRep::from_choi(ChoiMatrix{n, CMatrix::Identity(n * n, n * n) / n});
  const ChannelDistance d = channel_distance(id, dep);
  // Spectrum of J_id - J_dep: n - 1/n once and -1/n with multiplicity n^2 - 1.
  EXPECT_NEAR(d.choi_trace_dist, 2.0 * (n * n - 1) / n, 1e-13);
  EXPECT_NEAR(d.diamond_lower, d.choi_trace_dist / n, 1e-13);
  EXPECT_LE(d.diamond_lower, d.diamond_upper);
  EXPECT_EQ(channel_distance(id, id).choi_trace_dist, 0.0);
}

TEST(ProjectCptp, FixesValidChoiAndRepairsPerturbation) {
  Rng rng(16);
  const ChannelRep rep = random_cptp(2, rng);
  EXPECT_LT((project_cptp(rep.choi_matrix(), 2) - rep.choi_matrix()).norm(), 1e-12);

  CMatrix bad = rep.choi_matrix() + 1e-3 * random_hermitian(4, rng);
  const ChannelRep fixed = ChannelRep::from_choi(ChoiMatrix{2, project_cptp(bad, 2)});
  const CptpReport r = is_cptp(fixed);
  EXPECT_TRUE(r.cp_ok);
  EXPECT_TRUE(r.tp_ok);
}
