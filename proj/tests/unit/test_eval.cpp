#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "legendre/error.hpp"
#include "legendre/eval.hpp"
#include "legendre/optimizer.hpp"
#include "oracles.hpp"

using namespace legendre;

TEST(ReferenceProjection, IndependenceClosedForm) {
  const NormalizedTensor p = normalize(RawTensor(Shape{2, 2}, {0.4, 0.1, 0.3, 0.2}));
  const Basis b(p.space, {{1, 2}, {2, 1}});
  const NormalizedTensor q = reference_projection(p, b, 1e-13);
  const std::vector<double> expect{0.35, 0.15, 0.35, 0.15};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(q.probs[i], expect[i], 1e-12);
}

TEST(ReferenceProjection, EmptyBasisIsUniform) {
  const NormalizedTensor p = normalize(synthetic_tensor(Shape{3, 4}, 1));
  const NormalizedTensor q = reference_projection(p, Basis(p.space), 1e-12);
  for (double v : q.probs) EXPECT_EQ(v, 1.0 / 12);
}

TEST(ReferenceProjection, RejectsOversizedProblems) {
  const NormalizedTensor p = normalize(synthetic_tensor(Shape{101, 100}, 1));
  EXPECT_THROW(reference_projection(p, Basis(p.space), 1e-8), DomainError);
  const NormalizedTensor small = normalize(synthetic_tensor(Shape{5, 5, 5}, 1));
  EXPECT_THROW(reference_projection(small, build_basis_full(small.space), 1e-8), DomainError);
}

TEST(ReferenceProjection, SweepLimitIsAFailure) {
  const NormalizedTensor p = normalize(synthetic_tensor(Shape{4, 4}, 3));
  EXPECT_THROW(reference_projection(p, build_basis_full(p.space), 1e-14, 1), OracleFailure);
}

TEST(ReferenceProjection, SupportOnTopRow) {
  const NormalizedTensor p = normalize(RawTensor(Shape{2, 2}, {0, 0, 1, 1}));
  const NormalizedTensor q = reference_projection(p, Basis(p.space, {{2, 1}}), 1e-12);
  EXPECT_EQ(q.probs, (std::vector<double>{0, 0, 0.5, 0.5}));
}

TEST(ReferenceProjection, AgreesWithNaturalGradient) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const NormalizedTensor p = normalize(synthetic_tensor(Shape{3, 3, 3}, rng()));
    auto b = std::make_shared<const Basis>(p.space, oracle::random_members(*p.space, 8, rng));
    SolverConfig c;
    c.tolerance = 1e-11;
    const DecompositionResult r = decompose(p, b, c);
    const NormalizedTensor q = reference_projection(p, *b, 1e-11);
    for (std::size_t i = 0; i < q.probs.size(); ++i) EXPECT_NEAR(q.probs[i], r.q.probs[i], 1e-8);
  }
}

TEST(Rmse, Examples) {
  const RawTensor x(Shape{2, 2}, {1, 0, 0, 1});
  EXPECT_EQ(rmse(x, x), 0.0);
  EXPECT_NEAR(rmse(x, RawTensor(Shape{2, 2})), std::sqrt(0.5), 1e-15);
  EXPECT_THROW(rmse(x, RawTensor(Shape{4})), DomainError);
}

TEST(Rmse, PerfectReconstructionWithFullBasis) {
  const RawTensor x = synthetic_tensor(Shape{3, 3, 3}, 9);
  const NormalizedTensor p = normalize(x);
  SolverConfig c;
  c.tolerance = 1e-12;
  const DecompositionResult r = decompose(p, std::make_shared<const Basis>(build_basis_full(p.space)), c);
  EXPECT_LE(rmse(x, denormalize(r.q)), 1e-8);
}

TEST(SyntheticTensor, DeterministicAndInRange) {
  const RawTensor a = synthetic_tensor(Shape{20, 20, 20}, 42);
  const RawTensor b = synthetic_tensor(Shape{20, 20, 20}, 42);
  ASSERT_EQ(a.values().size(), 8000u);
  for (std::size_t i = 0; i < 8000; ++i) {
    EXPECT_EQ(a.values()[i], b.values()[i]);
    EXPECT_GT(a.values()[i], 0.0);
    EXPECT_LT(a.values()[i], 1.0);
  }
  EXPECT_NE(synthetic_tensor(Shape{4}, 1).values()[0], synthetic_tensor(Shape{4}, 2).values()[0]);
}

TEST(SyntheticTensor, FirstDrawMatchesDocumentedConversion) {
  std::mt19937_64 gen(7);
  const double expect = (static_cast<double>(gen() >> 11) + 0.5) * 0x1p-53;
  EXPECT_EQ(synthetic_tensor(Shape{1}, 7).values()[0], expect);
}

TEST(SyntheticTensor, MeanIsOneHalf) {
  const RawTensor x = synthetic_tensor(Shape{1000, 1000}, 5);
  EXPECT_NEAR(x.sum() / 1e6, 0.5, 0.002);
}

TEST(Evaluate, ReportRow) {
  const RawTensor x(Shape{2, 2}, {1, 3, 2, 2});
  const EvalReport r = evaluate(x, x, 3, std::chrono::milliseconds(12));
  EXPECT_EQ(r.rmse, 0.0);
  EXPECT_EQ(r.kl, 0.0);
  EXPECT_EQ(EvalReport::csv_header(), "rmse,kl,params,time_ms");
  EXPECT_EQ(r.csv_row().substr(0, 6), "0,0,3,");
}
