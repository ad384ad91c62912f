#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "legendre/error.hpp"
#include "legendre/eval.hpp"
#include "legendre/optimizer.hpp"
#include "oracles.hpp"

using namespace legendre;

namespace {

SpacePtr full(Shape s) { return std::make_shared<const SampleSpace>(std::move(s)); }

BasisPtr basis_of(SpacePtr space, std::vector<IndexVector> m) {
  return std::make_shared<const Basis>(std::move(space), std::move(m));
}

SolverConfig config(Algorithm a, double tol = 1e-8) {
  SolverConfig c;
  c.algorithm = a;
  c.tolerance = tol;
  return c;
}

NormalizedTensor independence_p() { return normalize(RawTensor(Shape{2, 2}, {0.4, 0.1, 0.3, 0.2})); }

}  // namespace

TEST(Algorithm, Parse) {
  EXPECT_EQ(parse_algorithm("gd"), Algorithm::GradientDescent);
  EXPECT_EQ(parse_algorithm("ng"), Algorithm::NaturalGradient);
  EXPECT_EQ(to_string(Algorithm::NaturalGradient), "ng");
  EXPECT_THROW(parse_algorithm("newton"), DomainError);
}

TEST(SolverConfig, DefaultsAndValidation) {
  SolverConfig c;
  EXPECT_EQ(c.iteration_limit(), 100);
  c.algorithm = Algorithm::GradientDescent;
  EXPECT_EQ(c.iteration_limit(), 1'000'000);
  c.max_iterations = 7;
  EXPECT_EQ(c.iteration_limit(), 7);
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
  c.learning_rate = 0.1;
  c.tolerance = -1;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(Gradient, Examples) {
  const NormalizedTensor p = independence_p();
  auto b = basis_of(p.space, {{1, 2}, {2, 1}});
  const ModelState st(std::make_shared<const ZetaKernel>(b));
  const EtaVector eh = compute_eta_hat(p, b);
  const Eigen::VectorXd g = gradient(st.eta(), eh);
  EXPECT_NEAR(g[0], 0.2, 1e-15);
  EXPECT_NEAR(g[1], 0.0, 1e-15);
  EXPECT_TRUE(gradient(eh, eh).isZero());
  EXPECT_THROW(gradient(eh, EtaVector{basis_of(p.space, {{1, 2}}), Eigen::VectorXd::Zero(1)}), DomainError);
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g(0.0, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape shape{3, 4, 2};
    const NormalizedTensor p = normalize(synthetic_tensor(shape, rng()));
    auto b = std::make_shared<const Basis>(p.space, oracle::random_members(*p.space, 8, rng));
    Eigen::VectorXd theta(static_cast<Eigen::Index>(b->size()));
    for (auto& t : theta) t = g(rng);
    const ModelState st(std::make_shared<const ZetaKernel>(b), theta);
    const Eigen::VectorXd grad = gradient(st.eta(), compute_eta_hat(p, b));
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp[i] += h;
      tm[i] -= h;
      const double fd = (oracle::kl_at(p, *b, tp) - oracle::kl_at(p, *b, tm)) / (2 * h);
      EXPECT_NEAR(grad[i], fd, 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(SolveGd, EmptyBasisIsUniformInZeroIterations) {
  const NormalizedTensor p = normalize(synthetic_tensor(Shape{3, 3}, 1));
  const DecompositionResult r = solve_gd(p, std::make_shared<const Basis>(p.space), config(Algorithm::GradientDescent));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  for (double v : r.q.probs) EXPECT_NEAR(v, 1.0 / 9, 1e-15);
}

TEST(SolveGd, DecomposableInputIsAFixedPoint) {
  // Outer product of (1,2,3) and (4,5): independent rows and columns.
  const NormalizedTensor p = normalize(RawTensor(Shape{3, 2}, {4, 5, 8, 10, 12, 15}));
  auto b = std::make_shared<const Basis>(build_basis_b1(p.space));
  const DecompositionResult r = solve_gd(p, b, config(Algorithm::GradientDescent, 1e-10));
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.kl, 1e-10);
}

TEST(SolveGdAndNg, IndependenceClosedForm) {
  const NormalizedTensor p = independence_p();
  auto b = basis_of(p.space, {{1, 2}, {2, 1}});
  // Product of marginals: rows (0.5, 0.5), columns (0.7, 0.3).
  const std::vector<double> expect{0.35, 0.15, 0.35, 0.15};
  const DecompositionResult gd = solve_gd(p, b, config(Algorithm::GradientDescent, 1e-10));
  const DecompositionResult ng = solve_ng(p, b, config(Algorithm::NaturalGradient, 1e-12));
  ASSERT_TRUE(gd.converged);
  ASSERT_TRUE(ng.converged);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(gd.q.probs[i], expect[i], 1e-9);
    EXPECT_NEAR(ng.q.probs[i], expect[i], 1e-9);
    EXPECT_NEAR(gd.q.probs[i], ng.q.probs[i], 1e-6);
  }
}

TEST(SolveNg, FullBasisReproducesInput) {
  const NormalizedTensor p = normalize(synthetic_tensor(Shape{4, 3, 3}, 8));
  const DecompositionResult r =
      solve_ng(p, std::make_shared<const Basis>(build_basis_full(p.space)), config(Algorithm::NaturalGradient, 1e-12));
  ASSERT_TRUE(r.converged);
  for (std::size_t i = 0; i < p.probs.size(); ++i) EXPECT_NEAR(r.q.probs[i], p.probs[i], 1e-8);
}

TEST(SolveNg, ResultFieldsAreConsistent) {
  const NormalizedTensor p = normalize(synthetic_tensor(Shape{5, 5, 5}, 12));
  auto b = std::make_shared<const Basis>(basis_union(build_basis_b1(p.space), build_basis_b2(p.space, 2)));
  SolverConfig c = config(Algorithm::NaturalGradient, 1e-10);
  c.record_trace = true;
  const DecompositionResult r = solve_ng(p, b, c);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.max_residual, 1e-10);
  EXPECT_LE((r.eta.values - r.eta_hat.values).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(r.kl, oracle::kl(p.probs, r.q.probs), 1e-12);
  EXPECT_NEAR(r.psi, -std::log(r.q.probs[0]), 1e-10);
  EXPECT_EQ(r.q.total_mass, p.total_mass);
  EXPECT_EQ(static_cast<long>(r.trace.size()), r.iterations + 1);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].kl, r.trace[i - 1].kl + 1e-12);
}

TEST(SolveNg, NotConvergedWhenIterationCapIsHit) {
  const NormalizedTensor p = normalize(synthetic_tensor(Shape{6, 6, 6}, 2));
  auto b = std::make_shared<const Basis>(build_basis_b2(p.space, 3));
  SolverConfig c = config(Algorithm::NaturalGradient, 1e-14);
  c.max_iterations = 1;
  const DecompositionResult r = solve_ng(p, b, c);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 1);
}

TEST(SolveGd, DivergenceIsReported) {
  const NormalizedTensor p = normalize(synthetic_tensor(Shape{8, 8}, 3));
  auto b = std::make_shared<const Basis>(build_basis_full(p.space));
  SolverConfig c = config(Algorithm::GradientDescent);
  c.learning_rate = 1e6;
  EXPECT_THROW(solve_gd(p, b, c), NumericalError);
}

TEST(Solve, RejectsMismatchedConfig) {
  const NormalizedTensor p = independence_p();
  auto b = basis_of(p.space, {{1, 2}});
  EXPECT_THROW(solve_gd(p, b, config(Algorithm::NaturalGradient)), DomainError);
  EXPECT_THROW(solve_ng(p, b, config(Algorithm::GradientDescent)), DomainError);
}

TEST(Decompose, GdAndNgAgree) {
  const NormalizedTensor p = normalize(synthetic_tensor(Shape{4, 4, 3}, 5));
  auto b = std::make_shared<const Basis>(basis_union(build_basis_b1(p.space), build_basis_b2(p.space, 2)));
  const DecompositionResult gd = decompose(p, b, config(Algorithm::GradientDescent, 1e-9));
  const DecompositionResult ng = decompose(p, b, config(Algorithm::NaturalGradient, 1e-9));
  ASSERT_TRUE(gd.converged && ng.converged);
  for (std::size_t i = 0; i < p.probs.size(); ++i) EXPECT_NEAR(gd.q.probs[i], ng.q.probs[i], 1e-5);
}

TEST(Decompose, EmptyBasisIsUniform) {
  const NormalizedTensor p = normalize(synthetic_tensor(Shape{2, 5}, 4));
  const DecompositionResult r = decompose(p, std::make_shared<const Basis>(p.space), config(Algorithm::NaturalGradient));
  for (double v : r.q.probs) EXPECT_NEAR(v, 0.1, 1e-15);
}

TEST(Decompose, FileBasisMatchesProgrammatic) {
  const NormalizedTensor p = normalize(synthetic_tensor(Shape{3, 3, 2}, 6));
  const Basis b1 = build_basis_b1(p.space);
  std::stringstream text;
  for (const auto& v : b1.members()) text << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  auto from_file = std::make_shared<const Basis>(load_basis(text, p.space));
  const DecompositionResult a = decompose(p, from_file, config(Algorithm::NaturalGradient));
  const DecompositionResult c = decompose(p, std::make_shared<const Basis>(b1), config(Algorithm::NaturalGradient));
  EXPECT_EQ(a.q.probs, c.q.probs);
}

TEST(Decompose, ZeroMassUpSetIsPruned) {
  // No mass anywhere in the second row, so eta_hat of (2,1) is 0.
  const RawTensor x(Shape{2, 3}, {1, 2, 3, 0, 0, 0});
  const NormalizedTensor p = normalize(x);
  auto b = std::make_shared<const Basis>(build_basis_b1(p.space));
  const DecompositionResult r = decompose(p, b, config(Algorithm::NaturalGradient, 1e-12));
  ASSERT_TRUE(r.converged);
  EXPECT_EQ(r.pruned, (std::vector<IndexVector>{{2, 1}}));
  EXPECT_EQ(r.theta.basis->size(), 2u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(r.q.probs[i], p.probs[i], 1e-10);
  EXPECT_LE(r.kl, 1e-12);
}

TEST(Decompose, MismatchedSpaceIsRejected) {
  const NormalizedTensor p = independence_p();
  auto b = std::make_shared<const Basis>(build_basis_b1(full(Shape{2, 3})));
  EXPECT_THROW(decompose(p, b, config(Algorithm::NaturalGradient)), DomainError);
}

// Moment matching and optimality on random small instances.
TEST(DecomposeProperty, ConvergedPointIsOptimal) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> d(-0.1, 0.1);
  for (int trial = 0; trial < 10; ++trial) {
    const NormalizedTensor p = normalize(synthetic_tensor(Shape{3, 3, 3}, rng()));
    auto b = std::make_shared<const Basis>(p.space, oracle::random_members(*p.space, 10, rng));
    const DecompositionResult r = decompose(p, b, config(Algorithm::NaturalGradient, 1e-10));
    ASSERT_TRUE(r.converged);
    const double base = oracle::kl_at(p, *b, r.theta.values);
    for (int k = 0; k < 50; ++k) {
      Eigen::VectorXd t = r.theta.values;
      for (auto& x : t) x += d(rng);
      EXPECT_GE(oracle::kl_at(p, *b, t), base - 1e-9);
    }
  }
}
