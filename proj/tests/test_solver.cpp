#include "ajd/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "ajd/datasets.hpp"
#include "oracles.hpp"

namespace ajd {
namespace {

TEST(Solve, DiagonalSetConvergesImmediately) {
  Matrix c = Matrix::Zero(3, 3);
  c.diagonal() << 1.0, 2.0, 3.0;
  const auto cset = SymmetricMatrixSet::FromMatrices({c});
  const auto result = solve(cset, Diagonalizer::Identity(3), SolverConfig{});
  EXPECT_EQ(result.trace.status, SolveStatus::kConverged);
  EXPECT_TRUE(result.trace.records.empty());
  EXPECT_EQ(result.trace.initial_grad_norm, 0.0);
  EXPECT_NEAR(result.trace.initial_loss, 0.0, 1e-14);
}

TEST(Solve, ExactlyDiagonalizableSetReachesMachineFloor) {
  const auto data = gen_synthetic({50, 10, 0.0, 3});
  SolverConfig config;
  config.grad_tol = 1e-12;
  config.max_iter = 50;
  const auto result = solve(data.set, whitener(data.set), config);
  EXPECT_EQ(result.trace.status, SolveStatus::kConverged);
  EXPECT_LE(result.trace.records.size(), 50u);
  EXPECT_LT(result.trace.records.back().grad_norm, 1e-12);
  EXPECT_LT(std::abs(result.trace.records.back().loss), 1e-14);
}

TEST(Solve, BaselineFindsSameMinimumMoreSlowly) {
  const auto data = gen_synthetic({50, 10, 0.0, 3});
  const auto b0 = whitener(data.set);
  SolverConfig qn;
  qn.grad_tol = 1e-9;
  qn.max_iter = 100000;
  SolverConfig gd = qn;
  gd.method = Method::kGradientDescent;
  const auto rq = solve(data.set, b0, qn);
  const auto rg = solve(data.set, b0, gd);
  EXPECT_EQ(rq.trace.status, SolveStatus::kConverged);
  EXPECT_EQ(rg.trace.status, SolveStatus::kConverged);
  EXPECT_GT(rg.trace.records.size(), rq.trace.records.size());
  EXPECT_LT(std::abs(rq.trace.records.back().loss -
                     rg.trace.records.back().loss),
            1e-10);
}

TEST(Solve, LossStrictlyDecreasesAcrossAcceptedIterations) {
  const auto data = gen_synthetic({20, 8, 0.2, 5});
  const auto b0 = whitener(data.set);
  for (Method method : {Method::kQuasiNewton, Method::kGradientDescent}) {
    SolverConfig config;
    config.grad_tol = 1e-8;
    config.max_iter = 20000;
    config.method = method;
    const auto result = solve(data.set, b0, config);
    double previous = result.trace.initial_loss;
    for (const TraceRecord& rec : result.trace.records) {
      EXPECT_LT(rec.loss, previous);
      previous = rec.loss;
      EXPECT_EQ(rec.step_size, std::ldexp(1.0, -rec.halvings));
    }
  }
}

TEST(Solve, EquivariantUnderDataTransformation) {
  std::mt19937_64 rng(6);
  const auto cset = testing::random_spd_set(8, 5, rng);
  const Matrix m = testing::random_diagonalizer(5, rng).matrix();
  std::vector<Matrix> transformed;
  for (int i = 0; i < cset.size(); ++i) {
    const Matrix mi = m * cset.matrix(i) * m.transpose();
    transformed.push_back(0.5 * (mi + mi.transpose()));
  }
  const auto mset = SymmetricMatrixSet::FromMatrices(transformed);

  SolverConfig config;
  config.grad_tol = 1e-7;
  config.max_iter = 5000;
  const auto result = solve(mset, whitener(mset), config);
  ASSERT_EQ(result.trace.status, SolveStatus::kConverged);

  // B_out M diagonalizes the original set to the run's own final loss.
  const double reported = result.trace.records.back().loss;
  const double replayed =
      loss_at(cset, Diagonalizer::FromMatrix(result.b.matrix() * m));
  EXPECT_LT(std::abs(reported - replayed), 1e-8 * (1.0 + std::abs(reported)));
}

TEST(Solve, DeterministicTraces) {
  const auto data = gen_synthetic({20, 6, 0.1, 9});
  const auto b0 = whitener(data.set);
  SolverConfig config;
  config.grad_tol = 1e-8;
  config.max_iter = 10000;
  const auto r1 = solve(data.set, b0, config);
  const auto r2 = solve(data.set, b0, config);
  ASSERT_EQ(r1.trace.records.size(), r2.trace.records.size());
  for (std::size_t k = 0; k < r1.trace.records.size(); ++k) {
    EXPECT_EQ(r1.trace.records[k].loss, r2.trace.records[k].loss);
    EXPECT_EQ(r1.trace.records[k].grad_norm, r2.trace.records[k].grad_norm);
    EXPECT_EQ(r1.trace.records[k].step_size, r2.trace.records[k].step_size);
  }
}

TEST(Solve, IncrementalLossStaysNearDirectPath) {
  const auto data = gen_synthetic({30, 8, 0.1, 11});
  SolverConfig config;
  config.grad_tol = 1e-8;
  config.max_iter = 10000;
  const auto result = solve(data.set, whitener(data.set), config);
  const double direct = loss_at(data.set, result.b);
  const double incremental = result.trace.records.back().loss;
  EXPECT_LT(std::abs(direct - incremental),
            1e-9 * (1.0 + std::abs(direct)));
}

TEST(Solve, RejectsNonSpdInputBeforeIterating) {
  Matrix indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  const auto cset = SymmetricMatrixSet::FromMatrices({indefinite});
  EXPECT_THROW(solve(cset, Diagonalizer::Identity(2), SolverConfig{}),
               std::domain_error);
}

TEST(Solve, ValidatesConfig) {
  const auto cset = SymmetricMatrixSet::FromMatrices({Matrix::Identity(2, 2)});
  SolverConfig bad;
  bad.grad_tol = 0.0;
  EXPECT_THROW(solve(cset, Diagonalizer::Identity(2), bad),
               std::invalid_argument);
  bad = SolverConfig{};
  bad.max_iter = 0;
  EXPECT_THROW(solve(cset, Diagonalizer::Identity(2), bad),
               std::invalid_argument);
}

TEST(Solve, LineSearchFailureReturnsLastIterate) {
  // An unreachable tolerance: the run must end at the numerical floor with
  // the last iterate, not an exception.
  const auto data = gen_synthetic({10, 5, 0.0, 7});
  SolverConfig config;
  config.grad_tol = 1e-300;
  config.max_iter = 100000;
  const auto result = solve(data.set, whitener(data.set), config);
  EXPECT_EQ(result.trace.status, SolveStatus::kLineSearchFailed);
  EXPECT_TRUE(result.b.matrix().allFinite());
  EXPECT_LT(result.trace.records.back().grad_norm, 1e-10);
}

TEST(BacktrackingSearch, ZeroDirectionFails) {
  std::mt19937_64 rng(8);
  const auto cset = testing::random_spd_set(4, 3, rng);
  const IncrementalLoss loss_fn(cset);
  const auto d = transform_set(cset, Diagonalizer::Identity(3));
  const double current = loss_fn(d, 0.0);
  const auto ls =
      backtracking_search(loss_fn, d, 0.0, Matrix::Zero(3, 3), current, 30);
  EXPECT_FALSE(ls.success);
  EXPECT_EQ(ls.candidates_tried, 30);
}

TEST(BacktrackingSearch, StepsPastBarrierAreHalvedAway) {
  // alpha = 1 makes I - direction exactly singular (infinite loss); the
  // halved step improves, so the search must settle on 1/2.
  Matrix c(2, 2);
  c << 1.0, 0.99, 0.99, 1.0;
  const auto cset = SymmetricMatrixSet::FromMatrices({c});
  const IncrementalLoss loss_fn(cset);
  const auto d = transform_set(cset, Diagonalizer::Identity(2));
  const double current = loss_fn(d, 0.0);
  Matrix direction(2, 2);
  direction << 0.0, 1.0, 1.0, 0.0;
  const auto ls = backtracking_search(loss_fn, d, 0.0, direction, current, 30);
  ASSERT_TRUE(ls.success);
  EXPECT_EQ(ls.alpha, 0.5);
  EXPECT_EQ(ls.halvings, 1);
  EXPECT_LT(ls.new_loss, current);
}

TEST(BacktrackingSearch, FullStepsInTheQuadraticRegime) {
  const auto data = gen_synthetic({50, 10, 0.0, 3});
  SolverConfig config;
  config.grad_tol = 1e-12;
  config.max_iter = 100;
  const auto result = solve(data.set, whitener(data.set), config);
  ASSERT_EQ(result.trace.status, SolveStatus::kConverged);
  ASSERT_GE(result.trace.records.size(), 2u);
  const auto& tail = result.trace.records.back();
  EXPECT_EQ(tail.step_size, 1.0);
  EXPECT_EQ(tail.halvings, 0);
}

TEST(QuadraticRateCheck, DetectsQuadraticTail) {
  const auto data = gen_synthetic({50, 10, 0.0, 1});
  SolverConfig config;
  config.grad_tol = 1e-12;
  config.max_iter = 100;
  const auto result = solve(data.set, whitener(data.set), config);
  const RateReport report = quadratic_rate_check(result.trace);
  ASSERT_TRUE(report.conclusive);
  EXPECT_GE(report.fitted_order, 1.5);
  EXPECT_GT(report.quadratic_constant, 0.0);
}

TEST(QuadraticRateCheck, LinearRegimeFitsOrderNearOne) {
  const auto data = gen_synthetic({40, 10, 0.2, 4});
  SolverConfig config;
  config.grad_tol = 1e-7;
  config.max_iter = 20000;
  const auto result = solve(data.set, whitener(data.set), config);
  ASSERT_EQ(result.trace.status, SolveStatus::kConverged);
  const RateReport report = quadratic_rate_check(result.trace);
  ASSERT_TRUE(report.conclusive);
  EXPECT_LT(report.fitted_order, 1.3);
  EXPECT_GT(report.fitted_order, 0.7);
}

TEST(QuadraticRateCheck, ConstantGradientIsInconclusive) {
  SolverTrace trace;
  trace.initial_grad_norm = 1e-4;
  for (int t = 1; t <= 5; ++t) {
    trace.records.push_back({t, 1.0 / t, 1e-4, 1.0, 0, 0.0});
  }
  const RateReport report = quadratic_rate_check(trace);
  EXPECT_FALSE(report.conclusive);
}

TEST(QuadraticRateCheck, TooFewPairsIsInconclusive) {
  SolverTrace trace;
  trace.initial_grad_norm = 0.5;
  trace.records.push_back({1, 0.1, 1e-5, 1.0, 0, 0.0});
  EXPECT_FALSE(quadratic_rate_check(trace).conclusive);
}

}  // namespace
}  // namespace ajd
