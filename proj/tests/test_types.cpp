#include "ajd/types.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "oracles.hpp"

namespace ajd {
namespace {

TEST(SymmetricMatrixSet, RejectsEmptyAndBadDimensions) {
  EXPECT_THROW(SymmetricMatrixSet::FromMatrices({}), std::invalid_argument);
  EXPECT_THROW(
      SymmetricMatrixSet::FromMatrices({Matrix::Identity(2, 2), Matrix::Identity(3, 3)}),
      std::invalid_argument);
  EXPECT_THROW(SymmetricMatrixSet::FromRaw(0, 2, {}), std::invalid_argument);
}

TEST(SymmetricMatrixSet, SymmetrizesSmallAsymmetry) {
  Matrix m(2, 2);
  m << 1.0, 2.0 + 1e-12, 2.0, 3.0;
  const auto set = SymmetricMatrixSet::FromMatrices({m});
  EXPECT_DOUBLE_EQ(set.matrix(0)(0, 1), set.matrix(0)(1, 0));
  EXPECT_NEAR(set.matrix(0)(0, 1), 2.0, 1e-11);
}

TEST(SymmetricMatrixSet, RejectsLargeAsymmetry) {
  Matrix m(2, 2);
  m << 1.0, 2.001, 2.0, 3.0;
  EXPECT_THROW(SymmetricMatrixSet::FromMatrices({m}), std::invalid_argument);
}

TEST(TransformSet, IdentityIsExact) {
  std::mt19937_64 rng(1);
  const auto cset = testing::random_spd_set(4, 5, rng);
  const auto d = transform_set(cset, Diagonalizer::Identity(5));
  for (int i = 0; i < cset.size(); ++i) {
    EXPECT_TRUE((Matrix(d.matrix(i)).array() == Matrix(cset.matrix(i)).array()).all());
  }
}

TEST(TransformSet, DiagonalCongruenceByHand) {
  Matrix c(2, 2);
  c << 1.0, 0.0, 0.0, 2.0;
  Matrix b(2, 2);
  b << 2.0, 0.0, 0.0, 3.0;
  const auto d = transform_set(SymmetricMatrixSet::FromMatrices({c}),
                               Diagonalizer::FromMatrix(b));
  EXPECT_DOUBLE_EQ(d.matrix(0)(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(d.matrix(0)(1, 1), 18.0);
  EXPECT_DOUBLE_EQ(d.matrix(0)(0, 1), 0.0);
}

TEST(TransformSet, ShearCongruenceByHand) {
  Matrix c(2, 2);
  c << 2.0, 1.0, 1.0, 2.0;
  Matrix b(2, 2);
  b << 1.0, 1.0, 0.0, 1.0;
  const auto d = transform_set(SymmetricMatrixSet::FromMatrices({c}),
                               Diagonalizer::FromMatrix(b));
  EXPECT_DOUBLE_EQ(d.matrix(0)(0, 0), 6.0);
  EXPECT_DOUBLE_EQ(d.matrix(0)(0, 1), 3.0);
  EXPECT_DOUBLE_EQ(d.matrix(0)(1, 0), 3.0);
  EXPECT_DOUBLE_EQ(d.matrix(0)(1, 1), 2.0);
}

TEST(TransformSet, CompositionLaw) {
  std::mt19937_64 rng(2);
  const auto cset = testing::random_spd_set(4, 5, rng);
  const auto b1 = testing::random_diagonalizer(5, rng);
  const auto b2 = testing::random_diagonalizer(5, rng);
  const auto two_steps = transform_set(transform_set(cset, b1), b2.matrix());
  const auto one_step = transform_set(
      cset, Diagonalizer::FromMatrix(b2.matrix() * b1.matrix()));
  for (int i = 0; i < cset.size(); ++i) {
    const double scale = Matrix(one_step.matrix(i)).cwiseAbs().maxCoeff();
    EXPECT_LT(
        (Matrix(two_steps.matrix(i)) - Matrix(one_step.matrix(i))).cwiseAbs().maxCoeff(),
        1e-10 * scale);
  }
}

TEST(TransformSet, OutputIsBitExactSymmetric) {
  std::mt19937_64 rng(3);
  const auto cset = testing::random_spd_set(6, 7, rng);
  const auto b = testing::random_diagonalizer(7, rng);
  const auto d = transform_set(cset, b);
  for (int i = 0; i < d.size(); ++i) {
    const Matrix m = d.matrix(i);
    EXPECT_TRUE((m.array() == m.transpose().array()).all());
    EXPECT_GT(m.diagonal().minCoeff(), 0.0);  // SPD input, invertible B
  }
}

TEST(TransformSet, DimensionMismatchThrows) {
  std::mt19937_64 rng(4);
  const auto cset = testing::random_spd_set(2, 3, rng);
  EXPECT_THROW(transform_set(cset, Diagonalizer::Identity(4)),
               std::invalid_argument);
}

TEST(ValidateSpd, FlagsIndefiniteMatrices) {
  const auto all_good = validate_spd(
      SymmetricMatrixSet::FromMatrices({Matrix::Identity(3, 3)}));
  EXPECT_TRUE(all_good.all_positive_definite);

  Matrix indefinite(2, 2);
  indefinite << 1.0, 0.0, 0.0, -1.0;
  const auto flagged = validate_spd(SymmetricMatrixSet::FromMatrices(
      {Matrix::Identity(2, 2), indefinite}));
  EXPECT_FALSE(flagged.all_positive_definite);
  EXPECT_TRUE(flagged.positive_definite[0]);
  EXPECT_FALSE(flagged.positive_definite[1]);
  ASSERT_EQ(flagged.failures.size(), 1u);
  EXPECT_EQ(flagged.failures[0], 1);

  // eigenvalues 3 and -1: symmetric but not positive definite
  Matrix saddle(2, 2);
  saddle << 1.0, 2.0, 2.0, 1.0;
  const auto saddle_report =
      validate_spd(SymmetricMatrixSet::FromMatrices({saddle}));
  EXPECT_FALSE(saddle_report.all_positive_definite);
}

TEST(Diagonalizer, TracksLogAbsDet) {
  Matrix b(2, 2);
  b << 2.0, 0.0, 0.0, 3.0;
  auto diag = Diagonalizer::FromMatrix(b);
  EXPECT_NEAR(diag.log_abs_det(), std::log(6.0), 1e-12);

  std::mt19937_64 rng(5);
  for (int step = 0; step < 20; ++step) {
    const Matrix m = testing::random_diagonalizer(2, rng).matrix();
    diag.apply_update(m, log_abs_det(m));
  }
  const double direct = log_abs_det(diag.matrix());
  EXPECT_LT(std::abs(diag.log_abs_det() - direct),
            1e-8 * std::max(1.0, std::abs(direct)));
}

TEST(Diagonalizer, RejectsSingular) {
  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 1.0;
  EXPECT_THROW(Diagonalizer::FromMatrix(singular), std::invalid_argument);
  EXPECT_EQ(log_abs_det(singular), -std::numeric_limits<double>::infinity());
}

}  // namespace
}  // namespace ajd
