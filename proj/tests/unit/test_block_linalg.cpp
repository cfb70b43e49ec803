#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "abw/block_linalg.hpp"
#include "instances.hpp"

namespace {

using namespace abw;
using abw::testing::gaussian_matrix;
using abw::testing::householder;
using abw::testing::lower;
using abw::testing::rows;

constexpr double kEps = std::numeric_limits<double>::epsilon();

TEST(BlockShape, RejectsNonPositiveDimensions) {
  EXPECT_THROW(BlockShape(0, 1), InvalidInput);
  EXPECT_THROW(BlockShape(2, 0), InvalidInput);
  EXPECT_EQ(BlockShape(3, 2).size(), 6);
}

TEST(BlockMatrix, BlockAccessorAddressesDxDBlocks) {
  Matrix m(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = 10 * i + j;
  const BlockMatrix a(BlockShape(2, 2), m);
  EXPECT_EQ(a.block(1, 0)(0, 0), 20);
  EXPECT_EQ(a.block(1, 0)(1, 1), 31);
  EXPECT_EQ(a.block(0, 1)(0, 1), 3);
  EXPECT_THROW(a.block(2, 0), InvalidInput);
  EXPECT_THROW(BlockMatrix(BlockShape(2, 2), Matrix::Zero(3, 3)), ShapeError);
}

TEST(BlockMatrix, RejectsNonFinite) {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(BlockMatrix(BlockShape(2, 1), m), InvalidInput);
}

TEST(BlockLowerTriangular, EnforcesZerosAboveBlockDiagonal) {
  // Entries inside a diagonal block may be anything.
  EXPECT_NO_THROW(BlockLowerTriangular(BlockShape(1, 2), rows({{1, 2}, {3, 4}})));
  EXPECT_THROW(BlockLowerTriangular(BlockShape(2, 1), rows({{1, 2}, {3, 4}})), InvalidInput);
  const auto projected = BlockLowerTriangular::project(BlockShape(2, 1), rows({{1, 2}, {3, 4}}));
  EXPECT_EQ(projected.matrix()(0, 1), 0.0);
  EXPECT_EQ(projected.matrix()(1, 0), 3.0);
}

TEST(BlockDiagOrthogonal, ValidatesStructure) {
  EXPECT_NO_THROW(BlockDiagOrthogonal(BlockShape(2, 1), rows({{-1, 0}, {0, 1}})));
  EXPECT_THROW(BlockDiagOrthogonal(BlockShape(2, 1), rows({{2, 0}, {0, 1}})), InvalidInput);
  EXPECT_THROW(BlockDiagOrthogonal(BlockShape(2, 1), rows({{1, 0.5}, {0, 1}})), InvalidInput);
}

TEST(SvdSmall, Identity) {
  const SmallSvd svd = svd_small(SmallMatrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(svd.singular_values(0), 1.0);
  EXPECT_DOUBLE_EQ(svd.singular_values(1), 1.0);
  EXPECT_EQ(svd.rank, 2);
}

TEST(SvdSmall, Zero) {
  const SmallSvd svd = svd_small(SmallMatrix::Zero(2, 2));
  EXPECT_EQ(svd.singular_values(0), 0.0);
  EXPECT_EQ(svd.singular_values(1), 0.0);
  EXPECT_EQ(svd.rank, 0);
}

TEST(SvdSmall, GoldenRatioBlock) {
  SmallMatrix a(2, 2);
  a << 0, -1, 1, 1;
  // Oracle: eigenvalues of A^T A from its characteristic polynomial
  // lambda^2 - tr * lambda + det.
  const SmallMatrix ata = a.transpose() * a;
  const double tr = ata.trace();
  const double det = ata.determinant();
  const double disc = std::sqrt(tr * tr - 4.0 * det);
  const double s1 = std::sqrt((tr + disc) / 2.0);
  const double s2 = std::sqrt((tr - disc) / 2.0);
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  ASSERT_NEAR(s1, phi, 1e-15);
  ASSERT_NEAR(s2, 1.0 / phi, 1e-15);

  const SmallSvd svd = svd_small(a);
  EXPECT_NEAR(svd.singular_values(0), s1, 1e-14);
  EXPECT_NEAR(svd.singular_values(1), s2, 1e-14);
  EXPECT_EQ(svd.rank, 2);
}

TEST(SvdSmall, RejectsNonFiniteAndBadTolerance) {
  SmallMatrix a = SmallMatrix::Identity(2, 2);
  a(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(svd_small(a), InvalidInput);
  EXPECT_THROW(svd_small(SmallMatrix::Identity(2, 2), 0.0), InvalidInput);
  EXPECT_THROW(svd_small(SmallMatrix::Identity(2, 2), 1.0), InvalidInput);
}

TEST(SvdSmall, ReconstructionAndSignConvention) {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> dim(1, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = dim(rng);
    const SmallMatrix a = gaussian_matrix(d, d, rng);
    const SmallSvd svd = svd_small(a);
    const SmallMatrix rebuilt = svd.u * svd.singular_values.asDiagonal() * svd.v.transpose();
    ASSERT_LE((a - rebuilt).norm(), 10.0 * kEps * a.norm()) << "trial " << trial;
    for (int i = 1; i < d; ++i) ASSERT_GE(svd.singular_values(i - 1), svd.singular_values(i));
    for (int j = 0; j < d; ++j) {
      Eigen::Index pivot;
      svd.u.col(j).cwiseAbs().maxCoeff(&pivot);
      ASSERT_GE(svd.u(pivot, j), 0.0);
    }
  }
}

TEST(SvdSmall, RankInvariantUnderReflections) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 3;
    const int r = trial % 4;
    SmallMatrix a = SmallMatrix::Zero(d, d);
    if (r > 0) a = gaussian_matrix(d, r, rng) * gaussian_matrix(r, d, rng);
    const SmallMatrix h1 = householder(gaussian_matrix(d, 1, rng).col(0));
    const SmallMatrix h2 = householder(gaussian_matrix(d, 1, rng).col(0));
    const int base = svd_small(a).rank;
    EXPECT_EQ(base, r);
    EXPECT_EQ(svd_small(h1 * a).rank, base);
    EXPECT_EQ(svd_small(a * h2).rank, base);
    EXPECT_EQ(svd_small(h1 * a * h2).rank, base);
  }
}

TEST(NumericalRank, RelativeThreshold) {
  Vector s(3);
  s << 1.0, 3e-9, 1e-10;
  EXPECT_EQ(numerical_rank(s, 1e-9), 2);
  EXPECT_TRUE(rank_is_marginal(s, 1e-9));
  s << 1.0, 0.5, 0.0;
  EXPECT_EQ(numerical_rank(s, 1e-9), 2);
  EXPECT_FALSE(rank_is_marginal(s, 1e-9));
}

TEST(DiagBlockProduct, IdentityGivesIdentityBlocks) {
  const auto id = BlockLowerTriangular::identity(BlockShape(3, 2));
  for (int t = 0; t < 3; ++t) {
    EXPECT_TRUE(diag_block_product(id, id, t).isApprox(SmallMatrix::Identity(2, 2)));
  }
}

TEST(DiagBlockProduct, FiltrationPair) {
  const auto l = lower(2, 1, {{0, 0}, {1, 1}});
  const auto m = lower(2, 1, {{0, 0}, {0, std::sqrt(2.0)}});
  EXPECT_EQ(diag_block_product(m, l, 0)(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(diag_block_product(m, l, 1)(0, 0), std::sqrt(2.0));
}

TEST(DiagBlockProduct, TwoGeodesicsPair) {
  const auto l = lower(2, 1, {{1, 0}, {1, 1}});
  const auto m = lower(2, 1, {{1, 0}, {-1, 1}});
  EXPECT_EQ(diag_block_product(m, l, 0)(0, 0), 0.0);
  EXPECT_EQ(diag_block_product(m, l, 1)(0, 0), 1.0);
}

TEST(DiagBlockProduct, MatchesFullProduct) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const BlockShape shape = abw::testing::random_shape(rng);
    const auto l = abw::testing::random_lower(shape, rng);
    const auto m = abw::testing::random_lower(shape, rng);
    const Matrix full = m.matrix().transpose() * l.matrix();
    const int d = shape.dim();
    for (int t = 0; t < shape.steps(); ++t) {
      const SmallMatrix expected = full.block(t * d, t * d, d, d);
      EXPECT_LE((diag_block_product(m, l, t) - expected).norm(), 1e-13 * (1.0 + expected.norm()));
    }
  }
  EXPECT_THROW(diag_block_product(BlockLowerTriangular::identity(BlockShape(2, 1)),
                                  BlockLowerTriangular::identity(BlockShape(1, 2)), 0),
               ShapeError);
}

TEST(Frobenius, InnerProductExamples) {
  const Matrix a = rows({{1, 0}, {1, 1}});
  const Matrix b = rows({{1, 0}, {-1, 1}});
  EXPECT_EQ(frobenius_inner(Matrix::Identity(2, 2), Matrix::Identity(2, 2)), 2.0);
  EXPECT_EQ(frobenius_inner(a, a), 3.0);
  EXPECT_EQ(frobenius_inner(a, b), 1.0);
  EXPECT_DOUBLE_EQ(frobenius_norm(a), std::sqrt(3.0));
  EXPECT_THROW(frobenius_inner(a, Matrix::Identity(3, 3)), ShapeError);
}

TEST(BlockCholesky, Identity) {
  const auto l = block_cholesky(Matrix::Identity(4, 4), BlockShape(2, 2));
  EXPECT_EQ(l.matrix(), Matrix::Identity(4, 4));
}

TEST(BlockCholesky, RankDeficientGivesZeroColumn) {
  const auto l = block_cholesky(rows({{0, 0}, {0, 2}}), BlockShape(2, 1));
  EXPECT_EQ(l.matrix()(0, 0), 0.0);
  EXPECT_EQ(l.matrix()(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(l.matrix()(1, 1), std::sqrt(2.0));

  // Rank one in the second direction: the trailing column vanishes.
  const auto k = block_cholesky(rows({{1, 1}, {1, 1}}), BlockShape(2, 1));
  EXPECT_EQ(k.matrix(), rows({{1, 0}, {1, 0}}));
}

TEST(BlockCholesky, ExistingFactorIsReturned) {
  const Matrix l = rows({{1, 0}, {1, 1}});
  const auto out = block_cholesky(l * l.transpose(), BlockShape(2, 1));
  EXPECT_LE((out.matrix() - l).norm(), 1e-15);
}

TEST(BlockCholesky, RejectsIndefiniteAndAsymmetric) {
  EXPECT_THROW(block_cholesky(rows({{1, 2}, {2, 1}}), BlockShape(2, 1)), NotPSD);
  EXPECT_THROW(block_cholesky(rows({{1, 0.5}, {0, 1}}), BlockShape(2, 1)), NotPSD);
  EXPECT_THROW(block_cholesky(Matrix::Identity(3, 3), BlockShape(2, 1)), ShapeError);
  EXPECT_EQ(block_cholesky(Matrix::Zero(2, 2), BlockShape(1, 2)).matrix(), Matrix::Zero(2, 2));
}

TEST(BlockCholesky, RoundTripOnRandomFactors) {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 500; ++trial) {
    const BlockShape shape = abw::testing::random_shape(rng);
    auto l = abw::testing::random_lower(shape, rng);
    if (trial % 3 == 0) l = abw::testing::degenerate(l, rng);
    const Matrix sigma = l.matrix() * l.matrix().transpose();
    const auto factor = block_cholesky(sigma, shape);
    const double err = (factor.matrix() * factor.matrix().transpose() - sigma).norm();
    ASSERT_LE(err, 1e-10 * sigma.norm()) << "trial " << trial;
  }
}

// Random triangular factors of size 32 are exponentially ill-conditioned, so
// L L^T is singular to working precision.
TEST(BlockCholesky, NumericallySingularCovariances) {
  std::mt19937_64 rng(77);
  for (const BlockShape shape : {BlockShape(32, 1), BlockShape(8, 4), BlockShape(16, 3)}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto l = abw::testing::random_lower(shape, rng);
      const Matrix sigma = l.matrix() * l.matrix().transpose();
      const auto factor = block_cholesky(sigma, shape);
      const double err = (factor.matrix() * factor.matrix().transpose() - sigma).norm();
      ASSERT_LE(err, 1e-12 * sigma.norm()) << "T=" << shape.steps() << " trial " << trial;
    }
  }
}

}  // namespace
