#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "abw/abw_metric.hpp"
#include "abw/oracle.hpp"
#include "instances.hpp"

namespace {

using namespace abw;
using abw::testing::degenerate;
using abw::testing::lower;
using abw::testing::orth;
using abw::testing::random_lower;
using abw::testing::random_shape;
using abw::testing::rows;

const double kSqrt2 = std::sqrt(2.0);

// Two factors of the same Gaussian law that differ in adapted structure.
BlockLowerTriangular filtration_l() { return lower(2, 1, {{0, 0}, {1, 1}}); }
BlockLowerTriangular filtration_m() { return lower(2, 1, {{0, 0}, {0, kSqrt2}}); }

// Pair with two distinct geodesics.
BlockLowerTriangular two_geo_l() { return lower(2, 1, {{1, 0}, {1, 1}}); }
BlockLowerTriangular two_geo_m() { return lower(2, 1, {{1, 0}, {-1, 1}}); }

std::vector<BlockDiagOrthogonal> sign_patterns_t2() {
  std::vector<BlockDiagOrthogonal> out;
  for (const double a : {1.0, -1.0})
    for (const double b : {1.0, -1.0}) out.push_back(orth(2, 1, {{a, 0}, {0, b}}));
  return out;
}

TEST(AbwDistance, IdenticalFactorsAreAtDistanceZero) {
  std::mt19937_64 rng(1);
  const auto l = random_lower(BlockShape(3, 2), rng);
  EXPECT_EQ(abw_distance(l, l), 0.0);
}

TEST(AbwDistance, FiltrationPair) {
  // ||L||^2 = 2, ||M||^2 = 2, tr S = sqrt(2).
  const double expected_sq = 4.0 - 2.0 * kSqrt2;
  EXPECT_NEAR(abw_distance_squared(filtration_l(), filtration_m()), expected_sq, 1e-12);
  // Enumerate the four sign patterns directly.
  double best = 1e300;
  for (const auto& o : sign_patterns_t2()) {
    best = std::min(best, (filtration_l().matrix() - filtration_m().matrix() * o.matrix()).squaredNorm());
  }
  EXPECT_NEAR(best, expected_sq, 1e-15);
}

TEST(AbwDistance, TwoGeodesicsPair) {
  EXPECT_NEAR(abw_distance(two_geo_l(), two_geo_m()), 2.0, 1e-14);
  EXPECT_NEAR(exhaustive_distance_d1(two_geo_l(), two_geo_m()).oracle_value, 2.0, 1e-14);
}

TEST(AbwDistance, ShapeMismatch) {
  EXPECT_THROW(abw_distance(BlockLowerTriangular::identity(BlockShape(2, 1)),
                            BlockLowerTriangular::identity(BlockShape(1, 2))),
               ShapeError);
}

TEST(AwGaussianDistance, Examples) {
  const Vector zero = Vector::Zero(2);
  Vector a(2);
  a << 1.0, 0.0;
  EXPECT_DOUBLE_EQ(aw_gaussian_distance(zero, filtration_l(), zero, filtration_m()),
                   abw_distance(filtration_l(), filtration_m()));
  EXPECT_DOUBLE_EQ(aw_gaussian_distance(a, two_geo_l(), zero, two_geo_l()), 1.0);
  EXPECT_NEAR(aw_gaussian_distance(a, filtration_l(), zero, filtration_m()), std::sqrt(5.0 - 2.0 * kSqrt2), 1e-12);
  EXPECT_THROW(aw_gaussian_distance(Vector::Zero(3), two_geo_l(), zero, two_geo_m()), ShapeError);
}

TEST(OptimizerSet, RankDeficientExample) {
  const auto l = lower(2, 1, {{1, 0}, {0, 0}});
  const auto m = BlockLowerTriangular::identity(BlockShape(2, 1)) * -1.0;
  const OptimizerSet opt = optimizer_set(l, m);
  EXPECT_EQ(opt.ranks(), (std::vector<int>{1, 0}));
  EXPECT_FALSE(opt.is_singleton());
  EXPECT_EQ(opt.canonical_member().matrix(), rows({{-1, 0}, {0, 1}}));

  std::vector<Matrix> members;
  for (const auto& p : sign_patterns_t2()) {
    if (is_optimizer(l, m, p)) members.push_back(p.matrix());
  }
  ASSERT_EQ(members.size(), 2u);
  EXPECT_EQ(members[0], rows({{-1, 0}, {0, 1}}));
  EXPECT_EQ(members[1], rows({{-1, 0}, {0, -1}}));
  EXPECT_FALSE(is_optimizer(l, m, BlockDiagOrthogonal::identity(BlockShape(2, 1))));
}

TEST(OptimizerSet, PositiveDefiniteBlocksGiveSingleton) {
  std::mt19937_64 rng(5);
  const auto l = random_lower(BlockShape(3, 2), rng);
  const OptimizerSet self = optimizer_set(l, l);
  EXPECT_TRUE(self.is_singleton());
  EXPECT_LE((self.canonical_member().matrix() - Matrix::Identity(6, 6)).norm(), 1e-12);
  EXPECT_EQ(self.degrees_of_freedom(), 0);
}

TEST(OptimizerSet, TwoGeodesicsMembers) {
  const OptimizerSet opt = optimizer_set(two_geo_l(), two_geo_m());
  EXPECT_EQ(opt.ranks(), (std::vector<int>{0, 1}));
  EXPECT_EQ(opt.canonical_member().matrix(), Matrix::Identity(2, 2));
  int count = 0;
  for (const auto& p : sign_patterns_t2()) {
    const bool member = is_optimizer(two_geo_l(), two_geo_m(), p);
    EXPECT_EQ(member, p.matrix()(1, 1) == 1.0);
    count += member;
  }
  EXPECT_EQ(count, 2);
}

TEST(OptimizerSet, RankDeficientSelfPairHasIdentityCanonical) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto l = degenerate(random_lower(BlockShape(3, 3), rng), rng, 0.8);
    EXPECT_LE((optimizer_set(l, l).canonical_member().matrix() - Matrix::Identity(9, 9)).norm(), 1e-10);
  }
}

TEST(OptimizerSet, SampledMembersAreOptimizers) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const BlockShape shape(3, 3);
    const auto l = degenerate(random_lower(shape, rng), rng, 0.7);
    const auto m = random_lower(shape, rng);
    const OptimizerSet opt = optimizer_set(l, m);
    const BlockDiagOrthogonal p = opt.sample_member(static_cast<std::uint64_t>(trial));
    EXPECT_TRUE(is_optimizer(l, m, p));
    EXPECT_NEAR((l - m * p).matrix().norm(), abw_distance(l, m), 1e-10);
  }
}

TEST(IsOptimizer, Examples) {
  std::mt19937_64 rng(3);
  const auto l = random_lower(BlockShape(2, 3), rng);
  const auto m = random_lower(BlockShape(2, 3), rng);
  EXPECT_TRUE(is_optimizer(l, m, optimizer_set(l, m).canonical_member()));
  EXPECT_TRUE(is_optimizer(l, l, BlockDiagOrthogonal::identity(l.shape())));
  EXPECT_THROW(is_optimizer(l, m, BlockDiagOrthogonal::identity(BlockShape(3, 2))), ShapeError);
}

TEST(Stabilizer, FullRankIsTrivial) {
  std::mt19937_64 rng(8);
  const auto l = random_lower(BlockShape(3, 2), rng);
  const StabilizerSet stab = stabilizer(l);
  EXPECT_TRUE(stab.is_trivial());
  EXPECT_EQ(stab.sample_member(1).matrix(), Matrix::Identity(6, 6));
}

TEST(Stabilizer, RankDeficientExample) {
  const auto l = lower(2, 1, {{1, 0}, {0, 0}});
  const StabilizerSet stab = stabilizer(l);
  EXPECT_EQ(stab.kernel_dim(0), 0);
  EXPECT_EQ(stab.kernel_dim(1), 1);
  std::vector<Matrix> members;
  for (const auto& o : sign_patterns_t2()) {
    if ((l * o).matrix() == l.matrix()) members.push_back(o.matrix());
  }
  ASSERT_EQ(members.size(), 2u);
  EXPECT_EQ(members[0], rows({{1, 0}, {0, 1}}));
  EXPECT_EQ(members[1], rows({{1, 0}, {0, -1}}));
  const auto flip = stab.member({SmallMatrix(0, 0), SmallMatrix::Constant(1, 1, -1.0)});
  EXPECT_EQ(flip.matrix(), rows({{1, 0}, {0, -1}}));
}

TEST(Stabilizer, ZeroFactorFixesEverything) {
  const StabilizerSet stab = stabilizer(BlockLowerTriangular::zero(BlockShape(3, 2)));
  for (int t = 0; t < 3; ++t) EXPECT_EQ(stab.kernel_dim(t), 2);
}

TEST(Stabilizer, SampledMembersFixTheFactor) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const BlockShape shape = random_shape(rng);
    const auto l = degenerate(random_lower(shape, rng), rng, 0.6);
    const BlockDiagOrthogonal o = stabilizer(l).sample_member(static_cast<std::uint64_t>(trial));
    EXPECT_LE(((l * o) - l).matrix().norm(), 1e-9 * l.matrix().norm());
  }
}

TEST(QuotientEqual, Examples) {
  std::mt19937_64 rng(21);
  const auto l = random_lower(BlockShape(3, 2), rng);
  EXPECT_TRUE(quotient_equal(l, l * random_block_orthogonal(l.shape(), rng)));
  EXPECT_FALSE(quotient_equal(filtration_l(), filtration_m()));
  const auto one = BlockLowerTriangular::identity(BlockShape(1, 1));
  EXPECT_TRUE(quotient_equal(one, one * -1.0));
}

// ---------------------------------------------------------------------------
// Properties

TEST(AbwMetricProperties, MetricAxiomsAndInvariance) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const BlockShape shape = random_shape(rng);
    const auto l = random_lower(shape, rng);
    const auto m = degenerate(random_lower(shape, rng), rng, 0.3);
    const auto n = random_lower(shape, rng);
    const double lm = abw_distance(l, m);
    EXPECT_LE(std::abs(lm - abw_distance(m, l)), 1e-10);
    EXPECT_LE(abw_distance(l, n), lm + abw_distance(m, n) + 1e-9);
    const auto o1 = random_block_orthogonal(shape, rng);
    const auto o2 = random_block_orthogonal(shape, rng);
    EXPECT_LE(abw_distance(l, l * o1), 1e-10);
    EXPECT_LE(std::abs(abw_distance(l * o1, m * o2) - lm), 1e-10);
  }
}

TEST(AbwMetricProperties, ProcrustesAndTraceFormsAgree) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 300; ++trial) {
    const BlockShape shape = random_shape(rng);
    const auto l = degenerate(random_lower(shape, rng), rng, 0.3);
    const auto m = random_lower(shape, rng);
    const double d2 = abw_distance_squared(l, m);
    const Matrix p = optimizer_set(l, m).canonical_member().matrix();
    const double procrustes = (l.matrix() - m.matrix() * p).squaredNorm();
    EXPECT_LE(std::abs(d2 - procrustes), 1e-10 * std::max(1.0, d2));
    const double scale = l.matrix().squaredNorm() + m.matrix().squaredNorm();
    EXPECT_LE(std::abs(d2 - abw::testing::trace_form_distance_sq(l, m)), 1e-10 * std::max(1.0, scale));
  }
}

TEST(AbwMetricProperties, NoOrthogonalMatrixBeatsTheClosedForm) {
  std::mt19937_64 rng(33);
  for (int instance = 0; instance < 10; ++instance) {
    const BlockShape shape = random_shape(rng);
    const auto l = random_lower(shape, rng);
    const auto m = random_lower(shape, rng);
    const double closed = abw_distance(l, m);
    for (int k = 0; k < 10000; ++k) {
      const auto o = random_block_orthogonal(shape, rng);
      ASSERT_GE((l - m * o).matrix().norm(), closed - 1e-10);
    }
  }
}

TEST(AbwMetricProperties, MatchesSignEnumerationForScalarProcesses) {
  std::mt19937_64 rng(34);
  std::uniform_int_distribution<int> steps(1, 8);
  for (int trial = 0; trial < 300; ++trial) {
    const BlockShape shape(steps(rng), 1);
    const auto l = random_lower(shape, rng);
    const auto m = random_lower(shape, rng);
    double best = 1e300;
    for (unsigned pattern = 0; pattern < (1u << shape.steps()); ++pattern) {
      Matrix o = Matrix::Zero(shape.size(), shape.size());
      for (int j = 0; j < shape.steps(); ++j) o(j, j) = ((pattern >> j) & 1u) ? -1.0 : 1.0;
      best = std::min(best, (l.matrix() - m.matrix() * o).norm());
    }
    EXPECT_NEAR(abw_distance(l, m), best, 1e-12);
  }
}

TEST(AbwMetricProperties, StabilizerClosureAndTransposition) {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 200; ++trial) {
    const BlockShape shape = random_shape(rng);
    const auto l = degenerate(random_lower(shape, rng), rng, 0.6);
    const auto m = degenerate(random_lower(shape, rng), rng, 0.3);
    const OptimizerSet opt = optimizer_set(l, m);
    const BlockDiagOrthogonal p = opt.sample_member(static_cast<std::uint64_t>(trial));
    const BlockDiagOrthogonal o = stabilizer(l).sample_member(static_cast<std::uint64_t>(trial) + 1000);
    EXPECT_TRUE(is_optimizer(l, m, p * o));
    EXPECT_TRUE(is_optimizer(m, l, p.transpose()));
  }
}

}  // namespace
