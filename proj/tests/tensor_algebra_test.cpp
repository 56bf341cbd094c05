#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sigfc/tensor_algebra.hpp"
#include "test_util.hpp"

using namespace sigfc;

TEST(ZeroLike, LevelSizes) {
  const auto t = zero_like(2, 2);
  ASSERT_EQ(t.depth(), 2u);
  EXPECT_EQ(t.level_size(0), 1u);
  EXPECT_EQ(t.level_size(1), 2u);
  EXPECT_EQ(t.level_size(2), 4u);
  for (double x : t.flat()) EXPECT_EQ(x, 0.0);
}

TEST(ZeroLike, DegenerateDepth) {
  const auto t = zero_like(1, 0);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t.scalar(), 0.0);
}

TEST(ZeroLike, TotalSizeMatchesGeometricSum) {
  EXPECT_EQ(zero_like(3, 2).size(), 13u);
  EXPECT_EQ(zero_like(2, 3).size(), 15u);
}

TEST(ZeroLike, RejectsZeroDimension) { EXPECT_THROW(zero_like(0, 2), InvalidArgument); }

TEST(TensorProduct, OuterProductOfVectors) {
  const std::vector<double> a{1, 2}, b{3, 4};
  const auto p = tensor_product({2, 1, a}, {2, 1, b});
  EXPECT_EQ(p, (std::vector<double>{3, 4, 6, 8}));
}

TEST(TensorProduct, ScalarUnit) {
  const std::vector<double> v{1.5, -2, 7}, one{1.0};
  EXPECT_EQ(tensor_product({3, 1, v}, {3, 0, one}), v);
}

TEST(TensorProduct, BasisVectors) {
  const std::vector<double> e1{1, 0}, e2{0, 1};
  EXPECT_EQ(tensor_product({2, 1, e1}, {2, 1, e2}), (std::vector<double>{0, 1, 0, 0}));
}

TEST(TensorProduct, RejectsDimensionMismatch) {
  const std::vector<double> a{1, 2}, b{1, 2, 3};
  EXPECT_THROW(tensor_product({2, 1, a}, {3, 1, b}), InvalidArgument);
}

TEST(ExpMap, TwoDimensionalExample) {
  const std::vector<double> v{1, 2};
  const auto e = exp_map(v, 2);
  EXPECT_EQ(e.scalar(), 1.0);
  EXPECT_EQ(std::vector<double>(e.level(1).begin(), e.level(1).end()), (std::vector<double>{1, 2}));
  EXPECT_EQ(std::vector<double>(e.level(2).begin(), e.level(2).end()), (std::vector<double>{0.5, 1, 1, 2}));
}

TEST(ExpMap, ZeroIncrementIsUnit) {
  const std::vector<double> v{0, 0, 0};
  EXPECT_EQ(exp_map(v, 4), GradedTensor::unit(3, 4));
}

TEST(ExpMap, OneDimensionalPowers) {
  const std::vector<double> v{3};
  const auto e = exp_map(v, 3);
  EXPECT_DOUBLE_EQ(e.level(1)[0], 3.0);
  EXPECT_DOUBLE_EQ(e.level(2)[0], 4.5);
  EXPECT_DOUBLE_EQ(e.level(3)[0], 4.5);
}

TEST(ExpMap, RejectsNonFinite) {
  const std::vector<double> v{1, NAN};
  EXPECT_THROW(exp_map(v, 2), InvalidArgument);
}

TEST(Boxtimes, UnitIsIdentity) {
  std::mt19937_64 rng(1);
  const auto a = test::random_group_element(rng, 3, 3);
  const auto u = GradedTensor::unit(3, 3);
  EXPECT_EQ(boxtimes(a, u), a);
  EXPECT_EQ(boxtimes(u, a), a);
}

TEST(Boxtimes, OneDimensionalExponentials) {
  // Direct expansion: level 1 = 1 + 2, level 2 = 1/2 + 1*2 + 4/2 = 4.5.
  const std::vector<double> one{1}, two{2};
  const auto p = boxtimes(exp_map(one, 2), exp_map(two, 2));
  EXPECT_DOUBLE_EQ(p.scalar(), 1.0);
  EXPECT_DOUBLE_EQ(p.level(1)[0], 3.0);
  EXPECT_DOUBLE_EQ(p.level(2)[0], 4.5);
}

TEST(Boxtimes, SegmentInverse) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    auto v = test::random_vector(rng, 3);
    std::vector<double> neg(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) neg[i] = -v[i];
    const auto p = boxtimes(exp_map(v, 4), exp_map(neg, 4));
    EXPECT_LE(max_abs_diff(p, GradedTensor::unit(3, 4)), 1e-12);
  }
}

TEST(Boxtimes, RejectsShapeMismatchAndNonUnitScalar) {
  const auto a = GradedTensor::unit(2, 2);
  EXPECT_THROW(boxtimes(a, GradedTensor::unit(3, 2)), InvalidArgument);
  EXPECT_THROW(boxtimes(a, GradedTensor::unit(2, 3)), InvalidArgument);
  EXPECT_THROW(boxtimes(a, GradedTensor::zero(2, 2)), InvalidArgument);
}

TEST(Boxtimes, Associative) {
  std::mt19937_64 rng(3);
  for (std::size_t d = 1; d <= 3; ++d)
    for (std::size_t n = 0; n <= 4; ++n) {
      const auto a = test::random_group_element(rng, d, n);
      const auto b = test::random_group_element(rng, d, n);
      const auto c = test::random_group_element(rng, d, n);
      EXPECT_LE(max_abs_diff(boxtimes(boxtimes(a, b), c), boxtimes(a, boxtimes(b, c))), 1e-10)
          << "d=" << d << " N=" << n;
    }
}

TEST(FusedMulExp, UnitLeftFactorGivesExp) {
  const std::vector<double> v{0.3, -1.2};
  EXPECT_LE(max_abs_diff(fused_mul_exp(GradedTensor::unit(2, 4), v), exp_map(v, 4)), 1e-15);
}

TEST(FusedMulExp, MatchesNaiveCompose) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = test::random_group_element(rng, 2, 3);
    const auto z = test::random_vector(rng, 2);
    EXPECT_LE(max_abs_diff(fused_mul_exp(a, z), boxtimes(a, exp_map(z, 3))), 1e-12);
  }
}

TEST(FusedMulExp, OneDimensionalClosedForm) {
  const std::vector<double> one{1}, two{2};
  const auto r = fused_mul_exp(exp_map(one, 3), two);
  EXPECT_DOUBLE_EQ(r.level(1)[0], 3.0);
  EXPECT_DOUBLE_EQ(r.level(2)[0], 4.5);
  EXPECT_DOUBLE_EQ(r.level(3)[0], 4.5);
}

TEST(FusedMulExp, DepthZeroIsScalarOne) {
  const std::vector<double> z{5};
  EXPECT_EQ(fused_mul_exp(GradedTensor::unit(1, 0), z), GradedTensor::unit(1, 0));
}

TEST(FusedMulExp, RejectsDimensionMismatch) {
  const std::vector<double> z{1, 2, 3};
  EXPECT_THROW(fused_mul_exp(GradedTensor::unit(2, 2), z), InvalidArgument);
}

TEST(FusedMulExp, FewerMultiplicationsThanNaive) {
  for (std::size_t d = 2; d <= 3; ++d)
    for (std::size_t n = 3; n <= 5; ++n) {
      std::mt19937_64 rng(d * 10 + n);
      const auto a = test::random_group_element(rng, d, n);
      const auto z = test::random_vector(rng, d);
      OpCounter fused, naive;
      fused_mul_exp(a, z, &fused);
      boxtimes(a, exp_map(z, n, &naive), &naive);
      EXPECT_LT(fused.multiplies, naive.multiplies) << "d=" << d << " N=" << n;
    }
}

TEST(GradedTensor, FlatRoundTrip) {
  std::mt19937_64 rng(5);
  const auto a = test::random_group_element(rng, 3, 3);
  const GradedTensor b(3, 3, a.flat());
  EXPECT_EQ(a, b);
  const std::vector<double> bad(6, 0.0);
  EXPECT_THROW(GradedTensor(2, 2, bad), InvalidArgument);
}

TEST(GradedTensor, LevelNormOfExpIsPowerOverFactorial) {
  const std::vector<double> v{3, 4};
  const auto e = exp_map(v, 3);
  EXPECT_NEAR(level_norm(e, 2), 25.0 / 2.0, 1e-12);
  EXPECT_NEAR(level_norm(e, 3), 125.0 / 6.0, 1e-12);
}
