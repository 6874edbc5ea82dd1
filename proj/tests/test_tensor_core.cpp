#include "bvb/tensor_core.hpp"
#include "bvb/util.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

namespace bvb {
namespace {

// Stars-and-bars by brute force: count tuples in [0, m]^n with sum m.
std::size_t brute_count(int n, int m) {
  std::size_t count = 0;
  std::vector<int> t(static_cast<std::size_t>(n), 0);
  while (true) {
    int s = 0;
    for (int v : t) s += v;
    if (s == m) ++count;
    int i = 0;
    for (; i < n; ++i) {
      if (++t[i] <= m) break;
      t[i] = 0;
    }
    if (i == n) break;
  }
  return count;
}

RealMatrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RealMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

TEST(MultiIndex, EnumerateOrderZeroIsSingleton) {
  const auto v = multiindex_enumerate(2, 0);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], MultiIndex({0, 0}));
}

TEST(MultiIndex, EnumerateIsGradedLex) {
  const auto v = multiindex_enumerate(2, 2);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0], MultiIndex({2, 0}));
  EXPECT_EQ(v[1], MultiIndex({1, 1}));
  EXPECT_EQ(v[2], MultiIndex({0, 2}));
  EXPECT_TRUE(v[0] < v[1] && v[1] < v[2]);
}

TEST(MultiIndex, EnumerateCountMatchesStarsAndBars) {
  EXPECT_EQ(multiindex_enumerate(3, 2).size(), 6u);
  for (int n = 1; n <= 4; ++n) {
    for (int m = 0; m <= 5; ++m) {
      const auto v = multiindex_enumerate(n, m);
      EXPECT_EQ(v.size(), brute_count(n, m)) << n << " " << m;
      EXPECT_DOUBLE_EQ(static_cast<double>(v.size()), binomial(n + m - 1, m));
      std::set<MultiIndex> unique(v.begin(), v.end());
      EXPECT_EQ(unique.size(), v.size());
      for (const auto& a : v) EXPECT_EQ(a.order(), m);
    }
  }
}

TEST(MultiIndex, RejectsNegativeEntriesAndBadArguments) {
  EXPECT_THROW(MultiIndex({1, -1}), std::invalid_argument);
  EXPECT_THROW(multiindex_enumerate(0, 2), std::invalid_argument);
  EXPECT_THROW(multiindex_enumerate(2, -1), std::invalid_argument);
}

TEST(SymIndexSet, RankUnrankIsABijection) {
  for (int n = 1; n <= 4; ++n) {
    for (int m = 0; m <= 4; ++m) {
      const SymIndexSet s(n, m);
      for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(s.rank(s.unrank(i)), i);
        EXPECT_EQ(s.unrank(s.rank(s.unrank(i))), s.unrank(i));
      }
    }
  }
  EXPECT_THROW(SymIndexSet(2, 2).rank(MultiIndex({1, 0})), std::out_of_range);
}

TEST(SymPower, ScalarFirstOrder) {
  const RealVector a = RealVector::Ones(1);
  const RealVector nu = RealVector::Unit(2, 0);
  const RealVector t = sym_power(a, nu, 1);
  ASSERT_EQ(t.size(), 2);
  EXPECT_EQ(t(0), 1.0);  // beta = (1,0)
  EXPECT_EQ(t(1), 0.0);  // beta = (0,1)
}

TEST(SymPower, MixedComponentIsHalf) {
  const RealVector a = RealVector::Unit(2, 0);
  const RealVector nu = RealVector::Ones(2) / std::sqrt(2.0);
  const RealVector t = sym_power(a, nu, 2);
  const SymIndexSet s(2, 2);
  const auto b11 = static_cast<Eigen::Index>(s.rank(MultiIndex({1, 1})));
  EXPECT_NEAR(t(0 * 3 + b11), 0.5, 1e-15);
  EXPECT_EQ(t(1 * 3 + b11), 0.0);
}

TEST(SymPower, ZeroVectorAndZeroDirection) {
  const RealVector t = sym_power(RealVector(RealVector::Zero(3)), RealVector(RealVector::Ones(2)), 3);
  EXPECT_EQ(t.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(sym_power(RealVector(RealVector::Ones(2)), RealVector(RealVector::Zero(2)), 1),
               std::invalid_argument);
}

TEST(SymPower, LinearInValueAndHomogeneousInDirection) {
  auto rng = seeded_engine(7, 0);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3, m = trial % 4, dv = 1 + trial % 2;
    RealVector a(dv), b(dv), nu(n);
    for (auto* v : {&a, &b}) for (int i = 0; i < dv; ++i) (*v)(i) = g(rng);
    for (int i = 0; i < n; ++i) nu(i) = g(rng);
    const double lambda = 0.5 + std::abs(g(rng));
    const RealVector lhs = sym_power(RealVector(2.0 * a - 3.0 * b), nu, m);
    const RealVector rhs = 2.0 * sym_power(a, nu, m) - 3.0 * sym_power(b, nu, m);
    EXPECT_LT((lhs - rhs).norm(), 1e-12 * (1 + rhs.norm()));
    const RealVector scaled = sym_power(a, RealVector(lambda * nu), m);
    EXPECT_LT((scaled - std::pow(lambda, m) * sym_power(a, nu, m)).norm(), 1e-12 * (1 + scaled.norm()));
  }
}

TEST(Subspace, ImageExamples) {
  EXPECT_EQ(subspace_image<double>(RealMatrix::Identity(3, 3)).dim(), 3);
  EXPECT_EQ(subspace_image<double>(RealMatrix::Zero(3, 3)).dim(), 0);
  RealMatrix e11 = RealMatrix::Zero(3, 3);
  e11(0, 0) = 1;
  const auto s = subspace_image<double>(e11);
  ASSERT_EQ(s.dim(), 1);
  EXPECT_NEAR(std::abs(s.basis(0, 0)), 1.0, 1e-15);
}

TEST(Subspace, IntersectExamples) {
  RealMatrix a(3, 2), b(3, 2);
  a << 1, 0, 0, 1, 0, 0;
  b << 0, 0, 1, 0, 0, 1;
  const auto s1 = span_of<double>(a), s2 = span_of<double>(b);
  const auto i = subspace_intersect(s1, s2);
  ASSERT_EQ(i.dim(), 1);
  EXPECT_NEAR(std::abs(i.basis(1, 0)), 1.0, 1e-12);
  EXPECT_LT(subspace_distance(subspace_intersect(s1, s1), s1), 1e-12);
  RealSubspace other{4, RealMatrix::Identity(4, 1)};
  EXPECT_THROW(subspace_intersect(s1, other), std::invalid_argument);
}

TEST(Subspace, RandomPlanesInR3MeetInALine) {
  auto rng = seeded_engine(1, 0);
  for (int t = 0; t < 50; ++t) {
    const auto s1 = span_of<double>(random_matrix(3, 2, rng));
    const auto s2 = span_of<double>(random_matrix(3, 2, rng));
    const auto i = subspace_intersect(s1, s2);
    EXPECT_GE(i.dim(), 1);
    for (Eigen::Index c = 0; c < i.dim(); ++c) {
      EXPECT_LT(s1.residual(i.basis.col(c)), 1e-9);
      EXPECT_LT(s2.residual(i.basis.col(c)), 1e-9);
    }
  }
}

TEST(Subspace, IntersectionIsContainedInBothFactors) {
  auto rng = seeded_engine(2, 0);
  for (int t = 0; t < 50; ++t) {
    const int amb = 6;
    // Shared 2-dim part plus random extra directions.
    const RealMatrix shared = random_matrix(amb, 2, rng);
    RealMatrix a(amb, 4), b(amb, 3);
    a << shared, random_matrix(amb, 2, rng);
    b << shared, random_matrix(amb, 1, rng);
    const auto i = subspace_intersect(span_of<double>(a), span_of<double>(b));
    EXPECT_EQ(i.dim(), 2);
    for (Eigen::Index c = 0; c < i.dim(); ++c) {
      EXPECT_LT(span_of<double>(a).residual(i.basis.col(c)), 1e-9);
      EXPECT_LT(span_of<double>(b).residual(i.basis.col(c)), 1e-9);
    }
    EXPECT_LT(subspace_distance(i, span_of<double>(shared)), 1e-9);
  }
}

TEST(ComplexKernel, Examples) {
  EXPECT_EQ(complex_kernel(ComplexMatrix(ComplexMatrix::Identity(3, 3))).dim(), 0);
  ComplexMatrix m(2, 2);
  const Complex i(0, 1);
  m << 1.0, i, i, -1.0;
  const auto k = complex_kernel(m);
  ASSERT_EQ(k.dim(), 1);
  EXPECT_LT((m * k.basis.col(0)).norm(), 1e-12);
  EXPECT_EQ(complex_kernel(RealMatrix(RealMatrix::Zero(2, 2))).dim(), 2);
}

TEST(ComplexKernel, RankNullityOnConstructedMaps) {
  auto rng = seeded_engine(3, 0);
  for (int t = 0; t < 40; ++t) {
    const int rows = 2 + t % 5, cols = 2 + (t / 5) % 5;
    const int rank = std::min(rows, cols) - t % 2;
    const RealMatrix m = random_matrix(rows, rank, rng) * random_matrix(rank, cols, rng);
    const auto img = subspace_image<double>(m);
    const auto ker = complex_kernel(m);
    EXPECT_EQ(img.dim(), rank);
    EXPECT_EQ(img.dim() + ker.dim(), cols);
    // Orthonormality of returned bases.
    EXPECT_LT((ker.basis.adjoint() * ker.basis -
               ComplexMatrix::Identity(ker.dim(), ker.dim())).norm(), 1e-12);
  }
}

TEST(Util, PairwiseSumIsPartitionInsensitive) {
  std::vector<double> xs;
  auto rng = seeded_engine(4, 0);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 10001; ++i) xs.push_back(u(rng));
  std::vector<double> rev(xs.rbegin(), xs.rend());
  EXPECT_NEAR(pairwise_sum(xs), pairwise_sum(rev), 1e-12 * pairwise_sum(xs));
}

TEST(Util, LogLogSlope) {
  std::vector<double> h{0.25, 0.125, 0.0625}, e{0.1, 0.05, 0.025};
  EXPECT_NEAR(fit_loglog_slope(h, e), 1.0, 1e-12);
}

}  // namespace
}  // namespace bvb
