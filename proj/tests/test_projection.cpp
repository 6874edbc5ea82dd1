#include "bvb/projection.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace bvb {
namespace {

RealVector vec(std::initializer_list<double> xs) {
  RealVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

GridField sample(const Grid& g, const PolynomialField& p) {
  return GridField::from_function(g, p.dim_v(), [&](const RealVector& y) { return p.evaluate(y); });
}

double phi(const RealVector& z) {
  const double q = 1 - z.squaredNorm();
  return q > 0 ? std::exp(-1 / q) : 0.0;
}

TEST(Jets, ProductAndReciprocal) {
  const JetAlgebra j(2, 3);
  std::vector<double> a(j.size(), 0.0), inv, prod;
  a[0] = 2.0;
  a[j.index(MultiIndex({1, 0}))] = 0.5;
  a[j.index(MultiIndex({0, 2}))] = -1.0;
  j.reciprocal(a, inv);
  j.mul(a, inv, prod);
  EXPECT_NEAR(prod[0], 1.0, 1e-15);
  for (std::size_t i = 1; i < prod.size(); ++i) EXPECT_NEAR(prod[i], 0.0, 1e-15);
}

TEST(Jets, BumpDerivativesMatchFiniteDifferences) {
  const JetAlgebra j(2, 2);
  const RealVector z = vec({0.3, -0.2});
  std::vector<double> d;
  bump_derivatives(j, z, d);
  const double e = 1e-4;
  const RealVector e0 = vec({e, 0}), e1 = vec({0, e});
  EXPECT_NEAR(d[j.index(MultiIndex({0, 0}))], phi(z), 1e-15);
  EXPECT_NEAR(d[j.index(MultiIndex({1, 0}))], (phi(z + e0) - phi(z - e0)) / (2 * e), 1e-8);
  EXPECT_NEAR(d[j.index(MultiIndex({0, 1}))], (phi(z + e1) - phi(z - e1)) / (2 * e), 1e-8);
  EXPECT_NEAR(d[j.index(MultiIndex({2, 0}))], (phi(z + e0) - 2 * phi(z) + phi(z - e0)) / (e * e), 1e-6);
  EXPECT_NEAR(d[j.index(MultiIndex({1, 1}))],
              (phi(z + e0 + e1) - phi(z + e0 - e1) - phi(z - e0 + e1) + phi(z - e0 - e1)) / (4 * e * e),
              1e-6);
  bump_derivatives(j, RealVector::Zero(2), d);
  EXPECT_NEAR(d[0], std::exp(-1.0), 1e-16);
  EXPECT_NEAR(d[j.index(MultiIndex({1, 0}))], 0.0, 1e-16);
}

double reproduction_error(double h, int ell, ProjectionQuadrature mode) {
  const Grid g(2, -1.0, 1.0, h);
  const RealVector x = vec({0.125, -0.0625});
  const double r = 0.5;
  double worst = 0;
  for (const auto& beta : multiindices_up_to(2, ell - 1)) {
    PolynomialField p(2, 1);
    p.add_term(beta, RealVector::Ones(1));
    const auto proj = poly_project(sample(g, p), x, r, ell, mode);
    EXPECT_LE(proj.degree(), ell - 1);
    worst = std::max(worst, (proj - p).max_abs_coefficient());
  }
  return worst;
}

TEST(PolyProject, ReproducesMonomialsAt64CellsPerRadius) {
  for (int ell = 1; ell <= 3; ++ell) {
    EXPECT_LT(reproduction_error(1.0 / 128, ell, ProjectionQuadrature::moment_corrected), 1e-12) << ell;
  }
}

TEST(PolyProject, ReproducesMonomialsInThreeDimensions) {
  const Grid g(3, -1.0, 1.0, 1.0 / 32);
  const RealVector x = vec({0.1, 0.0, -0.05});
  for (const auto& beta : multiindices_up_to(3, 2)) {
    PolynomialField p(3, 1);
    p.add_term(beta, RealVector::Ones(1));
    const auto proj = poly_project(sample(g, p), x, 0.5, 3);
    EXPECT_LT((proj - p).max_abs_coefficient(), 1e-12) << beta.to_string();
  }
}

TEST(PolyProject, PlainQuadratureDefectDecaysWithResolution) {
  using enum ProjectionQuadrature;
  EXPECT_LT(reproduction_error(1.0 / 128, 2, plain), 1e-6);
  const double coarse = reproduction_error(1.0 / 128, 3, plain);
  const double fine = reproduction_error(1.0 / 256, 3, plain);
  EXPECT_GT(coarse, 1e-6);  // second derivatives of the bump are underresolved at 64 cells/radius
  EXPECT_LT(fine, 1e-6);
  EXPECT_LT(fine, 1e-2 * coarse);
}

TEST(PolyProject, CorrectionIsSmallOnGenericFields) {
  const Grid g(2, -1.0, 1.0, 1.0 / 128);
  const auto f = GridField::from_function(g, 1, [](const RealVector& y) {
    return RealVector::Constant(1, std::exp(y(0)) * std::cos(2 * y(1)));
  });
  const RealVector x = vec({0.1, 0.2});
  const auto a = poly_project(f, x, 0.5, 3, ProjectionQuadrature::moment_corrected);
  const auto b = poly_project(f, x, 0.5, 3, ProjectionQuadrature::plain);
  EXPECT_LT((a - b).max_abs_coefficient(), 1e-4);
}

TEST(PolyProject, ConstantForAnyEll) {
  const Grid g(2, -1.0, 1.0, 1.0 / 256);
  const auto f = GridField::from_function(g, 2, [](const RealVector&) { return vec({2.0, -3.0}); });
  for (int ell = 1; ell <= 3; ++ell) {
    const auto proj = poly_project(f, vec({0.1, 0.1}), 0.5, ell);
    EXPECT_LT((proj.coefficient(MultiIndex::zero(2)) - vec({2.0, -3.0})).norm(), 1e-8);
    for (const auto& [beta, c] : proj.coefficients()) {
      if (beta.order() > 0) EXPECT_LT(c.norm(), 1e-8) << ell;
    }
  }
}

TEST(PolyProject, QuadraticRemainderScalesLikeRSquared) {
  const Grid g(2, -1.0, 1.0, 1.0 / 256);
  const auto f = GridField::from_function(g, 1, [](const RealVector& y) {
    return RealVector::Constant(1, y(0) * y(0));
  });
  const RealVector x = vec({0.2, 0.1});
  std::vector<double> rs{0.4, 0.2, 0.1}, dev;
  for (double r : rs) {
    const auto p = poly_project(f, x, r, 2);
    EXPECT_LE(p.degree(), 1);
    dev.push_back(ball_mean_deviation(f, p, x, r));
  }
  EXPECT_NEAR(fit_loglog_slope(rs, dev), 2.0, 0.05);
}

TEST(PolyProject, Errors) {
  const Grid g(2, -1.0, 1.0, 0.125);
  const GridField f(g, 1);
  EXPECT_THROW(poly_project(f, vec({0, 0}), 0.3, 2), std::invalid_argument);   // underresolved
  EXPECT_THROW(poly_project(f, vec({0.8, 0}), 0.5, 2), std::invalid_argument);  // leaves grid
  EXPECT_THROW(poly_project(f, vec({0, 0}), 0.9, 0), std::invalid_argument);
}

TEST(QuasiContinuity, RigidMotionIsItsOwnProjection) {
  const Grid g(2, -1.0, 1.0, 1.0 / 128);
  PolynomialField p(2, 2);
  p.add_term(MultiIndex::zero(2), vec({0.5, -0.25}));
  p.add_term(MultiIndex({1, 0}), vec({0.0, 1.0}));
  p.add_term(MultiIndex({0, 1}), vec({-1.0, 0.0}));
  const auto rep = quasi_continuity_ratio(sample(g, p), catalog("symmetric_gradient", 2),
                                          vec({0.0, 0.0}), {0.75, 0.5, 0.25});
  EXPECT_EQ(rep.ell, 2);
  for (const auto& e : rep.entries) {
    EXPECT_LT(e.numerator, kZeroNumerator);
    EXPECT_TRUE(e.degenerate);
    EXPECT_EQ(e.ratio, 0.0);
  }
}

TEST(QuasiContinuity, HyperplaneJumpRatiosAreStable) {
  const Grid g(2, -1.0, 1.0, 1.0 / 128);
  const RealVector nu = vec({0.6, 0.8});
  const auto f = synth_jump(constant_field(vec({1.0, 0.0}), 2), constant_field(vec({0.0, 0.5}), 2),
                            nu, 0.0, g);
  const auto rep = quasi_continuity_ratio(f, catalog("symmetric_gradient", 2), vec({0.0, 0.0}),
                                          {0.8, 0.4, 0.2, 0.1});
  double lo = 1e300, hi = 0;
  for (const auto& e : rep.entries) {
    EXPECT_FALSE(e.degenerate);
    lo = std::min(lo, e.ratio);
    hi = std::max(hi, e.ratio);
  }
  EXPECT_LT(hi / lo, 2.0);
}

TEST(QuasiContinuity, SmoothSinusoidRatiosAreStable) {
  const Grid g(2, -1.0, 1.0, 1.0 / 128);
  const auto f = GridField::from_function(g, 1, [](const RealVector& y) {
    return RealVector::Constant(1, std::sin(y(0)));
  });
  const auto rep = quasi_continuity_ratio(f, catalog("gradient", 2), vec({0.0, 0.0}),
                                          {0.8, 0.4, 0.2, 0.1});
  EXPECT_EQ(rep.ell, 1);
  double lo = 1e300, hi = 0;
  for (const auto& e : rep.entries) {
    lo = std::min(lo, e.ratio);
    hi = std::max(hi, e.ratio);
  }
  EXPECT_LT(hi / lo, 2.0);
}

TEST(QuasiContinuity, RequiresCEllipticOperator) {
  const Grid g(2, -1.0, 1.0, 1.0 / 32);
  EXPECT_THROW(quasi_continuity_ratio(GridField(g, 2), catalog("divergence", 2), vec({0, 0}), {0.5}),
               std::invalid_argument);
  EXPECT_THROW(quasi_continuity_ratio(GridField(g, 2), catalog("cauchy_riemann", 2), vec({0, 0}), {0.5}),
               std::invalid_argument);
}

}  // namespace
}  // namespace bvb
