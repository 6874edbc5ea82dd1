#include "bvb/ellipticity.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace bvb {
namespace {

TEST(SphereGrid, PointsAreUnit) {
  for (int n : {2, 3, 4}) {
    const auto g = sphere_grid(n, 16);
    EXPECT_GE(g.size(), 16u);
    for (const auto& x : g) EXPECT_NEAR(x.norm(), 1.0, 1e-14);
  }
}

TEST(EllipticityConstant, GradientIsIsometric) {
  for (int n : {2, 3}) {
    const auto r = ellipticity_constant(catalog("gradient", n), 16, 20);
    EXPECT_NEAR(r.constant, 1.0, 1e-9);
    EXPECT_TRUE(r.elliptic);
    EXPECT_NEAR(r.minimizer_xi.norm(), 1.0, 1e-12);
  }
}

TEST(EllipticityConstant, SymmetricGradientMatchesClosedForm) {
  // |a ⊙ xi|^2 = (|a|^2 |xi|^2 + (a.xi)^2) / 2, minimised at a ⊥ xi.
  for (int n : {2, 3}) {
    const double dense = oracle::dense_sphere_min(
        n, 20000, [](const RealVector& xi) { return oracle::closed_form_sym_symbol(xi, 0.0); });
    EXPECT_NEAR(dense, 1.0 / std::sqrt(2.0), 1e-9);
    const auto r = ellipticity_constant(catalog("symmetric_gradient", n));
    EXPECT_NEAR(r.constant, 1.0 / std::sqrt(2.0), 1e-3);
    EXPECT_TRUE(r.elliptic);
  }
}

TEST(EllipticityConstant, DivergenceIsNotElliptic) {
  const auto r = ellipticity_constant(catalog("divergence", 2));
  EXPECT_LT(r.constant, 1e-8);
  EXPECT_FALSE(r.elliptic);
}

TEST(EllipticityConstant, DegenerateDirectionIsRefined) {
  // d_1 vanishes on xi_1 = 0; the grid is offset so refinement must find it.
  const auto r = ellipticity_constant(partial_derivative(3, 0), 9, 60);
  EXPECT_LT(r.constant, 1e-8);
  EXPECT_FALSE(r.elliptic);
  EXPECT_LT(std::abs(r.minimizer_xi(0)), 1e-8);
}

TEST(EllipticityConstant, ScaleCovariance) {
  for (const auto& name : {"symmetric_gradient", "deviatoric", "gradient"}) {
    const auto op = catalog(name, 3);
    const double base = ellipticity_constant(op, 16).constant;
    for (double lambda : {0.25, 3.0, 17.5}) {
      const double scaled = ellipticity_constant(op.scaled(lambda), 16).constant;
      EXPECT_NEAR(scaled, lambda * base, 1e-9 * lambda * base) << name;
    }
  }
}

TEST(EllipticityConstant, RejectsCoarseResolution) {
  EXPECT_THROW(ellipticity_constant(catalog("gradient", 2), 4), std::invalid_argument);
}

TEST(ComplexFalsify, CauchyRiemannHasAComplexZero) {
  const auto w = complex_falsify(catalog("cauchy_riemann", 2), 20, 200, 0);
  ASSERT_TRUE(w.has_value());
  EXPECT_LT(w->residual, kWitnessTolerance);
  // xi_2 = ± i xi_1 up to a global phase.
  const Complex ratio = w->xi(1) / w->xi(0);
  EXPECT_NEAR(std::abs(ratio), 1.0, 1e-6);
  EXPECT_NEAR(std::abs(ratio.real()), 0.0, 1e-6);
  EXPECT_NEAR(w->xi.norm(), 1.0, 1e-12);
  EXPECT_NEAR(w->v.norm(), 1.0, 1e-12);
}

TEST(ComplexFalsify, SymmetricGradientHasNone) {
  EXPECT_FALSE(complex_falsify(catalog("symmetric_gradient", 2), 100, 200, 0).has_value());
}

TEST(ComplexFalsify, PartialDerivativeHasARealWitness) {
  const auto w = complex_falsify(partial_derivative(2, 0), 5, 200, 0);
  ASSERT_TRUE(w.has_value());
  EXPECT_LT(std::abs(w->xi(0)), 1e-8);
  EXPECT_NEAR(std::abs(w->xi(1)), 1.0, 1e-12);
}

TEST(ComplexFalsify, WitnessReplay) {
  for (const auto& op : {catalog("cauchy_riemann", 2), catalog("divergence", 3),
                         catalog("deviatoric", 2), partial_derivative(3, 1)}) {
    const auto w = complex_falsify(op, 20, 200, 3);
    ASSERT_TRUE(w.has_value());
    EXPECT_LT((symbol(op, w->xi) * w->v).norm(), 1e-8);
  }
}

TEST(CElliptic, CatalogDecisions) {
  EXPECT_EQ(is_c_elliptic(catalog("symmetric_gradient", 2)).decision, Decision::pass);
  EXPECT_EQ(is_c_elliptic(catalog("symmetric_gradient", 3)).decision, Decision::pass);
  EXPECT_EQ(is_c_elliptic(catalog("deviatoric", 3)).decision, Decision::pass);
  for (int k = 1; k <= 3; ++k) {
    EXPECT_EQ(is_c_elliptic(catalog("gradient", 2, Coordinates::orthonormal, k)).decision,
              Decision::pass);
  }
  const auto cr = is_c_elliptic(catalog("cauchy_riemann", 2));
  EXPECT_EQ(cr.decision, Decision::fail);
  ASSERT_TRUE(cr.witness.has_value());
  EXPECT_EQ(is_c_elliptic(catalog("divergence", 2)).decision, Decision::fail);
  EXPECT_EQ(is_c_elliptic(catalog("deviatoric", 2)).decision, Decision::fail);
  EXPECT_THROW(is_c_elliptic(catalog("gradient", 2), 2), std::invalid_argument);
}

TEST(CElliptic, CriteriaAgreeAcrossCatalog) {
  for (const auto& name : catalog_names()) {
    const int n = name == "cauchy_riemann" ? 2 : 3;
    const auto r = is_c_elliptic(catalog(name, n), 5, 20, 1);
    EXPECT_NE(r.decision, Decision::inconclusive) << name;
    EXPECT_EQ(r.nullspace.ell.has_value(), !r.witness.has_value()) << name;
  }
}

TEST(Mixing, TripleTestDeviatoric) {
  const auto r = mixing_triple_test(catalog("deviatoric", 3), 100, 0);
  EXPECT_EQ(r.triple_dims.size(), 1u);
  EXPECT_EQ(r.triple_dims.at(0), 100u);
  EXPECT_EQ(r.status, MixingStatus::passes_samples);
}

TEST(Mixing, TripleTestGradient) {
  const auto r = mixing_triple_test(catalog("gradient", 3), 100, 0);
  EXPECT_EQ(r.triple_dims.at(0), 100u);
}

TEST(Mixing, TripleTestPartialDerivative) {
  const auto r = mixing_triple_test(partial_derivative(3, 0), 50, 0);
  // Random directions have xi_1 != 0 almost surely, so every image is R.
  EXPECT_EQ(r.triple_dims.at(1), 50u);
  EXPECT_EQ(r.status, MixingStatus::inconclusive);
}

TEST(Mixing, TripleDimensionIsPermutationInvariant) {
  const auto op = catalog("symmetric_gradient", 3);
  auto rng = seeded_engine(8, 0);
  for (int t = 0; t < 20; ++t) {
    RealVector x[3] = {random_unit(3, rng), random_unit(3, rng), random_unit(3, rng)};
    std::array<int, 3> idx{0, 1, 2};
    const int base = triple_intersection_dim(op, x[0], x[1], x[2]);
    do {
      EXPECT_EQ(triple_intersection_dim(op, x[idx[0]], x[idx[1]], x[idx[2]]), base);
    } while (std::next_permutation(idx.begin(), idx.end()));
  }
}

TEST(Mixing, PairwiseImagesOfSymmetricGradientMeet) {
  // im E(xi) ∩ im E(eta) contains xi ⊙ eta, so pairs meet but triples do not.
  const auto op = catalog("symmetric_gradient", 3);
  const RealVector a = RealVector::Unit(3, 0), b = RealVector::Unit(3, 1);
  const auto s = subspace_intersect(subspace_image<double>(symbol(op, a)),
                                    subspace_image<double>(symbol(op, b)));
  EXPECT_EQ(s.dim(), 1);
}

TEST(Mixing, FalsifyPartialDerivative) {
  const auto r = mixing_falsify(partial_derivative(2, 0), 50, 200, 0);
  EXPECT_EQ(r.status, MixingStatus::falsified);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_NEAR(std::abs(r.witness->w(0)), 1.0, 1e-12);
  EXPECT_LT(r.witness->max_residual, kMixingTolerance);
}

TEST(Mixing, FalsifyDeviatoricPassesSamples) {
  const auto r = mixing_falsify(catalog("deviatoric", 3), 50, 200, 0);
  EXPECT_EQ(r.status, MixingStatus::passes_samples);
  EXPECT_EQ(r.hyperplanes, 50u);
  EXPECT_EQ(r.xi_grid, 200u);
}

TEST(Mixing, FalsifyGradientInThePlanePassesSamples) {
  EXPECT_EQ(mixing_falsify(catalog("gradient", 2), 50, 200, 0).status,
            MixingStatus::passes_samples);
}

TEST(Mixing, RejectsHigherOrder) {
  EXPECT_THROW(mixing_triple_test(catalog("hessian", 2), 10), std::invalid_argument);
  EXPECT_THROW(mixing_falsify(catalog("hessian", 2), 10, 10), std::invalid_argument);
}

}  // namespace
}  // namespace bvb
