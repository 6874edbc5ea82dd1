#include "bvb/io.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace bvb {
namespace {

void expect_same_operator(const DiffOperator& a, const DiffOperator& b) {
  ASSERT_EQ(a.n(), b.n());
  ASSERT_EQ(a.order(), b.order());
  ASSERT_EQ(a.dim_v(), b.dim_v());
  ASSERT_EQ(a.dim_w(), b.dim_w());
  ASSERT_EQ(a.coefficients().size(), b.coefficients().size());
  for (const auto& [alpha, m] : a.coefficients()) {
    ASSERT_TRUE(b.coefficients().count(alpha)) << alpha.to_string();
    EXPECT_EQ(m, b.coefficients().at(alpha));
  }
}

std::string error_of(const std::string& text) {
  try {
    operator_from_text(text);
  } catch (const SpecError& e) {
    return e.what();
  }
  return "";
}

TEST(OperatorJson, InlineRoundTrip) {
  for (const auto& name : catalog_names()) {
    for (int n : {2, 3}) {
      if (name == "cauchy_riemann" && n != 2) continue;
      const auto op = catalog(name, n);
      const auto back = operator_from_text(operator_to_json(op).dump());
      expect_same_operator(op, back);
      EXPECT_EQ(digest(operator_to_json(op)), digest(operator_to_json(back)));
    }
  }
}

TEST(OperatorJson, HandWrittenInline) {
  const auto op = operator_from_text(R"({"n": 2, "k": 1, "dimV": 1, "dimW": 2,
    "coefficients": [{"alpha": [1, 0], "matrix": [[1], [0]]},
                     {"alpha": [0, 1], "matrix": [[0], [1]]}]})");
  expect_same_operator(op, catalog("gradient", 2));
}

TEST(OperatorJson, CatalogReference) {
  expect_same_operator(operator_from_text(R"({"catalog": "symmetric_gradient", "n": 3})"),
                       catalog("symmetric_gradient", 3));
  expect_same_operator(operator_from_text(R"({"catalog": "gradient", "n": 2, "order": 3})"),
                       catalog("gradient", 2, Coordinates::orthonormal, 3));
  expect_same_operator(
      operator_from_text(R"({"catalog": "symmetric_gradient", "n": 2, "coordinates": "dyadic"})"),
      catalog("symmetric_gradient", 2, Coordinates::dyadic));
}

TEST(OperatorJson, ErrorsNameTheField) {
  EXPECT_NE(error_of("{").find("not valid JSON"), std::string::npos);
  EXPECT_NE(error_of(R"({"n": 2})").find("exactly one"), std::string::npos);
  EXPECT_NE(error_of(R"({"catalog": "gradient", "n": 2, "coefficients": []})").find("exactly one"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"catalog": "gradient"})").find("'n'"), std::string::npos);
  EXPECT_NE(error_of(R"({"catalog": "gradient", "n": 2.5})").find("'n'"), std::string::npos);
  EXPECT_NE(error_of(R"({"catalog": "nope", "n": 2})").find("nope"), std::string::npos);
  EXPECT_NE(error_of(R"({"n": 2, "dimV": 1, "dimW": 1, "coefficients": []})").find("'k'"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"n": 2, "k": 1, "dimV": 1, "dimW": 1,
                         "coefficients": [{"matrix": [[1]]}]})")
                .find("coefficients[0]: missing field 'alpha'"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"n": 2, "k": 1, "dimV": 1, "dimW": 1,
                         "coefficients": [{"alpha": [1, 0], "matrix": [[1, 2]]}]})")
                .find("coefficients[0].matrix[0]"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"n": 2, "k": 1, "dimV": 1, "dimW": 1,
                         "coefficients": [{"alpha": [1, 0], "matrix": [["x"]]}]})")
                .find("not a number"),
            std::string::npos);
  // alpha of the wrong order is rejected by the operator itself
  EXPECT_FALSE(error_of(R"({"n": 2, "k": 1, "dimV": 1, "dimW": 1,
                            "coefficients": [{"alpha": [2, 0], "matrix": [[1]]}]})")
                   .empty());
}

TEST(Reports, DeterministicDigest) {
  const auto op = catalog("cauchy_riemann", 2);
  const auto a = to_json(is_c_elliptic(op, 5, 20, 3));
  const auto b = to_json(is_c_elliptic(op, 5, 20, 3));
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(digest(a), digest(b));
  EXPECT_EQ(a["decision"], "FAIL");
  EXPECT_EQ(digest(a).size(), 16u);
  EXPECT_TRUE(a["nullspace"]["ell"].is_null());
}

TEST(Reports, EllipticityFields) {
  const auto j = to_json(ellipticity_constant(catalog("gradient", 2)));
  EXPECT_NEAR(j["constant"].get<double>(), 1.0, 1e-12);
  EXPECT_TRUE(j["elliptic"].get<bool>());
  EXPECT_EQ(j["minimizer_xi"].size(), 2u);
}

TEST(GridFile, BinaryRoundTrip) {
  const Grid g(2, -1.0, 1.0, 0.125);
  const auto f = GridField::from_function(g, 3, [](const RealVector& y) {
    RealVector v(3);
    v << y(0), std::sin(y(1)), 1.0 / 3.0;
    return v;
  });
  std::stringstream buf;
  write_grid_field(buf, f);
  EXPECT_EQ(buf.str().size(), 16u + 4 + 3 * 8 + 4 + g.cell_count() * 3 * 8);
  EXPECT_EQ(buf.str().substr(0, 7), "BVBGRID");
  const auto back = read_grid_field(buf);
  EXPECT_TRUE(back.grid() == g);
  EXPECT_EQ(back.dim_v(), 3);
  EXPECT_EQ(back.raw(), f.raw());
}

TEST(GridFile, RejectsCorruptInput) {
  std::stringstream bad("NOTAGRID........");
  EXPECT_THROW(read_grid_field(bad), std::runtime_error);
  const GridField f(Grid(1, 0.0, 1.0, 0.25), 1);
  std::stringstream buf;
  write_grid_field(buf, f);
  std::stringstream cut(buf.str().substr(0, buf.str().size() - 3));
  EXPECT_THROW(read_grid_field(cut), std::runtime_error);
}

TEST(ProfileCsv, RoundTrip) {
  const std::vector<double> r{0.5, 0.25, 0.1}, v{1.0 / 3, 2e-17, 7.0};
  std::stringstream s;
  write_profile_csv(s, r, v);
  EXPECT_EQ(s.str().substr(0, 8), "r,value\n");
  const auto [r2, v2] = read_profile_csv(s);
  EXPECT_EQ(r2, r);
  EXPECT_EQ(v2, v);
  EXPECT_THROW(write_profile_csv(s, r, {1.0}), std::invalid_argument);
}

}  // namespace
}  // namespace bvb
