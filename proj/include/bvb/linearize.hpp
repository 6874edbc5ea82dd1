#pragma once

/// \file
/// Order reduction: an order-k operator A is rewritten as a first-order
/// operator acting on (k-1)-th gradients, stacked with the compatibility
/// operator curl_{k-1} that singles out gradients among symmetric tensors.

#include "bvb/operator.hpp"

#include <map>
#include <stdexcept>
#include <utility>

namespace bvb {

/// First-order operator on V ⊙^m R^n-valued maps,
///   (curl_m w)_{j,beta,(i,l)} = d_i w^j_{beta+e_l} - d_l w^j_{beta+e_i},
/// one row per (j, beta with |beta| = m-1, i < l), in that nesting order.
inline DiffOperator curl_operator(int n, int dim_v, int m) {
  if (m < 1) throw std::invalid_argument("curl_operator: m must be >= 1");
  if (n < 2) throw std::invalid_argument("curl_operator: n must be >= 2");
  if (dim_v < 1) throw std::invalid_argument("curl_operator: dimV must be >= 1");
  const SymIndexSet dom(n, m);
  const SymIndexSet base(n, m - 1);
  const auto s = static_cast<Eigen::Index>(dom.size());
  const int pairs = n * (n - 1) / 2;
  const auto rows = static_cast<Eigen::Index>(dim_v) * static_cast<Eigen::Index>(base.size()) * pairs;
  std::vector<RealMatrix> coef(static_cast<std::size_t>(n),
                               RealMatrix::Zero(rows, dim_v * s));
  Eigen::Index row = 0;
  for (int j = 0; j < dim_v; ++j) {
    for (const MultiIndex& beta : base.indices()) {
      for (int i = 0; i < n; ++i) {
        for (int l = i + 1; l < n; ++l, ++row) {
          const auto col_l = static_cast<Eigen::Index>(dom.rank(beta + MultiIndex::unit(n, l)));
          const auto col_i = static_cast<Eigen::Index>(dom.rank(beta + MultiIndex::unit(n, i)));
          coef[i](row, j * s + col_l) += 1.0;
          coef[l](row, j * s + col_i) -= 1.0;
        }
      }
    }
  }
  DiffOperator::CoefficientMap c;
  for (int i = 0; i < n; ++i) c.emplace(MultiIndex::unit(n, i), std::move(coef[i]));
  return {n, 1, static_cast<int>(dim_v * s), static_cast<int>(rows), std::move(c)};
}

struct LinearizationResult {
  DiffOperator lifted;
  std::pair<int, int> tilde_rows;  // [begin, end) rows of the lifted codomain
  std::pair<int, int> curl_rows;   // empty for first-order input
  /// c^i_beta keyed by (i, beta), |beta| = k-1.
  std::map<std::pair<int, MultiIndex>, int> constants;
};

/// Number of ordered pairs (l, gamma) with |gamma| = k-1 and gamma + e_l = alpha,
/// i.e. the number of axes l with alpha_l >= 1.
inline int permutation_count(const MultiIndex& alpha) {
  int c = 0;
  for (int l = 0; l < alpha.size(); ++l) c += alpha[l] >= 1 ? 1 : 0;
  return c;
}

/// L(A) = Ã ⊕ curl_{k-1} with (Ã_i)_{j,beta} = (A_{beta+e_i})_j / c^i_beta.
inline LinearizationResult linearize(const DiffOperator& op) {
  const int n = op.n(), k = op.order(), dv = op.dim_v(), dw = op.dim_w();
  LinearizationResult out{op, {0, dw}, {dw, dw}, {}};
  if (k == 1) {
    for (int i = 0; i < n; ++i) out.constants[{i, MultiIndex::zero(n)}] = 1;
    return out;
  }
  const SymIndexSet set(n, k - 1);
  const auto s = static_cast<Eigen::Index>(set.size());
  const int lifted_v = static_cast<int>(dv * s);

  std::vector<RealMatrix> tilde(static_cast<std::size_t>(n), RealMatrix::Zero(dw, lifted_v));
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index b = 0; b < s; ++b) {
      const MultiIndex& beta = set.unrank(static_cast<std::size_t>(b));
      const MultiIndex alpha = beta + MultiIndex::unit(n, i);
      const int c = permutation_count(alpha);
      out.constants[{i, beta}] = c;
      auto it = op.coefficients().find(alpha);
      if (it == op.coefficients().end()) continue;
      for (int j = 0; j < dv; ++j) tilde[i].col(j * s + b) = it->second.col(j) / c;
    }
  }

  const int curl_rows = n >= 2 ? static_cast<int>(dv * static_cast<int>(SymIndexSet(n, k - 2).size()) *
                                                  (n * (n - 1) / 2))
                               : 0;
  DiffOperator::CoefficientMap c;
  if (curl_rows > 0) {
    const DiffOperator curl = curl_operator(n, dv, k - 1);
    for (int i = 0; i < n; ++i) {
      RealMatrix b(dw + curl_rows, lifted_v);
      b.topRows(dw) = tilde[i];
      b.bottomRows(curl_rows) = curl.coefficients().at(MultiIndex::unit(n, i));
      c.emplace(MultiIndex::unit(n, i), std::move(b));
    }
  } else {
    for (int i = 0; i < n; ++i) c.emplace(MultiIndex::unit(n, i), tilde[i]);
  }
  out.lifted = DiffOperator(n, 1, lifted_v, dw + curl_rows, std::move(c));
  out.tilde_rows = {0, dw};
  out.curl_rows = {dw, dw + curl_rows};
  return out;
}

/// Max coefficient of L(A)(nabla^{k-1} p) - (A p, 0).
inline double linearization_residual(const LinearizationResult& lin, const DiffOperator& op,
                                     const PolynomialField& p) {
  const PolynomialField lhs = apply_poly(lin.lifted, higher_gradient(p, op.order() - 1));
  const PolynomialField rhs = apply_poly(op, p);
  double worst = 0;
  const int dw = op.dim_w();
  for (const auto& [beta, v] : lhs.coefficients()) {
    const RealVector r = rhs.coefficient(beta);
    worst = std::max(worst, (v.head(dw) - r).cwiseAbs().maxCoeff());
    if (v.size() > dw) worst = std::max(worst, v.tail(v.size() - dw).cwiseAbs().maxCoeff());
  }
  for (const auto& [beta, v] : rhs.coefficients()) {
    if (lhs.coefficients().count(beta) == 0) worst = std::max(worst, v.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace bvb
