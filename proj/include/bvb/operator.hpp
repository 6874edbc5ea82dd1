#pragma once

/// \file
/// Homogeneous constant-coefficient operators  B[D]u = sum_{|alpha|=k} B_alpha d^alpha u,
/// their principal symbols, exact action on polynomials and polynomial null
/// spaces.

#include "bvb/tensor_core.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bvb {

class DiffOperator {
 public:
  using CoefficientMap = std::map<MultiIndex, RealMatrix>;

  DiffOperator(int n, int k, int dim_v, int dim_w, CoefficientMap coeffs)
      : n_(n), k_(k), dim_v_(dim_v), dim_w_(dim_w), coeffs_(std::move(coeffs)) {
    if (n < 1) throw std::invalid_argument("DiffOperator: n must be >= 1");
    if (k < 1) throw std::invalid_argument("DiffOperator: order k must be >= 1");
    if (dim_v < 1 || dim_w < 1) {
      throw std::invalid_argument("DiffOperator: dimV and dimW must be >= 1");
    }
    bool nonzero = false;
    for (const auto& [alpha, b] : coeffs_) {
      if (alpha.size() != n || alpha.order() != k) {
        throw std::invalid_argument("DiffOperator: coefficient index " + alpha.to_string() +
                                    " is not of order " + std::to_string(k) +
                                    " in dimension " + std::to_string(n));
      }
      if (b.rows() != dim_w || b.cols() != dim_v) {
        throw std::invalid_argument("DiffOperator: coefficient " + alpha.to_string() +
                                    " has shape " + std::to_string(b.rows()) + "x" +
                                    std::to_string(b.cols()) + ", expected " +
                                    std::to_string(dim_w) + "x" + std::to_string(dim_v));
      }
      if (!b.allFinite()) throw std::invalid_argument("DiffOperator: non-finite coefficient");
      if (b.cwiseAbs().maxCoeff() > 0) nonzero = true;
    }
    if (!nonzero) throw std::invalid_argument("DiffOperator: all coefficients vanish");
  }

  int n() const { return n_; }
  int order() const { return k_; }
  int dim_v() const { return dim_v_; }
  int dim_w() const { return dim_w_; }
  const CoefficientMap& coefficients() const { return coeffs_; }

  /// Largest spectral norm among the coefficients.
  double max_coefficient_norm() const {
    double m = 0;
    for (const auto& [alpha, b] : coeffs_) {
      Eigen::JacobiSVD<RealMatrix> svd(b);
      m = std::max(m, svd.singularValues()(0));
    }
    return m;
  }

  DiffOperator scaled(double lambda) const {
    CoefficientMap c = coeffs_;
    for (auto& [alpha, b] : c) b *= lambda;
    return {n_, k_, dim_v_, dim_w_, std::move(c)};
  }

  friend bool operator==(const DiffOperator& a, const DiffOperator& b) {
    if (a.n_ != b.n_ || a.k_ != b.k_ || a.dim_v_ != b.dim_v_ || a.dim_w_ != b.dim_w_ ||
        a.coeffs_.size() != b.coeffs_.size()) {
      return false;
    }
    for (auto ia = a.coeffs_.begin(), ib = b.coeffs_.begin(); ia != a.coeffs_.end(); ++ia, ++ib) {
      if (!(ia->first == ib->first) || ia->second != ib->second) return false;
    }
    return true;
  }

 private:
  int n_;
  int k_;
  int dim_v_;
  int dim_w_;
  CoefficientMap coeffs_;
};

/// Principal symbol  sum_alpha xi^alpha B_alpha  for real or complex xi.
template <typename Derived>
Matrix<typename Derived::Scalar> symbol(const DiffOperator& op,
                                        const Eigen::MatrixBase<Derived>& xi) {
  using S = typename Derived::Scalar;
  if (xi.size() != op.n()) throw std::invalid_argument("symbol: xi has wrong dimension");
  Matrix<S> out = Matrix<S>::Zero(op.dim_w(), op.dim_v());
  for (const auto& [alpha, b] : op.coefficients()) {
    out += monomial(xi, alpha) * b.template cast<S>();
  }
  return out;
}

/// Formal adjoint  (-1)^k sum B_alpha^T d^alpha.
inline DiffOperator adjoint(const DiffOperator& op) {
  const double sign = (op.order() % 2 == 0) ? 1.0 : -1.0;
  DiffOperator::CoefficientMap c;
  for (const auto& [alpha, b] : op.coefficients()) c.emplace(alpha, sign * b.transpose());
  return {op.n(), op.order(), op.dim_w(), op.dim_v(), std::move(c)};
}

/// (v, nu) -> B(nu) v for first-order operators.
inline RealVector b_tensor(const DiffOperator& op, const RealVector& v, const RealVector& nu) {
  if (op.order() != 1) throw std::invalid_argument("b_tensor: operator must be first order");
  if (v.size() != op.dim_v()) throw std::invalid_argument("b_tensor: v has wrong dimension");
  return symbol(op, nu) * v;
}

/// Composition  outer[D] ∘ inner[D]; orders add.
inline DiffOperator compose(const DiffOperator& outer, const DiffOperator& inner) {
  if (outer.n() != inner.n() || outer.dim_v() != inner.dim_w()) {
    throw std::invalid_argument("compose: incompatible operators");
  }
  DiffOperator::CoefficientMap c;
  for (const auto& [a, ba] : outer.coefficients()) {
    for (const auto& [g, bg] : inner.coefficients()) {
      const MultiIndex s = a + g;
      RealMatrix prod = ba * bg;
      auto it = c.find(s);
      if (it == c.end()) {
        c.emplace(s, std::move(prod));
      } else {
        it->second += prod;
      }
    }
  }
  return {outer.n(), outer.order() + inner.order(), inner.dim_v(), outer.dim_w(), std::move(c)};
}

// ---------------------------------------------------------------------------
// Polynomial fields
// ---------------------------------------------------------------------------

/// V-valued polynomial  sum_beta c_beta y^beta.
class PolynomialField {
 public:
  PolynomialField(int n, int dim_v) : n_(n), dim_v_(dim_v) {}

  int n() const { return n_; }
  int dim_v() const { return dim_v_; }
  const std::map<MultiIndex, RealVector>& coefficients() const { return coeffs_; }

  void add_term(const MultiIndex& beta, const RealVector& c) {
    if (beta.size() != n_ || c.size() != dim_v_) {
      throw std::invalid_argument("PolynomialField::add_term: dimension mismatch");
    }
    auto it = coeffs_.find(beta);
    if (it == coeffs_.end()) {
      coeffs_.emplace(beta, c);
    } else {
      it->second += c;
    }
  }

  RealVector coefficient(const MultiIndex& beta) const {
    auto it = coeffs_.find(beta);
    return it == coeffs_.end() ? RealVector::Zero(dim_v_) : it->second;
  }

  /// Highest |beta| with a nonzero coefficient; -1 for the zero polynomial.
  int degree() const {
    int d = -1;
    for (const auto& [beta, c] : coeffs_) {
      if (c.cwiseAbs().maxCoeff() > 0) d = std::max(d, beta.order());
    }
    return d;
  }

  double max_abs_coefficient() const {
    double m = 0;
    for (const auto& [beta, c] : coeffs_) m = std::max(m, c.cwiseAbs().maxCoeff());
    return m;
  }

  RealVector evaluate(const RealVector& y) const {
    RealVector out = RealVector::Zero(dim_v_);
    for (const auto& [beta, c] : coeffs_) out += monomial(y, beta) * c;
    return out;
  }

  PolynomialField derivative(const MultiIndex& alpha) const {
    PolynomialField out(n_, dim_v_);
    for (const auto& [beta, c] : coeffs_) {
      if (!beta.dominates(alpha)) continue;
      const MultiIndex rest = beta - alpha;
      out.add_term(rest, (beta.factorial() / rest.factorial()) * c);
    }
    return out;
  }

  PolynomialField operator-(const PolynomialField& other) const {
    PolynomialField out = *this;
    for (const auto& [beta, c] : other.coeffs_) out.add_term(beta, -c);
    return out;
  }
  PolynomialField operator+(const PolynomialField& other) const {
    PolynomialField out = *this;
    for (const auto& [beta, c] : other.coeffs_) out.add_term(beta, c);
    return out;
  }

 private:
  int n_;
  int dim_v_;
  std::map<MultiIndex, RealVector> coeffs_;
};

/// Exact  sum_alpha B_alpha d^alpha p.
inline PolynomialField apply_poly(const DiffOperator& op, const PolynomialField& p) {
  if (op.n() != p.n() || op.dim_v() != p.dim_v()) {
    throw std::invalid_argument("apply_poly: polynomial dimensions do not match operator");
  }
  PolynomialField out(op.n(), op.dim_w());
  for (const auto& [beta, c] : p.coefficients()) {
    for (const auto& [alpha, b] : op.coefficients()) {
      if (!beta.dominates(alpha)) continue;
      const MultiIndex rest = beta - alpha;
      out.add_term(rest, (beta.factorial() / rest.factorial()) * (b * c));
    }
  }
  return out;
}

/// nabla^m p as a (V ⊙^m R^n)-valued polynomial: component (j, gamma) = d^gamma p^j.
inline PolynomialField higher_gradient(const PolynomialField& p, int m) {
  const SymIndexSet set(p.n(), m);
  const auto s = static_cast<Eigen::Index>(set.size());
  PolynomialField out(p.n(), static_cast<int>(p.dim_v() * s));
  for (Eigen::Index g = 0; g < s; ++g) {
    const PolynomialField d = p.derivative(set.unrank(static_cast<std::size_t>(g)));
    for (const auto& [beta, c] : d.coefficients()) {
      RealVector lifted = RealVector::Zero(out.dim_v());
      for (Eigen::Index j = 0; j < p.dim_v(); ++j) lifted(j * s + g) = c(j);
      out.add_term(beta, lifted);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Polynomial null spaces
// ---------------------------------------------------------------------------

/// Relative singular-value threshold for polynomial null vectors.
inline constexpr double kNullspaceTolerance = 1e-9;

namespace detail {

/// Matrix of op restricted to homogeneous V-valued polynomials of degree m,
/// columns indexed (beta, j), rows (eta, i) with |eta| = m - k.
inline RealMatrix homogeneous_block(const DiffOperator& op, int m,
                                    const std::vector<MultiIndex>& domain) {
  const int out_degree = m - op.order();
  const int dv = op.dim_v(), dw = op.dim_w();
  if (out_degree < 0) return RealMatrix::Zero(0, static_cast<Eigen::Index>(domain.size()) * dv);
  const SymIndexSet range(op.n(), out_degree);
  RealMatrix a = RealMatrix::Zero(static_cast<Eigen::Index>(range.size()) * dw,
                                  static_cast<Eigen::Index>(domain.size()) * dv);
  for (std::size_t col = 0; col < domain.size(); ++col) {
    const MultiIndex& beta = domain[col];
    for (const auto& [alpha, b] : op.coefficients()) {
      if (!beta.dominates(alpha)) continue;
      const MultiIndex rest = beta - alpha;
      const double f = beta.factorial() / rest.factorial();
      const auto row = static_cast<Eigen::Index>(range.rank(rest));
      a.block(row * dw, static_cast<Eigen::Index>(col) * dv, dw, dv) += f * b;
    }
  }
  return a;
}

inline std::vector<PolynomialField> homogeneous_kernel(const DiffOperator& op, int m) {
  const auto domain = multiindex_enumerate(op.n(), m);
  const RealMatrix a = homogeneous_block(op, m, domain);
  const RealSubspace ker = kernel_basis<double>(a, kNullspaceTolerance);
  std::vector<PolynomialField> out;
  const int dv = op.dim_v();
  for (Eigen::Index c = 0; c < ker.dim(); ++c) {
    PolynomialField p(op.n(), dv);
    for (std::size_t t = 0; t < domain.size(); ++t) {
      RealVector coef = ker.basis.col(c).segment(static_cast<Eigen::Index>(t) * dv, dv);
      if (coef.cwiseAbs().maxCoeff() > 0) p.add_term(domain[t], coef);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace detail

/// Basis of {p : deg p <= d, B p = 0}. The operator is homogeneous, so the
/// kernel splits by homogeneous degree and is solved block by block.
inline std::vector<PolynomialField> poly_nullspace(const DiffOperator& op, int d) {
  if (d < 0) throw std::invalid_argument("poly_nullspace: degree cap must be >= 0");
  std::vector<PolynomialField> out;
  for (int m = 0; m <= d; ++m) {
    auto layer = detail::homogeneous_kernel(op, m);
    for (auto& p : layer) out.push_back(std::move(p));
  }
  return out;
}

struct EllBound {
  std::optional<int> ell;         // absent when the null space did not stabilize
  std::vector<std::size_t> dims;  // dims[d] = dim poly_nullspace(op, d), d = 0..d_max
};

/// l = 1 + top degree of the polynomial null space, detected as the first d
/// with dim N(d) == dim N(d+1), d + 1 <= d_max. A graded kernel that gains no
/// element in degree d+1 gains none above it, since derivatives of kernel
/// elements stay in the kernel.
inline EllBound ell_bound(const DiffOperator& op, int d_max) {
  if (d_max < 1) throw std::invalid_argument("ell_bound: d_max must be >= 1");
  EllBound out;
  std::size_t total = 0;
  for (int m = 0; m <= d_max; ++m) {
    const auto domain = multiindex_enumerate(op.n(), m);
    const RealMatrix a = detail::homogeneous_block(op, m, domain);
    total += static_cast<std::size_t>(kernel_basis<double>(a, kNullspaceTolerance).dim());
    out.dims.push_back(total);
  }
  for (int d = 0; d + 1 <= d_max; ++d) {
    if (out.dims[d] == out.dims[d + 1]) {
      out.ell = d + 1;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// Coordinates on symmetric matrices. Orthonormal scales off-diagonal entries
/// by sqrt(2) so coordinate norms equal Frobenius norms; dyadic stores raw
/// entries (exact in binary floating point for integer inputs).
enum class Coordinates { orthonormal, dyadic };

/// Row of entry (a, b), a <= b, of Sym(n) in upper-triangle row-major order.
inline int sym_row(int n, int a, int b) {
  if (a > b) std::swap(a, b);
  return a * n - a * (a - 1) / 2 + (b - a);
}

inline int sym_dim(int n) { return n * (n + 1) / 2; }

/// Unpacks Sym(n) coordinates into a symmetric n x n matrix.
inline RealMatrix sym_unpack(const RealVector& w, int n, Coordinates coords) {
  RealMatrix m(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      double v = w(sym_row(n, a, b));
      if (a != b && coords == Coordinates::orthonormal) v /= std::sqrt(2.0);
      m(a, b) = m(b, a) = v;
    }
  }
  return m;
}

inline RealVector sym_pack(const RealMatrix& m, Coordinates coords) {
  const auto n = static_cast<int>(m.rows());
  RealVector w(sym_dim(n));
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      double v = 0.5 * (m(a, b) + m(b, a));
      if (a != b && coords == Coordinates::orthonormal) v *= std::sqrt(2.0);
      w(sym_row(n, a, b)) = v;
    }
  }
  return w;
}

/// D^k on scalar functions, codomain Sym^k(R^n) indexed by SymIndexSet(n, k).
/// Orthonormal rows carry sqrt(k!/beta!) so that |D^k(xi)| = |xi|^k.
inline DiffOperator gradient_power(int n, int k, Coordinates coords = Coordinates::orthonormal) {
  const SymIndexSet set(n, k);
  const double kfact = MultiIndex(std::vector<int>{k}).factorial();
  DiffOperator::CoefficientMap c;
  for (std::size_t r = 0; r < set.size(); ++r) {
    const MultiIndex& beta = set.unrank(r);
    RealMatrix b = RealMatrix::Zero(static_cast<Eigen::Index>(set.size()), 1);
    b(static_cast<Eigen::Index>(r), 0) =
        coords == Coordinates::orthonormal ? std::sqrt(kfact / beta.factorial()) : 1.0;
    c.emplace(beta, std::move(b));
  }
  return {n, k, 1, static_cast<int>(set.size()), std::move(c)};
}

/// Jacobian of V-valued maps, codomain V ⊗ R^n with row j * n + i = d_i u^j.
inline DiffOperator jacobian(int n, int dim_v) {
  DiffOperator::CoefficientMap c;
  for (int i = 0; i < n; ++i) {
    RealMatrix b = RealMatrix::Zero(dim_v * n, dim_v);
    for (int j = 0; j < dim_v; ++j) b(j * n + i, j) = 1.0;
    c.emplace(MultiIndex::unit(n, i), std::move(b));
  }
  return {n, 1, dim_v, dim_v * n, std::move(c)};
}

/// Scalar d/dy_axis.
inline DiffOperator partial_derivative(int n, int axis) {
  DiffOperator::CoefficientMap c;
  c.emplace(MultiIndex::unit(n, axis), RealMatrix::Ones(1, 1));
  return {n, 1, 1, 1, std::move(c)};
}

namespace detail {
inline DiffOperator symmetric_gradient_impl(int n, bool deviatoric, Coordinates coords) {
  DiffOperator::CoefficientMap c;
  const int dw = sym_dim(n);
  for (int i = 0; i < n; ++i) {
    RealMatrix b = RealMatrix::Zero(dw, n);
    for (int a = 0; a < n; ++a) {
      for (int bb = a; bb < n; ++bb) {
        const double w = (a != bb && coords == Coordinates::orthonormal) ? std::sqrt(2.0) : 1.0;
        const int row = sym_row(n, a, bb);
        // (Eu)_{ab} = (d_a u_b + d_b u_a) / 2
        if (a == i) b(row, bb) += 0.5 * w;
        if (bb == i) b(row, a) += 0.5 * w;
      }
      if (deviatoric) b(sym_row(n, a, a), i) -= 1.0 / n;
    }
    c.emplace(MultiIndex::unit(n, i), std::move(b));
  }
  return {n, 1, n, dw, std::move(c)};
}
}  // namespace detail

inline const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{"gradient",   "hessian",    "symmetric_gradient",
                                              "deviatoric", "divergence", "cauchy_riemann"};
  return names;
}

/// Built-in operators. `order` applies to "gradient" only (D^order).
inline DiffOperator catalog(const std::string& name, int n,
                            Coordinates coords = Coordinates::orthonormal, int order = 1) {
  if (n < 1) throw std::invalid_argument("catalog: n must be >= 1");
  if (name == "gradient") return gradient_power(n, order, coords);
  if (name == "hessian") return gradient_power(n, 2, coords);
  if (name == "symmetric_gradient") return detail::symmetric_gradient_impl(n, false, coords);
  if (name == "deviatoric") {
    if (n < 2) throw std::invalid_argument("catalog: deviatoric requires n >= 2");
    return detail::symmetric_gradient_impl(n, true, coords);
  }
  if (name == "divergence") {
    DiffOperator::CoefficientMap c;
    for (int i = 0; i < n; ++i) {
      RealMatrix b = RealMatrix::Zero(1, n);
      b(0, i) = 1.0;
      c.emplace(MultiIndex::unit(n, i), std::move(b));
    }
    return {n, 1, n, 1, std::move(c)};
  }
  if (name == "cauchy_riemann") {
    if (n != 2) throw std::invalid_argument("catalog: cauchy_riemann requires n == 2");
    DiffOperator::CoefficientMap c;
    c.emplace(MultiIndex::unit(2, 0), RealMatrix::Identity(2, 2));
    RealMatrix j(2, 2);
    j << 0, -1, 1, 0;
    c.emplace(MultiIndex::unit(2, 1), j);
    return {2, 1, 2, 2, std::move(c)};
  }
  throw std::invalid_argument("catalog: unknown operator '" + name + "'");
}

}  // namespace bvb
