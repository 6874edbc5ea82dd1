#pragma once

/// \file
/// Multi-index combinatorics, coordinates on spaces of symmetric tensors and
/// the dense real/complex subspace algebra (images, kernels, intersections)
/// used throughout the library.
///
/// Symmetric m-tensors over R^n with values in V are stored in "monomial"
/// coordinates: the component (j, beta), |beta| = m, holds the coefficient of
/// d^beta u^j directly, without multinomial weights. Components are laid out
/// as j * |SymIndexSet(n, m)| + rank(beta).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace bvb {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Relative singular-value threshold for numerical rank.
inline constexpr double kRankTolerance = 1e-10;

// ---------------------------------------------------------------------------
// Multi-indices
// ---------------------------------------------------------------------------

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
    for (int e : entries_) {
      if (e < 0) throw std::invalid_argument("MultiIndex: negative entry");
    }
  }

  static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(n, 0)); }
  static MultiIndex unit(int n, int i) {
    std::vector<int> e(n, 0);
    e.at(i) = 1;
    return MultiIndex(std::move(e));
  }

  int size() const { return static_cast<int>(entries_.size()); }
  int order() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }
  int operator[](int i) const { return entries_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& entries() const { return entries_; }

  /// True when every entry is >= the corresponding entry of `other`.
  bool dominates(const MultiIndex& other) const {
    for (int i = 0; i < size(); ++i) {
      if (entries_[i] < other.entries_[i]) return false;
    }
    return true;
  }

  MultiIndex operator+(const MultiIndex& other) const {
    std::vector<int> e(entries_);
    for (int i = 0; i < size(); ++i) e[i] += other.entries_[i];
    return MultiIndex(std::move(e));
  }
  MultiIndex operator-(const MultiIndex& other) const {
    std::vector<int> e(entries_);
    for (int i = 0; i < size(); ++i) e[i] -= other.entries_[i];
    return MultiIndex(std::move(e));
  }

  /// beta! = prod beta_i!
  double factorial() const {
    double f = 1.0;
    for (int e : entries_) {
      for (int t = 2; t <= e; ++t) f *= t;
    }
    return f;
  }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

  /// Graded lexicographic: lower order first; within an order, larger leading
  /// entries first, so (2,0) < (1,1) < (0,2).
  friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
    const int oa = a.order(), ob = b.order();
    if (oa != ob) return oa < ob;
    return std::lexicographical_compare(b.entries_.begin(), b.entries_.end(),
                                        a.entries_.begin(), a.entries_.end());
  }

  std::string to_string() const {
    std::string s = "(";
    for (int i = 0; i < size(); ++i) {
      if (i) s += ",";
      s += std::to_string(entries_[i]);
    }
    return s + ")";
  }

 private:
  std::vector<int> entries_;
};

namespace detail {
inline void enumerate_rec(int n, int pos, int remaining, std::vector<int>& cur,
                          std::vector<MultiIndex>& out) {
  if (pos == n - 1) {
    cur[pos] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    cur[pos] = v;
    enumerate_rec(n, pos + 1, remaining - v, cur, out);
  }
}
}  // namespace detail

/// All multi-indices of dimension n and modulus m, graded-lex ordered.
inline std::vector<MultiIndex> multiindex_enumerate(int n, int m) {
  if (n < 1 || m < 0) {
    throw std::invalid_argument("multiindex_enumerate: need n >= 1, m >= 0");
  }
  std::vector<MultiIndex> out;
  std::vector<int> cur(static_cast<std::size_t>(n), 0);
  detail::enumerate_rec(n, 0, m, cur, out);
  return out;
}

/// All multi-indices with modulus <= d, graded-lex ordered.
inline std::vector<MultiIndex> multiindices_up_to(int n, int d) {
  std::vector<MultiIndex> out;
  for (int m = 0; m <= d; ++m) {
    auto layer = multiindex_enumerate(n, m);
    out.insert(out.end(), layer.begin(), layer.end());
  }
  return out;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

/// prod_i C(a_i, b_i)
inline double binomial(const MultiIndex& a, const MultiIndex& b) {
  double r = 1.0;
  for (int i = 0; i < a.size(); ++i) r *= binomial(a[i], b[i]);
  return r;
}

/// Index set of V ⊙^m R^n coordinates: all beta with |beta| = m.
class SymIndexSet {
 public:
  SymIndexSet(int n, int m) : n_(n), m_(m), indices_(multiindex_enumerate(n, m)) {
    for (std::size_t i = 0; i < indices_.size(); ++i) rank_.emplace(indices_[i], i);
  }

  int dimension() const { return n_; }
  int order() const { return m_; }
  std::size_t size() const { return indices_.size(); }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  std::size_t rank(const MultiIndex& beta) const {
    auto it = rank_.find(beta);
    if (it == rank_.end()) {
      throw std::out_of_range("SymIndexSet::rank: " + beta.to_string() +
                              " not of order " + std::to_string(m_));
    }
    return it->second;
  }
  const MultiIndex& unrank(std::size_t i) const { return indices_.at(i); }

 private:
  int n_;
  int m_;
  std::vector<MultiIndex> indices_;
  std::map<MultiIndex, std::size_t> rank_;
};

/// xi^beta = prod xi_i^{beta_i}
template <typename Derived>
typename Derived::Scalar monomial(const Eigen::MatrixBase<Derived>& xi,
                                  const MultiIndex& beta) {
  using S = typename Derived::Scalar;
  S v(1);
  for (int i = 0; i < beta.size(); ++i) {
    for (int p = 0; p < beta[i]; ++p) v *= xi(i);
  }
  return v;
}

/// Coordinates of a ⊗^m nu: component (j, beta) = a_j nu^beta.
template <typename Scalar>
Vector<Scalar> sym_power(const Vector<Scalar>& a, const Vector<Scalar>& nu, int m) {
  if (nu.norm() == 0.0) throw std::invalid_argument("sym_power: zero direction");
  const SymIndexSet set(static_cast<int>(nu.size()), m);
  const auto s = static_cast<Eigen::Index>(set.size());
  Vector<Scalar> out(a.size() * s);
  for (Eigen::Index b = 0; b < s; ++b) {
    const Scalar mono = monomial(nu, set.unrank(static_cast<std::size_t>(b)));
    for (Eigen::Index j = 0; j < a.size(); ++j) out(j * s + b) = a(j) * mono;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subspaces
// ---------------------------------------------------------------------------

template <typename Scalar>
struct Subspace {
  Eigen::Index ambient = 0;
  Matrix<Scalar> basis;  // ambient x dim, orthonormal columns

  Eigen::Index dim() const { return basis.cols(); }

  Matrix<Scalar> projector() const {
    if (dim() == 0) return Matrix<Scalar>::Zero(ambient, ambient);
    return basis * basis.adjoint();
  }

  /// |v - P v|
  double residual(const Vector<Scalar>& v) const {
    if (dim() == 0) return v.norm();
    return (v - basis * (basis.adjoint() * v)).norm();
  }
};

using RealSubspace = Subspace<double>;
using ComplexSubspace = Subspace<Complex>;

/// Smallest singular value counted over the column space: a wide map
/// (cols > rows) always has a kernel and reports zero.
template <typename Derived>
double sigma_min(const Eigen::MatrixBase<Derived>& m) {
  if (m.cols() == 0) return 0.0;
  if (m.cols() > m.rows()) return 0.0;
  Eigen::JacobiSVD<Matrix<typename Derived::Scalar>> svd(m.eval());
  return svd.singularValues()(svd.singularValues().size() - 1);
}

/// Null-space basis of m; singular values below rel_tol * sigma_max count as
/// zero. A zero map has the whole domain as kernel.
template <typename Scalar>
Subspace<Scalar> kernel_basis(const Matrix<Scalar>& m, double rel_tol) {
  Subspace<Scalar> out;
  out.ambient = m.cols();
  if (m.cols() == 0) return out;
  if (m.rows() == 0) {
    out.basis = Matrix<Scalar>::Identity(m.cols(), m.cols());
    return out;
  }
  Eigen::JacobiSVD<Matrix<Scalar>> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  Eigen::Index rank = 0;
  if (smax > 0) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > rel_tol * smax) ++rank;
    }
  }
  out.basis = svd.matrixV().rightCols(m.cols() - rank);
  return out;
}

/// Orthonormal basis of the column space.
template <typename Scalar>
Subspace<Scalar> subspace_image(const Matrix<Scalar>& m) {
  Subspace<Scalar> out;
  out.ambient = m.rows();
  if (m.rows() == 0 || m.cols() == 0) {
    out.basis.resize(m.rows(), 0);
    return out;
  }
  Eigen::JacobiSVD<Matrix<Scalar>> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  Eigen::Index rank = 0;
  if (smax > 0) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > kRankTolerance * smax) ++rank;
    }
  }
  out.basis = svd.matrixU().leftCols(rank);
  return out;
}

inline ComplexSubspace complex_kernel(const ComplexMatrix& m) {
  return kernel_basis<Complex>(m, kRankTolerance);
}
inline ComplexSubspace complex_kernel(const RealMatrix& m) {
  return complex_kernel(ComplexMatrix(m.cast<Complex>()));
}

/// S1 ∩ S2 as the kernel of (I - P2) restricted to S1.
template <typename Scalar>
Subspace<Scalar> subspace_intersect(const Subspace<Scalar>& s1,
                                    const Subspace<Scalar>& s2) {
  if (s1.ambient != s2.ambient) {
    throw std::invalid_argument("subspace_intersect: ambient dimension mismatch (" +
                                std::to_string(s1.ambient) + " vs " +
                                std::to_string(s2.ambient) + ")");
  }
  Subspace<Scalar> out;
  out.ambient = s1.ambient;
  if (s1.dim() == 0 || s2.dim() == 0) {
    out.basis.resize(s1.ambient, 0);
    return out;
  }
  const Matrix<Scalar> complement_part = s1.basis - s2.basis * (s2.basis.adjoint() * s1.basis);
  // Columns of s1.basis are unit vectors, so an absolute threshold is relative.
  Eigen::JacobiSVD<Matrix<Scalar>> svd(complement_part, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > 1e-8) ++rank;
  }
  const Matrix<Scalar> coeffs = svd.matrixV().rightCols(s1.dim() - rank);
  out.basis = s1.basis * coeffs;
  return out;
}

/// Spectral distance between orthogonal projectors; 1 when dimensions differ.
template <typename Scalar>
double subspace_distance(const Subspace<Scalar>& s1, const Subspace<Scalar>& s2) {
  if (s1.ambient != s2.ambient || s1.dim() != s2.dim()) return 1.0;
  if (s1.dim() == 0) return 0.0;
  const Matrix<Scalar> d = s1.projector() - s2.projector();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(d);
  return svd.singularValues()(0);
}

/// Orthonormal span of arbitrary (possibly dependent) columns.
template <typename Scalar>
Subspace<Scalar> span_of(const Matrix<Scalar>& columns) {
  return subspace_image<Scalar>(columns);
}

}  // namespace bvb
