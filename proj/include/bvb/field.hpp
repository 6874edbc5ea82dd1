#pragma once

/// \file
/// Cell-centred grid fields, their finite-difference images under an
/// operator, region queries and synthetic jump fields.

#include "bvb/operator.hpp"
#include "bvb/util.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace bvb {

/// Uniform grid on [lo, hi]^n with N cells per axis. Flat cell indices are
/// row-major with axis 0 slowest.
class Grid {
 public:
  Grid(int n, double lo, double hi, double h) : n_(n), lo_(lo), hi_(hi), h_(h) {
    if (n < 1) throw std::invalid_argument("Grid: n must be >= 1");
    if (!(h > 0) || !(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
      throw std::invalid_argument("Grid: need lo < hi and h > 0");
    }
    const double cells = (hi - lo) / h;
    cells_ = static_cast<int>(std::lround(cells));
    if (cells_ < 1 || std::abs(cells - cells_) > 1e-9 * std::max(1.0, cells)) {
      throw std::invalid_argument("Grid: (hi - lo) / h must be an integer");
    }
    strides_.assign(static_cast<std::size_t>(n), 1);
    for (int a = n - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * static_cast<std::size_t>(cells_);
    count_ = strides_[0] * static_cast<std::size_t>(cells_);
  }

  int n() const { return n_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double h() const { return h_; }
  int cells_per_axis() const { return cells_; }
  std::size_t cell_count() const { return count_; }
  std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
  double cell_volume() const { return std::pow(h_, n_); }

  double center_coord(int i) const { return lo_ + (i + 0.5) * h_; }

  int axis_index(std::size_t flat, int axis) const {
    return static_cast<int>((flat / strides_[static_cast<std::size_t>(axis)]) %
                            static_cast<std::size_t>(cells_));
  }

  RealVector center(std::size_t flat) const {
    RealVector c(n_);
    for (int a = 0; a < n_; ++a) c(a) = center_coord(axis_index(flat, a));
    return c;
  }

  /// Cell containing x, if x lies in the box.
  std::optional<std::size_t> locate(const RealVector& x) const {
    std::size_t flat = 0;
    for (int a = 0; a < n_; ++a) {
      const double t = (x(a) - lo_) / h_;
      if (t < 0 || t > cells_) return std::nullopt;
      const int i = std::min(cells_ - 1, static_cast<int>(std::floor(t)));
      flat += static_cast<std::size_t>(i) * strides_[a];
    }
    return flat;
  }

  bool contains_ball(const RealVector& x, double r) const {
    for (int a = 0; a < n_; ++a) {
      if (x(a) - r < lo_ - 1e-12 || x(a) + r > hi_ + 1e-12) return false;
    }
    return true;
  }

  /// Calls f(flat) for every cell whose centre lies in the closed box [a, b].
  template <typename F>
  void for_each_in_box(const RealVector& a, const RealVector& b, F&& f) const {
    std::vector<int> first(static_cast<std::size_t>(n_)), last(static_cast<std::size_t>(n_));
    for (int d = 0; d < n_; ++d) {
      first[d] = std::max(0, static_cast<int>(std::ceil((a(d) - lo_) / h_ - 0.5)));
      last[d] = std::min(cells_ - 1, static_cast<int>(std::floor((b(d) - lo_) / h_ - 0.5)));
      if (first[d] > last[d]) return;
    }
    std::vector<int> idx = first;
    while (true) {
      std::size_t flat = 0;
      for (int d = 0; d < n_; ++d) flat += static_cast<std::size_t>(idx[d]) * strides_[d];
      f(flat);
      int d = n_ - 1;
      for (; d >= 0; --d) {
        if (++idx[d] <= last[d]) break;
        idx[d] = first[d];
      }
      if (d < 0) break;
    }
  }

  /// Calls f(flat, offset) for cells whose centre satisfies |centre - x| < r.
  template <typename F>
  void for_each_in_ball(const RealVector& x, double r, F&& f) const {
    const RealVector a = x.array() - r, b = x.array() + r;
    RealVector off(n_);
    for_each_in_box(a, b, [&](std::size_t flat) {
      for (int d = 0; d < n_; ++d) off(d) = center_coord(axis_index(flat, d)) - x(d);
      if (off.squaredNorm() < r * r) f(flat, off);
    });
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.n_ == b.n_ && a.lo_ == b.lo_ && a.hi_ == b.hi_ && a.h_ == b.h_;
  }

 private:
  int n_;
  double lo_, hi_, h_;
  int cells_ = 0;
  std::vector<std::size_t> strides_;
  std::size_t count_ = 0;
};

/// V-valued cell-centre samples.
class GridField {
 public:
  GridField(Grid grid, int dim_v)
      : grid_(std::move(grid)), dim_v_(dim_v),
        values_(grid_.cell_count() * static_cast<std::size_t>(dim_v), 0.0) {
    if (dim_v < 1) throw std::invalid_argument("GridField: dim_v must be >= 1");
  }

  static GridField from_function(const Grid& grid, int dim_v,
                                 const std::function<RealVector(const RealVector&)>& f) {
    GridField out(grid, dim_v);
    for (std::size_t c = 0; c < grid.cell_count(); ++c) out.set_value(c, f(grid.center(c)));
    return out;
  }

  const Grid& grid() const { return grid_; }
  int dim_v() const { return dim_v_; }
  const std::vector<double>& raw() const { return values_; }

  Eigen::Map<const RealVector> value(std::size_t flat) const {
    return {values_.data() + flat * dim_v_, dim_v_};
  }
  void set_value(std::size_t flat, const RealVector& v) {
    if (v.size() != dim_v_) throw std::invalid_argument("GridField: value has wrong dimension");
    if (!v.allFinite()) throw std::invalid_argument("GridField: values must be finite");
    std::copy(v.data(), v.data() + dim_v_, values_.begin() + static_cast<std::ptrdiff_t>(flat * dim_v_));
  }

  GridField operator+(const GridField& other) const {
    if (!(grid_ == other.grid_) || dim_v_ != other.dim_v_) {
      throw std::invalid_argument("GridField: incompatible fields");
    }
    GridField out = *this;
    for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] += other.values_[i];
    return out;
  }

 private:
  Grid grid_;
  int dim_v_;
  std::vector<double> values_;
};

/// W-valued cell masses. Cells with any index in the top `layer` rows of an
/// axis form the boundary layer: they carry no mass and are skipped by
/// region queries.
class MeasureField {
 public:
  MeasureField(Grid grid, int dim_w, int layer = 0)
      : grid_(std::move(grid)), dim_w_(dim_w), layer_(layer),
        masses_(grid_.cell_count() * static_cast<std::size_t>(dim_w), 0.0) {
    if (dim_w < 1) throw std::invalid_argument("MeasureField: dim_w must be >= 1");
    if (layer < 0 || layer >= grid_.cells_per_axis()) {
      throw std::invalid_argument("MeasureField: boundary layer wider than the grid");
    }
  }

  const Grid& grid() const { return grid_; }
  int dim_w() const { return dim_w_; }
  int layer() const { return layer_; }

  bool interior(std::size_t flat) const {
    const int limit = grid_.cells_per_axis() - layer_;
    for (int a = 0; a < grid_.n(); ++a) {
      if (grid_.axis_index(flat, a) >= limit) return false;
    }
    return true;
  }

  /// Upper corner of the box covered by interior cells.
  double interior_hi() const { return grid_.lo() + (grid_.cells_per_axis() - layer_) * grid_.h(); }

  Eigen::Map<const RealVector> mass(std::size_t flat) const {
    return {masses_.data() + flat * dim_w_, dim_w_};
  }
  Eigen::Map<RealVector> mass(std::size_t flat) { return {masses_.data() + flat * dim_w_, dim_w_}; }

  void set_mass(std::size_t flat, const RealVector& m) {
    if (m.size() != dim_w_) throw std::invalid_argument("MeasureField: mass has wrong dimension");
    if (!interior(flat)) throw std::invalid_argument("MeasureField: boundary-layer cells carry no mass");
    mass(flat) = m;
  }

  double mass_norm(std::size_t flat) const { return mass(flat).norm(); }

 private:
  Grid grid_;
  int dim_w_;
  int layer_;
  std::vector<double> masses_;
};

struct Ball {
  RealVector center;
  double radius = 0;
};
struct Box {
  RealVector lo, hi;
};
using Region = std::variant<Ball, Box>;

/// Sum of |cell mass| over interior cells whose centre lies in the region.
inline double total_variation(const MeasureField& mu, const Region& region) {
  std::vector<double> terms;
  const auto& g = mu.grid();
  if (const auto* b = std::get_if<Ball>(&region)) {
    g.for_each_in_ball(b->center, b->radius, [&](std::size_t c, const RealVector&) {
      if (mu.interior(c)) terms.push_back(mu.mass_norm(c));
    });
  } else {
    const auto& box = std::get<Box>(region);
    g.for_each_in_box(box.lo, box.hi, [&](std::size_t c) {
      if (mu.interior(c)) terms.push_back(mu.mass_norm(c));
    });
  }
  return pairwise_sum(terms);
}

inline double total_variation(const MeasureField& mu) {
  const auto& g = mu.grid();
  return total_variation(mu, Box{RealVector::Constant(g.n(), g.lo()), RealVector::Constant(g.n(), g.hi())});
}

/// Forward-difference image of a field: on interior cells
///   mass = h^n sum_alpha B_alpha Delta_h^alpha u,
/// where Delta_h^alpha composes forward differences of step h.
inline MeasureField discrete_apply(const DiffOperator& op, const GridField& field) {
  const auto& g = field.grid();
  const int k = op.order();
  if (op.n() != g.n() || op.dim_v() != field.dim_v()) {
    throw std::invalid_argument("discrete_apply: operator does not match field");
  }
  if (g.cells_per_axis() < k + 1) throw std::invalid_argument("discrete_apply: grid too small");

  // Merge the binomial stencils of every multi-index into one offset table.
  std::map<MultiIndex, RealMatrix> stencil;
  for (const auto& [alpha, b] : op.coefficients()) {
    for (const auto& gamma : multiindices_up_to(g.n(), k)) {
      if (!alpha.dominates(gamma)) continue;
      const double sign = ((alpha - gamma).order() % 2 == 0) ? 1.0 : -1.0;
      auto [it, fresh] = stencil.try_emplace(gamma, RealMatrix::Zero(op.dim_w(), op.dim_v()));
      it->second += sign * binomial(alpha, gamma) * b;
    }
  }
  std::vector<std::pair<std::size_t, RealMatrix>> taps;
  for (auto& [gamma, m] : stencil) {
    std::size_t off = 0;
    for (int a = 0; a < g.n(); ++a) off += static_cast<std::size_t>(gamma[a]) * g.stride(a);
    taps.emplace_back(off, std::move(m));
  }

  MeasureField out(g, op.dim_w(), k);
  const double scale = std::pow(g.h(), g.n() - k);
  const std::size_t total = g.cell_count();
  const std::size_t chunks = std::min<std::size_t>(64, total);
  parallel_for(chunks, [&](std::size_t ch) {
    const std::size_t begin = total * ch / chunks, end = total * (ch + 1) / chunks;
    RealVector acc(op.dim_w());
    for (std::size_t c = begin; c < end; ++c) {
      if (!out.interior(c)) continue;
      acc.setZero();
      for (const auto& [off, m] : taps) acc.noalias() += m * field.value(c + off);
      out.mass(c) = scale * acc;
    }
  });
  return out;
}

/// Oriented hyperplane {y : <nu, y> = offset}.
struct Hyperplane {
  RealVector normal;
  double offset = 0;
};

/// Cell value p_plus(centre) where <centre, nu> >= c, p_minus(centre) elsewhere.
inline GridField synth_jump(const PolynomialField& p_plus, const PolynomialField& p_minus,
                            const RealVector& nu, double c, const Grid& grid) {
  if (std::abs(nu.norm() - 1.0) > 1e-12) throw std::invalid_argument("synth_jump: |nu| must be 1");
  if (p_plus.n() != grid.n() || p_minus.n() != grid.n() || p_plus.dim_v() != p_minus.dim_v() ||
      nu.size() != grid.n()) {
    throw std::invalid_argument("synth_jump: dimension mismatch");
  }
  GridField out(grid, p_plus.dim_v());
  parallel_for(grid.cell_count(), [&](std::size_t cell) {
    const RealVector y = grid.center(cell);
    out.set_value(cell, (y - c * nu).dot(nu) >= 0 ? p_plus.evaluate(y) : p_minus.evaluate(y));
  });
  return out;
}

inline PolynomialField constant_field(const RealVector& a, int n) {
  PolynomialField p(n, static_cast<int>(a.size()));
  p.add_term(MultiIndex::zero(n), a);
  return p;
}

}  // namespace bvb
