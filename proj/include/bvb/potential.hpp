#pragma once

/// \file
/// Riesz potentials of cell measures and the scaled annulus integrals
///   r^m  sum_{r <= |y - x| < 1} |y - x|^{-(n-1+m)} |mu|(cell).

#include "bvb/field.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bvb {

/// Finite list of point masses; only |mass| enters the potentials.
struct PointMeasure {
  int n = 0;
  std::vector<RealVector> points;
  std::vector<double> masses;
};

namespace detail {
inline void check_riesz_order(int n, double s) {
  if (!(s > 0 && s < n)) throw std::invalid_argument("riesz_potential: need 0 < s < n");
}
}  // namespace detail

/// I_s(mu)(x) = sum |x - y|^{-(n-s)} |m_y| over points y != x.
inline double riesz_potential(const PointMeasure& mu, const RealVector& x, double s) {
  detail::check_riesz_order(mu.n, s);
  std::vector<double> terms;
  terms.reserve(mu.points.size());
  for (std::size_t i = 0; i < mu.points.size(); ++i) {
    const double d = (mu.points[i] - x).norm();
    if (d == 0) continue;
    terms.push_back(std::abs(mu.masses[i]) * std::pow(d, s - mu.n));
  }
  return pairwise_sum(terms);
}

/// Cell version: every interior cell other than the one containing x
/// contributes |x - centre|^{-(n-s)} |mass|.
inline double riesz_potential(const MeasureField& mu, const RealVector& x, double s) {
  const auto& g = mu.grid();
  detail::check_riesz_order(g.n(), s);
  const auto self = g.locate(x);
  std::vector<double> terms(g.cell_count(), 0.0);
  parallel_for(g.cell_count(), [&](std::size_t c) {
    if (self && c == *self) return;
    if (!mu.interior(c)) return;
    const double m = mu.mass_norm(c);
    if (m == 0) return;
    const double d = (g.center(c) - x).norm();
    if (d > 0) terms[c] = m * std::pow(d, s - g.n());
  });
  return pairwise_sum(terms);
}

/// Scaled annulus integrals for each radius in (0, 1), centred at x.
inline std::vector<double> annulus_bound(const MeasureField& mu, int m,
                                         const std::vector<double>& radii, const RealVector& x) {
  if (m < 1) throw std::invalid_argument("annulus_bound: m must be >= 1");
  const auto& g = mu.grid();
  for (double r : radii) {
    if (!(r > 0 && r < 1)) throw std::invalid_argument("annulus_bound: radii must lie in (0, 1)");
  }
  std::vector<std::pair<double, double>> cells;  // (distance, weighted mass)
  g.for_each_in_ball(x, 1.0, [&](std::size_t c, const RealVector& off) {
    if (!mu.interior(c)) return;
    const double w = mu.mass_norm(c);
    const double d = off.norm();
    if (w == 0 || d == 0) return;
    cells.emplace_back(d, w * std::pow(d, -(g.n() - 1 + m)));
  });
  std::sort(cells.begin(), cells.end());
  std::vector<double> weights(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) weights[i] = cells[i].second;
  std::vector<double> out;
  for (double r : radii) {
    const auto it = std::lower_bound(cells.begin(), cells.end(), std::make_pair(r, 0.0));
    const auto first = static_cast<std::size_t>(it - cells.begin());
    const std::span<const double> tail(weights.data() + first, weights.size() - first);
    out.push_back(std::pow(r, m) * pairwise_sum(tail));
  }
  return out;
}

inline std::vector<double> annulus_bound(const MeasureField& mu, int m,
                                         const std::vector<double>& radii) {
  return annulus_bound(mu, m, radii, RealVector::Zero(mu.grid().n()));
}

}  // namespace bvb
