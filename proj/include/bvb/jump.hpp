#pragma once

/// \file
/// One-sided averages, approximate-jump detection, upper densities, the
/// interface-density check and the rank-one jump condition.

#include "bvb/ellipticity.hpp"
#include "bvb/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace bvb {

enum class Side { plus, minus };

inline constexpr std::size_t kMinHalfBallCells = 20;

/// Mean of the cell values with centre in {y in B_r(x) : ±<nu, y - x> > 0}.
inline RealVector half_ball_avg(const GridField& field, const RealVector& x, const RealVector& nu,
                                double r, Side side) {
  const auto& g = field.grid();
  if (!g.contains_ball(x, r)) throw std::invalid_argument("half_ball_avg: ball leaves the grid");
  const double sgn = side == Side::plus ? 1.0 : -1.0;
  std::vector<std::size_t> cells;
  g.for_each_in_ball(x, r, [&](std::size_t c, const RealVector& off) {
    if (sgn * nu.dot(off) > 0) cells.push_back(c);
  });
  if (cells.size() < kMinHalfBallCells) {
    throw std::invalid_argument("half_ball_avg: fewer than 20 cells in the half-ball");
  }
  RealVector out(field.dim_v());
  std::vector<double> comp(cells.size());
  for (int j = 0; j < field.dim_v(); ++j) {
    for (std::size_t i = 0; i < cells.size(); ++i) comp[i] = field.value(cells[i])(j);
    out(j) = pairwise_sum(comp) / static_cast<double>(cells.size());
  }
  return out;
}

/// (a, b, nu) with the convention that the first nonzero entry of nu is
/// positive; (a, b, nu) and (b, a, -nu) describe the same jump.
struct JumpTriple {
  RealVector a, b, nu;
};

inline JumpTriple normalized(JumpTriple t) {
  for (Eigen::Index i = 0; i < t.nu.size(); ++i) {
    if (std::abs(t.nu(i)) > 1e-14) {
      if (t.nu(i) < 0) {
        t.nu = -t.nu;
        std::swap(t.a, t.b);
      }
      break;
    }
  }
  return t;
}

namespace detail {

inline void check_radii(const std::vector<double>& radii, double h, const char* who) {
  if (radii.empty()) throw std::invalid_argument(std::string(who) + ": no radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] < 2 * h) throw std::invalid_argument(std::string(who) + ": radius below 2h");
    if (i > 0 && !(radii[i] < radii[i - 1])) {
      throw std::invalid_argument(std::string(who) + ": radii must be strictly decreasing");
    }
  }
}

// Ball cells cached once so each trial direction is a single pass.
struct BallSample {
  std::vector<RealVector> offsets;
  std::vector<std::size_t> cells;
};

inline BallSample sample_ball(const Grid& g, const RealVector& x, double r) {
  BallSample s;
  g.for_each_in_ball(x, r, [&](std::size_t c, const RealVector& off) {
    s.cells.push_back(c);
    s.offsets.push_back(off);
  });
  return s;
}

struct SideMeans {
  RealVector plus, minus;
  std::size_t n_plus = 0, n_minus = 0;
};

inline SideMeans side_means(const GridField& f, const BallSample& s, const RealVector& nu) {
  SideMeans m{RealVector::Zero(f.dim_v()), RealVector::Zero(f.dim_v())};
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    const double t = nu.dot(s.offsets[i]);
    if (t > 0) {
      m.plus += f.value(s.cells[i]);
      ++m.n_plus;
    } else if (t < 0) {
      m.minus += f.value(s.cells[i]);
      ++m.n_minus;
    }
  }
  if (m.n_plus) m.plus /= static_cast<double>(m.n_plus);
  if (m.n_minus) m.minus /= static_cast<double>(m.n_minus);
  return m;
}

inline double jump_score(const GridField& f, const BallSample& s, const RealVector& nu) {
  const auto m = side_means(f, s, nu);
  if (m.n_plus < kMinHalfBallCells || m.n_minus < kMinHalfBallCells) return -1.0;
  return (m.plus - m.minus).norm();
}

// Largest forward difference between neighbouring cells of the ball that both
// sit at least 2h from the plane through x, i.e. on the smooth parts.
inline double noise_floor(const GridField& f, const BallSample& s, const RealVector& nu) {
  const auto& g = f.grid();
  const double r2 = [&] {
    double m = 0;
    for (const auto& o : s.offsets) m = std::max(m, o.squaredNorm());
    return m;
  }();
  double worst = 0;
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    const double side = nu.dot(s.offsets[i]);
    if (std::abs(side) < 2 * g.h()) continue;
    for (int a = 0; a < g.n(); ++a) {
      if (g.axis_index(s.cells[i], a) + 1 >= g.cells_per_axis()) continue;
      RealVector off = s.offsets[i];
      off(a) += g.h();
      if (off.squaredNorm() > r2) continue;
      if (nu.dot(off) * side <= 0 || std::abs(nu.dot(off)) < 2 * g.h()) continue;
      const std::size_t nb = s.cells[i] + g.stride(a);
      worst = std::max(worst, (f.value(nb) - f.value(s.cells[i])).norm());
    }
  }
  return worst;
}

inline void refine_direction(const GridField& f, const BallSample& s, RealVector& nu, double step) {
  double best = jump_score(f, s, nu);
  for (int halvings = 0; halvings < 30;) {
    const RealMatrix tangent = complement_basis<double>(nu);
    bool improved = false;
    for (Eigen::Index t = 0; t < tangent.cols(); ++t) {
      for (double sgn : {1.0, -1.0}) {
        RealVector cand = nu + sgn * step * tangent.col(t);
        cand.normalize();
        const double sc = jump_score(f, s, cand);
        if (sc > best) {
          best = sc;
          nu = cand;
          improved = true;
        }
      }
    }
    if (!improved) {
      step *= 0.5;
      ++halvings;
    }
  }
}

// Moves nu to the midpoint of the maximal-contrast window along each tangent.
inline void center_on_plateau(const GridField& f, const BallSample& s, RealVector& nu, double reach) {
  const double top = jump_score(f, s, nu);
  const double floor = top - 1e-12 * std::max(1.0, top);
  for (int pass = 0; pass < 2; ++pass) {
    const RealMatrix tangent = complement_basis<double>(nu);
    for (Eigen::Index t = 0; t < tangent.cols(); ++t) {
      auto at = [&](double tau) {
        RealVector c = nu + tau * tangent.col(t);
        return RealVector(c / c.norm());
      };
      auto edge = [&](double sgn) {
        double lo = 0, hi = reach;
        if (jump_score(f, s, at(sgn * hi)) >= floor) return hi;
        for (int it = 0; it < 40; ++it) {
          const double mid = 0.5 * (lo + hi);
          (jump_score(f, s, at(sgn * mid)) >= floor ? lo : hi) = mid;
        }
        return lo;
      };
      const double up = edge(1.0), down = edge(-1.0);
      nu = at(0.5 * (up - down));
    }
  }
}

}  // namespace detail

inline constexpr double kCauchyFraction = 0.05;
inline constexpr double kNoiseFactor = 10.0;

/// Looks for an approximate jump at x. The direction maximising the one-sided
/// contrast at the smallest radius is found by a sphere scan plus pattern
/// search; the triple is accepted when the one-sided means settle along the
/// radii and the contrast clears the noise floor.
inline std::optional<JumpTriple> jump_detect(const GridField& field, const RealVector& x,
                                             const std::vector<double>& radii,
                                             int resolution = 16) {
  const auto& g = field.grid();
  detail::check_radii(radii, g.h(), "jump_detect");
  for (double r : radii) {
    if (!g.contains_ball(x, r)) throw std::invalid_argument("jump_detect: ball leaves the grid");
  }
  const int n = g.n();
  const auto smallest = detail::sample_ball(g, x, radii.back());

  RealVector best_nu;
  double best = -1.0;
  for (const auto& nu : sphere_grid(n, resolution)) {
    const double s = detail::jump_score(field, smallest, nu);
    if (s > best) {
      best = s;
      best_nu = nu;
    }
  }
  if (best <= 0) return std::nullopt;

  if (n > 1) {
    const double step = std::numbers::pi / resolution;
    detail::refine_direction(field, smallest, best_nu, step);
    // The contrast is flat over an angular window of width ~h/r; the largest
    // ball has the narrowest window, so the direction is centred there.
    const auto largest = detail::sample_ball(g, x, radii.front());
    detail::refine_direction(field, largest, best_nu, step);
    detail::center_on_plateau(field, largest, best_nu, 2 * step);
  }

  const auto m = detail::side_means(field, smallest, best_nu);
  const double contrast = (m.plus - m.minus).norm();
  if (!(contrast > kNoiseFactor * detail::noise_floor(field, smallest, best_nu))) {
    return std::nullopt;
  }
  RealVector prev_plus, prev_minus;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const auto mi = detail::side_means(field, detail::sample_ball(g, x, radii[i]), best_nu);
    if (i > 0 && ((mi.plus - prev_plus).norm() >= kCauchyFraction * contrast ||
                  (mi.minus - prev_minus).norm() >= kCauchyFraction * contrast)) {
      return std::nullopt;
    }
    prev_plus = mi.plus;
    prev_minus = mi.minus;
  }
  return normalized({m.plus, m.minus, best_nu});
}

struct DensityProfile {
  RealVector center;
  std::vector<double> radii;
  std::vector<double> values;
};

/// |mu|(B_r(x)) / r^{n-1} for each radius.
inline DensityProfile upper_density(const MeasureField& mu, const RealVector& x,
                                    const std::vector<double>& radii) {
  detail::check_radii(radii, mu.grid().h(), "upper_density");
  DensityProfile p{x, radii, {}};
  for (double r : radii) {
    p.values.push_back(total_variation(mu, Ball{x, r}) / std::pow(r, mu.grid().n() - 1));
  }
  return p;
}

/// (n-1)-volume of {y : <nu, y> = c} inside the box [lo, hi]^n, for n <= 3.
inline double hyperplane_section_area(const Hyperplane& plane, double lo, double hi) {
  const RealVector& nu = plane.normal;
  const int n = static_cast<int>(nu.size());
  if (n == 1) {
    const double y = plane.offset / nu(0);
    return (y >= lo && y <= hi) ? 1.0 : 0.0;
  }
  if (n > 3) throw std::invalid_argument("hyperplane_section_area: n > 3 is not supported");
  std::vector<RealVector> pts;
  const int corners = 1 << n;
  auto corner = [&](int bits) {
    RealVector v(n);
    for (int d = 0; d < n; ++d) v(d) = (bits >> d) & 1 ? hi : lo;
    return v;
  };
  for (int bits = 0; bits < corners; ++bits) {
    const RealVector p = corner(bits);
    const double sp = nu.dot(p) - plane.offset;
    if (sp == 0) pts.push_back(p);
    for (int d = 0; d < n; ++d) {
      if ((bits >> d) & 1) continue;
      const RealVector q = corner(bits | (1 << d));
      const double sq = nu.dot(q) - plane.offset;
      if ((sp < 0 && sq > 0) || (sp > 0 && sq < 0)) pts.push_back(p + (sp / (sp - sq)) * (q - p));
    }
  }
  if (pts.size() < 2) return 0.0;
  if (n == 2) {
    double len = 0;
    for (const auto& p : pts)
      for (const auto& q : pts) len = std::max(len, (p - q).norm());
    return len;
  }
  RealVector c = RealVector::Zero(n);
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  const RealMatrix t = complement_basis<double>(RealVector(nu / nu.norm()));
  std::vector<std::pair<double, RealVector>> ring;
  for (const auto& p : pts) {
    const RealVector d = t.transpose() * (p - c);
    ring.emplace_back(std::atan2(d(1), d(0)), d);
  }
  std::sort(ring.begin(), ring.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double area = 0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto& p = ring[i].second;
    const auto& q = ring[(i + 1) % ring.size()].second;
    area += 0.5 * (p(0) * q(1) - p(1) * q(0));
  }
  return std::abs(area);
}

struct StructureReport {
  RealVector measured;
  RealVector expected;
  double relative_error = 0;
  double area = 0;
  std::size_t tube_cells = 0;
  double h = 0;
};

inline constexpr double kTubeHalfWidth = 1.5;  // in cells

/// Vector sum of the discrete masses in the tube |<nu, y> - c| < 1.5h,
/// divided by the area of the interface inside the interior box, against the
/// predicted density B(nu)(a - b).
inline StructureReport structure_check(const DiffOperator& op, const GridField& field,
                                       const JumpTriple& expected, const Hyperplane& plane) {
  const auto mu = discrete_apply(op, field);
  const auto& g = field.grid();
  StructureReport rep;
  rep.h = g.h();
  rep.expected = b_tensor(op, expected.a - expected.b, expected.nu);
  const double width = kTubeHalfWidth * g.h();
  std::vector<std::vector<double>> parts(static_cast<std::size_t>(op.dim_w()));
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    if (!mu.interior(c)) continue;
    if (std::abs(plane.normal.dot(g.center(c)) - plane.offset) >= width) continue;
    ++rep.tube_cells;
    for (int j = 0; j < op.dim_w(); ++j) parts[j].push_back(mu.mass(c)(j));
  }
  rep.area = hyperplane_section_area(plane, g.lo(), mu.interior_hi());
  if (!(rep.area > 0)) throw std::invalid_argument("structure_check: interface misses the grid");
  rep.measured.resize(op.dim_w());
  for (int j = 0; j < op.dim_w(); ++j) rep.measured(j) = pairwise_sum(parts[j]) / rep.area;
  const double scale = rep.expected.norm();
  rep.relative_error = (rep.measured - rep.expected).norm() / (scale > 0 ? scale : 1.0);
  return rep;
}

struct StructureConvergence {
  std::vector<double> h;
  std::vector<double> errors;
  double order = 0;
};

/// Repeats structure_check for a constant jump (a, b) across the plane on
/// [lo, hi]^n at each spacing and fits the convergence order.
inline StructureConvergence structure_convergence(const DiffOperator& op, const JumpTriple& jump,
                                                  double offset, double lo, double hi,
                                                  const std::vector<double>& spacings) {
  StructureConvergence out;
  const int n = op.n();
  for (double h : spacings) {
    const Grid g(n, lo, hi, h);
    const auto field = synth_jump(constant_field(jump.a, n), constant_field(jump.b, n), jump.nu,
                                  offset, g);
    const auto rep = structure_check(op, field, jump, Hyperplane{jump.nu, offset});
    out.h.push_back(h);
    out.errors.push_back(rep.relative_error);
  }
  if (out.h.size() >= 2) out.order = fit_loglog_slope(out.h, out.errors);
  return out;
}

/// Solves sym_power(a, nu, k-1) = f_diff for a by least squares; returns a
/// only when the relative residual is below 1e-8.
inline constexpr double kRankOneTolerance = 1e-8;

inline std::optional<RealVector> rank_one_solve(const RealVector& f_diff, const RealVector& nu,
                                                int k) {
  if (k < 1) throw std::invalid_argument("rank_one_solve: k must be >= 1");
  if (std::abs(nu.norm() - 1.0) > 1e-12) throw std::invalid_argument("rank_one_solve: |nu| must be 1");
  const int n = static_cast<int>(nu.size());
  const auto s = static_cast<Eigen::Index>(SymIndexSet(n, k - 1).size());
  if (f_diff.size() % s != 0) throw std::invalid_argument("rank_one_solve: f_diff has wrong size");
  const auto dv = f_diff.size() / s;
  if (f_diff.norm() == 0) return RealVector(RealVector::Zero(dv));
  RealMatrix m(f_diff.size(), dv);
  for (Eigen::Index j = 0; j < dv; ++j) {
    m.col(j) = sym_power<double>(RealVector::Unit(dv, j), nu, k - 1);
  }
  const RealVector a = m.colPivHouseholderQr().solve(f_diff);
  if ((m * a - f_diff).norm() >= kRankOneTolerance * f_diff.norm()) return std::nullopt;
  return a;
}

}  // namespace bvb
