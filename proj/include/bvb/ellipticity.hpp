#pragma once

/// \file
/// Ellipticity constants, C-ellipticity decisions and sampled evidence for the
/// mixing condition on first-order operators.
///
/// Nothing here is a certificate. The ellipticity constant is the smallest
/// sampled-and-refined sigma_min of the symbol (an upper bound on the true
/// constant); the C-ellipticity decision combines an algebraic criterion
/// (finite polynomial null space) with a numerical search for complex zeros;
/// the mixing report carries its sample counts.

#include "bvb/operator.hpp"
#include "bvb/util.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace bvb {

// ---------------------------------------------------------------------------
// Sphere sampling
// ---------------------------------------------------------------------------

/// Hyperspherical-angle grid on S^{n-1}: `resolution` points on the azimuthal
/// circle and resolution/2 + 1 points on each polar angle.
inline std::vector<RealVector> sphere_grid(int n, int resolution) {
  std::vector<RealVector> out;
  if (n == 1) {
    out.push_back(RealVector::Constant(1, 1.0));
    out.push_back(RealVector::Constant(1, -1.0));
    return out;
  }
  const int polar = resolution / 2 + 1;
  std::vector<int> counter(static_cast<std::size_t>(n - 1), 0);
  while (true) {
    RealVector x(n);
    double s = 1.0;
    for (int a = 0; a < n - 1; ++a) {
      const bool last = a == n - 2;
      const double phi = last ? 2.0 * std::numbers::pi * counter[a] / resolution
                              : std::numbers::pi * counter[a] / (polar - 1);
      x(a) = s * std::cos(phi);
      s *= std::sin(phi);
    }
    x(n - 1) = s;
    out.push_back(x / x.norm());
    int a = n - 2;
    for (; a >= 0; --a) {
      const int limit = (a == n - 2) ? resolution : polar;
      if (++counter[a] < limit) break;
      counter[a] = 0;
    }
    if (a < 0) break;
  }
  return out;
}

/// Orthonormal basis (n x (n-1)) of the complement of unit vector x.
template <typename Scalar>
Matrix<Scalar> complement_basis(const Vector<Scalar>& x) {
  const auto n = x.size();
  Eigen::HouseholderQR<Matrix<Scalar>> qr{Matrix<Scalar>(x)};
  const Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(n, n);
  return q.rightCols(n - 1);
}

inline RealVector random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  RealVector x(n);
  do {
    for (int i = 0; i < n; ++i) x(i) = g(rng);
  } while (x.norm() < 1e-8);
  return x / x.norm();
}

inline ComplexVector random_complex_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexVector x(n);
  do {
    for (int i = 0; i < n; ++i) x(i) = Complex(g(rng), g(rng));
  } while (x.norm() < 1e-8);
  return x / x.norm();
}

// ---------------------------------------------------------------------------
// Real ellipticity
// ---------------------------------------------------------------------------

/// Relative decision threshold: elliptic iff constant > this * max |B_alpha|.
inline constexpr double kEllipticThreshold = 1e-6;

struct EllipticityReport {
  double constant = 0;
  RealVector minimizer_xi;
  bool elliptic = false;
  std::size_t samples = 0;
  int resolution = 0;
  int refine_steps = 0;
  double threshold = 0;
};

inline EllipticityReport ellipticity_constant(const DiffOperator& op, int resolution = 32,
                                              int refine_steps = 40) {
  if (resolution < 8) {
    throw std::invalid_argument("ellipticity_constant: resolution must be >= 8");
  }
  const auto grid = sphere_grid(op.n(), resolution);
  std::vector<double> values(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { values[i] = sigma_min(symbol(op, grid[i])); });

  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = i;  // first minimizer in scan order
  }
  RealVector xi = grid[best];
  double f = values[best];

  // Pattern search on the sphere, halving the step when no tangent move helps.
  double step = 2.0 * std::numbers::pi / resolution;
  int halvings = 0;
  while (halvings < refine_steps && f > 0 && op.n() > 1) {
    const RealMatrix tangent = complement_basis<double>(xi);
    bool improved = false;
    for (Eigen::Index t = 0; t < tangent.cols(); ++t) {
      for (double sgn : {1.0, -1.0}) {
        RealVector cand = xi + sgn * step * tangent.col(t);
        cand.normalize();
        const double fc = sigma_min(symbol(op, cand));
        if (fc < f) {
          f = fc;
          xi = cand;
          improved = true;
        }
      }
    }
    if (!improved) {
      step *= 0.5;
      ++halvings;
    }
  }

  EllipticityReport r;
  r.constant = f;
  r.minimizer_xi = xi;
  r.samples = grid.size();
  r.resolution = resolution;
  r.refine_steps = refine_steps;
  r.threshold = kEllipticThreshold * op.max_coefficient_norm();
  r.elliptic = f > r.threshold;
  return r;
}

// ---------------------------------------------------------------------------
// Complex ellipticity
// ---------------------------------------------------------------------------

/// Witness residual below which a complex zero of the symbol is accepted.
inline constexpr double kWitnessTolerance = 1e-8;

struct ComplexWitness {
  ComplexVector xi;  // |xi| = 1
  ComplexVector v;   // |v| = 1
  double residual = 0;
};

namespace detail {

/// Smallest right singular vector of the symbol at xi and the residual |B(xi) v|.
inline std::pair<ComplexVector, double> smallest_direction(const DiffOperator& op,
                                                           const ComplexVector& xi) {
  const ComplexMatrix m = symbol(op, xi);
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  ComplexVector v = svd.matrixV().col(m.cols() - 1);
  const double res = (m * v).norm();
  return {std::move(v), res};
}

/// d/dxi_i of B(xi) v, column i.
inline ComplexMatrix symbol_jacobian(const DiffOperator& op, const ComplexVector& xi,
                                     const ComplexVector& v) {
  const int n = op.n();
  ComplexMatrix j = ComplexMatrix::Zero(op.dim_w(), n);
  for (const auto& [alpha, b] : op.coefficients()) {
    const ComplexVector bv = b.cast<Complex>() * v;
    for (int i = 0; i < n; ++i) {
      if (alpha[i] == 0) continue;
      const Complex d = static_cast<double>(alpha[i]) * monomial(xi, alpha - MultiIndex::unit(n, i));
      j.col(i) += d * bv;
    }
  }
  return j;
}

}  // namespace detail

/// Multi-start minimisation of |B(xi) v| over unit xi in C^n, unit v in C ⊗ V.
/// The v-step is exact (smallest singular vector); the xi-step is a projected
/// Gauss-Newton step with backtracking. Restart r draws from stream r of seed.
inline std::optional<ComplexWitness> complex_falsify(const DiffOperator& op, int restarts = 20,
                                                     int iterations = 200,
                                                     std::uint64_t seed = 0) {
  if (restarts < 1) throw std::invalid_argument("complex_falsify: restarts must be >= 1");
  const int n = op.n();
  for (int r = 0; r < restarts; ++r) {
    auto rng = seeded_engine(seed, static_cast<std::uint64_t>(r));
    ComplexVector xi = random_complex_unit(n, rng);
    auto [v, f] = detail::smallest_direction(op, xi);
    for (int it = 0; it < iterations && f > 1e-15 && n > 1; ++it) {
      const ComplexVector res = symbol(op, xi) * v;
      const ComplexMatrix tangent = complement_basis<Complex>(xi);
      const ComplexMatrix jt = detail::symbol_jacobian(op, xi, v) * tangent;
      const ComplexVector c = jt.completeOrthogonalDecomposition().solve(-res);
      const ComplexVector delta = tangent * c;
      bool accepted = false;
      double t = 1.0;
      for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
        ComplexVector cand = xi + t * delta;
        cand /= cand.norm();
        auto [vc, fc] = detail::smallest_direction(op, cand);
        if (fc < f) {
          xi = cand;
          v = vc;
          f = fc;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    if (f < kWitnessTolerance) {
      ComplexWitness w{xi, v, (symbol(op, xi) * v).norm()};
      if (w.residual < kWitnessTolerance) return w;
    }
  }
  return std::nullopt;
}

enum class Decision { pass, fail, inconclusive };

inline std::string to_string(Decision d) {
  switch (d) {
    case Decision::pass:
      return "PASS";
    case Decision::fail:
      return "FAIL";
    default:
      return "INCONCLUSIVE";
  }
}

struct CEllipticityReport {
  Decision decision = Decision::inconclusive;
  EllBound nullspace;
  std::optional<ComplexWitness> witness;
  int d_max = 0;
  int restarts = 0;
  std::uint64_t seed = 0;
};

/// PASS when the polynomial null space stabilizes and no complex zero is
/// found; FAIL when it does not stabilize and a witness exists; otherwise
/// INCONCLUSIVE.
inline CEllipticityReport is_c_elliptic(const DiffOperator& op, int d_max = 5, int restarts = 20,
                                        std::uint64_t seed = 0) {
  if (d_max < 3) throw std::invalid_argument("is_c_elliptic: d_max must be >= 3");
  CEllipticityReport r;
  r.d_max = d_max;
  r.restarts = restarts;
  r.seed = seed;
  r.nullspace = ell_bound(op, d_max);
  r.witness = complex_falsify(op, restarts, 200, seed);
  const bool finite = r.nullspace.ell.has_value();
  if (finite && !r.witness) {
    r.decision = Decision::pass;
  } else if (!finite && r.witness) {
    r.decision = Decision::fail;
  } else {
    r.decision = Decision::inconclusive;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Mixing condition
// ---------------------------------------------------------------------------

enum class MixingStatus { passes_samples, falsified, inconclusive };

inline std::string to_string(MixingStatus s) {
  switch (s) {
    case MixingStatus::passes_samples:
      return "passes_samples";
    case MixingStatus::falsified:
      return "falsified";
    default:
      return "inconclusive";
  }
}

struct MixingWitness {
  RealVector w;                  // unit vector of W
  RealVector hyperplane_normal;  // normal of the first sampled hyperplane
  double max_residual = 0;       // worst over hyperplanes of min_xi dist(w, im B(xi))
};

struct MixingReport {
  MixingStatus status = MixingStatus::inconclusive;
  std::optional<MixingWitness> witness;
  std::map<int, std::size_t> triple_dims;
  std::size_t trials = 0;
  std::size_t hyperplanes = 0;
  std::size_t xi_grid = 0;
  std::uint64_t seed = 0;
};

/// dim(im B(a) ∩ im B(b) ∩ im B(c)).
inline int triple_intersection_dim(const DiffOperator& op, const RealVector& a,
                                   const RealVector& b, const RealVector& c) {
  const RealSubspace ia = subspace_image<double>(symbol(op, a));
  const RealSubspace ib = subspace_image<double>(symbol(op, b));
  const RealSubspace ic = subspace_image<double>(symbol(op, c));
  return static_cast<int>(subspace_intersect(subspace_intersect(ia, ib), ic).dim());
}

inline MixingReport mixing_triple_test(const DiffOperator& op, std::size_t trials = 100,
                                       std::uint64_t seed = 0) {
  if (op.order() != 1) throw std::invalid_argument("mixing_triple_test: operator must be first order");
  std::vector<int> dims(trials);
  parallel_for(trials, [&](std::size_t t) {
    auto rng = seeded_engine(seed, t);
    RealVector x[3];
    for (int i = 0; i < 3; ++i) {
      while (true) {
        x[i] = random_unit(op.n(), rng);
        bool independent = true;
        for (int j = 0; j < i; ++j) {
          if (1.0 - std::abs(x[i].dot(x[j])) < 1e-3) independent = false;
        }
        if (independent) break;
      }
    }
    dims[t] = triple_intersection_dim(op, x[0], x[1], x[2]);
  });
  MixingReport r;
  r.trials = trials;
  r.seed = seed;
  for (int d : dims) ++r.triple_dims[d];
  const bool all_zero = r.triple_dims.size() == 1 && r.triple_dims.begin()->first == 0;
  r.status = (trials > 0 && all_zero) ? MixingStatus::passes_samples : MixingStatus::inconclusive;
  return r;
}

/// Distance below which w counts as lying in a symbol image.
inline constexpr double kMixingTolerance = 1e-6;

/// Monte-Carlo search for w != 0 lying in the union of symbol images over
/// every sampled hyperplane. Candidates are image vectors over the first
/// hyperplane and intersections of images across the first two.
inline MixingReport mixing_falsify(const DiffOperator& op, std::size_t hyperplane_samples = 50,
                                   std::size_t xi_grid = 200, std::uint64_t seed = 0) {
  if (op.order() != 1) throw std::invalid_argument("mixing_falsify: operator must be first order");
  const int n = op.n();
  if (n < 2) throw std::invalid_argument("mixing_falsify: n must be >= 2");
  if (hyperplane_samples < 1 || xi_grid < 1) {
    throw std::invalid_argument("mixing_falsify: need at least one hyperplane and direction");
  }

  struct Plane {
    RealVector normal;
    std::vector<RealMatrix> images;
  };
  std::vector<Plane> planes(hyperplane_samples);
  parallel_for(hyperplane_samples, [&](std::size_t p) {
    auto rng = seeded_engine(seed, p);
    Plane& pl = planes[p];
    pl.normal = random_unit(n, rng);
    const RealMatrix q = complement_basis<double>(pl.normal);
    std::vector<RealVector> dirs;
    if (n == 2) {
      dirs.push_back(q.col(0));
    } else if (n == 3) {
      for (std::size_t g = 0; g < xi_grid; ++g) {
        const double t = std::numbers::pi * static_cast<double>(g) / static_cast<double>(xi_grid);
        dirs.push_back(std::cos(t) * q.col(0) + std::sin(t) * q.col(1));
      }
    } else {
      for (std::size_t g = 0; g < xi_grid; ++g) dirs.push_back(q * random_unit(n - 1, rng));
    }
    for (const auto& xi : dirs) pl.images.push_back(subspace_image<double>(symbol(op, xi)).basis);
  });

  std::vector<RealVector> candidates;
  for (const auto& u : planes[0].images) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) candidates.push_back(u.col(c));
  }
  if (planes.size() > 1) {
    const std::size_t cap = 20;
    for (std::size_t a = 0; a < std::min(cap, planes[0].images.size()); ++a) {
      for (std::size_t b = 0; b < std::min(cap, planes[1].images.size()); ++b) {
        RealSubspace sa{op.dim_w(), planes[0].images[a]};
        RealSubspace sb{op.dim_w(), planes[1].images[b]};
        const RealSubspace s = subspace_intersect(sa, sb);
        for (Eigen::Index c = 0; c < s.dim(); ++c) candidates.push_back(s.basis.col(c));
      }
    }
  }

  MixingReport r;
  r.hyperplanes = hyperplane_samples;
  r.xi_grid = xi_grid;
  r.seed = seed;
  r.status = MixingStatus::passes_samples;
  for (const auto& cand : candidates) {
    const RealVector w = cand / cand.norm();
    double worst = 0;
    bool survives = true;
    for (const auto& pl : planes) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& u : pl.images) {
        const double d = u.cols() ? (w - u * (u.transpose() * w)).norm() : 1.0;
        best = std::min(best, d);
      }
      worst = std::max(worst, best);
      if (best > kMixingTolerance) {
        survives = false;
        break;
      }
    }
    if (survives) {
      r.status = MixingStatus::falsified;
      r.witness = MixingWitness{w, planes[0].normal, worst};
      break;
    }
  }
  return r;
}

}  // namespace bvb
