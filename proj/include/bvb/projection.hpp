#pragma once

/// \file
/// Moment-based polynomial projection onto a ball and the quasi-continuity
/// ratios built on it.
///
/// With w the normalised bump on B_r(x),
///   P u(y) = int sum_{|beta| <= l-1} d_z^beta((z - y)^beta / beta! w(z)) u(z) dz
///          = sum_{|beta| <= l-1} sum_{gamma <= beta} C(beta, gamma) / gamma!
///              int (z - y)^gamma d^gamma w(z) u(z) dz,
/// and the derivatives of w come from truncated Taylor arithmetic on
/// exp(-1 / (1 - |zeta|^2)).

#include "bvb/ellipticity.hpp"
#include "bvb/field.hpp"
#include "bvb/jump.hpp"

#include <cmath>
#include <map>
#include <vector>

namespace bvb {

/// Truncated Taylor polynomials in n variables of total degree <= D.
class JetAlgebra {
 public:
  JetAlgebra(int n, int degree) : n_(n), degree_(degree), monos_(multiindices_up_to(n, degree)) {
    for (std::size_t i = 0; i < monos_.size(); ++i) index_.emplace(monos_[i], i);
    for (std::size_t i = 0; i < monos_.size(); ++i) {
      for (std::size_t j = 0; j < monos_.size(); ++j) {
        if (monos_[i].order() + monos_[j].order() > degree) continue;
        table_.push_back({i, j, index_.at(monos_[i] + monos_[j])});
      }
    }
  }

  std::size_t size() const { return monos_.size(); }
  const std::vector<MultiIndex>& monomials() const { return monos_; }
  std::size_t index(const MultiIndex& m) const { return index_.at(m); }

  void mul(const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& out) const {
    out.assign(monos_.size(), 0.0);
    for (const auto& t : table_) out[t.c] += a[t.a] * b[t.b];
  }

  /// exp(a) = e^{a_0} sum_j (a - a_0)^j / j!
  void exp(const std::vector<double>& a, std::vector<double>& out) const {
    std::vector<double> nil = a, term(monos_.size(), 0.0), tmp;
    nil[0] = 0;
    out.assign(monos_.size(), 0.0);
    term[0] = 1.0;
    out[0] = 1.0;
    for (int j = 1; j <= degree_; ++j) {
      mul(term, nil, tmp);
      for (std::size_t i = 0; i < tmp.size(); ++i) term[i] = tmp[i] / j;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += term[i];
    }
    const double e0 = std::exp(a[0]);
    for (double& v : out) v *= e0;
  }

  /// 1/a = (1/a_0) sum_j (-(a - a_0)/a_0)^j
  void reciprocal(const std::vector<double>& a, std::vector<double>& out) const {
    std::vector<double> ratio(monos_.size()), term(monos_.size(), 0.0), tmp;
    for (std::size_t i = 0; i < ratio.size(); ++i) ratio[i] = i == 0 ? 0.0 : -a[i] / a[0];
    out.assign(monos_.size(), 0.0);
    term[0] = 1.0;
    out[0] = 1.0;
    for (int j = 1; j <= degree_; ++j) {
      mul(term, ratio, tmp);
      term = tmp;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += term[i];
    }
    for (double& v : out) v /= a[0];
  }

 private:
  struct Entry {
    std::size_t a, b, c;
  };
  int n_;
  int degree_;
  std::vector<MultiIndex> monos_;
  std::map<MultiIndex, std::size_t> index_;
  std::vector<Entry> table_;
};

/// Below this value of 1 - |zeta|^2 the bump and its derivatives are below
/// e^{-100} and are treated as zero.
inline constexpr double kBumpCutoff = 1e-2;

/// d^gamma phi(zeta) for all |gamma| <= D, phi = exp(-1/(1 - |zeta|^2)),
/// in the order of JetAlgebra::monomials().
inline void bump_derivatives(const JetAlgebra& jets, const RealVector& zeta, std::vector<double>& out) {
  const double q0 = 1.0 - zeta.squaredNorm();
  if (q0 < kBumpCutoff) {
    out.assign(jets.size(), 0.0);
    return;
  }
  const int n = static_cast<int>(zeta.size());
  std::vector<double> q(jets.size(), 0.0), g, e;
  q[0] = q0;
  for (int i = 0; i < n; ++i) {
    const MultiIndex ei = MultiIndex::unit(n, i);
    if (ei.order() <= static_cast<int>(jets.monomials().back().order())) {
      q[jets.index(ei)] = -2.0 * zeta(i);
      if (2 <= jets.monomials().back().order()) q[jets.index(ei + ei)] = -1.0;
    }
  }
  jets.reciprocal(q, g);
  for (double& v : g) v = -v;
  jets.exp(g, e);
  out.resize(jets.size());
  for (std::size_t i = 0; i < jets.size(); ++i) out[i] = e[i] * jets.monomials()[i].factorial();
}

inline constexpr std::size_t kProjectionChunks = 64;

/// plain: cell quadrature of the formula as written. Its reproduction defect
/// decays like exp(-c sqrt(cells per radius)) and is ~1e-5 for l = 3 at 64
/// cells per radius.
/// moment_corrected: the same quadrature is also applied to the local basis
/// ((y - x)/r)^kappa, and the result is composed with the inverse of that
/// d x d matrix, so polynomials of degree <= l-1 are reproduced to rounding.
/// The matrix tends to the identity as h -> 0.
enum class ProjectionQuadrature { moment_corrected, plain };

/// Degree <= l-1 projection of the field on B_r(x) by cell quadrature.
inline PolynomialField poly_project(const GridField& field, const RealVector& x, double r, int ell,
                                    ProjectionQuadrature mode = ProjectionQuadrature::moment_corrected) {
  const auto& g = field.grid();
  const int n = g.n(), dv = field.dim_v();
  if (ell < 1) throw std::invalid_argument("poly_project: ell must be >= 1");
  if (!g.contains_ball(x, r)) throw std::invalid_argument("poly_project: ball leaves the grid");
  const int deg = ell - 1;

  std::vector<std::size_t> cells;
  std::vector<RealVector> zetas;
  g.for_each_in_ball(x, r, [&](std::size_t c, const RealVector& off) {
    cells.push_back(c);
    zetas.push_back(off / r);
  });
  if (cells.size() < static_cast<std::size_t>(std::pow(8.0, n))) {
    throw std::invalid_argument("poly_project: quadrature underresolved (fewer than 8^n cells in the ball)");
  }

  const JetAlgebra jets(n, deg);
  const auto& monos = jets.monomials();
  // Moment slots (gamma, eta) with eta <= gamma:  int zeta^{gamma-eta} d^gamma phi u.
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (std::size_t gi = 0; gi < monos.size(); ++gi) {
    for (std::size_t ei = 0; ei < monos.size(); ++ei) {
      if (monos[gi].dominates(monos[ei])) slots.emplace_back(gi, ei);
    }
  }

  // Columns dv.. of the integrand carry the local basis when correcting.
  const int extra = mode == ProjectionQuadrature::moment_corrected ? static_cast<int>(monos.size()) : 0;
  const int rows = dv + extra;
  const std::size_t chunks = std::min(kProjectionChunks, cells.size());
  std::vector<RealMatrix> partial(chunks, RealMatrix::Zero(rows, static_cast<Eigen::Index>(slots.size())));
  std::vector<double> partial_mass(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t ch) {
    const std::size_t begin = cells.size() * ch / chunks, end = cells.size() * (ch + 1) / chunks;
    std::vector<double> d;
    std::vector<double> mass_terms;
    RealVector u(rows);
    for (std::size_t i = begin; i < end; ++i) {
      bump_derivatives(jets, zetas[i], d);
      if (d[0] == 0) continue;
      mass_terms.push_back(d[0]);
      u.head(dv) = field.value(cells[i]);
      for (int m = 0; m < extra; ++m) u(dv + m) = monomial(zetas[i], monos[m]);
      for (std::size_t s = 0; s < slots.size(); ++s) {
        const auto [gi, ei] = slots[s];
        const double w = d[gi] * monomial(zetas[i], monos[gi] - monos[ei]);
        if (w != 0) partial[ch].col(static_cast<Eigen::Index>(s)) += w * u;
      }
    }
    partial_mass[ch] = pairwise_sum(mass_terms);
  });
  RealMatrix moments = RealMatrix::Zero(rows, static_cast<Eigen::Index>(slots.size()));
  for (const auto& p : partial) moments += p;
  // The h^n cell volume cancels against the discrete normalisation of w.
  const double norm = pairwise_sum(partial_mass);

  // Coefficients in s = y - x:
  //   c_eta = sum_{gamma >= eta} A_gamma C(gamma, eta) (-1)^{|eta|} / gamma! r^{-|eta|} M(gamma, eta),
  // with A_gamma = sum_{beta >= gamma, |beta| <= l-1} C(beta, gamma).
  std::vector<double> a_gamma(monos.size(), 0.0);
  for (std::size_t gi = 0; gi < monos.size(); ++gi) {
    for (const auto& beta : monos) {
      if (beta.dominates(monos[gi])) a_gamma[gi] += binomial(beta, monos[gi]);
    }
  }
  std::vector<RealVector> local(monos.size(), RealVector::Zero(rows));
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const auto [gi, ei] = slots[s];
    const double sign = monos[ei].order() % 2 == 0 ? 1.0 : -1.0;
    const double f = a_gamma[gi] * binomial(monos[gi], monos[ei]) * sign / monos[gi].factorial() *
                     std::pow(r, -monos[ei].order()) / norm;
    local[ei] += f * moments.col(static_cast<Eigen::Index>(s));
  }

  if (extra > 0) {
    // In the zeta = (y - x)/r basis the projection of zeta^kappa should be
    // e_kappa; a(eta, kappa) is what the quadrature actually returns.
    const auto d = static_cast<Eigen::Index>(monos.size());
    RealMatrix a(d, d), rhs(d, dv);
    for (Eigen::Index e = 0; e < d; ++e) {
      const double scale = std::pow(r, monos[e].order());
      a.row(e) = scale * local[e].tail(extra).transpose();
      rhs.row(e) = scale * local[e].head(dv).transpose();
    }
    const RealMatrix sol = a.partialPivLu().solve(rhs);
    for (Eigen::Index e = 0; e < d; ++e) {
      local[e].head(dv) = sol.row(e).transpose() * std::pow(r, -monos[e].order());
    }
  }

  // Re-expand (y - x)^eta in powers of y.
  PolynomialField out(n, dv);
  for (std::size_t ei = 0; ei < monos.size(); ++ei) {
    for (const auto& kappa : multiindices_up_to(n, monos[ei].order())) {
      if (!monos[ei].dominates(kappa)) continue;
      const double f = binomial(monos[ei], kappa) * monomial(RealVector(-x), monos[ei] - kappa);
      if (f != 0) out.add_term(kappa, f * local[ei].head(dv));
    }
  }
  return out;
}

/// Mean over cells of B_r(x) of |u - p|.
inline double ball_mean_deviation(const GridField& field, const PolynomialField& p,
                                  const RealVector& x, double r) {
  std::vector<double> terms;
  field.grid().for_each_in_ball(x, r, [&](std::size_t c, const RealVector& off) {
    terms.push_back((field.value(c) - p.evaluate(x + off)).norm());
  });
  return terms.empty() ? 0.0 : pairwise_sum(terms) / static_cast<double>(terms.size());
}

struct QuasiContinuityEntry {
  double r = 0;
  double numerator = 0;
  double denominator = 0;
  double ratio = 0;
  bool degenerate = false;  // 0/0 reported as 0
};

struct QuasiContinuityReport {
  int ell = 0;
  std::vector<QuasiContinuityEntry> entries;
};

inline constexpr double kZeroDenominator = 1e-12;
inline constexpr double kZeroNumerator = 1e-12;

/// mean_{B_r}|u - P_{x,r} u| / (|Bu|(B_r(x)) / r^{n-1}) for each radius.
inline QuasiContinuityReport quasi_continuity_ratio(const GridField& field, const DiffOperator& op,
                                                    const RealVector& x,
                                                    const std::vector<double>& radii, int d_max = 5) {
  const auto decision = is_c_elliptic(op, d_max);
  if (decision.decision != Decision::pass) {
    throw std::invalid_argument("quasi_continuity_ratio: operator is not C-elliptic");
  }
  if (!decision.nullspace.ell) {
    throw std::invalid_argument("quasi_continuity_ratio: polynomial null space did not stabilize");
  }
  detail::check_radii(radii, field.grid().h(), "quasi_continuity_ratio");
  QuasiContinuityReport rep;
  rep.ell = *decision.nullspace.ell;
  const auto mu = discrete_apply(op, field);
  const int n = field.grid().n();
  for (double r : radii) {
    QuasiContinuityEntry e;
    e.r = r;
    const auto p = poly_project(field, x, r, rep.ell);
    e.numerator = ball_mean_deviation(field, p, x, r);
    e.denominator = total_variation(mu, Ball{x, r}) / std::pow(r, n - 1);
    if (e.denominator < kZeroDenominator) {
      if (e.numerator >= kZeroNumerator) {
        throw std::runtime_error("quasi_continuity_ratio: nonzero deviation with vanishing |Bu|(B_r)");
      }
      e.degenerate = true;
      e.ratio = 0;
    } else {
      e.ratio = e.numerator / e.denominator;
    }
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace bvb
