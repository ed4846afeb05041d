#pragma once

// Eigenvalue parameter scaling and two-sided power-of-2 balancing of the
// quartic coefficients, and the inverse map applied to computed solutions.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "quarteig/pencil.hpp"
#include "quarteig/solution.hpp"

namespace quarteig {

/// lambda = gamma * nu with gamma = (|E|_F/|A|_F)^(1/4); the coefficients of
/// the nu-problem are multiplied by theta.  Zero A or E leaves q unchanged and
/// sets scale_skipped.
inline std::pair<QuarticPencil, ScalingRecord> param_scale(const QuarticPencil& q) {
  ScalingRecord rec;
  const Real na = q.a.norm();
  const Real ne = q.e.norm();
  if (na == 0.0 || ne == 0.0) {
    rec.scale_skipped = true;
    return {q, rec};
  }
  const Real g = std::pow(ne / na, 0.25);
  const Real theta = 4.0 / (ne + g * q.d.norm() + g * g * q.c.norm() + g * g * g * q.b.norm());
  rec.gamma = g;
  rec.theta = theta;
  QuarticPencil s = q;
  Real w = theta;
  for (int k = 0; k <= 4; ++k) {
    s.coeff(k) = w * q.coeff(k);
    w *= g;
  }
  return {s, rec};
}

enum class BalanceAggregate : std::uint8_t { sum, max };

namespace detail {

inline Eigen::MatrixXd balance_weights(const QuarticPencil& q) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(q.n, q.n);
  for (int k = 0; k <= 4; ++k) s += q.coeff(k).cwiseAbs();
  return s;
}

inline RealVector row_aggregate(const Eigen::MatrixXd& s, BalanceAggregate agg) {
  return agg == BalanceAggregate::sum ? RealVector(s.rowwise().sum()) : RealVector(s.rowwise().maxCoeff());
}

inline RealVector col_aggregate(const Eigen::MatrixXd& s, BalanceAggregate agg) {
  return agg == BalanceAggregate::sum ? RealVector(s.colwise().sum().transpose())
                                      : RealVector(s.colwise().maxCoeff().transpose());
}

inline Real spread_of(const RealVector& v) {
  Real lo = std::numeric_limits<Real>::infinity();
  Real hi = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (v(i) > 0.0) {
      lo = std::min(lo, v(i));
      hi = std::max(hi, v(i));
    }
  }
  return hi == 0.0 ? 1.0 : hi / lo;
}

// 2^(-round(log2 v)), or 1 for v == 0.
inline Real inverse_power_of_two(Real v) {
  if (v <= 0.0) return 1.0;
  return std::ldexp(1.0, -static_cast<int>(std::lround(std::log2(v))));
}

}  // namespace detail

/// Larger of the row and column aggregate spreads of S = |A|+|B|+|C|+|D|+|E|.
inline Real balance_spread(const QuarticPencil& q, BalanceAggregate agg = BalanceAggregate::sum) {
  const Eigen::MatrixXd s = detail::balance_weights(q);
  return std::max(detail::spread_of(detail::row_aggregate(s, agg)), detail::spread_of(detail::col_aggregate(s, agg)));
}

/// Scales all coefficients as diag(dl) * X * diag(dr).
inline QuarticPencil apply_diagonal_scaling(const QuarticPencil& q, const RealVector& dl, const RealVector& dr) {
  QuarticPencil s = q;
  for (int k = 0; k <= 4; ++k) s.coeff(k) = dl.asDiagonal() * q.coeff(k) * dr.asDiagonal();
  return s;
}

/// Alternating row/column equilibration of S with power-of-2 factors.  The
/// iterate with the smallest spread is kept, so the spread never increases.
inline std::pair<QuarticPencil, ScalingRecord> balance(const QuarticPencil& q, int max_iter = 5,
                                                       BalanceAggregate agg = BalanceAggregate::sum) {
  const Index n = q.n;
  const Eigen::MatrixXd s0 = detail::balance_weights(q);
  RealVector dl = RealVector::Ones(n);
  RealVector dr = RealVector::Ones(n);
  auto spread = [&](const RealVector& l, const RealVector& r) {
    const Eigen::MatrixXd s = l.asDiagonal() * s0 * r.asDiagonal();
    return std::max(detail::spread_of(detail::row_aggregate(s, agg)), detail::spread_of(detail::col_aggregate(s, agg)));
  };
  RealVector best_l = dl;
  RealVector best_r = dr;
  Real best = spread(dl, dr);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd s = dl.asDiagonal() * s0 * dr.asDiagonal();
    const RealVector rows = detail::row_aggregate(s, agg);
    for (Index i = 0; i < n; ++i) dl(i) *= detail::inverse_power_of_two(rows(i));
    s = dl.asDiagonal() * s0 * dr.asDiagonal();
    const RealVector cols = detail::col_aggregate(s, agg);
    for (Index j = 0; j < n; ++j) dr(j) *= detail::inverse_power_of_two(cols(j));
    const Real sp = spread(dl, dr);
    if (sp < best) {
      best = sp;
      best_l = dl;
      best_r = dr;
    }
  }
  ScalingRecord rec;
  const bool identity = (best_l.array() == 1.0).all() && (best_r.array() == 1.0).all();
  if (identity) return {q, rec};
  rec.dl = best_l;
  rec.dr = best_r;
  return {apply_diagonal_scaling(q, best_l, best_r), rec};
}

/// Composes a balancing record (applied first) with a parameter scaling record.
inline ScalingRecord compose(const ScalingRecord& first, const ScalingRecord& second) {
  ScalingRecord r = second;
  r.dl = first.dl;
  r.dr = first.dr;
  r.scale_skipped = second.scale_skipped;
  return r;
}

/// Maps a solution of the scaled/balanced problem back to the original one.
inline EigenSolution descale(EigenSolution sol, const ScalingRecord& rec) {
  if (rec.is_identity()) return sol;
  for (auto& p : sol.pairs) {
    if (rec.gamma != 1.0 && p.eig.cls == EigClass::finite && p.eig.beta != 0.0) {
      const Complex a = rec.gamma * p.eig.alpha;
      const Real nrm = std::hypot(std::abs(a), p.eig.beta);
      p.eig.alpha = a / nrm;
      p.eig.beta = p.eig.beta / nrm;
    }
    if (rec.dr.size() == p.x.size() && p.x.size() > 0) {
      p.x = rec.dr.cast<Complex>().asDiagonal() * p.x;
      p.x.normalize();
    }
    if (rec.dl.size() == p.y.size() && p.y.size() > 0) {
      p.y = rec.dl.cast<Complex>().asDiagonal() * p.y;
      p.y.normalize();
    }
  }
  return sol;
}

}  // namespace quarteig
