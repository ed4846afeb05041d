#pragma once

// Normwise and componentwise backward errors of quartic eigenpairs.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "quarteig/numkit.hpp"
#include "quarteig/pencil.hpp"
#include "quarteig/solution.hpp"

namespace quarteig {

/// Spectral norms and entrywise absolute values of the five coefficients,
/// indexed by the power of lambda.
struct NormCache {
  std::array<Real, 5> two{};
  std::array<Eigen::MatrixXd, 5> abs;
  std::string method;  // "svd" or "power"
  Index power_iterations = 0;

  static constexpr Index kSvdLimit = 512;
};

namespace detail {

// Largest singular value by power iteration on m^* m.
inline Real power_norm(const Matrix& m, Index& iterations) {
  if (m.size() == 0) return 0.0;
  Vector v = Vector::Ones(m.cols()) / std::sqrt(static_cast<Real>(m.cols()));
  Real est = 0.0;
  for (Index it = 0; it < 1000; ++it) {
    const Vector w = m.adjoint() * (m * v);
    const Real nw = w.norm();
    iterations = it + 1;
    if (nw == 0.0) return 0.0;
    const Real next = std::sqrt(nw);
    v = divided_real(w, nw);
    if (std::abs(next - est) <= 1e-10 * next) return next;
    est = next;
  }
  return est;
}

}  // namespace detail

inline NormCache make_norms(const QuarticPencil& q) {
  NormCache c;
  c.method = q.n <= NormCache::kSvdLimit ? "svd" : "power";
  for (int k = 0; k <= 4; ++k) {
    const Matrix& m = q.coeff(k);
    c.abs[static_cast<std::size_t>(k)] = m.cwiseAbs();
    if (q.n <= NormCache::kSvdLimit) {
      const RealVector s = m.size() == 0 ? RealVector() : RealVector(Eigen::BDCSVD<Matrix>(m).singularValues());
      c.two[static_cast<std::size_t>(k)] = s.size() > 0 ? s(0) : 0.0;
    } else {
      Index it = 0;
      c.two[static_cast<std::size_t>(k)] = detail::power_norm(m, it);
      c.power_iterations = std::max(c.power_iterations, it);
    }
  }
  return c;
}

namespace detail {

inline std::array<Complex, 5> homogeneous_weights(const HomogeneousEig& h) {
  std::array<Complex, 5> w{};
  std::array<Complex, 5> ap{};
  std::array<Real, 5> bp{};
  ap[0] = 1.0;
  bp[0] = 1.0;
  for (std::size_t k = 1; k < 5; ++k) {
    ap[k] = ap[k - 1] * h.alpha;
    bp[k] = bp[k - 1] * h.beta;
  }
  for (std::size_t k = 0; k < 5; ++k) w[k] = ap[k] * bp[4 - k];
  return w;
}

inline Real ratio(Real num, Real den) {
  if (den > 0.0) return num / den;
  return num == 0.0 ? 0.0 : std::numeric_limits<Real>::infinity();
}

}  // namespace detail

namespace detail {

// |sum_k w_k coeff_k v| (right) or |sum_k conj(w_k) coeff_k^* v| (left),
// accumulated in extended precision so that residuals at the level of unit
// roundoff are still resolved.
inline Real residual_norm(const std::array<Complex, 5>& w, const QuarticPencil& q, const Vector& v, bool left) {
  const Index n = q.n;
  std::vector<long double> rr(static_cast<std::size_t>(n), 0.0L);
  std::vector<long double> ri(static_cast<std::size_t>(n), 0.0L);
  std::vector<long double> tr(static_cast<std::size_t>(n));
  std::vector<long double> ti(static_cast<std::size_t>(n));
  for (int k = 0; k <= 4; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (w[i] == Complex(0.0)) continue;
    const Matrix& c = q.coeff(k);
    std::fill(tr.begin(), tr.end(), 0.0L);
    std::fill(ti.begin(), ti.end(), 0.0L);
    // t = C v (right) or t = C^* v (left), real arithmetic on contiguous columns.
    for (Index j = 0; j < n; ++j) {
      const Complex* col = c.data() + j * n;
      if (left) {
        long double sr = 0.0L;
        long double si = 0.0L;
        for (Index l = 0; l < n; ++l) {
          const long double cr = col[l].real();
          const long double ci = col[l].imag();
          const long double vr = v(l).real();
          const long double vi = v(l).imag();
          sr += cr * vr + ci * vi;
          si += cr * vi - ci * vr;
        }
        tr[static_cast<std::size_t>(j)] = sr;
        ti[static_cast<std::size_t>(j)] = si;
      } else {
        const long double vr = v(j).real();
        const long double vi = v(j).imag();
        if (vr == 0.0L && vi == 0.0L) continue;
        for (Index l = 0; l < n; ++l) {
          const long double cr = col[l].real();
          const long double ci = col[l].imag();
          tr[static_cast<std::size_t>(l)] += cr * vr - ci * vi;
          ti[static_cast<std::size_t>(l)] += cr * vi + ci * vr;
        }
      }
    }
    const long double wr = w[i].real();
    const long double wi = left ? -w[i].imag() : w[i].imag();
    for (std::size_t l = 0; l < rr.size(); ++l) {
      rr[l] += wr * tr[l] - wi * ti[l];
      ri[l] += wr * ti[l] + wi * tr[l];
    }
  }
  long double s = 0.0L;
  for (std::size_t l = 0; l < rr.size(); ++l) s += rr[l] * rr[l] + ri[l] * ri[l];
  return static_cast<Real>(std::sqrt(s));
}

inline Real eta_impl(const HomogeneousEig& h, const Vector& v, const QuarticPencil& q, const NormCache& norms,
                     bool left) {
  const Real nv = v.norm();
  if (!(nv > 0.0)) throw Error(ErrorCode::invalid_input, left ? "eta_left: zero vector" : "eta: zero vector");
  const auto w = homogeneous_weights(h);
  Real den = 0.0;
  for (std::size_t i = 0; i < 5; ++i) den += std::abs(w[i]) * norms.two[i];
  return ratio(residual_norm(w, q, v, left), den * nv);
}

}  // namespace detail

/// |P(lambda) x| / ((sum |lambda|^k |coeff_k|) |x|), evaluated with the
/// normalized homogeneous pair so that no power of lambda is formed.
inline Real eta(const HomogeneousEig& h, const Vector& x, const QuarticPencil& q, const NormCache& norms) {
  return detail::eta_impl(h, x, q, norms, false);
}

inline Real eta(const HomogeneousEig& h, const Vector& x, const QuarticPencil& q) {
  return eta(h, x, q, make_norms(q));
}

/// Left analog: |y^* P(lambda)| / ((sum |lambda|^k |coeff_k|) |y|).
inline Real eta_left(const HomogeneousEig& h, const Vector& y, const QuarticPencil& q, const NormCache& norms) {
  return detail::eta_impl(h, y, q, norms, true);
}

inline Real eta_left(const HomogeneousEig& h, const Vector& y, const QuarticPencil& q) {
  return eta_left(h, y, q, make_norms(q));
}

namespace detail {

inline Real eta_working_impl(const HomogeneousEig& h, const Vector& v, const QuarticPencil& q,
                             const NormCache& norms, bool left) {
  const Real nv = v.norm();
  if (!(nv > 0.0)) throw Error(ErrorCode::invalid_input, "eta: zero vector");
  const auto w = homogeneous_weights(h);
  Vector r = Vector::Zero(q.n);
  Real den = 0.0;
  for (int k = 0; k <= 4; ++k) {
    const auto i = static_cast<std::size_t>(k);
    den += std::abs(w[i]) * norms.two[i];
    if (w[i] == Complex(0.0)) continue;
    if (left) {
      r.noalias() += std::conj(w[i]) * (q.coeff(k).adjoint() * v);
    } else {
      r.noalias() += w[i] * (q.coeff(k) * v);
    }
  }
  return ratio(r.norm(), den * nv);
}

}  // namespace detail

/// Working-precision variants of eta and eta_left.  They agree with the
/// extended-precision values to about n u and are meant for ranking
/// candidate vectors.
inline Real eta_working(const HomogeneousEig& h, const Vector& x, const QuarticPencil& q, const NormCache& norms) {
  return detail::eta_working_impl(h, x, q, norms, false);
}

inline Real eta_left_working(const HomogeneousEig& h, const Vector& y, const QuarticPencil& q,
                             const NormCache& norms) {
  return detail::eta_working_impl(h, y, q, norms, true);
}

struct OmegaValue {
  Real value = 0.0;
  bool unbounded = false;  // some row has zero weight but a nonzero residual
};

namespace detail {

inline OmegaValue omega_impl(const HomogeneousEig& h, const Vector& v, const QuarticPencil& q,
                             const NormCache& norms, bool left) {
  if (!(v.norm() > 0.0)) throw Error(ErrorCode::invalid_input, "omega: zero vector");
  if (h.is_infinite()) throw Error(ErrorCode::invalid_input, "omega is defined for finite eigenvalues only");
  const auto w = detail::homogeneous_weights(h);
  const RealVector av = v.cwiseAbs();
  Vector r = Vector::Zero(q.n);
  RealVector s = RealVector::Zero(q.n);
  for (int k = 0; k <= 4; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (w[i] == Complex(0.0)) continue;
    if (left) {
      r.noalias() += std::conj(w[i]) * (q.coeff(k).adjoint() * v);
      s.noalias() += std::abs(w[i]) * (norms.abs[i].transpose() * av);
    } else {
      r.noalias() += w[i] * (q.coeff(k) * v);
      s.noalias() += std::abs(w[i]) * (norms.abs[i] * av);
    }
  }
  OmegaValue out;
  for (Index i = 0; i < q.n; ++i) {
    const Real ri = std::abs(r(i));
    if (s(i) > 0.0) {
      out.value = std::max(out.value, ri / s(i));
    } else if (ri > 0.0) {
      out.unbounded = true;
      out.value = std::numeric_limits<Real>::infinity();
    }
  }
  return out;
}

}  // namespace detail

/// max_i |P(lambda) x|_i / ((sum |lambda|^k |coeff_k|) |x|)_i for finite lambda.
inline OmegaValue omega(const HomogeneousEig& h, const Vector& x, const QuarticPencil& q, const NormCache& norms) {
  return detail::omega_impl(h, x, q, norms, false);
}

inline OmegaValue omega(const HomogeneousEig& h, const Vector& x, const QuarticPencil& q) {
  return omega(h, x, q, make_norms(q));
}

/// Row-wise analog for y^* P(lambda) with weights (sum |lambda|^k |coeff_k|^T) |y|.
inline OmegaValue omega_left(const HomogeneousEig& h, const Vector& y, const QuarticPencil& q,
                             const NormCache& norms) {
  return detail::omega_impl(h, y, q, norms, true);
}

inline OmegaValue omega_left(const HomogeneousEig& h, const Vector& y, const QuarticPencil& q) {
  return omega_left(h, y, q, make_norms(q));
}

/// Fills all four diagnostics of one eigenpair against q.
inline PairDiagnostics diagnose(const EigenPair& p, const QuarticPencil& q, const NormCache& norms) {
  PairDiagnostics d;
  d.cls = p.eig.cls;
  const Real nan = std::numeric_limits<Real>::quiet_NaN();
  d.eta_right = eta(p.eig, p.x, q, norms);
  d.eta_left = p.y.size() > 0 ? eta_left(p.eig, p.y, q, norms) : nan;
  if (p.eig.is_infinite()) {
    d.omega_right = nan;
    d.omega_left = nan;
  } else {
    const OmegaValue o = omega(p.eig, p.x, q, norms);
    d.omega_right = o.value;
    d.omega_right_unbounded = o.unbounded;
    if (p.y.size() > 0) {
      const OmegaValue ol = omega_left(p.eig, p.y, q, norms);
      d.omega_left = ol.value;
      d.omega_left_unbounded = ol.unbounded;
    } else {
      d.omega_left = nan;
    }
  }
  return d;
}

struct Stat {
  Real min = std::numeric_limits<Real>::quiet_NaN();
  Real max = std::numeric_limits<Real>::quiet_NaN();
  Real median = std::numeric_limits<Real>::quiet_NaN();
  Index count = 0;  // number of defined (non-NaN) values
};

struct SummaryReport {
  Index total = 0;
  Index zero = 0;
  Index finite = 0;
  Index infinite = 0;
  Stat eta_right;
  Stat eta_left;
  Stat omega_right;
  Stat omega_left;
};

inline Stat make_stat(std::vector<Real> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](Real x) { return std::isnan(x); }), v.end());
  Stat s;
  s.count = static_cast<Index>(v.size());
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  const std::size_t h = v.size() / 2;
  s.median = v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  return s;
}

inline SummaryReport summarize(const std::vector<PairDiagnostics>& d) {
  if (d.empty()) throw Error(ErrorCode::invalid_input, "summarize: no eigenpairs");
  SummaryReport r;
  r.total = static_cast<Index>(d.size());
  std::vector<Real> er, el, orr, ol;
  for (const auto& p : d) {
    switch (p.cls) {
      case EigClass::zero: ++r.zero; break;
      case EigClass::finite: ++r.finite; break;
      case EigClass::infinite: ++r.infinite; break;
    }
    er.push_back(p.eta_right);
    el.push_back(p.eta_left);
    orr.push_back(p.omega_right);
    ol.push_back(p.omega_left);
  }
  r.eta_right = make_stat(std::move(er));
  r.eta_left = make_stat(std::move(el));
  r.omega_right = make_stat(std::move(orr));
  r.omega_left = make_stat(std::move(ol));
  return r;
}

/// Stable sort by |lambda| nondecreasing; infinite eigenvalues last.
inline void sort_by_modulus(EigenSolution& sol) {
  std::stable_sort(sol.pairs.begin(), sol.pairs.end(),
                   [](const EigenPair& a, const EigenPair& b) { return a.eig.modulus() < b.eig.modulus(); });
}

}  // namespace quarteig
