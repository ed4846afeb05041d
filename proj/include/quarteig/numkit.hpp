#pragma once

// Dense complex factorization kernels: column-pivoted rank revealing QR,
// complete orthogonal (URV) decomposition, SVD, triangular-Hessenberg
// reduction of a pair and O(n^2) shifted Hessenberg solves.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include "quarteig/core.hpp"

namespace quarteig::numkit {

/// How the numerical rank is read off the diagonal of a pivoted R.
struct RankStrategy {
  enum class Kind : std::uint8_t { norm_threshold, dropoff };

  Kind kind = Kind::norm_threshold;
  Real value = 0.0;

  /// Keep |r(k,k)| > tau * ||m||_F.
  static RankStrategy norm(Real tau) { return {Kind::norm_threshold, tau}; }
  /// Cut at the first i with |r(i+1,i+1)| <= rho * |r(i,i)|.
  static RankStrategy dropoff(Real rho) { return {Kind::dropoff, rho}; }

  std::string name() const { return kind == Kind::norm_threshold ? "norm" : "dropoff"; }
  std::string describe() const {
    std::ostringstream os;
    os << name() << "(" << value << ")";
    return os.str();
  }
};

struct TruncationLog {
  RealVector diag;          // |r(i,i)|
  std::string strategy;     // describe() of the strategy, or "forced"
  Real threshold = 0.0;     // absolute cut level (norm) or ratio (dropoff)
  Real cut_ratio = 0.0;     // |r(k,k)| / |r(k-1,k-1)| at the cut, 0 if no cut
  bool forced = false;      // rank supplied by the caller
  bool ambiguous = false;   // truncated without a clear gap
};

/// m * P = q * r, P = permutation_matrix(perm).  r is kept untruncated.
struct PivotedQR {
  Matrix q;
  Matrix r;
  std::vector<Index> perm;
  Index rank = 0;
  TruncationLog log;

  Matrix perm_matrix() const { return permutation_matrix(perm); }
  /// Leading rank rows of r.
  Matrix r_hat() const { return r.topRows(rank); }
  /// r with the rows below the numerical rank set to zero.
  Matrix r_truncated() const {
    Matrix t = r;
    t.bottomRows(r.rows() - rank).setZero();
    return t;
  }
};

/// m = u * [r 0; 0 0] * v^*, r is rank x rank (lower triangular) and nonsingular.
struct URVFactors {
  Matrix u;
  Matrix r;
  Matrix v;
  Index rank = 0;
  TruncationLog log;
};

struct SVDFactors {
  Matrix u;
  RealVector sigma;
  Matrix v;
};

/// a = q * t * z^*, b = q * h * z^*, t upper triangular, h upper Hessenberg.
struct TriHessPair {
  Matrix q;
  Matrix z;
  Matrix t;
  Matrix h;
};

namespace detail {

// Hermitian reflector H = I - tau u u^* with H x = head * e1.  The tail
// being exactly zero yields the identity so exact structure survives.
struct Reflector {
  Vector u;
  Real tau = 0.0;
  Complex head;
  bool identity = true;
};

inline Reflector make_reflector(const Vector& x) {
  Reflector h;
  h.head = x.size() > 0 ? x(0) : Complex(0.0);
  if (x.size() <= 1) return h;
  if (x.tail(x.size() - 1).cwiseAbs().maxCoeff() == 0.0) return h;
  const Real nrm = x.stableNorm();
  const Real a0 = std::abs(x(0));
  const Complex phase = a0 == 0.0 ? Complex(1.0) : x(0) / a0;
  h.u = x;
  h.u(0) += phase * nrm;
  // Unit u keeps tau = 2 free of under/overflow for tiny or huge x.
  divide_real(h.u, h.u.stableNorm());
  h.tau = 2.0;
  h.head = -phase * nrm;
  h.identity = false;
  return h;
}

// Applies H (Hermitian) from the left to a block with as many rows as u.
inline void reflect_left(const Reflector& h, Eigen::Ref<Matrix> block) {
  if (h.identity || block.cols() == 0) return;
  const Eigen::RowVectorXcd w = h.u.adjoint() * block;
  block.noalias() -= (h.tau * h.u) * w;
}

// Applies H (Hermitian) from the left to rows [row0, row0+len) of m.
inline void apply_left(const Reflector& h, Matrix& m, Index row0) {
  if (h.identity || m.cols() == 0) return;
  reflect_left(h, m.middleRows(row0, h.u.size()));
}

// Applies H from the right to columns [col0, col0+len) of m.
inline void apply_right(const Reflector& h, Matrix& m, Index col0) {
  if (h.identity || m.rows() == 0) return;
  const Index len = h.u.size();
  auto block = m.middleCols(col0, len);
  const Vector w = block * h.u;
  block.noalias() -= (h.tau * w) * h.u.adjoint();
}

inline Index decide_rank(const RealVector& diag, Real norm_f, const RankStrategy& s, TruncationLog& log) {
  const Index kmax = diag.size();
  log.strategy = s.describe();
  Index rank = kmax;
  if (s.kind == RankStrategy::Kind::norm_threshold) {
    log.threshold = s.value * norm_f;
    rank = 0;
    while (rank < kmax && diag(rank) > log.threshold) ++rank;
  } else {
    log.threshold = s.value;
    if (kmax > 0 && diag(0) == 0.0) {
      rank = 0;
    } else {
      for (Index i = 0; i + 1 < kmax; ++i) {
        if (diag(i + 1) <= s.value * diag(i)) {
          rank = i + 1;
          break;
        }
      }
    }
  }
  if (rank > 0 && rank < kmax) {
    log.cut_ratio = diag(rank) / diag(rank - 1);
    log.ambiguous = log.cut_ratio > std::sqrt(kEps);
  }
  return rank;
}

// Businger-Golub column pivoting with the LAPACK xLAQP2 norm downdating
// safeguard: partial norms are recomputed once cancellation is detected.
inline PivotedQR pivoted_householder(const Matrix& m, bool want_q = true) {
  const Index rows = m.rows();
  const Index cols = m.cols();
  const Index kmax = std::min(rows, cols);
  PivotedQR f;
  f.r = m;
  f.perm.resize(static_cast<std::size_t>(cols));
  for (Index j = 0; j < cols; ++j) f.perm[static_cast<std::size_t>(j)] = j;
  RealVector vn1(cols);
  RealVector vn2(cols);
  for (Index j = 0; j < cols; ++j) vn1(j) = vn2(j) = m.col(j).stableNorm();
  const Real tol3z = std::sqrt(kEps);

  std::vector<Reflector> reflectors;
  reflectors.reserve(static_cast<std::size_t>(kmax));
  for (Index k = 0; k < kmax; ++k) {
    Index p = k;
    for (Index j = k + 1; j < cols; ++j) {
      if (vn1(j) > vn1(p)) p = j;
    }
    if (p != k) {
      f.r.col(k).swap(f.r.col(p));
      std::swap(f.perm[static_cast<std::size_t>(k)], f.perm[static_cast<std::size_t>(p)]);
      std::swap(vn1(k), vn1(p));
      std::swap(vn2(k), vn2(p));
    }
    Reflector h = make_reflector(f.r.col(k).tail(rows - k));
    if (!h.identity) {
      reflect_left(h, f.r.bottomRightCorner(rows - k, cols - k));
      f.r(k, k) = h.head;
      f.r.col(k).tail(rows - k - 1).setZero();
    }
    reflectors.push_back(std::move(h));

    for (Index j = k + 1; j < cols; ++j) {
      if (vn1(j) == 0.0) continue;
      Real temp = std::abs(f.r(k, j)) / vn1(j);
      temp = std::max(0.0, 1.0 - temp * temp);
      const Real ratio = vn1(j) / vn2(j);
      if (temp * ratio * ratio <= tol3z) {
        vn1(j) = k + 1 < rows ? f.r.col(j).tail(rows - k - 1).stableNorm() : 0.0;
        vn2(j) = vn1(j);
      } else {
        vn1(j) *= std::sqrt(temp);
      }
    }
  }

  if (want_q) {
    f.q = Matrix::Identity(rows, rows);
    for (Index k = kmax - 1; k >= 0; --k) {
      reflect_left(reflectors[static_cast<std::size_t>(k)], f.q.bottomRightCorner(rows - k, rows - k));
    }
  }
  f.log.diag.resize(kmax);
  for (Index i = 0; i < kmax; ++i) f.log.diag(i) = std::abs(f.r(i, i));
  return f;
}

}  // namespace detail

/// Unpivoted Householder QR, m = q * r with q square.
inline std::pair<Matrix, Matrix> householder_qr(const Matrix& m) {
  const Index rows = m.rows();
  const Index cols = m.cols();
  const Index kmax = std::min(rows, cols);
  Matrix r = m;
  std::vector<detail::Reflector> reflectors;
  reflectors.reserve(static_cast<std::size_t>(kmax));
  for (Index k = 0; k < kmax; ++k) {
    detail::Reflector h = detail::make_reflector(r.col(k).tail(rows - k));
    if (!h.identity) {
      detail::reflect_left(h, r.bottomRightCorner(rows - k, cols - k));
      r(k, k) = h.head;
      r.col(k).tail(rows - k - 1).setZero();
    }
    reflectors.push_back(std::move(h));
  }
  Matrix q = Matrix::Identity(rows, rows);
  for (Index k = kmax - 1; k >= 0; --k) {
    detail::reflect_left(reflectors[static_cast<std::size_t>(k)], q.bottomRightCorner(rows - k, rows - k));
  }
  return {std::move(q), std::move(r)};
}

/// With want_q = false the factor q is left empty.
inline PivotedQR rrqr(const Matrix& m, const RankStrategy& strategy, bool want_q = true) {
  require_finite(m, "rrqr input");
  if (!(strategy.value > 0.0 && strategy.value < 1.0)) {
    throw Error(ErrorCode::invalid_input, "rank strategy parameter must lie in (0, 1)");
  }
  PivotedQR f = detail::pivoted_householder(m, want_q);
  f.rank = detail::decide_rank(f.log.diag, m.stableNorm(), strategy, f.log);
  return f;
}

/// Pivoted QR whose rank is supplied by the caller (no rank decision).
inline PivotedQR rrqr_fixed_rank(const Matrix& m, Index rank) {
  require_finite(m, "rrqr input");
  PivotedQR f = detail::pivoted_householder(m);
  const Index kmax = std::min(m.rows(), m.cols());
  if (rank < 0 || rank > kmax) throw Error(ErrorCode::invalid_input, "forced rank out of range");
  f.rank = rank;
  f.log.strategy = "forced";
  f.log.forced = true;
  if (rank > 0 && rank < kmax && f.log.diag(rank - 1) > 0.0) {
    f.log.cut_ratio = f.log.diag(rank) / f.log.diag(rank - 1);
  }
  return f;
}

namespace detail {

inline URVFactors urv_from_qr(const PivotedQR& qr) {
  const Index k = qr.rank;
  URVFactors f;
  f.rank = k;
  f.log = qr.log;
  f.u = qr.q;
  // [R11 R12]^* = Z [T; 0]  =>  [R11 R12] = [T^* 0] Z^*.
  const Matrix lead = qr.r.topRows(k).adjoint();
  auto [z, t] = householder_qr(lead);
  f.r = t.topRows(k).adjoint();
  f.v = qr.perm_matrix() * z;
  return f;
}

}  // namespace detail

inline URVFactors urv(const Matrix& m, const RankStrategy& strategy) {
  return detail::urv_from_qr(rrqr(m, strategy));
}

inline URVFactors urv_fixed_rank(const Matrix& m, Index rank) {
  return detail::urv_from_qr(rrqr_fixed_rank(m, rank));
}

inline SVDFactors svd(const Matrix& m) {
  require_finite(m, "svd input");
  SVDFactors f;
  if (m.size() == 0) {
    f.u = Matrix::Identity(m.rows(), m.rows());
    f.v = Matrix::Identity(m.cols(), m.cols());
    return f;
  }
  Eigen::BDCSVD<Matrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  f.u = solver.matrixU();
  f.sigma = solver.singularValues();
  f.v = solver.matrixV();
  return f;
}

namespace detail {

// 2x2 unitary G with G * [a; b] = [r; 0].
inline Eigen::Matrix2cd givens(Complex a, Complex b) {
  Eigen::Matrix2cd g = Eigen::Matrix2cd::Identity();
  const Real ab = std::abs(b);
  if (ab == 0.0) return g;
  const Real aa = std::abs(a);
  const Real r = std::hypot(aa, ab);
  if (aa == 0.0) {
    const Complex s = std::conj(b) / ab;
    g << 0.0, s, -std::conj(s), 0.0;
    return g;
  }
  const Real c = aa / r;
  const Complex s = (a / aa) * std::conj(b) / r;
  g << c, s, -std::conj(s), c;
  return g;
}

inline void rotate_rows(Matrix& m, Index i, Index j, const Eigen::Matrix2cd& g) {
  for (Index c = 0; c < m.cols(); ++c) {
    const Complex x = m(i, c);
    const Complex y = m(j, c);
    m(i, c) = g(0, 0) * x + g(0, 1) * y;
    m(j, c) = g(1, 0) * x + g(1, 1) * y;
  }
}

inline void rotate_cols(Matrix& m, Index i, Index j, const Eigen::Matrix2cd& g) {
  for (Index r = 0; r < m.rows(); ++r) {
    const Complex x = m(r, i);
    const Complex y = m(r, j);
    m(r, i) = x * g(0, 0) + y * g(1, 0);
    m(r, j) = x * g(0, 1) + y * g(1, 1);
  }
}

}  // namespace detail

inline TriHessPair tri_hess_reduce(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "tri_hess_reduce needs two square matrices of equal size");
  }
  require_finite(a, "tri_hess_reduce a");
  require_finite(b, "tri_hess_reduce b");
  const Index n = a.rows();
  TriHessPair p;
  auto [q0, r0] = householder_qr(a);
  p.q = std::move(q0);
  p.t = std::move(r0);
  p.h = p.q.adjoint() * b;
  p.z = Matrix::Identity(n, n);
  for (Index j = 0; j + 2 < n; ++j) {
    for (Index i = n - 1; i >= j + 2; --i) {
      if (p.h(i, j) == Complex(0.0)) continue;
      const Eigen::Matrix2cd g = detail::givens(p.h(i - 1, j), p.h(i, j));
      detail::rotate_rows(p.h, i - 1, i, g);
      detail::rotate_rows(p.t, i - 1, i, g);
      detail::rotate_cols(p.q, i - 1, i, g.adjoint());
      p.h(i, j) = 0.0;
      // Restore triangularity of t: row i is [.. t(i,i-1) t(i,i)].
      if (p.t(i, i - 1) != Complex(0.0)) {
        const Eigen::Matrix2cd gz = detail::givens(std::conj(p.t(i, i)), std::conj(p.t(i, i - 1)));
        // Columns (i-1, i): [x y] * W = [0 r] with W = J G^* J.
        Eigen::Matrix2cd w;
        const Eigen::Matrix2cd ga = gz.adjoint();
        w << ga(1, 1), ga(1, 0), ga(0, 1), ga(0, 0);
        detail::rotate_cols(p.t, i - 1, i, w);
        detail::rotate_cols(p.h, i - 1, i, w);
        detail::rotate_cols(p.z, i - 1, i, w);
        p.t(i, i - 1) = 0.0;
      }
    }
  }
  return p;
}

/// Operation counts of one shifted solve (complex multiply-adds).
struct SolveStats {
  std::int64_t flops = 0;
  Real rcond = 0.0;
};

/// LU of an upper Hessenberg matrix with adjacent-row partial pivoting.
class HessenbergLU {
 public:
  explicit HessenbergLU(Matrix m, std::int64_t* flops = nullptr) : u_(std::move(m)) {
    const Index n = u_.rows();
    swapped_.assign(static_cast<std::size_t>(std::max<Index>(n - 1, 0)), false);
    mult_.setZero(std::max<Index>(n - 1, 0));
    for (Index j = 0; j + 1 < n; ++j) {
      if (std::abs(u_(j + 1, j)) > std::abs(u_(j, j))) {
        u_.row(j).tail(n - j).swap(u_.row(j + 1).tail(n - j));
        swapped_[static_cast<std::size_t>(j)] = true;
      }
      if (u_(j, j) == Complex(0.0)) {
        singular_ = true;
        continue;
      }
      const Complex l = u_(j + 1, j) / u_(j, j);
      mult_(j) = l;
      u_(j + 1, j) = 0.0;
      u_.row(j + 1).tail(n - j - 1) -= l * u_.row(j).tail(n - j - 1);
      if (flops != nullptr) *flops += n - j;
    }
    for (Index i = 0; i < n; ++i) {
      if (u_(i, i) == Complex(0.0)) singular_ = true;
    }
  }

  bool singular() const { return singular_; }

  Vector solve(Vector x, std::int64_t* flops = nullptr) const {
    const Index n = u_.rows();
    for (Index j = 0; j + 1 < n; ++j) {
      if (swapped_[static_cast<std::size_t>(j)]) std::swap(x(j), x(j + 1));
      x(j + 1) -= mult_(j) * x(j);
    }
    for (Index i = n - 1; i >= 0; --i) {
      Complex s = x(i);
      for (Index k = i + 1; k < n; ++k) s -= u_(i, k) * x(k);
      x(i) = s / u_(i, i);
    }
    if (flops != nullptr) *flops += n + n * (n + 1) / 2;
    return x;
  }

  /// Solves M^* y = x.
  Vector solve_adjoint(Vector x, std::int64_t* flops = nullptr) const {
    const Index n = u_.rows();
    for (Index i = 0; i < n; ++i) {
      Complex s = x(i);
      for (Index k = 0; k < i; ++k) s -= std::conj(u_(k, i)) * x(k);
      x(i) = s / std::conj(u_(i, i));
    }
    for (Index j = n - 2; j >= 0; --j) {
      x(j) -= std::conj(mult_(j)) * x(j + 1);
      if (swapped_[static_cast<std::size_t>(j)]) std::swap(x(j), x(j + 1));
    }
    if (flops != nullptr) *flops += n + n * (n + 1) / 2;
    return x;
  }

  /// Hager-Higham estimate of ||M^{-1}||_1 (a handful of solves).
  Real inverse_norm1_estimate(std::int64_t* flops = nullptr) const {
    const Index n = u_.rows();
    if (n == 0) return 0.0;
    Vector x = Vector::Constant(n, Complex(1.0 / static_cast<Real>(n)));
    Real est = 0.0;
    Index last = -1;
    for (int iter = 0; iter < 5; ++iter) {
      const Vector y = solve(x, flops);
      est = y.cwiseAbs().sum();
      Vector xi(n);
      for (Index i = 0; i < n; ++i) {
        const Real a = std::abs(y(i));
        xi(i) = a == 0.0 ? Complex(1.0) : y(i) / a;
      }
      const Vector z = solve_adjoint(xi, flops);
      Index j = 0;
      z.cwiseAbs().maxCoeff(&j);
      if (iter > 0 && (j == last || std::abs(z(j)) <= std::real(z.dot(x)))) break;
      last = j;
      x.setZero();
      x(j) = 1.0;
    }
    return est;
  }

 private:
  Matrix u_;
  Eigen::VectorXcd mult_;
  std::vector<bool> swapped_;
  bool singular_ = false;
};

/// Returns (lambda * a + b)^{-1} v through the Hessenberg form of the pair,
/// O(n^2) per call.  Throws ErrorCode::singular_shift when lambda*t + h is
/// singular or its 1-norm condition estimate exceeds 1/eps.
inline Vector shifted_hess_solve(const TriHessPair& pair, Complex lambda, const Vector& v,
                                 SolveStats* stats = nullptr) {
  const Index n = pair.t.rows();
  if (v.size() != n) throw Error(ErrorCode::dimension_mismatch, "shifted_hess_solve: vector length");
  std::int64_t flops = 0;
  Matrix m = pair.h;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) m(i, j) += lambda * pair.t(i, j);
  }
  flops += n * (n + 1) / 2;
  Real norm1 = 0.0;
  for (Index j = 0; j < n; ++j) norm1 = std::max(norm1, m.col(j).cwiseAbs().sum());
  HessenbergLU lu(std::move(m), &flops);
  if (lu.singular()) throw Error(ErrorCode::singular_shift, "shifted pencil is exactly singular");
  const Real cond = norm1 * lu.inverse_norm1_estimate(&flops);
  if (!(cond < 1.0 / kEps)) throw Error(ErrorCode::singular_shift, "shifted pencil is numerically singular");
  const Vector rhs = pair.q.adjoint() * v;
  const Vector y = lu.solve(rhs, &flops);
  flops += 2 * n * n;
  if (stats != nullptr) {
    stats->flops = flops;
    stats->rcond = 1.0 / cond;
  }
  return pair.z * y;
}

}  // namespace quarteig::numkit
