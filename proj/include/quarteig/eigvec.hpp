#pragma once

// Quartic eigenvectors from eigenvectors of the linearization, lifting of
// deflated-pencil eigenvectors back to the 4n frame, and null-space vectors
// for deflated zero and infinite eigenvalues.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/LU>

#include "quarteig/deflate.hpp"
#include "quarteig/diagnostics.hpp"
#include "quarteig/numkit.hpp"
#include "quarteig/pencil.hpp"

namespace quarteig {

/// Per-problem data shared by all eigenvector recoveries; read-only after build.
struct RecoveryContext {
  numkit::TriHessPair tri_hess;             // of (A, B)
  std::optional<numkit::SVDFactors> svd_e;  // least-squares recovery
  std::optional<numkit::SVDFactors> svd_b;  // least-squares recovery at lambda = 0
  std::optional<numkit::SVDFactors> svd_d;
  std::optional<Eigen::PartialPivLU<Matrix>> lu_e;
  NormCache norms;

  static RecoveryContext build(const QuarticPencil& q, bool e_nonsingular, bool with_svd) {
    RecoveryContext c;
    c.tri_hess = numkit::tri_hess_reduce(q.a, q.b);
    if (e_nonsingular) c.lu_e.emplace(q.e);
    if (with_svd) {
      c.svd_e = numkit::svd(q.e);
      c.svd_b = numkit::svd(q.b);
      c.svd_d = numkit::svd(q.d);
    }
    c.norms = make_norms(q);
    return c;
  }
};

namespace detail {

inline Index block_size(const Vector& z) {
  if (z.size() % 4 != 0) throw Error(ErrorCode::dimension_mismatch, "linearization vector length is not 4n");
  return z.size() / 4;
}

}  // namespace detail

struct RightRecovery {
  Vector x;
  std::string method;
  Real eta = 0.0;
  bool fallback = false;
  std::array<Real, 4> candidate_eta{};  // NaN for unavailable candidates
};

inline constexpr std::array<const char*, 4> kRightCandidates = {"z1", "shifted_z2", "shifted_z3", "inverse_e_z4"};

/// Evaluates every available candidate and keeps the one with the smallest
/// backward error; ties go to the earlier candidate.
inline RightRecovery recover_right(const Vector& z, const HomogeneousEig& h, const RecoveryContext& ctx,
                                   const QuarticPencil& q) {
  const Index n = detail::block_size(z);
  if (n != q.n) throw Error(ErrorCode::dimension_mismatch, "recover_right: vector does not match the quartic");
  if (h.is_infinite() || h.alpha == Complex(0.0)) {
    throw Error(ErrorCode::invalid_input, "recover_right needs a finite nonzero eigenvalue");
  }
  const Complex lambda = h.alpha / h.beta;
  const Real nan = std::numeric_limits<Real>::quiet_NaN();
  RightRecovery out;
  out.candidate_eta.fill(nan);
  std::array<std::optional<Vector>, 4> cand;
  cand[0] = z.segment(0, n);
  try {
    cand[1] = numkit::shifted_hess_solve(ctx.tri_hess, lambda, z.segment(n, n));
    cand[2] = numkit::shifted_hess_solve(ctx.tri_hess, lambda, z.segment(2 * n, n));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::singular_shift) throw;
  }
  if (ctx.lu_e) cand[3] = Vector(-ctx.lu_e->solve(z.segment(3 * n, n)));

  Real best = std::numeric_limits<Real>::infinity();
  int best_i = -1;
  for (int i = 0; i < 4; ++i) {
    auto& c = cand[static_cast<std::size_t>(i)];
    if (!c) continue;
    const Real nc = c->stableNorm();
    if (!(nc > 0.0) || !std::isfinite(nc)) {
      c.reset();
      continue;
    }
    divide_real(*c, nc);
    const Real e = eta_working(h, *c, q, ctx.norms);
    out.candidate_eta[static_cast<std::size_t>(i)] = e;
    if (e < best) {
      best = e;
      best_i = i;
    }
  }
  if (best_i < 0) {
    out.fallback = true;
    out.method = "z1_fallback";
    out.x = z.segment(0, n);
    const Real nx = out.x.stableNorm();
    if (!(nx > 0.0)) throw Error(ErrorCode::recovery_failure, "recover_right: every candidate vanished");
    divide_real(out.x, nx);
    out.eta = eta_working(h, out.x, q, ctx.norms);
    return out;
  }
  out.x = *cand[static_cast<std::size_t>(best_i)];
  out.method = kRightCandidates[static_cast<std::size_t>(best_i)];
  out.eta = best;
  return out;
}

struct ZeroRecovery {
  Vector x;
  bool degenerate = false;
  Real consistency = 0.0;  // |z - [x;0;Bx;Dx]| / |z| with x = z1
};

/// lambda = 0: z = [x; 0; Bx; Dx].
inline ZeroRecovery recover_right_zero(const Vector& z, const QuarticPencil& q) {
  const Index n = detail::block_size(z);
  if (n != q.n) throw Error(ErrorCode::dimension_mismatch, "recover_right_zero: vector does not match the quartic");
  ZeroRecovery out;
  const Vector z1 = z.segment(0, n);
  const Real nz = z.norm();
  const Real n1 = z1.norm();
  if (!(n1 > static_cast<Real>(n) * kEps * nz) || !(n1 > 0.0)) {
    out.degenerate = true;
    out.x = n1 > 0.0 ? Vector(z1 / n1) : Vector(Vector::Zero(n));
    out.consistency = std::numeric_limits<Real>::infinity();
    return out;
  }
  Vector expect(4 * n);
  expect << z1, Vector::Zero(n), q.b * z1, q.d * z1;
  out.consistency = (z - expect).norm() / nz;
  out.x = z1 / n1;
  return out;
}

struct LeftRecovery {
  Vector y;
  int block = -1;  // 0..3
  bool degenerate = false;
  Real eta = std::numeric_limits<Real>::quiet_NaN();
};

/// w = (conj(l)^3 y, conj(l) y, conj(l)^2 y, y): the block of largest norm,
/// normalized.
inline LeftRecovery recover_left(const Vector& w, const HomogeneousEig& h) {
  (void)h;
  const Index n = detail::block_size(w);
  LeftRecovery out;
  Real best = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Real nb = w.segment(i * n, n).norm();
    if (nb > best) {
      best = nb;
      out.block = i;
    }
  }
  if (out.block < 0) {
    out.degenerate = true;
    out.y = Vector::Zero(n);
    return out;
  }
  out.y = w.segment(out.block * n, n) / best;
  return out;
}

/// Evaluates the left backward error of each nonzero block and keeps the
/// smallest; ties go to the larger block.
inline LeftRecovery recover_left_min_residual(const Vector& w, const HomogeneousEig& h, const QuarticPencil& q,
                                              const NormCache& norms) {
  const Index n = detail::block_size(w);
  LeftRecovery out;
  Real best_eta = std::numeric_limits<Real>::infinity();
  Real best_norm = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Vector b = w.segment(i * n, n);
    const Real nb = b.stableNorm();
    if (!(nb > 0.0) || !std::isfinite(nb)) continue;
    const Vector y = divided_real(b, nb);
    const Real e = eta_left_working(h, y, q, norms);
    if (e < best_eta || (e == best_eta && nb > best_norm)) {
      best_eta = e;
      best_norm = nb;
      out.block = i;
      out.y = y;
      out.eta = e;
    }
  }
  if (out.block < 0) {
    out.degenerate = true;
    out.y = Vector::Zero(n);
  }
  return out;
}

struct LsRecovery {
  Vector x;       // unit norm
  Vector raw;     // the least-squares minimizer itself
  Real objective = 0.0;
  std::string form;
};

/// Least-squares recovery from two blocks of z with the second block weighted
/// by `weight`.  |lambda| <= 1: min |[lambda I; E] x - [z1; -z4]|; otherwise
/// min |[I; E] x - [z1/lambda; -z4]|.  lambda = 0 uses [I; B] with [z1; z3] or
/// [I; D] with [z1; z4], whichever gives the smaller backward error.
inline LsRecovery recover_right_ls(const Vector& z, const HomogeneousEig& h, const RecoveryContext& ctx,
                                   const QuarticPencil& q, Real weight = 1.0) {
  const Index n = detail::block_size(z);
  if (n != q.n) throw Error(ErrorCode::dimension_mismatch, "recover_right_ls: vector does not match the quartic");
  if (h.is_infinite()) throw Error(ErrorCode::invalid_input, "recover_right_ls needs a finite eigenvalue");
  if (!ctx.svd_e || !ctx.svd_b || !ctx.svd_d) throw Error(ErrorCode::invalid_input, "recover_right_ls: SVD missing");
  const Vector z1 = z.segment(0, n);
  const Real w2 = weight * weight;

  // min |c x - r1|^2 + w^2 |M x - r2|^2 with M = U S V^*.
  auto solve = [&](const numkit::SVDFactors& f, Complex c, const Vector& r1, const Vector& r2) {
    const Vector a = f.v.adjoint() * r1;
    const Vector b = f.u.adjoint() * r2;
    Vector xi(n);
    for (Index i = 0; i < n; ++i) {
      const Real s = f.sigma(i);
      xi(i) = (std::conj(c) * a(i) + w2 * s * b(i)) / (std::norm(c) + w2 * s * s);
    }
    return Vector(f.v * xi);
  };
  auto objective = [&](const Matrix& m, Complex c, const Vector& r1, const Vector& r2, const Vector& x) {
    return std::sqrt((c * x - r1).squaredNorm() + w2 * (m * x - r2).squaredNorm());
  };

  LsRecovery out;
  if (h.alpha == Complex(0.0) || h.cls == EigClass::zero) {
    const Vector z3 = z.segment(2 * n, n);
    const Vector z4 = z.segment(3 * n, n);
    const Vector xb = solve(*ctx.svd_b, 1.0, z1, z3);
    const Vector xd = solve(*ctx.svd_d, 1.0, z1, z4);
    const Real eb = xb.norm() > 0.0 ? eta_working(h, xb, q, ctx.norms) : std::numeric_limits<Real>::infinity();
    const Real ed = xd.norm() > 0.0 ? eta_working(h, xd, q, ctx.norms) : std::numeric_limits<Real>::infinity();
    if (eb <= ed) {
      out.raw = xb;
      out.objective = objective(q.b, 1.0, z1, z3, xb);
      out.form = "zero_b";
    } else {
      out.raw = xd;
      out.objective = objective(q.d, 1.0, z1, z4, xd);
      out.form = "zero_d";
    }
  } else {
    const Complex lambda = h.alpha / h.beta;
    const Vector r2 = -z.segment(3 * n, n);
    const bool scaled = std::abs(lambda) > 1.0;
    const Complex c = scaled ? Complex(1.0) : lambda;
    const Vector r1 = scaled ? Vector(z1 / lambda) : z1;
    out.raw = solve(*ctx.svd_e, c, r1, r2);
    out.objective = objective(q.e, c, r1, r2, out.raw);
    out.form = scaled ? "scaled" : "unscaled";
  }
  const Real nr = out.raw.stableNorm();
  if (!(nr > 0.0)) throw Error(ErrorCode::recovery_failure, "least-squares recovery returned zero");
  out.x = divided_real(out.raw, nr);
  return out;
}

/// z = Q [z_tilde; 0].
inline Vector lift_right(const Vector& zt, const DeflationResult& d) {
  if (zt.size() != d.size()) throw Error(ErrorCode::dimension_mismatch, "lift_right: vector length");
  return d.q.leftCols(d.size()) * zt;
}

struct LiftedLeft {
  Vector w;
  Real y_rcond = 1.0;
};

/// w = P^* [w_tilde; w2] where w2 solves (beta Y_a - alpha Y_b)^* w2 =
/// -(beta X_a - alpha X_b)^* w_tilde.
inline LiftedLeft lift_left(const Vector& wt, const HomogeneousEig& h, const DeflationResult& d) {
  const Index m = d.size();
  const Index total = d.full_size();
  if (wt.size() != m) throw Error(ErrorCode::dimension_mismatch, "lift_left: vector length");
  if (!(wt.norm() > 0.0)) throw Error(ErrorCode::invalid_input, "lift_left: zero vector");
  LiftedLeft out;
  Vector full(total);
  full.head(m) = wt;
  if (total > m) {
    const Index k = total - m;
    const Complex a = h.alpha;
    const Complex b = h.beta;
    const Matrix my = b * d.aa.bottomRightCorner(k, k) - a * d.bb.bottomRightCorner(k, k);
    const Matrix mx = b * d.aa.topRightCorner(m, k) - a * d.bb.topRightCorner(m, k);
    Eigen::PartialPivLU<Matrix> lu(my.adjoint());
    out.y_rcond = lu.rcond();
    if (!(out.y_rcond > kEps)) {
      throw Error(ErrorCode::recovery_failure, "lift_left: trailing block is numerically singular at this eigenvalue");
    }
    full.tail(k) = lu.solve(Vector(-(mx.adjoint() * wt)));
  }
  out.w = d.p.adjoint() * full;
  return out;
}

enum class NullClass : std::uint8_t { zero_class, inf_class };

struct NullBasis {
  Matrix right;  // orthonormal basis of null(E) (zero class) or null(A)
  Matrix left;   // orthonormal basis of null(E^*) or null(A^*)
};

inline NullBasis nullspace_vectors(const RankProfile& rp, NullClass which) {
  const numkit::PivotedQR& f = which == NullClass::zero_class ? rp.qr_e : rp.qr_a;
  const Index n = rp.n;
  const Index r = f.rank;
  NullBasis b;
  if (r == n) {
    b.right.resize(n, 0);
    b.left.resize(n, 0);
    return b;
  }
  const Matrix s = f.perm_matrix() * f.r.topRows(r).adjoint();
  const auto qr = numkit::householder_qr(s);
  b.right = qr.first.rightCols(n - r);
  b.left = f.q.rightCols(n - r);
  return b;
}

/// Left singular vector of the smallest singular value of P(lambda); used
/// only when the lifted left vector cannot be formed.
inline Vector dense_left_vector(const HomogeneousEig& h, const QuarticPencil& q) {
  const auto w = detail::homogeneous_weights(h);
  Matrix m = Matrix::Zero(q.n, q.n);
  for (int k = 0; k <= 4; ++k) m += w[static_cast<std::size_t>(k)] * q.coeff(k);
  const numkit::SVDFactors f = numkit::svd(m);
  return f.u.col(q.n - 1);
}

}  // namespace quarteig
