#pragma once

// The quartic matrix polynomial, its grade-2 companion quadratification and
// the 4n x 4n linear pencil, plus homogeneous eigenvalue pairs.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quarteig/core.hpp"

namespace quarteig {

/// Record of the transformations applied to a quartic before solving.
/// Reported eigenvalues are lambda = gamma * nu; right vectors x = dr .* x_hat,
/// left vectors y = dl .* y_hat.  Empty dl/dr mean identity.
struct ScalingRecord {
  Real gamma = 1.0;
  Real theta = 1.0;
  RealVector dl;
  RealVector dr;
  bool scale_skipped = false;

  bool is_identity() const { return gamma == 1.0 && theta == 1.0 && dl.size() == 0 && dr.size() == 0; }
};

/// lambda^4 a + lambda^3 b + lambda^2 c + lambda d + e.
struct QuarticPencil {
  Index n = 0;
  Matrix a, b, c, d, e;
  std::optional<ScalingRecord> provenance;

  QuarticPencil() = default;
  QuarticPencil(Matrix a_, Matrix b_, Matrix c_, Matrix d_, Matrix e_)
      : n(a_.rows()), a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), d(std::move(d_)), e(std::move(e_)) {
    validate();
  }

  /// Coefficient of lambda^k, k = 0..4.
  const Matrix& coeff(int k) const {
    switch (k) {
      case 4: return a;
      case 3: return b;
      case 2: return c;
      case 1: return d;
      default: return e;
    }
  }
  Matrix& coeff(int k) { return const_cast<Matrix&>(std::as_const(*this).coeff(k)); }

  void validate() const {
    for (int k = 0; k <= 4; ++k) {
      const Matrix& m = coeff(k);
      if (m.rows() != n || m.cols() != n) {
        throw Error(ErrorCode::dimension_mismatch, "quartic coefficients must be square and of equal size");
      }
      require_finite(m, "quartic coefficient");
    }
  }

  /// P(lambda) x in homogeneous form: sum alpha^k beta^(4-k) coeff(k) x.
  Vector apply(Complex alpha, Complex beta, const Vector& x) const {
    Vector r = Vector::Zero(n);
    std::array<Complex, 5> apow{}, bpow{};
    apow[0] = bpow[0] = 1.0;
    for (int k = 1; k <= 4; ++k) {
      apow[static_cast<std::size_t>(k)] = apow[static_cast<std::size_t>(k - 1)] * alpha;
      bpow[static_cast<std::size_t>(k)] = bpow[static_cast<std::size_t>(k - 1)] * beta;
    }
    for (int k = 0; k <= 4; ++k) {
      const Complex w = apow[static_cast<std::size_t>(k)] * bpow[static_cast<std::size_t>(4 - k)];
      if (w != Complex(0.0)) r.noalias() += w * (coeff(k) * x);
    }
    return r;
  }

  /// Dense P(lambda) for a finite lambda.
  Matrix evaluate(Complex lambda) const {
    return (((lambda * a + b) * lambda + c) * lambda + d) * lambda + e;
  }
};

/// The quadratic companion blocks m = [[A,0],[C,I]], cc = [[B,0],[D,0]], k = [[0,-I],[E,0]].
struct QuadPencil {
  Matrix m;
  Matrix cc;
  Matrix k;
};

/// One non-zero block of a structured linear pencil.
struct BlockEntry {
  int row = 0;
  int col = 0;
  bool in_bb = false;      // false: first matrix, true: second matrix
  std::string content;     // "A".."E", "I", with an optional leading '-'
};

struct BlockMap {
  Index block = 0;         // block size (the quartic dimension)
  bool structured = false; // false once the block pattern is destroyed by deflation
  std::string origin;
  std::vector<BlockEntry> entries;
};

/// aa - lambda * bb.
struct LinearPencil {
  Matrix aa;
  Matrix bb;
  BlockMap block_map;

  Index size() const { return aa.rows(); }
};

enum class EigClass : std::uint8_t { zero, finite, infinite };

inline const char* to_string(EigClass c) {
  switch (c) {
    case EigClass::zero: return "zero";
    case EigClass::finite: return "finite";
    case EigClass::infinite: return "infinite";
  }
  return "finite";
}

/// lambda = alpha / beta with beta >= 0 and |alpha|^2 + beta^2 = 1.
struct HomogeneousEig {
  Complex alpha{0.0};
  Real beta = 1.0;
  EigClass cls = EigClass::zero;

  /// Thresholds scale with the size of the pencil the pair came from.
  static EigClass classify(Complex alpha, Real beta, Index size) {
    const Real tol = static_cast<Real>(std::max<Index>(size, 1)) * kEps;
    if (beta <= tol) return EigClass::infinite;
    if (std::abs(alpha) <= tol && beta > 0.5) return EigClass::zero;
    return EigClass::finite;
  }

  static HomogeneousEig from_pair(Complex alpha, Complex beta, Index size) {
    HomogeneousEig h;
    const Real ab = std::abs(beta);
    if (ab > 0.0) alpha *= std::conj(beta) / ab;
    const Real nrm = std::hypot(std::abs(alpha), ab);
    if (nrm == 0.0) throw Error(ErrorCode::backend_failure, "eigenvalue pair (0, 0): pencil is singular");
    h.alpha = alpha / nrm;
    h.beta = ab / nrm;
    h.cls = classify(h.alpha, h.beta, size);
    return h;
  }

  static HomogeneousEig zero() { return {Complex(0.0), 1.0, EigClass::zero}; }
  static HomogeneousEig infinite() { return {Complex(1.0), 0.0, EigClass::infinite}; }
  static HomogeneousEig finite(Complex lambda) {
    HomogeneousEig h = from_pair(lambda, 1.0, 1);
    h.cls = EigClass::finite;
    return h;
  }

  bool is_infinite() const { return cls == EigClass::infinite || beta == 0.0; }

  Complex lambda() const {
    if (beta == 0.0) return {std::numeric_limits<Real>::infinity(), 0.0};
    return alpha / beta;
  }
  Real modulus() const {
    if (beta == 0.0) return std::numeric_limits<Real>::infinity();
    return std::abs(alpha) / beta;
  }
  /// 1 / lambda, with zero and infinite classes exchanged.
  HomogeneousEig reciprocal() const {
    HomogeneousEig h;
    const Real aa = std::abs(alpha);
    h.alpha = aa > 0.0 ? Complex(beta) * std::conj(alpha) / aa : Complex(beta);
    h.beta = aa;
    h.cls = cls == EigClass::zero ? EigClass::infinite : cls == EigClass::infinite ? EigClass::zero : EigClass::finite;
    return h;
  }
};

inline QuadPencil quadratify(const QuarticPencil& q) {
  const Index n = q.n;
  QuadPencil p;
  p.m = Matrix::Zero(2 * n, 2 * n);
  p.cc = Matrix::Zero(2 * n, 2 * n);
  p.k = Matrix::Zero(2 * n, 2 * n);
  const Matrix id = Matrix::Identity(n, n);
  p.m.topLeftCorner(n, n) = q.a;
  p.m.bottomLeftCorner(n, n) = q.c;
  p.m.bottomRightCorner(n, n) = id;
  p.cc.topLeftCorner(n, n) = q.b;
  p.cc.bottomLeftCorner(n, n) = q.d;
  p.k.topRightCorner(n, n) = -id;
  p.k.bottomLeftCorner(n, n) = q.e;
  return p;
}

namespace detail {

inline BlockMap initial_block_map(Index n) {
  BlockMap map;
  map.block = n;
  map.structured = true;
  map.origin = "linearization";
  map.entries = {
      {0, 0, false, "B"},  {0, 2, false, "-I"}, {1, 0, false, "D"}, {1, 3, false, "-I"},
      {2, 1, false, "-I"}, {3, 0, false, "E"},  {0, 0, true, "-A"}, {1, 0, true, "-C"},
      {1, 1, true, "-I"},  {2, 2, true, "-I"},  {3, 3, true, "-I"},
  };
  return map;
}

}  // namespace detail

/// aa = [[B,0,-I,0],[D,0,0,-I],[0,-I,0,0],[E,0,0,0]],
/// bb = [[-A,0,0,0],[-C,-I,0,0],[0,0,-I,0],[0,0,0,-I]].
inline LinearPencil linearize(const QuarticPencil& q) {
  const Index n = q.n;
  LinearPencil p;
  p.aa = Matrix::Zero(4 * n, 4 * n);
  p.bb = Matrix::Zero(4 * n, 4 * n);
  const Matrix id = Matrix::Identity(n, n);
  p.aa.block(0, 0, n, n) = q.b;
  p.aa.block(0, 2 * n, n, n) = -id;
  p.aa.block(n, 0, n, n) = q.d;
  p.aa.block(n, 3 * n, n, n) = -id;
  p.aa.block(2 * n, n, n, n) = -id;
  p.aa.block(3 * n, 0, n, n) = q.e;
  p.bb.block(0, 0, n, n) = -q.a;
  p.bb.block(n, 0, n, n) = -q.c;
  p.bb.block(n, n, n, n) = -id;
  p.bb.block(2 * n, 2 * n, n, n) = -id;
  p.bb.block(3 * n, 3 * n, n, n) = -id;
  p.block_map = detail::initial_block_map(n);
  return p;
}

/// mu^4 E + mu^3 D + mu^2 C + mu B + A, whose eigenvalues are mu = 1/lambda.
inline QuarticPencil reverse(const QuarticPencil& q) {
  QuarticPencil r;
  r.n = q.n;
  r.a = q.e;
  r.b = q.d;
  r.c = q.c;
  r.d = q.b;
  r.e = q.a;
  r.provenance = q.provenance;
  return r;
}

}  // namespace quarteig
