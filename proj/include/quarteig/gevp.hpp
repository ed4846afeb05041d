#pragma once

// Generalized eigenproblem backend: QZ via LAPACK zggev3 (blocked
// Hessenberg-triangular reduction).

#include <string>
#include <vector>

#include <lapacke.h>

#include "quarteig/pencil.hpp"

namespace quarteig {

/// Eigenpairs of aa - lambda bb: beta * aa * v = alpha * bb * v and
/// beta * u^* aa = alpha * u^* bb, vectors of unit 2-norm.
struct GevpSolution {
  std::vector<HomogeneousEig> eigs;
  Matrix right_vecs;  // column j belongs to eigs[j]
  Matrix left_vecs;   // empty when only right vectors were requested
  std::string backend_id = "lapack-zggev3";
};

inline GevpSolution solve_gevp(const LinearPencil& p, bool want_left = true) {
  const Index m = p.size();
  if (p.aa.rows() != p.aa.cols() || p.bb.rows() != m || p.bb.cols() != m) {
    throw Error(ErrorCode::dimension_mismatch, "solve_gevp needs a square pencil");
  }
  require_finite(p.aa, "pencil aa");
  require_finite(p.bb, "pencil bb");
  GevpSolution sol;
  if (m == 0) return sol;

  Matrix a = p.aa;
  Matrix b = p.bb;
  Vector alpha(m);
  Vector beta(m);
  Matrix vl(want_left ? m : 1, want_left ? m : 1);
  Matrix vr(m, m);
  const auto n = static_cast<lapack_int>(m);
  const lapack_int info = LAPACKE_zggev3(
      LAPACK_COL_MAJOR, want_left ? 'V' : 'N', 'V', n, reinterpret_cast<lapack_complex_double*>(a.data()), n,
      reinterpret_cast<lapack_complex_double*>(b.data()), n, reinterpret_cast<lapack_complex_double*>(alpha.data()),
      reinterpret_cast<lapack_complex_double*>(beta.data()), reinterpret_cast<lapack_complex_double*>(vl.data()),
      want_left ? n : 1, reinterpret_cast<lapack_complex_double*>(vr.data()), n);
  if (info < 0) throw Error(ErrorCode::backend_failure, "zggev3: invalid argument " + std::to_string(-info));
  if (info > 0) {
    // Pairs info..m-1 are valid when info <= m.
    std::string msg = "zggev3: QZ iteration failed";
    if (info <= n) msg += " at index " + std::to_string(info - 1) + "; pairs from that index on are valid";
    throw Error(ErrorCode::backend_failure, msg);
  }
  sol.eigs.reserve(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) sol.eigs.push_back(HomogeneousEig::from_pair(alpha(j), beta(j), m));
  for (Index j = 0; j < m; ++j) {
    const Real nr = vr.col(j).norm();
    if (nr > 0.0) divide_real(vr.col(j), nr);
  }
  sol.right_vecs = std::move(vr);
  if (want_left) {
    for (Index j = 0; j < m; ++j) {
      const Real nl = vl.col(j).norm();
      if (nl > 0.0) divide_real(vl.col(j), nl);
    }
    sol.left_vecs = std::move(vl);
  }
  return sol;
}

}  // namespace quarteig
