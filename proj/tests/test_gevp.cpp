#include <gtest/gtest.h>

#include "oracles.hpp"
#include "quarteig/gevp.hpp"

namespace {

using namespace quarteig;

LinearPencil pencil_of(const Matrix& aa, const Matrix& bb) {
  LinearPencil p;
  p.aa = aa;
  p.bb = bb;
  return p;
}

TEST(SolveGevp, IdentityPairHasUnitEigenvalues) {
  const Matrix i3 = Matrix::Identity(3, 3);
  const GevpSolution s = solve_gevp(pencil_of(i3, i3));
  ASSERT_EQ(s.eigs.size(), 3u);
  for (const auto& h : s.eigs) {
    EXPECT_EQ(h.cls, EigClass::finite);
    EXPECT_NEAR(std::abs(h.lambda() - 1.0), 0.0, 4 * kEps);
  }
  EXPECT_EQ(s.backend_id, "lapack-zggev3");
}

TEST(SolveGevp, SingularBGivesOneInfiniteEigenvalue) {
  Matrix b = Matrix::Identity(2, 2);
  b(1, 1) = 0.0;
  const GevpSolution s = solve_gevp(pencil_of(Matrix::Identity(2, 2), b));
  int inf = 0;
  int one = 0;
  for (const auto& h : s.eigs) {
    if (h.cls == EigClass::infinite) ++inf;
    if (h.cls == EigClass::finite && std::abs(h.lambda() - 1.0) <= 4 * kEps) ++one;
  }
  EXPECT_EQ(inf, 1);
  EXPECT_EQ(one, 1);
}

TEST(SolveGevp, EigenvaluesMatchDeterminantRoots) {
  oracle::Rng r(1);
  int checked = 0;
  for (int trial = 0; trial < 20 && checked < 10; ++trial) {
    const Matrix aa = r.gaussian(8, 8);
    const Matrix bb = r.gaussian(8, 8);
    const auto roots = oracle::pencil_roots(aa, bb);
    if (oracle::min_relative_gap(roots) < 1e-3) continue;
    ++checked;
    std::vector<Complex> got;
    for (const auto& h : solve_gevp(pencil_of(aa, bb), false).eigs) got.push_back(h.lambda());
    EXPECT_LE(oracle::match_error(got, roots), 1e-9);
  }
  EXPECT_GE(checked, 8);
}

TEST(SolveGevp, ResidualsAreBackwardStable) {
  oracle::Rng r(2);
  for (Index m : {1, 5, 12, 30}) {
    const Matrix aa = r.gaussian(m, m);
    const Matrix bb = r.gaussian(m, m);
    const GevpSolution s = solve_gevp(pencil_of(aa, bb));
    const Real na = oracle::norm2(aa);
    const Real nb = oracle::norm2(bb);
    const Real tol = 1e3 * static_cast<Real>(m) * kEps;
    for (Index j = 0; j < m; ++j) {
      const HomogeneousEig& h = s.eigs[static_cast<std::size_t>(j)];
      const Vector v = s.right_vecs.col(j);
      const Vector u = s.left_vecs.col(j);
      EXPECT_NEAR(v.norm(), 1.0, 10 * kEps);
      EXPECT_NEAR(u.norm(), 1.0, 10 * kEps);
      const Real scale = std::abs(h.beta) * na + std::abs(h.alpha) * nb;
      EXPECT_LE((h.beta * aa * v - h.alpha * bb * v).norm(), tol * scale) << m << " " << j;
      EXPECT_LE((h.beta * u.adjoint() * aa - h.alpha * u.adjoint() * bb).norm(), tol * scale) << m << " " << j;
    }
  }
}

TEST(SolveGevp, UnitaryEquivalenceLeavesTheSpectrumInvariant) {
  oracle::Rng r(3);
  const Matrix aa = r.gaussian(6, 6);
  const Matrix bb = r.gaussian(6, 6);
  const Matrix u = r.unitary(6);
  const Matrix v = r.unitary(6);
  std::vector<Complex> e0;
  std::vector<Complex> e1;
  for (const auto& h : solve_gevp(pencil_of(aa, bb), false).eigs) e0.push_back(h.lambda());
  for (const auto& h : solve_gevp(pencil_of(u * aa * v, u * bb * v), false).eigs) e1.push_back(h.lambda());
  ASSERT_GT(oracle::min_relative_gap(e0), 1e-4);
  EXPECT_LE(oracle::match_error(e1, e0), 1e-10);
}

TEST(SolveGevp, RightOnlyLeavesLeftEmpty) {
  oracle::Rng r(4);
  const GevpSolution s = solve_gevp(pencil_of(r.gaussian(4, 4), r.gaussian(4, 4)), false);
  EXPECT_EQ(s.left_vecs.size(), 0);
  EXPECT_EQ(s.right_vecs.cols(), 4);
}

TEST(SolveGevp, EmptyPencil) {
  const GevpSolution s = solve_gevp(pencil_of(Matrix(0, 0), Matrix(0, 0)));
  EXPECT_TRUE(s.eigs.empty());
}

TEST(SolveGevp, RejectsBadInput) {
  EXPECT_THROW(solve_gevp(pencil_of(Matrix::Identity(2, 2), Matrix::Identity(3, 3))), Error);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 0) = std::numeric_limits<Real>::quiet_NaN();
  EXPECT_THROW(solve_gevp(pencil_of(bad, Matrix::Identity(2, 2))), Error);
}

}  // namespace
