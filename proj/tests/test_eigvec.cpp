#include <gtest/gtest.h>

#include "oracles.hpp"
#include "quarteig/eigvec.hpp"
#include "quarteig/gevp.hpp"
#include "quarteig/probio.hpp"
#include "quarteig/solver.hpp"

namespace {

using namespace quarteig;

struct DensePair {
  Complex lambda;
  Vector z;  // right null vector of aa - lambda bb
  Vector w;  // left null vector
};

// Finite eigenpairs of the undeflated linearization: eigenvalues from the
// oracle zggev call, vectors from the SVD of aa - lambda bb.
std::vector<DensePair> dense_pairs(const QuarticPencil& q) {
  const LinearPencil l = linearize(q);
  const auto s = oracle::classify(oracle::dense_gevp(l.aa, l.bb), l.size());
  std::vector<DensePair> out;
  for (const Complex lam : s.finite) {
    const Matrix m = l.aa - lam * l.bb;
    out.push_back({lam, oracle::null_vector(m), oracle::left_null_vector(m)});
  }
  return out;
}

Real ls_objective(Complex c, const Matrix& m, const Vector& r1, const Vector& r2, const Vector& x, Real w) {
  return std::sqrt((c * x - r1).squaredNorm() + w * w * (m * x - r2).squaredNorm());
}

TEST(RecoverRight, LinearizationStructure) {
  oracle::Rng r(1);
  const QuarticPencil q = oracle::random_quartic(r, 4);
  const Vector x = r.vec(4);
  const Complex l(0.4, -1.3);
  // z = [x; l (lA + B) x; (lA + B) x; -E x / l] solves aa z = l bb z.
  Vector z(16);
  const Vector t = (l * q.a + q.b) * x;
  z << x, l * t, t, -(q.e * x) / l;
  const LinearPencil lin = linearize(q);
  const Vector res = lin.aa * z - l * lin.bb * z;
  // Only the second block row is nonzero and it carries P(l) x / l.
  const Real tol = 1e2 * kEps * (lin.aa.norm() + std::abs(l) * lin.bb.norm()) * z.norm();
  EXPECT_LE(res.head(4).norm(), tol);
  EXPECT_LE(res.tail(8).norm(), tol);
  EXPECT_LE((res.segment(4, 4) - q.evaluate(l) * x / l).norm(), tol);
}

TEST(RecoverRight, RecoversTheQuarticVectorFromDensePairs) {
  oracle::Rng r(2);
  const QuarticPencil q = oracle::random_quartic(r, 4);
  const RecoveryContext ctx = RecoveryContext::build(q, true, false);
  const auto pairs = dense_pairs(q);
  ASSERT_EQ(pairs.size(), 16u);
  for (const auto& p : pairs) {
    const HomogeneousEig h = HomogeneousEig::finite(p.lambda);
    const RightRecovery rec = recover_right(p.z, h, ctx, q);
    EXPECT_FALSE(rec.fallback);
    EXPECT_NEAR(rec.x.norm(), 1.0, 10 * kEps);
    EXPECT_LE(rec.eta, 1e3 * 16 * kEps) << p.lambda;
    const Vector ref = oracle::null_vector(q.evaluate(p.lambda));
    EXPECT_LE(oracle::angle(rec.x, ref), 1e-6) << p.lambda;
  }
}

TEST(RecoverRight, SelectsTheSmallestCandidateError) {
  oracle::Rng r(3);
  for (int trial = 0; trial < 3; ++trial) {
    const QuarticPencil q = oracle::random_quartic(r, 5);
    const RecoveryContext ctx = RecoveryContext::build(q, true, false);
    for (const auto& p : dense_pairs(q)) {
      const RightRecovery rec = recover_right(p.z, HomogeneousEig::finite(p.lambda), ctx, q);
      int defined = 0;
      for (std::size_t i = 0; i < 4; ++i) {
        const Real e = rec.candidate_eta[i];
        if (std::isnan(e)) continue;
        ++defined;
        EXPECT_LE(rec.eta, e);
        if (e == rec.eta) {
          EXPECT_EQ(rec.method, kRightCandidates[i]);
          break;
        }
      }
      EXPECT_EQ(defined >= 1, true);
      EXPECT_EQ(rec.eta, eta_working(HomogeneousEig::finite(p.lambda), rec.x, q, ctx.norms));
      const Real precise = eta(HomogeneousEig::finite(p.lambda), rec.x, q);
      EXPECT_NEAR(rec.eta, precise, 1e2 * 5 * kEps);
    }
  }
}

TEST(RecoverRight, SingularEDropsTheInverseCandidate) {
  const auto b = probio::gen_planted(4, 1, 0, 3);
  const RecoveryContext ctx = RecoveryContext::build(b.pencil, false, false);
  for (const auto& p : dense_pairs(b.pencil)) {
    const RightRecovery rec = recover_right(p.z, HomogeneousEig::finite(p.lambda), ctx, b.pencil);
    EXPECT_TRUE(std::isnan(rec.candidate_eta[3]));
    EXPECT_NE(rec.method, "inverse_e_z4");
  }
}

TEST(RecoverRight, RejectsInfiniteAndZero) {
  oracle::Rng r(4);
  const QuarticPencil q = oracle::random_quartic(r, 2);
  const RecoveryContext ctx = RecoveryContext::build(q, true, false);
  const Vector z = r.vec(8);
  EXPECT_THROW(recover_right(z, HomogeneousEig::infinite(), ctx, q), Error);
  EXPECT_THROW(recover_right(z, HomogeneousEig::zero(), ctx, q), Error);
  EXPECT_THROW(recover_right(r.vec(7), HomogeneousEig::finite(1.0), ctx, q), Error);
}

TEST(RecoverRightZero, ConsistentVectorAtZero) {
  oracle::Rng r(5);
  const QuarticPencil q = oracle::random_quartic(r, 3);
  const Vector x = r.vec(3);
  Vector z(12);
  z << x, Vector::Zero(3), q.b * x, q.d * x;
  const ZeroRecovery rec = recover_right_zero(z, q);
  EXPECT_FALSE(rec.degenerate);
  EXPECT_LE(rec.consistency, 10 * kEps);
  EXPECT_LE(oracle::angle(rec.x, x), 1e-14);
  Vector bad = z;
  bad.head(3).setZero();
  EXPECT_TRUE(recover_right_zero(bad, q).degenerate);
}

TEST(RecoverLeft, LargestBlockFollowsTheModulus) {
  oracle::Rng r(6);
  const Vector y = r.vec(3);
  for (const Complex l : {Complex(3.0, 1.0), Complex(0.2, -0.1)}) {
    const Complex c = std::conj(l);
    Vector w(12);
    w << c * c * c * y, c * y, c * c * y, y;
    const LeftRecovery rec = recover_left(w, HomogeneousEig::finite(l));
    EXPECT_EQ(rec.block, std::abs(l) > 1.0 ? 0 : 3);
    EXPECT_LE(oracle::angle(rec.y, y), 1e-14);
    EXPECT_NEAR(rec.y.norm(), 1.0, 10 * kEps);
  }
  EXPECT_TRUE(recover_left(Vector::Zero(8), HomogeneousEig::finite(1.0)).degenerate);
}

TEST(RecoverLeft, MinResidualBlockIsOptimalOnDenseVectors) {
  oracle::Rng r(7);
  const QuarticPencil q = oracle::random_quartic(r, 4);
  const NormCache norms = make_norms(q);
  for (const auto& p : dense_pairs(q)) {
    const HomogeneousEig h = HomogeneousEig::finite(p.lambda);
    const LeftRecovery rec = recover_left_min_residual(p.w, h, q, norms);
    ASSERT_FALSE(rec.degenerate);
    for (int i = 0; i < 4; ++i) {
      const Vector b = p.w.segment(i * 4, 4);
      if (b.norm() > 0.0) EXPECT_LE(rec.eta, eta_left_working(h, divided_real(b, b.stableNorm()), q, norms));
    }
    EXPECT_LE(rec.eta, 1e3 * 16 * kEps) << p.lambda;
    const Vector ref = oracle::left_null_vector(q.evaluate(p.lambda));
    EXPECT_LE(oracle::angle(rec.y, ref), 1e-6);
  }
}

TEST(RecoverRightLs, MatchesDenseLeastSquares) {
  oracle::Rng r(8);
  const Index n = 4;
  const QuarticPencil q = oracle::random_quartic(r, n);
  const RecoveryContext ctx = RecoveryContext::build(q, true, true);
  const Vector z = r.vec(4 * n);
  for (const Real w : {1.0, 0.1, 7.0}) {
    for (const Complex l : {Complex(0.5, 0.5), Complex(-4.0, 1.0)}) {
      const LsRecovery rec = recover_right_ls(z, HomogeneousEig::finite(l), ctx, q, w);
      const bool scaled = std::abs(l) > 1.0;
      const Complex c = scaled ? Complex(1.0) : l;
      const Vector r1 = scaled ? Vector(z.head(n) / l) : Vector(z.head(n));
      const Vector r2 = -z.tail(n);
      Matrix stack(2 * n, n);
      stack << c * Matrix::Identity(n, n), w * q.e;
      Vector rhs(2 * n);
      rhs << r1, w * r2;
      const Vector ref = stack.colPivHouseholderQr().solve(rhs);
      EXPECT_EQ(rec.form, scaled ? "scaled" : "unscaled");
      EXPECT_LE((rec.raw - ref).norm(), 1e-10 * ref.norm());
      EXPECT_NEAR(rec.objective, ls_objective(c, q.e, r1, r2, ref, w), 1e-10 * (1.0 + rec.objective));
      for (int k = 0; k < 5; ++k) {
        const Vector pert = rec.raw + 1e-6 * r.vec(n);
        EXPECT_GE(ls_objective(c, q.e, r1, r2, pert, w), rec.objective * (1.0 - 1e-14));
      }
    }
  }
}

TEST(RecoverRightLs, ZeroEigenvalueTakesTheBetterForm) {
  const auto b = probio::gen_planted(3, 1, 0, 9);
  const QuarticPencil& q = b.pencil;
  const RecoveryContext ctx = RecoveryContext::build(q, false, true);
  const Vector x = oracle::null_vector(q.e);
  Vector z(12);
  z << x, Vector::Zero(3), q.b * x, q.d * x;
  const LsRecovery rec = recover_right_ls(z, HomogeneousEig::zero(), ctx, q);
  EXPECT_TRUE(rec.form == "zero_b" || rec.form == "zero_d");
  EXPECT_LE(eta(HomogeneousEig::zero(), rec.x, q), 1e3 * 12 * kEps);
  EXPECT_LE(oracle::angle(rec.x, x), 1e-8);
}

TEST(RecoverRightLs, NeedsTheFactorizations) {
  oracle::Rng r(10);
  const QuarticPencil q = oracle::random_quartic(r, 2);
  const RecoveryContext ctx = RecoveryContext::build(q, true, false);
  EXPECT_THROW(recover_right_ls(r.vec(8), HomogeneousEig::finite(1.0), ctx, q), Error);
}

struct Deflated {
  QuarticPencil q;
  LinearPencil lin;
  RankProfile rp;
  DeflationResult d;
};

Deflated deflated_planted(Index n, Index ke, Index ka, std::uint64_t seed) {
  Deflated out{probio::gen_planted(n, ke, ka, seed).pencil, {}, {}, {}};
  const auto strat = default_strategy(numkit::RankStrategy::Kind::norm_threshold, n);
  out.rp = analyze_ranks(out.q, strat);
  std::optional<SecondLevel> sl;
  if (out.rp.r_a < n || out.rp.r_e < n) sl = second_level(out.q, out.rp);
  out.lin = linearize(out.q);
  out.d = deflate(out.lin, out.q, out.rp, sl);
  return out;
}

TEST(Lift, RightAndLeftVectorsSolveTheFullLinearization) {
  const Deflated df = deflated_planted(5, 2, 0, 11);
  ASSERT_GT(df.d.zeros_deflated, 0);
  const GevpSolution g = solve_gevp(df.d.pencil);
  const Real na = oracle::norm2(df.lin.aa);
  const Real nb = oracle::norm2(df.lin.bb);
  const Real tol = 1e3 * static_cast<Real>(df.lin.size()) * kEps;
  for (std::size_t j = 0; j < g.eigs.size(); ++j) {
    const HomogeneousEig& h = g.eigs[j];
    const Real scale = std::abs(h.beta) * na + std::abs(h.alpha) * nb;
    const Vector z = lift_right(g.right_vecs.col(static_cast<Index>(j)), df.d);
    EXPECT_NEAR(z.norm(), 1.0, 1e2 * kEps);
    EXPECT_LE((h.beta * df.lin.aa * z - h.alpha * df.lin.bb * z).norm(), tol * scale);
    const LiftedLeft ll = lift_left(g.left_vecs.col(static_cast<Index>(j)), h, df.d);
    const Vector& w = ll.w;
    EXPECT_LE((h.beta * w.adjoint() * df.lin.aa - h.alpha * w.adjoint() * df.lin.bb).norm(), tol * scale * w.norm());
  }
  EXPECT_THROW(lift_right(Vector::Ones(3), df.d), Error);
}

TEST(NullspaceVectors, SpanTheNullSpaces) {
  oracle::Rng r(12);
  const Index n = 6;
  QuarticPencil q = oracle::random_quartic(r, n);
  // Rank-4 E and rank-5 A with dense null spaces.
  q.e = r.gaussian(n, 4) * r.gaussian(4, n);
  q.a = r.gaussian(n, 5) * r.gaussian(5, n);
  const RankProfile rp = analyze_ranks(q, default_strategy(numkit::RankStrategy::Kind::norm_threshold, n));
  ASSERT_EQ(rp.r_e, 4);
  ASSERT_EQ(rp.r_a, 5);
  for (const auto which : {NullClass::zero_class, NullClass::inf_class}) {
    const Matrix& m = which == NullClass::zero_class ? q.e : q.a;
    const Index k = which == NullClass::zero_class ? 2 : 1;
    const NullBasis nb = nullspace_vectors(rp, which);
    ASSERT_EQ(nb.right.cols(), k);
    ASSERT_EQ(nb.left.cols(), k);
    Eigen::JacobiSVD<Matrix> s(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    EXPECT_LE(oracle::subspace_angle(nb.right, s.matrixV().rightCols(k)), 1e-12);
    EXPECT_LE(oracle::subspace_angle(nb.left, s.matrixU().rightCols(k)), 1e-12);
    EXPECT_LE((m * nb.right).norm(), 1e-13 * m.norm());
    EXPECT_LE((nb.left.adjoint() * m).norm(), 1e-13 * m.norm());
  }
  const NullBasis none = nullspace_vectors(analyze_ranks(oracle::random_quartic(r, 3),
                                                         default_strategy(numkit::RankStrategy::Kind::norm_threshold, 3)),
                                           NullClass::zero_class);
  EXPECT_EQ(none.right.cols(), 0);
}

TEST(NullspaceVectors, PlantedColumnsGiveCoordinateVectors) {
  // Columns {j} of E are zero, so e_j spans null(E) exactly.
  const auto b = probio::gen_planted(5, 1, 0, 13);
  const RankProfile rp = analyze_ranks(b.pencil, default_strategy(numkit::RankStrategy::Kind::norm_threshold, 5));
  const NullBasis nb = nullspace_vectors(rp, NullClass::zero_class);
  ASSERT_EQ(nb.right.cols(), 1);
  EXPECT_LE((b.pencil.e * nb.right).norm(), 1e-14 * b.pencil.e.norm());
  Index nz = 0;
  for (Index i = 0; i < 5; ++i) nz += std::abs(nb.right(i, 0)) > 1e-14 ? 1 : 0;
  EXPECT_EQ(nz, 1);
}

TEST(DenseLeftVector, AnnihilatesTheEvaluatedMatrix) {
  oracle::Rng r(14);
  const QuarticPencil q = oracle::random_quartic(r, 3);
  const auto pairs = dense_pairs(q);
  const HomogeneousEig h = HomogeneousEig::finite(pairs.front().lambda);
  const Vector y = dense_left_vector(h, q);
  EXPECT_LE(eta_left(h, y, q), 1e3 * 12 * kEps);
}

TEST(RoundTrip, SolverVectorsHaveSmallBackwardErrors) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto b = probio::gen_planted(6, seed % 3, (seed + 1) % 3, 40 + seed);
    for (const auto mode : {EigvecMode::min_residual, EigvecMode::least_squares}) {
      SolveConfig cfg;
      cfg.eigvec_mode = mode;
      const SolveResult res = solve(b.pencil, cfg);
      ASSERT_EQ(res.solution.pairs.size(), 24u);
      for (const auto& p : res.solution.pairs) {
        EXPECT_NEAR(p.x.norm(), 1.0, 1e2 * kEps);
        EXPECT_LE(p.diag.eta_right, 1e-10) << b.name << " " << to_string(mode) << " " << p.right_method;
        EXPECT_NEAR(p.diag.eta_right, eta(p.eig, p.x, b.pencil), 1e-12);
      }
    }
  }
}

}  // namespace
