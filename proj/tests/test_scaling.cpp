#include <gtest/gtest.h>

#include "oracles.hpp"
#include "quarteig/scaling.hpp"
#include "quarteig/solver.hpp"

namespace {

using namespace quarteig;

QuarticPencil scalar_quartic(Complex a, Complex b, Complex c, Complex d, Complex e) {
  auto s = [](Complex v) { return Matrix::Constant(1, 1, v); };
  return {s(a), s(b), s(c), s(d), s(e)};
}

std::vector<Complex> finite_of(const SolveResult& r) {
  std::vector<Complex> v;
  for (const auto& p : r.solution.pairs) {
    if (p.eig.cls == EigClass::finite) v.push_back(p.eig.lambda());
  }
  return v;
}

TEST(ParamScale, SixteenToOne) {
  const auto [s, rec] = param_scale(scalar_quartic(16, 0, 0, 0, 1));
  EXPECT_DOUBLE_EQ(rec.gamma, 0.5);
  EXPECT_DOUBLE_EQ(rec.theta, 4.0);
  EXPECT_FALSE(rec.scale_skipped);
  EXPECT_DOUBLE_EQ(s.e(0, 0).real(), 4.0);
  EXPECT_DOUBLE_EQ(s.a(0, 0).real(), 4.0);
}

TEST(ParamScale, UnitCoefficients) {
  const auto [s, rec] = param_scale(scalar_quartic(1, 0, 0, 0, 1));
  EXPECT_DOUBLE_EQ(rec.gamma, 1.0);
  EXPECT_DOUBLE_EQ(rec.theta, 4.0);
  (void)s;
}

TEST(ParamScale, ZeroLeadingCoefficientSkips) {
  oracle::Rng r(1);
  QuarticPencil q = oracle::random_quartic(r, 3);
  q.a.setZero();
  const auto [s, rec] = param_scale(q);
  EXPECT_TRUE(rec.scale_skipped);
  EXPECT_EQ(rec.gamma, 1.0);
  EXPECT_EQ(rec.theta, 1.0);
  EXPECT_EQ(s.b, q.b);
}

TEST(ParamScale, UnitRootsSurviveArbitraryScaling) {
  // nu-problem of lambda^4 = 1 under lambda = gamma nu, multiplied by theta.
  for (const auto& [g, theta] : std::vector<std::pair<Real, Real>>{{0.37, 2.5}, {3.0, 0.01}, {1.0, 4.0}}) {
    const QuarticPencil nu = scalar_quartic(theta * std::pow(g, 4), 0, 0, 0, -theta);
    SolveConfig cfg;
    cfg.scale = false;
    cfg.balance = false;
    SolveResult r = solve(nu, cfg);
    ScalingRecord rec;
    rec.gamma = g;
    rec.theta = theta;
    const EigenSolution sol = descale(r.solution, rec);
    std::vector<Complex> got;
    for (const auto& p : sol.pairs) got.push_back(p.eig.lambda());
    EXPECT_LE(oracle::match_error(got, {1.0, -1.0, Complex(0, 1), Complex(0, -1)}), 10 * kEps) << g;
  }
  const SolveResult direct = solve(scalar_quartic(1, 0, 0, 0, -1));
  EXPECT_LE(oracle::match_error(finite_of(direct), {1.0, -1.0, Complex(0, 1), Complex(0, -1)}), 10 * kEps);
}

TEST(Balance, EquilibratedInputIsAFixedPoint) {
  const Matrix ones = Matrix::Ones(3, 3);
  const QuarticPencil q(ones, ones, ones, ones, ones);
  const auto [b, rec] = balance(q, 5);
  EXPECT_EQ(rec.dl.size(), 0);
  EXPECT_EQ(rec.dr.size(), 0);
  EXPECT_TRUE(rec.is_identity());
  EXPECT_EQ(b.a, q.a);
}

TEST(Balance, GradedRowsAreEquilibrated) {
  oracle::Rng r(2);
  const Index n = 12;
  RealVector g(n);
  for (Index i = 0; i < n; ++i) g(i) = std::ldexp(1.0, static_cast<int>(i + 1));
  QuarticPencil q = oracle::random_quartic(r, n);
  for (int k = 0; k <= 4; ++k) q.coeff(k) = g.cast<Complex>().asDiagonal() * q.coeff(k);
  auto row_spread = [](const QuarticPencil& p) {
    const Eigen::MatrixXd s = detail::balance_weights(p);
    return detail::spread_of(s.rowwise().sum());
  };
  const auto [b, rec] = balance(q, 5);
  const Real before = row_spread(q);
  const Real after = row_spread(b);
  EXPECT_GE(before / after, std::pow(2.0, static_cast<Real>(n) / 2.0)) << before << " -> " << after;
  EXPECT_LE(balance_spread(b), balance_spread(q));
}

TEST(Balance, FactorsArePowersOfTwoAndExactlyInvertible) {
  oracle::Rng r(3);
  QuarticPencil q = oracle::random_quartic(r, 6);
  for (int k = 0; k <= 4; ++k) q.coeff(k).row(2) *= 1e6;
  q.c.col(4) *= 1e-5;
  const auto [b, rec] = balance(q, 5);
  ASSERT_EQ(rec.dl.size(), 6);
  for (Index i = 0; i < 6; ++i) {
    int e = 0;
    EXPECT_EQ(std::frexp(rec.dl(i), &e), 0.5);
    EXPECT_EQ(std::frexp(rec.dr(i), &e), 0.5);
  }
  const QuarticPencil back =
      apply_diagonal_scaling(b, rec.dl.cwiseInverse(), rec.dr.cwiseInverse());
  for (int k = 0; k <= 4; ++k) EXPECT_EQ(back.coeff(k), q.coeff(k));
  EXPECT_LE(balance_spread(b), balance_spread(q));
}

TEST(Balance, SpreadNeverIncreases) {
  oracle::Rng r(4);
  for (int trial = 0; trial < 20; ++trial) {
    QuarticPencil q = oracle::random_quartic(r, r.integer(1, 7));
    q.a.row(0) *= r.uniform(1e-4, 1e4);
    for (auto agg : {BalanceAggregate::sum, BalanceAggregate::max}) {
      const auto [b, rec] = balance(q, r.integer(0, 6), agg);
      EXPECT_LE(balance_spread(b, agg), balance_spread(q, agg));
    }
  }
}

TEST(Balance, EigenvaluesAreInvariant) {
  oracle::Rng r(5);
  for (int trial = 0; trial < 5; ++trial) {
    QuarticPencil q = oracle::random_quartic(r, 4);
    for (int k = 0; k <= 4; ++k) q.coeff(k).row(1) *= 300.0;
    q.e.col(3) *= 1e-3;
    const auto [b, rec] = balance(q, 5);
    const auto s0 = oracle::dense_quartic_spectrum(q);
    const auto s1 = oracle::dense_quartic_spectrum(b);
    if (oracle::min_relative_gap(s0.finite) < 1e-4) continue;
    EXPECT_LE(oracle::match_error(s1.finite, s0.finite), 1e-8);
  }
}

TEST(Descale, IdentityRecordIsBitExact) {
  oracle::Rng r(6);
  const QuarticPencil q = oracle::random_quartic(r, 3);
  SolveConfig cfg;
  cfg.scale = false;
  cfg.balance = false;
  const SolveResult res = solve(q, cfg);
  const EigenSolution back = descale(res.solution, ScalingRecord{});
  ASSERT_EQ(back.pairs.size(), res.solution.pairs.size());
  for (std::size_t i = 0; i < back.pairs.size(); ++i) {
    EXPECT_EQ(back.pairs[i].eig.alpha, res.solution.pairs[i].eig.alpha);
    EXPECT_EQ(back.pairs[i].eig.beta, res.solution.pairs[i].eig.beta);
    EXPECT_EQ(back.pairs[i].x, res.solution.pairs[i].x);
    EXPECT_EQ(back.pairs[i].y, res.solution.pairs[i].y);
  }
}

TEST(Descale, GammaMapsNuToLambda) {
  EigenSolution sol;
  sol.n = 1;
  EigenPair p;
  p.eig = HomogeneousEig::finite(2.0);
  p.x = Vector::Ones(1);
  sol.pairs.push_back(p);
  EigenPair inf;
  inf.eig = HomogeneousEig::infinite();
  inf.x = Vector::Ones(1);
  sol.pairs.push_back(inf);
  ScalingRecord rec;
  rec.gamma = 0.5;
  rec.theta = 3.0;
  const EigenSolution out = descale(sol, rec);
  EXPECT_NEAR(std::abs(out.pairs[0].eig.lambda() - 1.0), 0.0, 2 * kEps);
  EXPECT_EQ(out.pairs[1].eig.cls, EigClass::infinite);
  EXPECT_EQ(out.pairs[1].eig.beta, 0.0);
}

TEST(Descale, VectorsAreRescaledAndNormalized) {
  EigenSolution sol;
  EigenPair p;
  p.eig = HomogeneousEig::finite(1.0);
  p.x = Vector::Ones(2) / std::sqrt(2.0);
  p.y = Vector::Ones(2) / std::sqrt(2.0);
  sol.pairs.push_back(p);
  ScalingRecord rec;
  rec.dl = RealVector::Constant(2, 1.0);
  rec.dl(1) = 4.0;
  rec.dr = RealVector::Constant(2, 2.0);
  const EigenSolution out = descale(sol, rec);
  EXPECT_NEAR(out.pairs[0].x.norm(), 1.0, 2 * kEps);
  EXPECT_NEAR(std::abs(out.pairs[0].x(0) - out.pairs[0].x(1)), 0.0, 2 * kEps);
  EXPECT_NEAR(std::abs(out.pairs[0].y(1) / out.pairs[0].y(0)), 4.0, 8 * kEps);
}

TEST(Descale, ClassesSurviveScalingRoundTrip) {
  oracle::Rng r(7);
  for (int trial = 0; trial < 5; ++trial) {
    QuarticPencil q = oracle::random_quartic(r, 4);
    q.e.col(1).setZero();
    q.a.col(2).setZero();
    SolveConfig on;
    SolveConfig off;
    off.scale = false;
    off.balance = false;
    const SolveResult a = solve(q, on);
    const SolveResult b = solve(q, off);
    EXPECT_EQ(a.summary.zero, b.summary.zero);
    EXPECT_EQ(a.summary.infinite, b.summary.infinite);
    EXPECT_EQ(a.summary.finite, b.summary.finite);
  }
}

TEST(Descale, ScaledSolveMatchesDenseUnscaledOracle) {
  oracle::Rng r(8);
  int checked = 0;
  for (int trial = 0; trial < 20 && checked < 8; ++trial) {
    QuarticPencil q = oracle::random_quartic(r, r.integer(2, 5));
    q.a *= 1e3;
    q.e *= 1e-2;
    const auto ref = oracle::dense_quartic_spectrum(q);
    if (ref.zeros + ref.infinities != 0 || oracle::min_relative_gap(ref.finite) < 1e-4) continue;
    ++checked;
    SolveConfig cfg;
    cfg.balance = false;
    const SolveResult res = solve(q, cfg);
    EXPECT_GT(res.scaling.gamma, 0.0);
    EXPECT_NE(res.scaling.gamma, 1.0);
    EXPECT_LE(oracle::match_error(finite_of(res), ref.finite), 1e-8);
  }
  EXPECT_GE(checked, 5);
}

}  // namespace
