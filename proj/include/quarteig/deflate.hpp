#pragma once

// Structured deflation of zero and infinite eigenvalues from the 4n x 4n
// linearization.  All transformations are accumulated into P, Q with
// P * (aa0 - lambda bb0) * Q = [[F, X], [0, Y]], where F is the regular
// part handed to the generalized Schur backend and Y carries the deflated
// eigenvalues.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quarteig/numkit.hpp"
#include "quarteig/pencil.hpp"

namespace quarteig {

/// x * pi = q * r for a structured block matrix x.
struct StructuredFactors {
  Matrix q;
  Matrix r;
  Matrix pi;
};

struct RankProfile {
  Index n = 0;
  numkit::PivotedQR qr_a;
  numkit::PivotedQR qr_e;
  Index r_a = 0;
  Index r_e = 0;
  numkit::RankStrategy strategy;
  StructuredFactors m_factors;  // of [[A,0],[C,I]]
  StructuredFactors k_factors;  // of [[0,-I],[E,0]]
};

struct SecondLevel {
  Matrix phi;  // [Q_{A,2}^* B ; Rhat_A Pi_A^*]
  Matrix psi;  // [Q_{E,2}^* D ; Rhat_E Pi_E^*]
  numkit::PivotedQR qr_phi;
  numkit::PivotedQR qr_psi;
  Index r_phi = 0;
  Index r_psi = 0;
};

/// Default rank strategy parameter: n * eps for the norm threshold, sqrt(eps)
/// for the drop-off test.
inline numkit::RankStrategy default_strategy(numkit::RankStrategy::Kind kind, Index n) {
  if (kind == numkit::RankStrategy::Kind::dropoff) return numkit::RankStrategy::dropoff(std::sqrt(kEps));
  return numkit::RankStrategy::norm(static_cast<Real>(std::max<Index>(n, 1)) * kEps);
}

inline RankProfile analyze_ranks(const QuarticPencil& q, const numkit::RankStrategy& strategy) {
  const Index n = q.n;
  RankProfile rp;
  rp.n = n;
  rp.strategy = strategy;
  rp.qr_a = numkit::rrqr(q.a, strategy);
  rp.qr_e = numkit::rrqr(q.e, strategy);
  rp.r_a = rp.qr_a.rank;
  rp.r_e = rp.qr_e.rank;

  const Matrix id = Matrix::Identity(n, n);
  const Matrix zero = Matrix::Zero(n, n);
  const Matrix pa = rp.qr_a.perm_matrix();
  const Matrix pe = rp.qr_e.perm_matrix();

  auto& mf = rp.m_factors;
  mf.q.resize(2 * n, 2 * n);
  mf.q << zero, rp.qr_a.q, id, zero;
  mf.pi.resize(2 * n, 2 * n);
  mf.pi << zero, pa, id, zero;
  mf.r.resize(2 * n, 2 * n);
  mf.r << id, q.c * pa, zero, rp.qr_a.r;

  auto& kf = rp.k_factors;
  kf.q.resize(2 * n, 2 * n);
  kf.q << id, zero, zero, rp.qr_e.q;
  kf.pi.resize(2 * n, 2 * n);
  kf.pi << zero, pe, id, zero;
  kf.r.resize(2 * n, 2 * n);
  kf.r << -id, zero, zero, rp.qr_e.r;
  return rp;
}

inline SecondLevel second_level(const QuarticPencil& q, const RankProfile& rp) {
  const Index n = q.n;
  if (rp.r_a == n && rp.r_e == n) {
    throw Error(ErrorCode::invalid_input, "second-level analysis needs a rank deficient A or E");
  }
  SecondLevel sl;
  auto build = [n](const numkit::PivotedQR& qr, const Matrix& next) {
    const Index r = qr.rank;
    Matrix m(n, n);
    m.topRows(n - r) = qr.q.rightCols(n - r).adjoint() * next;
    m.bottomRows(r) = qr.r.topRows(r) * qr.perm_matrix().transpose();
    return m;
  };
  sl.phi = build(rp.qr_a, q.b);
  sl.psi = build(rp.qr_e, q.d);
  sl.qr_phi = numkit::rrqr(sl.phi, rp.strategy);
  sl.qr_psi = numkit::rrqr(sl.psi, rp.strategy);
  sl.r_phi = sl.qr_phi.rank;
  sl.r_psi = sl.qr_psi.rank;
  return sl;
}

enum class DeflateSide : std::uint8_t { zero, infinite };

struct DeflationStep {
  std::string kind;      // structured_zero, structured_infinite, staircase_zero, staircase_infinite, ...
  std::string test;      // the rank test that produced the count
  Index size_before = 0;
  Index size_after = 0;
  Index deflated = 0;
  bool known_block = false;
  bool regular = true;
  Real core_rcond = 1.0;  // reciprocal condition of the split-off diagonal block
  numkit::TruncationLog evidence;
};

struct DeflationResult {
  LinearPencil pencil;  // leading regular part F
  Matrix p;             // accumulated left transformation
  Matrix q;             // accumulated right transformation
  Matrix aa;            // P * aa0 * Q with exact zeros imposed
  Matrix bb;
  Index zeros_deflated = 0;
  Index infs_deflated = 0;
  std::string case_id;
  bool regular = true;
  bool budget_exhausted = false;
  Index final_rank_aa = 0;
  Index final_rank_bb = 0;
  std::vector<DeflationStep> steps;

  Index size() const { return pencil.size(); }
  Index full_size() const { return aa.rows(); }
};

/// One reduction step on an m x m pencil (left, right unitary, m x m).
struct StaircaseStep {
  LinearPencil pencil;  // reduced leading part, size m - deflated
  Matrix left;
  Matrix right;
  Index deflated = 0;
  bool regular = true;
  Real core_rcond = 1.0;
  numkit::TruncationLog evidence;
  Matrix aa_full;  // left * aa * right with exact zeros, m x m
  Matrix bb_full;
};

namespace detail {

// Splits k eigenvalues at zero (side zero) or infinity off the pencil
// (aa, bb).  The compressed matrix is aa for zeros and bb for infinities.
// left_in, if given, already compresses: its last k rows annihilate the
// compressed matrix.
inline StaircaseStep compress_step(const Matrix& aa, const Matrix& bb, DeflateSide side,
                                   std::optional<Index> known_block, const numkit::RankStrategy& strategy,
                                   const Matrix* left_in = nullptr) {
  const Index m = aa.rows();
  const Matrix& comp = side == DeflateSide::zero ? aa : bb;
  const Matrix& other = side == DeflateSide::zero ? bb : aa;
  StaircaseStep st;
  Matrix left;
  Index k = 0;
  if (left_in != nullptr) {
    if (!known_block) throw Error(ErrorCode::invalid_input, "a supplied compression needs a known block size");
    left = *left_in;
    k = *known_block;
    st.evidence.strategy = "structured";
    st.evidence.forced = true;
  } else {
    numkit::PivotedQR qr;
    if (known_block) {
      if (*known_block < 0 || *known_block > m) throw Error(ErrorCode::invalid_input, "known block out of range");
      qr = numkit::rrqr_fixed_rank(comp, m - *known_block);
    } else {
      qr = numkit::rrqr(comp, strategy);
    }
    left = qr.q.adjoint();
    k = m - qr.rank;
    st.evidence = qr.log;
  }
  if (k == 0) {
    st.pencil.aa = aa;
    st.pencil.bb = bb;
    st.aa_full = aa;
    st.bb_full = bb;
    st.left = Matrix::Identity(m, m);
    st.right = Matrix::Identity(m, m);
    return st;
  }
  const Index r = m - k;
  const Matrix n2 = (left.bottomRows(k) * other).eval();
  numkit::URVFactors urv = numkit::urv_fixed_rank(n2, k);
  {
    numkit::TruncationLog scratch;
    const Index numerical = numkit::detail::decide_rank(urv.log.diag, n2.norm(), strategy, scratch);
    st.regular = numerical == k;
  }
  // [R2 0] -> [0 R2]: move the first k columns of V2 to the end.
  Matrix right(m, m);
  right.rightCols(k) = urv.v.leftCols(k);
  right.leftCols(r) = urv.v.rightCols(r);
  left.bottomRows(k) = (urv.u.adjoint() * left.bottomRows(k)).eval();

  Matrix a_new = left * aa * right;
  Matrix b_new = left * bb * right;
  Matrix& c_new = side == DeflateSide::zero ? a_new : b_new;
  Matrix& o_new = side == DeflateSide::zero ? b_new : a_new;
  c_new.bottomRows(k).setZero();
  o_new.bottomLeftCorner(k, r).setZero();
  const numkit::SVDFactors sv = numkit::svd(urv.r);
  st.core_rcond = sv.sigma.size() > 0 && sv.sigma(0) > 0.0 ? sv.sigma(sv.sigma.size() - 1) / sv.sigma(0) : 0.0;

  st.pencil.aa = a_new.topLeftCorner(r, r);
  st.pencil.bb = b_new.topLeftCorner(r, r);
  st.aa_full = std::move(a_new);
  st.bb_full = std::move(b_new);
  st.left = std::move(left);
  st.right = std::move(right);
  st.deflated = k;
  return st;
}

struct Frame {
  Matrix aa, bb, p, q;
  Index m = 0;
};

// Applies an m x m step (left, right) to the active part of the frame and
// shrinks it to new_m.  Trailing rows keep exact zeros in the leading columns.
inline void apply_step(Frame& f, const StaircaseStep& st) {
  const Index m = f.m;
  const Index total = f.aa.rows();
  const Index new_m = m - st.deflated;
  if (st.deflated == 0) return;
  f.aa.topLeftCorner(m, m) = st.aa_full;
  f.bb.topLeftCorner(m, m) = st.bb_full;
  if (total > m) {
    f.aa.topRightCorner(m, total - m) = (st.left * f.aa.topRightCorner(m, total - m)).eval();
    f.bb.topRightCorner(m, total - m) = (st.left * f.bb.topRightCorner(m, total - m)).eval();
  }
  f.p.topRows(m) = (st.left * f.p.topRows(m)).eval();
  f.q.leftCols(m) = (f.q.leftCols(m) * st.right).eval();
  f.m = new_m;
}

inline void zero_trailing_of_compressed(Frame& f, Index new_m, Index old_m, DeflateSide side) {
  Matrix& c = side == DeflateSide::zero ? f.aa : f.bb;
  c.block(new_m, 0, old_m - new_m, old_m).setZero();
}

}  // namespace detail

/// One generic staircase step on p: deflates the zeros of p (side zero) or
/// its infinities (side infinite).  With known_block the rank decision is
/// skipped and exactly that many eigenvalues are split off.
inline StaircaseStep staircase_step(const LinearPencil& p, std::optional<Index> known_block,
                                    const numkit::RankStrategy& strategy, DeflateSide side = DeflateSide::zero) {
  if (p.aa.rows() != p.aa.cols() || p.bb.rows() != p.bb.cols() || p.aa.rows() != p.bb.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "staircase_step needs a square pencil");
  }
  StaircaseStep st = detail::compress_step(p.aa, p.bb, side, known_block, strategy);
  st.pencil.block_map.structured = false;
  st.pencil.block_map.block = p.block_map.block;
  st.pencil.block_map.origin = "staircase";
  return st;
}

struct DeflateOptions {
  Index step_budget = -1;  // default 4n
};

namespace detail {

class Deflator {
 public:
  Deflator(const LinearPencil& lin, const QuarticPencil& q, const RankProfile& rp, const SecondLevel* sl,
           const DeflateOptions& opt)
      : q_(q), rp_(rp), sl_(sl), n_(q.n) {
    const Index total = lin.size();
    f_.aa = lin.aa;
    f_.bb = lin.bb;
    f_.p = Matrix::Identity(total, total);
    f_.q = Matrix::Identity(total, total);
    f_.m = total;
    budget_ = opt.step_budget >= 0 ? opt.step_budget : 4 * n_;
  }

  DeflationResult run() {
    const Index n = n_;
    const bool a_full = rp_.r_a == n;
    const bool e_full = rp_.r_e == n;
    if (a_full && e_full) {
      case_regular();
      res_.case_id = "i";
    } else {
      if (sl_ == nullptr) throw Error(ErrorCode::invalid_input, "singular A or E requires the second-level analysis");
      if (!e_full) zero_chain();
      if (!a_full) infinite_chain();
      if (a_full) {
        res_.case_id = "ii";
      } else if (e_full) {
        res_.case_id = "ii_infinite";
      } else if (sl_->r_phi == n && sl_->r_psi == n) {
        res_.case_id = "iii";
      } else {
        res_.case_id = "iv";
      }
    }
    finish();
    return std::move(res_);
  }

 private:
  void record(const StaircaseStep& st, std::string kind, std::string test, bool known, DeflateSide side) {
    DeflationStep s;
    s.kind = std::move(kind);
    s.test = std::move(test);
    s.size_before = f_.m + st.deflated;
    s.size_after = f_.m;
    s.deflated = st.deflated;
    s.known_block = known;
    s.regular = st.regular;
    s.core_rcond = st.core_rcond;
    s.evidence = st.evidence;
    if (!st.regular) res_.regular = false;
    if (side == DeflateSide::zero) {
      res_.zeros_deflated += st.deflated;
    } else {
      res_.infs_deflated += st.deflated;
    }
    res_.steps.push_back(std::move(s));
  }

  // Both A and E nonsingular: bring bb to upper triangular form with the
  // structured factorization of [[A,0],[C,I]]; nothing is deflated.
  void case_regular() {
    const Index n = n_;
    const Matrix& qa = rp_.qr_a.q;
    const Matrix pa = rp_.qr_a.perm_matrix();
    const Matrix id = Matrix::Identity(n, n);
    Matrix left = Matrix::Zero(4 * n, 4 * n);
    left.topLeftCorner(2 * n, 2 * n) = rp_.m_factors.q.adjoint();
    left.bottomRightCorner(2 * n, 2 * n).setIdentity();
    Matrix right = Matrix::Zero(4 * n, 4 * n);
    right.topLeftCorner(2 * n, 2 * n) = rp_.m_factors.pi;
    right.bottomRightCorner(2 * n, 2 * n).setIdentity();

    Matrix aa = Matrix::Zero(4 * n, 4 * n);
    aa.block(0, n, n, n) = q_.d * pa;
    aa.block(0, 3 * n, n, n) = -id;
    aa.block(n, n, n, n) = qa.adjoint() * q_.b * pa;
    aa.block(n, 2 * n, n, n) = -qa.adjoint();
    aa.block(2 * n, 0, n, n) = -id;
    aa.block(3 * n, n, n, n) = q_.e * pa;
    Matrix bb = Matrix::Zero(4 * n, 4 * n);
    bb.block(0, 0, n, n) = -id;
    bb.block(0, n, n, n) = -q_.c * pa;
    bb.block(n, n, n, n) = -rp_.qr_a.r;
    bb.block(2 * n, 2 * n, n, n) = -id;
    bb.block(3 * n, 3 * n, n, n) = -id;
    f_.aa = std::move(aa);
    f_.bb = std::move(bb);
    f_.p = std::move(left);
    f_.q = std::move(right);
    DeflationStep s;
    s.kind = "structured_triangularize";
    s.test = "rank(A) = rank(E) = n";
    s.size_before = s.size_after = 4 * n;
    s.evidence = rp_.qr_a.log;
    res_.steps.push_back(std::move(s));
  }

  // First zero step: the last n - r_E rows of Q_E^* E vanish.
  void structured_zero_first() {
    const Index n = n_;
    const Index re = rp_.r_e;
    const Matrix& qe = rp_.qr_e.q;
    const Matrix pe_t = rp_.qr_e.perm_matrix().transpose();
    const Matrix id = Matrix::Identity(n, n);
    Matrix left = Matrix::Identity(4 * n, 4 * n);
    left.block(n, n, n, n) = qe.adjoint();
    left.block(3 * n, 3 * n, n, n) = qe.adjoint();
    Matrix right = Matrix::Identity(4 * n, 4 * n);
    right.block(3 * n, 3 * n, n, n) = qe;

    Matrix aa = Matrix::Zero(4 * n, 4 * n);
    aa.block(0, 0, n, n) = q_.b;
    aa.block(0, 2 * n, n, n) = -id;
    aa.block(n, 0, n, n) = qe.adjoint() * q_.d;
    aa.block(n, 3 * n, n, n) = -id;
    aa.block(2 * n, n, n, n) = -id;
    aa.block(3 * n, 0, re, n) = rp_.qr_e.r.topRows(re) * pe_t;
    Matrix bb = Matrix::Zero(4 * n, 4 * n);
    bb.block(0, 0, n, n) = -q_.a;
    bb.block(n, 0, n, n) = -qe.adjoint() * q_.c;
    bb.block(n, n, n, n) = -qe.adjoint();
    bb.block(2 * n, 2 * n, n, n) = -id;
    bb.block(3 * n, 3 * n, n, n) = -id;
    f_.aa = std::move(aa);
    f_.bb = std::move(bb);
    f_.p = std::move(left);
    f_.q = std::move(right);
    f_.m = 3 * n + re;

    DeflationStep s;
    s.kind = "structured_zero";
    s.test = "rank(E)";
    s.size_before = 4 * n;
    s.size_after = f_.m;
    s.deflated = n - re;
    s.evidence = rp_.qr_e.log;
    res_.zeros_deflated += n - re;
    res_.steps.push_back(std::move(s));
  }

  // Second zero step: rows [Q_{E,2}^* D ; Rhat_E Pi_E^*] = Psi are moved to the
  // bottom and compressed with the QR factor of Psi.
  void structured_zero_second() {
    const Index n = n_;
    const Index re = rp_.r_e;
    const Index m = f_.m;  // 3n + r_E
    const Index k = n - sl_->r_psi;
    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(m));
    for (Index i = 0; i < n + re; ++i) order.push_back(i);
    for (Index i = 2 * n; i < 3 * n; ++i) order.push_back(i);
    for (Index i = n + re; i < 2 * n; ++i) order.push_back(i);
    for (Index i = 3 * n; i < 3 * n + re; ++i) order.push_back(i);
    Matrix left = Matrix::Zero(m, m);
    for (Index i = 0; i < m; ++i) left(i, order[static_cast<std::size_t>(i)]) = 1.0;
    left.bottomRows(n) = (sl_->qr_psi.q.adjoint() * left.bottomRows(n)).eval();
    const auto st = compress_step(f_.aa.topLeftCorner(m, m), f_.bb.topLeftCorner(m, m), DeflateSide::zero, k,
                                  rp_.strategy, &left);
    apply_step(f_, st);
    zero_trailing_of_compressed(f_, f_.m, m, DeflateSide::zero);
    StaircaseStep logged = st;
    logged.evidence = sl_->qr_psi.log;
    record(logged, "structured_zero", "rank(Psi)", true, DeflateSide::zero);
  }

  // Infinite step using that the first n active rows of bb are still
  // (-A, 0, 0, 0) up to a column transformation.
  void structured_infinite_first() {
    const Index n = n_;
    const Index ra = rp_.r_a;
    const Index m = f_.m;
    const Index k = n - ra;
    Matrix left = Matrix::Zero(m, m);
    const Matrix qa_h = rp_.qr_a.q.adjoint();
    // rows: Q_A^* rows 0..r_A, untouched rows n..m, Q_A^* rows r_A..n.
    left.topLeftCorner(ra, n) = qa_h.topRows(ra);
    for (Index i = n; i < m; ++i) left(ra + i - n, i) = 1.0;
    left.bottomLeftCorner(k, n) = qa_h.bottomRows(k);
    const auto st = compress_step(f_.aa.topLeftCorner(m, m), f_.bb.topLeftCorner(m, m), DeflateSide::infinite, k,
                                  rp_.strategy, &left);
    apply_step(f_, st);
    zero_trailing_of_compressed(f_, f_.m, m, DeflateSide::infinite);
    StaircaseStep logged = st;
    logged.evidence = rp_.qr_a.log;
    record(logged, "structured_infinite", "rank(A)", true, DeflateSide::infinite);
  }

  // A step that would deflate but exceeds the budget is not applied; the
  // result is then flagged as possibly non-regular.
  void generic(DeflateSide side, std::optional<Index> known, const std::string& test) {
    const Index m = f_.m;
    const auto st =
        compress_step(f_.aa.topLeftCorner(m, m), f_.bb.topLeftCorner(m, m), side, known, rp_.strategy);
    if (st.deflated == 0) return;
    if (budget_ <= 0) {
      res_.regular = false;
      res_.budget_exhausted = true;
      return;
    }
    --budget_;
    apply_step(f_, st);
    zero_trailing_of_compressed(f_, f_.m, m, side);
    record(st, side == DeflateSide::zero ? "staircase_zero" : "staircase_infinite", test, known.has_value(), side);
    rows_intact_ = false;
  }

  void loop(DeflateSide side) {
    while (f_.m > 0) {
      const Index before = f_.m;
      generic(side, std::nullopt, side == DeflateSide::zero ? "rank(active aa)" : "rank(active bb)");
      if (f_.m == before) break;
    }
  }

  void zero_chain() {
    structured_zero_first();
    if (sl_->r_psi < n_) {
      structured_zero_second();
      loop(DeflateSide::zero);
    }
  }

  void infinite_chain() {
    if (rows_intact_) {
      structured_infinite_first();
    } else {
      generic(DeflateSide::infinite, n_ - rp_.r_a, "rank(A)");
    }
    if (sl_->r_phi < n_) {
      generic(DeflateSide::infinite, n_ - sl_->r_phi, "rank(Phi)");
      loop(DeflateSide::infinite);
    }
  }

  void finish() {
    const Index m = f_.m;
    res_.pencil.aa = f_.aa.topLeftCorner(m, m);
    res_.pencil.bb = f_.bb.topLeftCorner(m, m);
    res_.pencil.block_map.block = n_;
    res_.pencil.block_map.structured = false;
    res_.pencil.block_map.origin = "deflated(" + res_.case_id + ")";
    if (m > 0) {
      res_.final_rank_aa = numkit::rrqr(res_.pencil.aa, rp_.strategy, false).rank;
      res_.final_rank_bb = numkit::rrqr(res_.pencil.bb, rp_.strategy, false).rank;
      if (res_.final_rank_bb < m && res_.final_rank_aa < m) res_.regular = false;
    }
    res_.p = std::move(f_.p);
    res_.q = std::move(f_.q);
    res_.aa = std::move(f_.aa);
    res_.bb = std::move(f_.bb);
  }

  const QuarticPencil& q_;
  const RankProfile& rp_;
  const SecondLevel* sl_;
  Index n_;
  Frame f_;
  Index budget_ = 0;
  bool rows_intact_ = true;
  DeflationResult res_;
};

}  // namespace detail

/// Runs the deflation decision tree on lin = linearize(q).  sl is required
/// when A or E is rank deficient.
inline DeflationResult deflate(const LinearPencil& lin, const QuarticPencil& q, const RankProfile& rp,
                               const std::optional<SecondLevel>& sl, const DeflateOptions& opt = {}) {
  if (lin.size() != 4 * q.n || rp.n != q.n) throw Error(ErrorCode::invalid_input, "inconsistent deflation input");
  if (rp.qr_a.r.rows() != q.n || rp.qr_e.r.rows() != q.n) {
    throw Error(ErrorCode::invalid_input, "rank profile does not match the quartic");
  }
  detail::Deflator d(lin, q, rp, sl ? &*sl : nullptr, opt);
  return d.run();
}

/// Identity "deflation": the full linearization goes to the backend.
inline DeflationResult no_deflation(const LinearPencil& lin) {
  DeflationResult r;
  const Index total = lin.size();
  r.pencil = lin;
  r.p = Matrix::Identity(total, total);
  r.q = Matrix::Identity(total, total);
  r.aa = lin.aa;
  r.bb = lin.bb;
  r.case_id = "off";
  r.final_rank_aa = r.final_rank_bb = total;
  return r;
}

}  // namespace quarteig
