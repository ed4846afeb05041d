#pragma once

// The full pipeline: balance, scale, rank analysis, linearize, deflate, QZ,
// eigenvector recovery, undo the transformations, diagnostics.

#include <algorithm>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "quarteig/deflate.hpp"
#include "quarteig/diagnostics.hpp"
#include "quarteig/eigvec.hpp"
#include "quarteig/gevp.hpp"
#include "quarteig/pencil.hpp"
#include "quarteig/scaling.hpp"
#include "quarteig/solution.hpp"

namespace quarteig {

enum class EigvecMode : std::uint8_t { min_residual, least_squares };

struct SolveConfig {
  bool scale = true;
  bool balance = true;
  int balance_iters = 5;
  BalanceAggregate balance_aggregate = BalanceAggregate::sum;
  numkit::RankStrategy::Kind rank_strategy = numkit::RankStrategy::Kind::norm_threshold;
  std::optional<Real> tol;  // default: n*eps (norm) or sqrt(eps) (dropoff)
  bool deflate = true;
  EigvecMode eigvec_mode = EigvecMode::min_residual;
  Real ls_weight = 1.0;
  bool want_left = true;
  int threads = 1;

  void validate() const {
    if (balance_iters < 0) throw Error(ErrorCode::invalid_input, "balance iterations must be non-negative");
    if (tol && !(*tol > 0.0 && *tol < 1.0)) throw Error(ErrorCode::invalid_input, "tol must lie in (0, 1)");
    if (!(ls_weight > 0.0) || !std::isfinite(ls_weight)) throw Error(ErrorCode::invalid_input, "ls weight must be positive");
    if (threads < 1) throw Error(ErrorCode::invalid_input, "threads must be at least 1");
  }

  numkit::RankStrategy strategy(Index n) const {
    numkit::RankStrategy s = default_strategy(rank_strategy, n);
    if (tol) s.value = *tol;
    return s;
  }
};

inline const char* to_string(EigvecMode m) {
  return m == EigvecMode::min_residual ? "min_residual" : "least_squares";
}

struct SolveResult {
  EigenSolution solution;       // pairs sorted by |lambda|, diagnostics against the input
  SummaryReport summary;
  DeflationResult deflation;    // of the working problem
  RankProfile ranks;            // of the working problem
  std::optional<SecondLevel> second;
  ScalingRecord scaling;
  bool reversed = false;
  Index qz_size = 0;
  Real p_defect = 0.0;          // |P^* P - I|_F
  Real q_defect = 0.0;
  std::string backend_id;
  std::string norm_method;
  std::vector<std::string> warnings;
};

namespace detail {

inline Vector smallest_right_singular(const Matrix& m) {
  const numkit::SVDFactors f = numkit::svd(m);
  return f.v.col(m.cols() - 1);
}

inline Vector smallest_left_singular(const Matrix& m) {
  const numkit::SVDFactors f = numkit::svd(m);
  return f.u.col(m.rows() - 1);
}

template <typename F>
void parallel_for(Index count, int threads, F&& body) {
  const Index workers = std::min<Index>(std::max(threads, 1), std::max<Index>(count, 1));
  if (workers <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (Index i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

class Pipeline {
 public:
  Pipeline(const QuarticPencil& q, const SolveConfig& cfg) : q0_(q), cfg_(cfg) {}

  SolveResult run() {
    cfg_.validate();
    q0_.validate();
    if (q0_.n == 0) throw Error(ErrorCode::invalid_input, "empty problem");
    SolveResult res;
    prepare(res);
    compute_pairs(res);
    finish(res);
    return res;
  }

 private:
  void prepare(SolveResult& res) {
    QuarticPencil q = q0_;
    ScalingRecord bal;
    if (cfg_.balance) std::tie(q, bal) = balance(q, cfg_.balance_iters, cfg_.balance_aggregate);
    ScalingRecord sc;
    if (cfg_.scale) {
      std::tie(q, sc) = param_scale(q);
      if (sc.scale_skipped) res.warnings.push_back("parameter scaling skipped: A or E is zero");
    }
    res.scaling = compose(bal, sc);
    q.provenance = res.scaling;

    const numkit::RankStrategy strategy = cfg_.strategy(q.n);
    res.ranks = analyze_ranks(q, strategy);
    const Index n = q.n;
    if (res.ranks.r_a < n || res.ranks.r_e < n) res.second = second_level(q, res.ranks);
    if (cfg_.deflate) {
      const bool a_sing = res.ranks.r_a < n;
      const bool e_sing = res.ranks.r_e < n;
      res.reversed = (a_sing && !e_sing) ||
                     (a_sing && e_sing && res.second->r_phi < n && res.second->r_psi == n);
    }
    if (res.reversed) {
      q = reverse(q);
      res.ranks = analyze_ranks(q, strategy);
      res.second = second_level(q, res.ranks);
    }
    work_ = std::move(q);

    const LinearPencil lin = linearize(work_);
    if (cfg_.deflate) {
      res.deflation = deflate(lin, work_, res.ranks, res.second);
      if (!res.deflation.regular) res.warnings.push_back("deflated pencil may be singular (rank test failed)");
    } else {
      res.deflation = no_deflation(lin);
      res.warnings.push_back("deflation disabled: zero/infinite classes from backend thresholds only");
    }
    for (const auto* log : {&res.ranks.qr_a.log, &res.ranks.qr_e.log}) {
      if (log->ambiguous) res.warnings.push_back("rank decision without a clear gap (" + log->strategy + ")");
    }
    res.p_defect = unitarity_defect(res.deflation.p);
    res.q_defect = unitarity_defect(res.deflation.q);
  }

  EigenPair qz_pair(const GevpSolution& g, Index j, const DeflationResult& d, const RecoveryContext& ctx) const {
    EigenPair p;
    p.eig = g.eigs[static_cast<std::size_t>(j)];
    p.source = "qz";
    const Vector z = lift_right(g.right_vecs.col(j), d);
    const Index n = work_.n;
    switch (p.eig.cls) {
      case EigClass::finite: {
        if (cfg_.eigvec_mode == EigvecMode::least_squares) {
          const LsRecovery r = recover_right_ls(z, p.eig, ctx, work_, cfg_.ls_weight);
          p.x = r.x;
          p.right_method = "least_squares_" + r.form;
        } else {
          const RightRecovery r = recover_right(z, p.eig, ctx, work_);
          p.x = r.x;
          p.right_method = r.method;
          if (r.fallback) p.flags.emplace_back("right_fallback");
        }
        break;
      }
      case EigClass::zero: {
        if (cfg_.eigvec_mode == EigvecMode::least_squares) {
          const LsRecovery r = recover_right_ls(z, p.eig, ctx, work_, cfg_.ls_weight);
          p.x = r.x;
          p.right_method = "least_squares_" + r.form;
          break;
        }
        const ZeroRecovery r = recover_right_zero(z, work_);
        if (r.degenerate) {
          p.x = smallest_right_singular(work_.e);
          p.right_method = "dense_null_e";
          p.flags.emplace_back("degenerate_z1");
        } else {
          p.x = r.x;
          p.right_method = "z1";
        }
        break;
      }
      case EigClass::infinite: {
        const Vector z1 = z.head(n);
        const Real nz = z1.stableNorm();
        if (nz > static_cast<Real>(n) * kEps * z.norm()) {
          p.x = divided_real(z1, nz);
          p.right_method = "z1";
        } else {
          p.x = smallest_right_singular(work_.a);
          p.right_method = "dense_null_a";
          p.flags.emplace_back("degenerate_z1");
        }
        break;
      }
    }
    if (cfg_.want_left) {
      try {
        const LiftedLeft w = lift_left(g.left_vecs.col(j), p.eig, d);
        const LeftRecovery l = recover_left_min_residual(w.w, p.eig, work_, ctx.norms);
        if (l.degenerate) throw Error(ErrorCode::recovery_failure, "left blocks vanish");
        p.y = l.y;
        p.left_method = "w" + std::to_string(l.block + 1);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::recovery_failure) throw;
        p.y = dense_left_vector(p.eig, work_);
        p.left_method = "dense_svd";
        p.flags.emplace_back("left_dense_fallback");
      }
    }
    return p;
  }

  void deflated_pairs(const SolveResult& res, std::vector<EigenPair>& out) const {
    auto add = [&](Index count, NullClass which) {
      if (count == 0) return;
      NullBasis b = nullspace_vectors(res.ranks, which);
      const Matrix& coeff = which == NullClass::zero_class ? work_.e : work_.a;
      if (b.right.cols() == 0) {
        b.right = smallest_right_singular(coeff);
        b.left = smallest_left_singular(coeff);
      }
      for (Index i = 0; i < count; ++i) {
        EigenPair p;
        p.eig = which == NullClass::zero_class ? HomogeneousEig::zero() : HomogeneousEig::infinite();
        p.source = which == NullClass::zero_class ? "deflated_zero" : "deflated_infinite";
        p.x = b.right.col(i % b.right.cols());
        p.right_method = "null_basis";
        if (cfg_.want_left) {
          p.y = b.left.col(i % b.left.cols());
          p.left_method = "null_basis";
        }
        if (i >= b.right.cols()) p.flags.emplace_back("chain_member");
        out.push_back(std::move(p));
      }
    };
    add(res.deflation.zeros_deflated, NullClass::zero_class);
    add(res.deflation.infs_deflated, NullClass::inf_class);
  }

  void compute_pairs(SolveResult& res) {
    const DeflationResult& d = res.deflation;
    const GevpSolution g = solve_gevp(d.pencil, cfg_.want_left);
    res.backend_id = g.backend_id;
    res.qz_size = d.size();
    const RecoveryContext ctx = RecoveryContext::build(work_, res.ranks.r_e == work_.n,
                                                       cfg_.eigvec_mode == EigvecMode::least_squares);
    std::vector<EigenPair> qz(static_cast<std::size_t>(d.size()));
    parallel_for(d.size(), cfg_.threads, [&](Index j) { qz[static_cast<std::size_t>(j)] = qz_pair(g, j, d, ctx); });
    std::vector<EigenPair> pairs;
    pairs.reserve(static_cast<std::size_t>(4 * work_.n));
    deflated_pairs(res, pairs);
    for (auto& p : qz) pairs.push_back(std::move(p));
    res.solution.n = q0_.n;
    res.solution.pairs = std::move(pairs);
  }

  void finish(SolveResult& res) {
    if (res.reversed) {
      for (auto& p : res.solution.pairs) {
        p.eig = p.eig.reciprocal();
        if (p.source == "deflated_zero") {
          p.source = "deflated_infinite";
        } else if (p.source == "deflated_infinite") {
          p.source = "deflated_zero";
        }
      }
    }
    res.solution = descale(std::move(res.solution), res.scaling);
    const NormCache norms = make_norms(q0_);
    res.norm_method = norms.method;
    auto& pairs = res.solution.pairs;
    parallel_for(static_cast<Index>(pairs.size()), cfg_.threads, [&](Index i) {
      auto& p = pairs[static_cast<std::size_t>(i)];
      p.diag = diagnose(p, q0_, norms);
    });
    sort_by_modulus(res.solution);
    std::vector<PairDiagnostics> diags;
    diags.reserve(pairs.size());
    for (const auto& p : pairs) diags.push_back(p.diag);
    res.summary = summarize(diags);
  }

  const QuarticPencil& q0_;
  SolveConfig cfg_;
  QuarticPencil work_;
};

}  // namespace detail

inline SolveResult solve(const QuarticPencil& q, const SolveConfig& cfg = {}) {
  detail::Pipeline p(q, cfg);
  return p.run();
}

}  // namespace quarteig
