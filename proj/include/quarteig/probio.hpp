#pragma once

// Matrix Market I/O for coefficient quintuples, synthetic problem generators
// and JSON/CSV reports.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "quarteig/numkit.hpp"
#include "quarteig/pencil.hpp"
#include "quarteig/solver.hpp"

namespace quarteig::probio {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Verifiable claims about a problem.  The solver never reads these.
struct Expected {
  std::string provenance;
  std::optional<Index> zeros;
  std::optional<Index> infinities;
  bool lower_bound = false;  // counts are lower bounds
  std::vector<Complex> eigenvalues;
};

struct ProblemBundle {
  std::string name;
  QuarticPencil pencil;
  std::optional<Expected> expected;
};

inline constexpr std::array<const char*, 5> kCoeffFiles = {"A.mtx", "B.mtx", "C.mtx", "D.mtx", "E.mtx"};

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] inline void malformed(const fs::path& p, const std::string& why) {
  throw Error(ErrorCode::malformed_file, p.filename().string() + ": " + why);
}

// Next non-comment, non-blank line.
inline bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '%') continue;
    return true;
  }
  return false;
}

inline void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_failure, "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::io_failure, "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::io_failure, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string format_real(Real v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

/// Reads a dense matrix from a Matrix Market file (coordinate or array,
/// real/integer/complex, general symmetry).
inline Matrix read_matrix_market(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::missing_file, "missing file " + path.string());
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header)) detail::malformed(path, "empty file");
  std::istringstream hs(header);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") detail::malformed(path, "missing %%MatrixMarket banner");
  object = detail::lower(object);
  format = detail::lower(format);
  field = detail::lower(field);
  symmetry = detail::lower(symmetry);
  if (object != "matrix") detail::malformed(path, "object must be 'matrix'");
  if (format != "coordinate" && format != "array") detail::malformed(path, "format must be coordinate or array");
  if (field != "real" && field != "complex" && field != "integer" && field != "double") {
    detail::malformed(path, "unsupported field '" + field + "'");
  }
  if (symmetry != "general") detail::malformed(path, "only general symmetry is supported");
  const bool cplx = field == "complex";

  std::string line;
  if (!detail::next_data_line(in, line)) detail::malformed(path, "missing size line");
  std::istringstream ss(line);
  long long rows = -1, cols = -1, nnz = -1;
  ss >> rows >> cols;
  if (format == "coordinate") ss >> nnz;
  if (ss.fail() || rows < 0 || cols < 0 || (format == "coordinate" && nnz < 0)) {
    detail::malformed(path, "bad size line");
  }
  Matrix m = Matrix::Zero(rows, cols);
  auto read_value = [&](std::istringstream& es) {
    Real re = 0.0, im = 0.0;
    es >> re;
    if (cplx) es >> im;
    if (es.fail()) detail::malformed(path, "bad entry '" + line + "'");
    return Complex(re, im);
  };
  if (format == "coordinate") {
    for (long long k = 0; k < nnz; ++k) {
      if (!detail::next_data_line(in, line)) detail::malformed(path, "fewer entries than declared");
      std::istringstream es(line);
      long long i = 0, j = 0;
      es >> i >> j;
      if (es.fail() || i < 1 || j < 1 || i > rows || j > cols) detail::malformed(path, "bad index in '" + line + "'");
      m(i - 1, j - 1) += read_value(es);
    }
  } else {
    for (long long j = 0; j < cols; ++j) {
      for (long long i = 0; i < rows; ++i) {
        if (!detail::next_data_line(in, line)) detail::malformed(path, "fewer entries than declared");
        std::istringstream es(line);
        m(i, j) = read_value(es);
      }
    }
  }
  if (!all_finite(m)) detail::malformed(path, "non-finite entry");
  return m;
}

/// Array format with 17 significant digits; "real" when every entry is real.
inline void write_matrix_market(const fs::path& path, const Matrix& m) {
  bool is_real = true;
  for (Index j = 0; j < m.cols() && is_real; ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (m(i, j).imag() != 0.0) {
        is_real = false;
        break;
      }
    }
  }
  std::ostringstream os;
  os << "%%MatrixMarket matrix array " << (is_real ? "real" : "complex") << " general\n";
  os << m.rows() << ' ' << m.cols() << '\n';
  os << std::setprecision(17);
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      os << m(i, j).real();
      if (!is_real) os << ' ' << m(i, j).imag();
      os << '\n';
    }
  }
  detail::atomic_write(path, os.str());
}

inline json expected_to_json(const Expected& e) {
  json j;
  j["provenance"] = e.provenance;
  if (e.zeros) j["zeros"] = *e.zeros;
  if (e.infinities) j["infinities"] = *e.infinities;
  j["lower_bound"] = e.lower_bound;
  json ev = json::array();
  for (const auto& c : e.eigenvalues) ev.push_back({c.real(), c.imag()});
  j["eigenvalues"] = ev;
  return j;
}

inline Expected expected_from_json(const json& j) {
  Expected e;
  e.provenance = j.value("provenance", "");
  if (j.contains("zeros")) e.zeros = j.at("zeros").get<Index>();
  if (j.contains("infinities")) e.infinities = j.at("infinities").get<Index>();
  e.lower_bound = j.value("lower_bound", false);
  if (j.contains("eigenvalues")) {
    for (const auto& c : j.at("eigenvalues")) e.eigenvalues.emplace_back(c.at(0).get<Real>(), c.at(1).get<Real>());
  }
  return e;
}

inline ProblemBundle read_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::missing_file, "bundle directory not found: " + dir.string());
  std::array<Matrix, 5> m;
  for (std::size_t k = 0; k < 5; ++k) {
    const fs::path p = dir / kCoeffFiles[k];
    if (!fs::exists(p)) throw Error(ErrorCode::missing_file, std::string("missing coefficient file ") + kCoeffFiles[k]);
    m[k] = read_matrix_market(p);
  }
  const Index n = m[0].rows();
  for (std::size_t k = 0; k < 5; ++k) {
    if (m[k].rows() != n || m[k].cols() != n) {
      throw Error(ErrorCode::dimension_mismatch,
                  std::string(kCoeffFiles[k]) + " is " + std::to_string(m[k].rows()) + "x" +
                      std::to_string(m[k].cols()) + ", expected " + std::to_string(n) + "x" + std::to_string(n));
    }
  }
  ProblemBundle b;
  b.name = fs::absolute(dir).lexically_normal().filename().string();
  if (b.name.empty()) b.name = fs::absolute(dir).lexically_normal().parent_path().filename().string();
  b.pencil = QuarticPencil(m[0], m[1], m[2], m[3], m[4]);
  const fs::path ej = dir / "expected.json";
  if (fs::exists(ej)) {
    std::ifstream in(ej);
    try {
      b.expected = expected_from_json(json::parse(in));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::malformed_file, std::string("expected.json: ") + e.what());
    }
  }
  return b;
}

inline void write_bundle(const fs::path& dir, const ProblemBundle& b) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_failure, "cannot create " + dir.string() + ": " + ec.message());
  for (int k = 0; k < 5; ++k) write_matrix_market(dir / kCoeffFiles[static_cast<std::size_t>(k)], b.pencil.coeff(4 - k));
  if (b.expected) detail::atomic_write(dir / "expected.json", expected_to_json(*b.expected).dump(2) + "\n");
}

namespace detail {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  Matrix gaussian(Index rows, Index cols) {
    Matrix m(rows, cols);
    const Real s = 1.0 / std::sqrt(2.0);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) m(i, j) = Complex(s * normal_(rng_), s * normal_(rng_));
    }
    return m;
  }

  Matrix unitary(Index n) { return numkit::householder_qr(gaussian(n, n)).first; }

  /// n x k with orthonormal-times-diag(1..10) structure: condition <= 10.
  Matrix well_conditioned(Index n, Index k) {
    const Matrix u = unitary(n).leftCols(k);
    RealVector s(k);
    for (Index i = 0; i < k; ++i) s(i) = 1.0 + 9.0 * uniform_(rng_);
    return u * s.cast<Complex>().asDiagonal() * unitary(k);
  }

  std::vector<Index> choose(Index n, Index k) {
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng_);
    idx.resize(static_cast<std::size_t>(k));
    std::sort(idx.begin(), idx.end());
    return idx;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<Real> normal_{0.0, 1.0};
  std::uniform_real_distribution<Real> uniform_{0.0, 1.0};
};

// n x n matrix with exactly the columns in `zero_cols` equal to zero and a
// well-conditioned remainder.
inline Matrix planted_columns(Sampler& s, Index n, const std::vector<Index>& zero_cols) {
  const Index k = static_cast<Index>(zero_cols.size());
  const Matrix w = s.well_conditioned(n, n - k);
  Matrix m = Matrix::Zero(n, n);
  Index c = 0;
  for (Index j = 0; j < n; ++j) {
    if (std::find(zero_cols.begin(), zero_cols.end(), j) != zero_cols.end()) continue;
    m.col(j) = w.col(c++);
  }
  return m;
}

}  // namespace detail

/// Random quartic whose E has zero_cols_e and A has zero_cols_a exactly-zero
/// columns; the rest are well conditioned, B, C, D are Gaussian.
inline ProblemBundle gen_planted(Index n, Index zero_cols_e, Index zero_cols_a, std::uint64_t seed) {
  if (n < 1 || zero_cols_e < 0 || zero_cols_a < 0 || zero_cols_e > n || zero_cols_a > n) {
    throw Error(ErrorCode::invalid_input, "gen_planted: counts must satisfy 0 <= k <= n, n >= 1");
  }
  detail::Sampler s(seed);
  const Matrix e = detail::planted_columns(s, n, s.choose(n, zero_cols_e));
  const Matrix a = detail::planted_columns(s, n, s.choose(n, zero_cols_a));
  const Matrix b = s.gaussian(n, n);
  const Matrix c = s.gaussian(n, n);
  const Matrix d = s.gaussian(n, n);
  ProblemBundle pb;
  pb.name = "planted_n" + std::to_string(n) + "_e" + std::to_string(zero_cols_e) + "_a" +
            std::to_string(zero_cols_a) + "_s" + std::to_string(seed);
  pb.pencil = QuarticPencil(a, b, c, d, e);
  Expected ex;
  ex.provenance = "planted zero columns: lower bounds on zero/infinite counts";
  ex.zeros = zero_cols_e;
  ex.infinities = zero_cols_a;
  ex.lower_bound = true;
  pb.expected = ex;
  return pb;
}

enum class ChainAt : std::uint8_t { zero, infinity };

/// U diag(lambda^k, R(lambda)) V^* with R a random regular (n-1)x(n-1) quartic;
/// k = chain_len for a chain at zero, k = 4 - chain_len for one at infinity.
inline ProblemBundle gen_jordan_chain(Index n, Index chain_len, ChainAt at, std::uint64_t seed) {
  if (chain_len < 0 || chain_len > 4) throw Error(ErrorCode::invalid_input, "gen_jordan_chain: chain length must be <= 4");
  if (n < 1) throw Error(ErrorCode::invalid_input, "gen_jordan_chain: n must be >= 1");
  detail::Sampler s(seed);
  const Index power = at == ChainAt::zero ? chain_len : 4 - chain_len;
  std::array<Matrix, 5> core;  // by power of lambda
  for (int k = 0; k <= 4; ++k) {
    core[static_cast<std::size_t>(k)] = Matrix::Zero(n, n);
    if (n > 1) core[static_cast<std::size_t>(k)].bottomRightCorner(n - 1, n - 1) = s.gaussian(n - 1, n - 1);
  }
  core[static_cast<std::size_t>(power)](0, 0) = 1.0;
  Matrix u = Matrix::Identity(n, n);
  Matrix v = Matrix::Identity(n, n);
  if (n > 1) {
    u = s.unitary(n);
    v = s.unitary(n);
  }
  std::array<Matrix, 5> c;
  for (std::size_t k = 0; k < 5; ++k) c[k] = n > 1 ? Matrix(u * core[k] * v.adjoint()) : core[k];
  ProblemBundle pb;
  pb.name = std::string("jordan_n") + std::to_string(n) + "_len" + std::to_string(chain_len) +
            (at == ChainAt::zero ? "_zero" : "_inf") + "_s" + std::to_string(seed);
  pb.pencil = QuarticPencil(c[4], c[3], c[2], c[1], c[0]);
  Expected ex;
  ex.provenance = "planted scalar factor lambda^" + std::to_string(power) + " on a one-dimensional subspace";
  ex.zeros = power;
  ex.infinities = 4 - power;
  pb.expected = ex;
  return pb;
}

/// Gaussian coefficients premultiplied by diag(2^1, ..., 2^n).
inline ProblemBundle gen_graded(Index n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::invalid_input, "gen_graded: n must be >= 1");
  detail::Sampler s(seed);
  RealVector g(n);
  for (Index i = 0; i < n; ++i) g(i) = std::ldexp(1.0, static_cast<int>(i + 1));
  std::array<Matrix, 5> c;
  for (auto& m : c) m = g.cast<Complex>().asDiagonal() * s.gaussian(n, n);
  ProblemBundle pb;
  pb.name = "graded_n" + std::to_string(n) + "_s" + std::to_string(seed);
  pb.pencil = QuarticPencil(c[0], c[1], c[2], c[3], c[4]);
  return pb;
}

/// n = 9 stand-in with the rank structure of the mirror benchmark: A and E
/// have 7 zero columns each; two of those columns of B (resp. D) lie in the
/// range of A (resp. E), which gives the second-level matrices 2 zero columns.
inline ProblemBundle gen_mirror_like(std::uint64_t seed) {
  const Index n = 9;
  const Index kz = 7;
  const Index kc = 2;
  detail::Sampler s(seed);
  auto pair = [&](Matrix& lead, Matrix& next) {
    const std::vector<Index> zero_cols = s.choose(n, kz);
    lead = detail::planted_columns(s, n, zero_cols);
    next = s.gaussian(n, n);
    std::vector<Index> live;
    for (Index j = 0; j < n; ++j) {
      if (std::find(zero_cols.begin(), zero_cols.end(), j) == zero_cols.end()) live.push_back(j);
    }
    for (Index t = 0; t < kc; ++t) {
      const Index j = zero_cols[static_cast<std::size_t>(t)];
      const Matrix w = s.gaussian(static_cast<Index>(live.size()), 1);
      Vector col = Vector::Zero(n);
      for (std::size_t l = 0; l < live.size(); ++l) col += w(static_cast<Index>(l), 0) * lead.col(live[l]);
      next.col(j) = col;
    }
  };
  Matrix a, b, e, d;
  pair(e, d);
  pair(a, b);
  const Matrix c = s.gaussian(n, n);
  ProblemBundle pb;
  pb.name = "mirror_like_s" + std::to_string(seed);
  pb.pencil = QuarticPencil(a, b, c, d, e);
  Expected ex;
  ex.provenance = "synthetic stand-in with the mirror rank structure: 9 zero and 9 infinite eigenvalues";
  ex.zeros = 9;
  ex.infinities = 9;
  pb.expected = ex;
  return pb;
}

// ---------------------------------------------------------------- reports

inline json number(Real v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline json config_to_json(const SolveConfig& c, Index n) {
  json j;
  j["scale"] = c.scale;
  j["balance"] = c.balance;
  j["balance_iters"] = c.balance_iters;
  j["balance_aggregate"] = c.balance_aggregate == BalanceAggregate::sum ? "sum" : "max";
  j["rank_strategy"] = c.rank_strategy == numkit::RankStrategy::Kind::norm_threshold ? "norm" : "dropoff";
  j["tol"] = c.strategy(n).value;
  j["deflate"] = c.deflate;
  j["eigvec_mode"] = to_string(c.eigvec_mode);
  j["ls_weight"] = c.ls_weight;
  j["left_vectors"] = c.want_left;
  return j;
}

inline json log_to_json(const numkit::TruncationLog& log) {
  json j;
  j["strategy"] = log.strategy;
  j["threshold"] = number(log.threshold);
  j["cut_ratio"] = number(log.cut_ratio);
  j["forced"] = log.forced;
  j["ambiguous"] = log.ambiguous;
  json d = json::array();
  for (Index i = 0; i < log.diag.size(); ++i) d.push_back(number(log.diag(i)));
  j["diag"] = d;
  return j;
}

inline json stat_to_json(const Stat& s) {
  return json{{"min", number(s.min)}, {"max", number(s.max)}, {"median", number(s.median)}, {"count", s.count}};
}

struct ReportOptions {
  bool include_vectors = false;
};

inline json report_json(const std::string& problem, const SolveResult& r, const SolveConfig& cfg,
                        const ReportOptions& opt = {}) {
  const Index n = r.solution.n;
  json j;
  j["problem"] = problem;
  j["n"] = n;
  j["config"] = config_to_json(cfg, n);

  json defl;
  defl["enabled"] = cfg.deflate;
  defl["case"] = r.deflation.case_id;
  defl["reversed"] = r.reversed;
  // Counts in terms of the input problem.
  defl["zeros"] = r.reversed ? r.deflation.infs_deflated : r.deflation.zeros_deflated;
  defl["infinities"] = r.reversed ? r.deflation.zeros_deflated : r.deflation.infs_deflated;
  defl["deflated_size"] = r.qz_size;
  defl["regular"] = r.deflation.regular;
  defl["budget_exhausted"] = r.deflation.budget_exhausted;
  defl["final_rank_aa"] = r.deflation.final_rank_aa;
  defl["final_rank_bb"] = r.deflation.final_rank_bb;
  json ranks;
  ranks["r_a"] = r.ranks.r_a;
  ranks["r_e"] = r.ranks.r_e;
  if (r.second) {
    ranks["r_phi"] = r.second->r_phi;
    ranks["r_psi"] = r.second->r_psi;
  }
  ranks["working_problem"] = r.reversed ? "reversed" : "original";
  ranks["log_a"] = log_to_json(r.ranks.qr_a.log);
  ranks["log_e"] = log_to_json(r.ranks.qr_e.log);
  defl["ranks"] = ranks;
  json steps = json::array();
  for (const auto& s : r.deflation.steps) {
    json st;
    st["kind"] = s.kind;
    st["test"] = s.test;
    st["size_before"] = s.size_before;
    st["size_after"] = s.size_after;
    st["deflated"] = s.deflated;
    st["known_block"] = s.known_block;
    st["regular"] = s.regular;
    st["core_rcond"] = number(s.core_rcond);
    st["evidence"] = log_to_json(s.evidence);
    steps.push_back(st);
  }
  defl["steps"] = steps;
  defl["unitarity"] = json{{"p", number(r.p_defect)}, {"q", number(r.q_defect)}};
  j["deflation"] = defl;

  json scaling;
  scaling["gamma"] = number(r.scaling.gamma);
  scaling["theta"] = number(r.scaling.theta);
  scaling["skipped"] = r.scaling.scale_skipped;
  scaling["balanced"] = r.scaling.dl.size() > 0;
  j["scaling"] = scaling;

  json pairs = json::array();
  json finite = json::array();
  Index idx = 0;
  for (const auto& p : r.solution.pairs) {
    json e;
    e["index"] = idx++;
    e["alpha"] = {p.eig.alpha.real(), p.eig.alpha.imag()};
    e["beta"] = p.eig.beta;
    e["class"] = to_string(p.eig.cls);
    if (p.eig.beta != 0.0) {
      const Complex l = p.eig.lambda();
      e["lambda"] = {l.real(), l.imag()};
      if (p.eig.cls == EigClass::finite) finite.push_back({l.real(), l.imag()});
    } else {
      e["lambda"] = nullptr;
    }
    e["source"] = p.source;
    e["eta_right"] = number(p.diag.eta_right);
    e["eta_left"] = number(p.diag.eta_left);
    e["omega_right"] = number(p.diag.omega_right);
    e["omega_left"] = number(p.diag.omega_left);
    e["omega_right_unbounded"] = p.diag.omega_right_unbounded;
    e["omega_left_unbounded"] = p.diag.omega_left_unbounded;
    e["right_method"] = p.right_method;
    e["left_method"] = p.left_method;
    e["flags"] = p.flags;
    if (opt.include_vectors) {
      json x = json::array();
      for (Index i = 0; i < p.x.size(); ++i) x.push_back({p.x(i).real(), p.x(i).imag()});
      e["x"] = x;
      json y = json::array();
      for (Index i = 0; i < p.y.size(); ++i) y.push_back({p.y(i).real(), p.y(i).imag()});
      e["y"] = y;
    }
    pairs.push_back(e);
  }
  j["eigenpairs"] = pairs;
  j["finite"] = finite;

  json sum;
  sum["counts"] = json{{"zero", r.summary.zero}, {"finite", r.summary.finite}, {"infinite", r.summary.infinite},
                       {"total", r.summary.total}};
  sum["eta_right"] = stat_to_json(r.summary.eta_right);
  sum["eta_left"] = stat_to_json(r.summary.eta_left);
  sum["omega_right"] = stat_to_json(r.summary.omega_right);
  sum["omega_left"] = stat_to_json(r.summary.omega_left);
  sum["warnings"] = r.warnings;
  j["summary"] = sum;
  j["run"] = json{{"backend", r.backend_id}, {"norms", r.norm_method}};
  return j;
}

inline std::string eigenpairs_csv(const SolveResult& r) {
  std::ostringstream os;
  os << "index,alpha_re,alpha_im,beta,lambda_re,lambda_im,class,source,eta_right,eta_left,omega_right,omega_left\n";
  auto f = [](Real v) { return std::isnan(v) ? std::string() : detail::format_real(v); };
  Index idx = 0;
  for (const auto& p : r.solution.pairs) {
    const Complex l = p.eig.lambda();
    os << idx++ << ',' << f(p.eig.alpha.real()) << ',' << f(p.eig.alpha.imag()) << ',' << f(p.eig.beta) << ','
       << f(l.real()) << ',' << f(l.imag()) << ',' << to_string(p.eig.cls) << ',' << p.source << ','
       << f(p.diag.eta_right) << ',' << f(p.diag.eta_left) << ',' << f(p.diag.omega_right) << ','
       << f(p.diag.omega_left) << '\n';
  }
  return os.str();
}

enum class ReportFormat : std::uint8_t { json, csv, both };

/// Writes <path> (JSON) and/or the CSV companion (path with .csv extension).
inline void write_report(const fs::path& path, const std::string& problem, const SolveResult& r,
                         const SolveConfig& cfg, ReportFormat format = ReportFormat::both,
                         const ReportOptions& opt = {}) {
  if (!path.parent_path().empty()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::io_failure, "cannot create " + path.parent_path().string());
  }
  if (format != ReportFormat::csv) {
    fs::path jp = path;
    if (jp.extension() != ".json") jp.replace_extension(".json");
    detail::atomic_write(jp, report_json(problem, r, cfg, opt).dump(2) + "\n");
  }
  if (format != ReportFormat::json) {
    fs::path cp = path;
    cp.replace_extension(".csv");
    detail::atomic_write(cp, eigenpairs_csv(r));
  }
}

}  // namespace quarteig::probio
