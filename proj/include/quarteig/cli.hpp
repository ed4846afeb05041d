#pragma once

// Command implementations behind the quarteig executable.  Argument parsing
// lives in tools/quarteig.cpp; everything here is callable from tests.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "quarteig/probio.hpp"
#include "quarteig/solver.hpp"

namespace quarteig::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUnexpected = 1;
inline constexpr int kExitUsage = 2;

/// usage -> 2, every other category -> 10 + (code - 1).
inline int exit_code(ErrorCode code) {
  if (code == ErrorCode::usage) return kExitUsage;
  return 9 + static_cast<int>(code);
}

inline std::string error_json(const std::string& code, int exit, const std::string& message) {
  return json{{"error", {{"code", code}, {"exit", exit}, {"message", message}}}}.dump();
}

inline bool parse_switch(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::usage, key + ": expected on/off, got '" + v + "'");
}

namespace detail {

inline Real parse_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  Real x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw Error(ErrorCode::usage, key + ": not a number: '" + v + "'");
  return x;
}

inline int parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  int x = 0;
  try {
    x = std::stoi(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw Error(ErrorCode::usage, key + ": not an integer: '" + v + "'");
  return x;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Applies one `key=value` setting.  Keys match the long flag names.
inline void apply_setting(SolveConfig& c, const std::string& key, const std::string& value) {
  if (key == "scale") {
    c.scale = parse_switch(key, value);
  } else if (key == "balance") {
    c.balance = parse_switch(key, value);
  } else if (key == "balance-iters") {
    c.balance_iters = detail::parse_int(key, value);
  } else if (key == "balance-aggregate") {
    if (value == "sum") {
      c.balance_aggregate = BalanceAggregate::sum;
    } else if (value == "max") {
      c.balance_aggregate = BalanceAggregate::max;
    } else {
      throw Error(ErrorCode::usage, "balance-aggregate: expected sum or max");
    }
  } else if (key == "rank-strategy") {
    if (value == "norm") {
      c.rank_strategy = numkit::RankStrategy::Kind::norm_threshold;
    } else if (value == "dropoff") {
      c.rank_strategy = numkit::RankStrategy::Kind::dropoff;
    } else {
      throw Error(ErrorCode::usage, "rank-strategy: expected norm or dropoff");
    }
  } else if (key == "tol") {
    c.tol = detail::parse_real(key, value);
  } else if (key == "deflate") {
    c.deflate = parse_switch(key, value);
  } else if (key == "eigvec") {
    if (value == "min_residual") {
      c.eigvec_mode = EigvecMode::min_residual;
    } else if (value == "least_squares") {
      c.eigvec_mode = EigvecMode::least_squares;
    } else {
      throw Error(ErrorCode::usage, "eigvec: expected min_residual or least_squares");
    }
  } else if (key == "ls-weight") {
    c.ls_weight = detail::parse_real(key, value);
  } else if (key == "left") {
    c.want_left = parse_switch(key, value);
  } else if (key == "threads") {
    c.threads = detail::parse_int(key, value);
  } else {
    throw Error(ErrorCode::usage, "unknown setting '" + key + "'");
  }
}

/// "scale=off,balance=on" on top of the defaults.  An empty string is the
/// default configuration.
inline SolveConfig parse_config_spec(const std::string& spec, SolveConfig base = {}) {
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = detail::trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::usage, "setting without '=': '" + item + "'");
    apply_setting(base, detail::trim(item.substr(0, eq)), detail::trim(item.substr(eq + 1)));
  }
  return base;
}

/// --threads if given, else QUARTEIG_THREADS, else 1.
inline int resolve_threads(std::optional<int> flag, const char* env = std::getenv("QUARTEIG_THREADS")) {
  if (flag) return *flag;
  if (env != nullptr && *env != '\0') {
    const int t = detail::parse_int("QUARTEIG_THREADS", env);
    if (t < 1) throw Error(ErrorCode::usage, "QUARTEIG_THREADS must be at least 1");
    return t;
  }
  return 1;
}

inline probio::ReportFormat parse_format(const std::string& f) {
  if (f == "json") return probio::ReportFormat::json;
  if (f == "csv") return probio::ReportFormat::csv;
  if (f == "both") return probio::ReportFormat::both;
  throw Error(ErrorCode::usage, "format: expected json, csv or both");
}

struct OutputOptions {
  std::optional<fs::path> output;  // JSON to stdout when absent
  probio::ReportFormat format = probio::ReportFormat::json;
  bool vectors = false;
};

/// Runs `body` and turns failures into an exit code plus a JSON error line.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    const int code = exit_code(e.code());
    err << error_json(to_string(e.code()), code, e.what()) << '\n';
    return code;
  } catch (const std::exception& e) {
    err << error_json("unexpected", kExitUnexpected, e.what()) << '\n';
    return kExitUnexpected;
  }
}

namespace detail {

inline SolveResult checked_solve(const QuarticPencil& q, const SolveConfig& cfg) {
  SolveResult r = solve(q, cfg);
  if (static_cast<Index>(r.solution.pairs.size()) != 4 * q.n) {
    throw Error(ErrorCode::recovery_failure, "expected " + std::to_string(4 * q.n) + " eigenpairs, produced " +
                                                 std::to_string(r.solution.pairs.size()));
  }
  return r;
}

}  // namespace detail

inline int cmd_solve(const fs::path& bundle, const SolveConfig& cfg, const OutputOptions& out, std::ostream& os,
                     std::ostream& err) {
  return guarded(err, [&] {
    const probio::ProblemBundle b = probio::read_bundle(bundle);
    const SolveResult r = detail::checked_solve(b.pencil, cfg);
    const probio::ReportOptions ro{out.vectors};
    if (out.output) {
      probio::write_report(*out.output, b.name, r, cfg, out.format, ro);
    } else if (out.format == probio::ReportFormat::csv) {
      os << probio::eigenpairs_csv(r);
    } else {
      os << probio::report_json(b.name, r, cfg, ro).dump(2) << '\n';
    }
    return kExitOk;
  });
}

/// Merged per-pair table: one column group per configuration, rows keyed by
/// the index in modulus order.
inline std::string merged_csv(const std::vector<SolveResult>& runs) {
  std::ostringstream os;
  os << "index";
  for (std::size_t c = 0; c < runs.size(); ++c) {
    for (const char* f : {"lambda_re", "lambda_im", "class", "eta_right", "eta_left", "omega_right", "omega_left"}) {
      os << ',' << f << '_' << c;
    }
  }
  os << '\n';
  std::size_t rows = 0;
  for (const auto& r : runs) rows = std::max(rows, r.solution.pairs.size());
  auto f = [](Real v) { return std::isnan(v) ? std::string() : probio::detail::format_real(v); };
  for (std::size_t i = 0; i < rows; ++i) {
    os << i;
    for (const auto& r : runs) {
      if (i >= r.solution.pairs.size()) {
        os << ",,,,,,,";
        continue;
      }
      const EigenPair& p = r.solution.pairs[i];
      const Complex l = p.eig.lambda();
      os << ',' << f(l.real()) << ',' << f(l.imag()) << ',' << to_string(p.eig.cls) << ',' << f(p.diag.eta_right)
         << ',' << f(p.diag.eta_left) << ',' << f(p.diag.omega_right) << ',' << f(p.diag.omega_left);
    }
    os << '\n';
  }
  return os.str();
}

/// One report per configuration (config_<i>.json/.csv) plus compare.csv in
/// out_dir.
inline int cmd_compare(const fs::path& bundle, const std::vector<SolveConfig>& configs, const fs::path& out_dir,
                       const OutputOptions& out, std::ostream& os, std::ostream& err) {
  return guarded(err, [&] {
    if (configs.size() < 2) throw Error(ErrorCode::usage, "compare needs at least two configurations");
    const probio::ProblemBundle b = probio::read_bundle(bundle);
    std::vector<SolveResult> runs;
    runs.reserve(configs.size());
    for (std::size_t c = 0; c < configs.size(); ++c) {
      runs.push_back(detail::checked_solve(b.pencil, configs[c]));
      probio::write_report(out_dir / ("config_" + std::to_string(c) + ".json"), b.name, runs.back(), configs[c],
                           out.format, probio::ReportOptions{out.vectors});
    }
    probio::detail::atomic_write(out_dir / "compare.csv", merged_csv(runs));
    os << (out_dir / "compare.csv").string() << '\n';
    return kExitOk;
  });
}

struct GenRequest {
  std::string kind;  // planted, jordan, graded, mirror
  Index n = 4;
  Index zero_cols_e = 0;
  Index zero_cols_a = 0;
  Index chain_len = 1;
  std::string at = "zero";
  std::uint64_t seed = 1;
};

inline int cmd_gen(const GenRequest& g, const fs::path& out_dir, std::ostream& os, std::ostream& err) {
  return guarded(err, [&] {
    probio::ProblemBundle b;
    if (g.kind == "planted") {
      b = probio::gen_planted(g.n, g.zero_cols_e, g.zero_cols_a, g.seed);
    } else if (g.kind == "jordan") {
      if (g.at != "zero" && g.at != "infinity") throw Error(ErrorCode::usage, "--at: expected zero or infinity");
      b = probio::gen_jordan_chain(g.n, g.chain_len, g.at == "zero" ? probio::ChainAt::zero : probio::ChainAt::infinity,
                                   g.seed);
    } else if (g.kind == "graded") {
      b = probio::gen_graded(g.n, g.seed);
    } else if (g.kind == "mirror") {
      b = probio::gen_mirror_like(g.seed);
    } else {
      throw Error(ErrorCode::usage, "unknown generator '" + g.kind + "'");
    }
    probio::write_bundle(out_dir, b);
    os << out_dir.string() << '\n';
    return kExitOk;
  });
}

}  // namespace quarteig::cli
