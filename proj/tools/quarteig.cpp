// quarteig: solve, compare and generate quartic eigenvalue problems.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quarteig/cli.hpp"

namespace {

using quarteig::cli::apply_setting;

// Flag values are collected as strings and applied through the same path as
// the key=value settings of `compare`.
struct SettingFlags {
  std::map<std::string, std::string> values;
  std::optional<int> threads;

  void add_to(CLI::App& app) {
    const std::vector<std::string> on_off{"on", "off"};
    auto str = [&](const std::string& key, const std::string& help) {
      return app.add_option("--" + key, values[key], help);
    };
    str("scale", "parameter scaling (on|off)")->check(CLI::IsMember(on_off));
    str("balance", "diagonal balancing (on|off)")->check(CLI::IsMember(on_off));
    str("balance-iters", "balancing sweeps (default 5)");
    str("balance-aggregate", "row/column aggregate for balancing (sum|max)");
    str("rank-strategy", "rank decision (norm|dropoff)")->check(CLI::IsMember({"norm", "dropoff"}));
    str("tol", "rank tolerance in (0,1); default n*eps (norm) or sqrt(eps) (dropoff)");
    str("deflate", "structured deflation (on|off)")->check(CLI::IsMember(on_off));
    str("eigvec", "right eigenvector recovery (min_residual|least_squares)")
        ->check(CLI::IsMember({"min_residual", "least_squares"}));
    str("ls-weight", "weight of the second block in least-squares recovery");
    app.add_flag_callback("--right-only", [this] { values["left"] = "off"; }, "skip left eigenvectors");
    app.add_option("--threads", threads, "worker threads for per-eigenpair work (env QUARTEIG_THREADS)");
  }

  quarteig::SolveConfig config(quarteig::SolveConfig base = {}) const {
    for (const auto& [k, v] : values) {
      if (!v.empty()) apply_setting(base, k, v);
    }
    base.threads = quarteig::cli::resolve_threads(threads);
    return base;
  }
};

struct OutputFlags {
  std::string output;
  std::string format = "json";
  bool vectors = false;

  void add_to(CLI::App& app, const std::string& output_help) {
    app.add_option("-o,--output", output, output_help);
    app.add_option("--format", format, "report format (json|csv|both)")->check(CLI::IsMember({"json", "csv", "both"}));
    app.add_flag("--vectors", vectors, "include eigenvectors in the JSON report");
  }

  quarteig::cli::OutputOptions options() const {
    quarteig::cli::OutputOptions o;
    if (!output.empty()) o.output = output;
    o.format = quarteig::cli::parse_format(format);
    o.vectors = vectors;
    return o;
  }
};

}  // namespace

int main(int argc, char** argv) {
  namespace cli = quarteig::cli;
  CLI::App app{"Quartic eigenvalue solver with structured deflation of zero and infinite eigenvalues"};
  app.require_subcommand(1);

  std::string bundle;
  SettingFlags settings;
  OutputFlags out;
  CLI::App* solve = app.add_subcommand("solve", "solve one problem bundle (A.mtx .. E.mtx)");
  solve->add_option("bundle", bundle, "bundle directory")->required();
  settings.add_to(*solve);
  out.add_to(*solve, "report path; JSON goes to stdout when omitted");

  std::string cmp_bundle;
  std::vector<std::string> cmp_specs;
  std::string cmp_dir;
  std::optional<int> cmp_threads;
  OutputFlags cmp_out;
  CLI::App* compare = app.add_subcommand("compare", "solve one bundle under several configurations");
  compare->add_option("bundle", cmp_bundle, "bundle directory")->required();
  compare->add_option("--config", cmp_specs, "settings as \"key=value,...\" (repeat, at least twice)")->required();
  compare->add_option("-o,--output", cmp_dir, "output directory")->required();
  compare->add_option("--format", cmp_out.format, "per-config report format (json|csv|both)")
      ->check(CLI::IsMember({"json", "csv", "both"}));
  compare->add_flag("--vectors", cmp_out.vectors, "include eigenvectors in the JSON reports");
  compare->add_option("--threads", cmp_threads, "worker threads (env QUARTEIG_THREADS)");

  cli::GenRequest gen;
  std::string gen_dir;
  CLI::App* gen_cmd = app.add_subcommand("gen", "write a synthetic problem bundle");
  gen_cmd->add_option("kind", gen.kind, "planted | jordan | graded | mirror")
      ->required()
      ->check(CLI::IsMember({"planted", "jordan", "graded", "mirror"}));
  gen_cmd->add_option("-o,--output", gen_dir, "bundle directory")->required();
  gen_cmd->add_option("--n", gen.n, "dimension")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--zero-cols-e", gen.zero_cols_e, "planted: exactly-zero columns of E");
  gen_cmd->add_option("--zero-cols-a", gen.zero_cols_a, "planted: exactly-zero columns of A");
  gen_cmd->add_option("--chain-len", gen.chain_len, "jordan: chain length (<= 4)");
  gen_cmd->add_option("--at", gen.at, "jordan: zero | infinity")->check(CLI::IsMember({"zero", "infinity"}));
  gen_cmd->add_option("--seed", gen.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << cli::error_json("usage", cli::kExitUsage, e.what()) << '\n';
    return cli::kExitUsage;
  }

  if (*solve) {
    quarteig::SolveConfig cfg;
    cli::OutputOptions oo;
    const int rc = cli::guarded(std::cerr, [&] {
      cfg = settings.config();
      oo = out.options();
      return 0;
    });
    if (rc != 0) return rc;
    return cli::cmd_solve(bundle, cfg, oo, std::cout, std::cerr);
  }
  if (*compare) {
    std::vector<quarteig::SolveConfig> configs;
    cli::OutputOptions oo;
    const int rc = cli::guarded(std::cerr, [&] {
      const int threads = cli::resolve_threads(cmp_threads);
      for (const auto& s : cmp_specs) {
        quarteig::SolveConfig c;
        c.threads = threads;
        configs.push_back(cli::parse_config_spec(s, c));
      }
      oo.format = cli::parse_format(cmp_out.format);
      oo.vectors = cmp_out.vectors;
      return 0;
    });
    if (rc != 0) return rc;
    return cli::cmd_compare(cmp_bundle, configs, cmp_dir, oo, std::cout, std::cerr);
  }
  return cli::cmd_gen(gen, gen_dir, std::cout, std::cerr);
}
