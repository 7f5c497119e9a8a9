// mstlab: config-driven Monte Carlo experiments on random minimum spanning
// trees.  One JSON config file describes one experiment; outputs are a CSV
// table (when the experiment is tabular) plus a JSON summary with the config
// hash, code version, and seed, so any result can be traced and reproduced.
//
// Exit codes: 0 success, 1 invalid config or usage, 2 degenerate statistics
// (e.g. a constant functional), 3 internal failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "mstlab/experiments.hpp"

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mstlab::config_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool kind_matches(const std::string& sub, mstlab::ExperimentKind kind) {
  using mstlab::ExperimentKind;
  if (sub == "clt")
    return kind == ExperimentKind::clt_poisson || kind == ExperimentKind::clt_lattice;
  if (sub == "arm-decay") return kind == ExperimentKind::arm_decay;
  if (sub == "var-scaling") return kind == ExperimentKind::variance_scaling;
  if (sub == "stein-bound") return kind == ExperimentKind::stein_bound_run;
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "mstlab: Monte Carlo experiments on random minimum spanning trees.\n"
      "Each subcommand runs one experiment described by a JSON config file\n"
      "and writes <prefix>.csv (tabular experiments) and <prefix>_summary.json\n"
      "into the output directory.  Reruns with the same config and seed\n"
      "produce byte-identical CSV, independent of --threads."};
  app.fallthrough();

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed_override = 0;
  int threads = 1;
  bool allow_large = false;

  app.add_option("--config", config_path, "Path to the experiment JSON config")
      ->check(CLI::ExistingFile);
  auto* seed_opt =
      app.add_option("--seed", seed_override, "Override the config's master seed");
  app.add_option("--out", out_dir, "Output directory (default: current directory)");
  app.add_option("--threads", threads, "Worker threads; never changes results")
      ->check(CLI::Range(1, 4096));
  app.add_flag("--allow-large", allow_large,
               "Lift the desk-scale caps (n, replicates) for long runs");

  app.add_subcommand("clt",
                     "Normal-approximation study of the MST total weight.\n"
                     "Config kinds: clt_poisson, clt_lattice.\n"
                     "CSV columns: n,replicates,mean,sd,dhat,dhat_ci_lo,"
                     "dhat_ci_hi,what,what_ci_lo,what_ci_hi");
  app.add_subcommand("arm-decay",
                     "Arm-event probability versus region size, with a decay fit.\n"
                     "Config kind: arm_decay.\n"
                     "CSV columns: n,param,replicates,successes,phat,ci_lo,ci_hi");
  app.add_subcommand("var-scaling",
                     "Variance of the MST total weight, normalized by region size.\n"
                     "Config kind: variance_scaling.\n"
                     "CSV columns: n,volume,replicates,var,var_se,normalized,"
                     "normalized_se");
  app.add_subcommand("stein-bound",
                     "Normal-approximation bound for a block-resampled MST\n"
                     "functional, logged against the empirical distance.\n"
                     "Config kind: stein_bound.  Output: JSON summary only");
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (config_path.empty())
      throw mstlab::config_error("--config is required");
    mstlab::ExperimentConfig cfg =
        mstlab::parse_experiment_config(read_text_file(config_path));
    if (!kind_matches(sub, cfg.kind))
      throw mstlab::config_error("config kind \"" +
                                 std::string(kind_name(cfg.kind)) +
                                 "\" does not match subcommand \"" + sub + "\"");
    if (seed_opt->count() > 0) cfg.seed = seed_override;
    cfg.allow_large = allow_large;

    const mstlab::RunArtifacts art = mstlab::run_experiment(cfg, threads);
    mstlab::write_artifacts(art, out_dir);

    std::cout << "experiment: " << kind_name(cfg.kind) << "\n"
              << "config_hash: " << art.summary["config_hash"].get<std::string>()
              << "\n"
              << "seed: " << cfg.seed << "\n";
    if (!art.csv.empty()) std::cout << "csv: " << out_dir << "/" << art.csv_name << "\n";
    std::cout << "summary: " << out_dir << "/" << art.json_name << "\n";
    return 0;
  } catch (const mstlab::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const mstlab::degenerate_statistic_error& e) {
    std::cerr << "degenerate statistic: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
