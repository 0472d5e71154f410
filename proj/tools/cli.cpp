#include "cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "opengp/config.hpp"
#include "opengp/harness.hpp"
#include "opengp/info_analysis.hpp"
#include "opengp/sexpr.hpp"

namespace opengp {

namespace {

struct RunArgs {
  std::string config_path;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  int workers = 1;
};

struct AnalyzeArgs {
  std::string trees_path;
  std::uint64_t suite_seed = 0;
  int cases = 48;
  bool entropy = false;
  bool fdp = false;
  int trials = 1000;
  std::optional<std::uint64_t> analysis_seed;
  std::string bins = "1-5,6-10,11-20,21-50,51-inf";
  double hit_threshold = 0.01;
  int mutation_height = 4;
  int workers = 1;
};

int do_run(const RunArgs& a, std::ostream& out) {
  ExperimentConfig config = load_config(a.config_path);
  if (a.mode) config.mode = parse_mode(*a.mode);
  if (a.seed) config.seed = *a.seed;
  if (a.out_dir) config.output_dir = *a.out_dir;
  config.validate();
  const ExperimentOutcome outcome = run_experiment(config, a.workers);
  for (const auto& f : outcome.files) out << "wrote " << f.string() << '\n';
  return kExitOk;
}

int do_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const std::vector<DepthBin> bins = parse_depth_bins(a.bins, "--bins");
  if (a.cases < 1) throw ConfigError("--cases: must be >= 1", "--cases");
  if (a.trials < 0) throw ConfigError("--trials: must be >= 0", "--trials");
  const std::vector<ExprTree> trees = read_tree_file(a.trees_path);
  if (trees.empty()) throw std::runtime_error("no trees in '" + a.trees_path + "'");
  const TestSuite suite = make_sextic_suite(static_cast<std::size_t>(a.cases), a.suite_seed);

  std::vector<Individual> pop;
  pop.reserve(trees.size());
  for (const ExprTree& t : trees) pop.push_back(evaluate_individual(t, suite, a.hit_threshold));
  const PopulationSummary ps = summarize_population(pop, suite.count());
  out << "trees " << ps.trees << '\n'
      << "height_mean " << format_real(ps.height_mean) << '\n'
      << "height_q1 " << format_real(ps.height.q1) << '\n'
      << "height_median " << format_real(ps.height.median) << '\n'
      << "height_q3 " << format_real(ps.height.q3) << '\n'
      << "size_mean " << format_real(ps.size_mean) << '\n'
      << "fit_count " << ps.fit_count << '\n';

  if (a.entropy) {
    out << "\ntree size height fitness root_entropy_bits total_loss_bits max_loss_bits\n";
    for (std::size_t i = 0; i < trees.size(); ++i) {
      const EntropyReport rep = entropy_report(trees[i], suite);
      double total = 0.0;
      double worst = 0.0;
      for (const NodeEntropy& e : rep.per_node) {
        total += e.loss_bits;
        worst = std::max(worst, e.loss_bits);
      }
      out << i << ' ' << trees[i].size() << ' ' << tree_height(trees[i]) << ' '
          << format_real(pop[i].fitness) << ' '
          << format_real(rep.per_node[trees[i].root()].entropy_bits) << ' '
          << format_real(total) << ' ' << format_real(worst) << '\n';
    }
  }
  if (a.fdp) {
    Rng rng(a.analysis_seed.value_or(a.suite_seed + 1));
    const FdpStats f = fdp_statistics(pop, suite, a.trials, bins, rng,
                                      {a.mutation_height, kDefaultSilentTolerance,
                                       a.workers});
    out << "\nbin trials silent silent_fraction near_silent near_silent_fraction\n";
    for (const FdpBin& b : f.bins) {
      out << bin_spec(b.range) << ' ' << b.trials << ' ' << b.silent << ' '
          << format_real(b.silent_fraction) << ' ' << b.near_silent << ' '
          << format_real(b.near_silent_fraction) << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Genetic programming experiments on deep and depth-capped programs"};
  app.set_version_flag("--version", std::string("opengp ") + version());
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "Run an experiment from a config file");
  run_cmd->add_option("--config", run_args.config_path, "Config file")->required();
  run_cmd->add_option("--mode", run_args.mode, "monolithic, open or both");
  run_cmd->add_option("--seed", run_args.seed, "Override the experiment seed");
  run_cmd->add_option("--out", run_args.out_dir, "Override the output directory");
  run_cmd->add_option("--workers", run_args.workers, "Evaluation threads")
      ->check(CLI::PositiveNumber);

  AnalyzeArgs an;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Analyze saved trees");
  analyze_cmd->add_option("--trees", an.trees_path, "One s-expression per line")->required();
  analyze_cmd->add_option("--suite-seed", an.suite_seed, "Sextic suite seed")->required();
  analyze_cmd->add_option("--cases", an.cases, "Number of fitness cases");
  analyze_cmd->add_flag("--entropy", an.entropy, "Per-tree entropy figures");
  analyze_cmd->add_flag("--fdp", an.fdp, "Silent-mutation table by site depth");
  analyze_cmd->add_option("--trials", an.trials, "FDP trials per depth bin");
  analyze_cmd->add_option("--analysis-seed", an.analysis_seed,
                          "FDP seed (default suite seed + 1)");
  analyze_cmd->add_option("--bins", an.bins, "Depth bins, e.g. 1-5,6-10,11-inf");
  analyze_cmd->add_option("--hit-threshold", an.hit_threshold, "Hit tolerance");
  analyze_cmd->add_option("--mutation-height", an.mutation_height,
                          "Max height of FDP replacement subtrees");
  analyze_cmd->add_option("--workers", an.workers, "Evaluation threads")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return do_run(run_args, out);
    return do_analyze(an, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace opengp
