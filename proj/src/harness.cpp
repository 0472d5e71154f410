#include "opengp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "opengp/sexpr.hpp"

namespace opengp {

const char* version() noexcept { return OPENGP_VERSION; }

namespace {

PopulationSummary summarize_values(const std::vector<double>& heights,
                                   const std::vector<double>& sizes) {
  if (heights.empty()) {
    throw std::invalid_argument("summarize_population: empty population");
  }
  PopulationSummary s;
  s.trees = heights.size();
  s.height_mean = mean(heights);
  s.height = quartiles(heights);
  s.size_mean = mean(sizes);
  return s;
}

}  // namespace

PopulationSummary summarize_population(std::span<const Individual> pop,
                                       std::size_t n_cases) {
  std::vector<double> heights;
  std::vector<double> sizes;
  std::int64_t fit = 0;
  for (const Individual& ind : pop) {
    heights.push_back(static_cast<double>(tree_height(ind.tree)));
    sizes.push_back(static_cast<double>(ind.tree.size()));
    if (ind.hits == n_cases) ++fit;
  }
  PopulationSummary s = summarize_values(heights, sizes);
  s.fit_count = fit;
  return s;
}

PopulationSummary summarize_population(std::span<const OrganismIndividual> pop,
                                       std::size_t n_cases) {
  std::vector<double> heights;
  std::vector<double> sizes;
  std::int64_t fit = 0;
  for (const OrganismIndividual& ind : pop) {
    for (const Member& m : ind.org.members()) {
      heights.push_back(static_cast<double>(tree_height(m.tree)));
      sizes.push_back(static_cast<double>(m.tree.size()));
    }
    if (ind.hits == n_cases) ++fit;
  }
  PopulationSummary s = summarize_values(heights, sizes);
  s.fit_count = fit;
  return s;
}

PopulationSummary summarize_trees(std::span<const ExprTree> trees) {
  std::vector<double> heights;
  std::vector<double> sizes;
  for (const ExprTree& t : trees) {
    heights.push_back(static_cast<double>(tree_height(t)));
    sizes.push_back(static_cast<double>(t.size()));
  }
  return summarize_values(heights, sizes);
}

FitTreePool collect_fit_trees(const GpParams& params, const TestSuite& suite,
                              int target, int max_runs,
                              const EngineOptions& options,
                              const RunResult* first_run) {
  FitTreePool pool;
  const auto take = [&](const Population& pop) {
    for (const Individual& ind : pop.members) {
      if (ind.hits == suite.count()) pool.trees.push_back(ind.tree);
    }
  };
  for (int r = 0; r < max_runs && std::cmp_less(pool.trees.size(), target); ++r) {
    GpParams p = params;
    p.seed = params.seed + static_cast<std::uint64_t>(r);
    if (r == 0 && first_run != nullptr) {
      take(first_run->final_population);
    } else {
      take(run(p, suite, options).final_population);
    }
    pool.seeds.push_back(p.seed);
    ++pool.runs;
  }
  return pool;
}

namespace {

struct EntropyAccumulator {
  EntropySummary s;
  double loss_total = 0.0;
  double root_total = 0.0;

  void add(const ExprTree& tree, const NodeValues& values) {
    const EntropyReport rep = entropy_report(tree, values);
    ++s.trees;
    root_total += rep.per_node[tree.root()].entropy_bits;
    for (NodeId i = 0; i < tree.size(); ++i) {
      if (tree.is_leaf(i)) continue;
      const double loss = rep.per_node[i].loss_bits;
      ++s.internal_nodes;
      if (loss > 0.0) ++s.lossy_nodes;
      loss_total += loss;
      s.max_loss_bits = std::max(s.max_loss_bits, loss);
    }
  }

  EntropySummary finish() {
    if (s.internal_nodes > 0) {
      s.mean_loss_bits = loss_total / static_cast<double>(s.internal_nodes);
    }
    if (s.trees > 0) s.mean_root_entropy_bits = root_total / static_cast<double>(s.trees);
    return s;
  }
};

}  // namespace

EntropySummary summarize_entropy(std::span<const ExprTree> trees,
                                 const TestSuite& suite) {
  EntropyAccumulator acc;
  for (const ExprTree& t : trees) acc.add(t, eval_all_nodes(t, suite));
  return acc.finish();
}

EntropySummary summarize_entropy(std::span<const OrganismIndividual> pop,
                                 const TestSuite& suite) {
  EntropyAccumulator acc;
  for (const OrganismIndividual& ind : pop) {
    const OrganismTrace trace = trace_organism(ind.org, suite, true);
    for (std::size_t j = 0; j < ind.org.members().size(); ++j) {
      acc.add(ind.org.member(j).tree, trace.member_values[j]);
    }
  }
  return acc.finish();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot rename '" + tmp.string() + "' to '" +
                             path.string() + "'");
  }
}

std::vector<ExprTree> read_tree_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open tree file '" + path.string() + "'");
  std::vector<ExprTree> trees;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      trees.push_back(from_sexpr(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what(),
                       e.position());
    }
  }
  if (in.bad()) throw std::runtime_error("read failed for '" + path.string() + "'");
  return trees;
}

namespace {

std::string fmt(double v) { return format_real(v); }

void write_population(std::ostream& o, const PopulationSummary& s,
                      const char* unit) {
  o << unit << "s " << s.trees << '\n'
    << "height_mean " << fmt(s.height_mean) << '\n'
    << "height_q1 " << fmt(s.height.q1) << '\n'
    << "height_median " << fmt(s.height.median) << '\n'
    << "height_q3 " << fmt(s.height.q3) << '\n'
    << "size_mean " << fmt(s.size_mean) << '\n';
}

void write_fdp_table(std::ostream& o, const FdpStats& f) {
  o << "bin trials silent silent_fraction near_silent near_silent_fraction\n";
  for (const FdpBin& b : f.bins) {
    o << bin_spec(b.range) << ' ' << b.trials << ' ' << b.silent << ' '
      << fmt(b.silent_fraction) << ' ' << b.near_silent << ' '
      << fmt(b.near_silent_fraction) << '\n';
  }
}

void write_entropy(std::ostream& o, const EntropySummary& e) {
  o << "trees " << e.trees << '\n'
    << "internal_nodes " << e.internal_nodes << '\n'
    << "lossy_nodes " << e.lossy_nodes << '\n'
    << "mean_loss_bits " << fmt(e.mean_loss_bits) << '\n'
    << "max_loss_bits " << fmt(e.max_loss_bits) << '\n'
    << "mean_root_entropy_bits " << fmt(e.mean_root_entropy_bits) << '\n';
}

// Silent counts of the variation events of every generation, per bin.
std::vector<BinCount> pooled_variation(const RunStats& stats) {
  std::vector<BinCount> total(stats.bins.size());
  for (const GenStats& g : stats.rows) {
    for (std::size_t b = 0; b < g.silent_by_bin.size() && b < total.size(); ++b) {
      total[b].trials += g.silent_by_bin[b].trials;
      total[b].silent += g.silent_by_bin[b].silent;
    }
  }
  return total;
}

void write_pooled_variation(std::ostream& o, const RunStats& stats) {
  o << "bin trials silent silent_fraction\n";
  const std::vector<BinCount> pooled = pooled_variation(stats);
  for (std::size_t b = 0; b < pooled.size(); ++b) {
    o << bin_spec(stats.bins[b]) << ' ' << pooled[b].trials << ' '
      << pooled[b].silent << ' ' << fmt(pooled[b].fraction()) << '\n';
  }
}

std::string csv_text(const RunStats& stats) {
  std::ostringstream o;
  write_csv(o, stats);
  return o.str();
}

// Rounded ratio of evolved to initial mean tree size.
int auto_member_count(const RunStats& mono) {
  const double initial = mono.rows.front().mean_size;
  const double final_size = mono.rows.back().mean_size;
  return std::max(1, static_cast<int>(std::lround(final_size / initial)));
}

struct PendingFile {
  std::string name;
  std::string content;
};

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config, int workers) {
  config.validate();
  const TestSuite suite = make_sextic_suite(static_cast<std::size_t>(config.suite.n_cases),
                                            config.suite_seed(),
                                            config.suite.pdiv_threshold);
  GpParams gp = config.gp;
  gp.seed = config.seed;
  EngineOptions options;
  options.workers = workers;
  options.depth_bins = config.analysis.depth_bins;
  const std::vector<DepthBin>& bins = config.analysis.depth_bins;
  const FdpOptions fdp_options{gp.mutation_height, config.analysis.silent_tolerance,
                               workers};

  ExperimentOutcome outcome;
  std::vector<PendingFile> files;
  std::ostringstream sum;
  sum << "opengp " << version() << '\n'
      << "mode " << to_string(config.mode) << '\n'
      << "seed " << config.seed << '\n'
      << "suite sextic cases " << config.suite.n_cases << " seed "
      << config.suite_seed() << '\n'
      << "height_convention nodes on the longest root-to-leaf path (a lone "
         "terminal has height 1)\n"
      << "fit_rule every case within hit_threshold " << fmt(gp.hit_threshold) << '\n';

  const bool want_mono = config.mode != Mode::Open;
  const bool want_open = config.mode != Mode::Monolithic;
  std::optional<FdpStats> mono_fdp;
  std::optional<OrganismFdp> open_fdp;

  if (want_mono) {
    outcome.monolithic = run(gp, suite, options);
    const RunResult& r = *outcome.monolithic;
    files.push_back({"stats_monolithic.csv", csv_text(r.stats)});
    const PopulationSummary ps = summarize_population(r.final_population.members,
                                                      suite.count());
    sum << "\n[monolithic final population]\n";
    write_population(sum, ps, "tree");
    sum << "fit_count " << ps.fit_count << '\n'
        << "best_fitness " << fmt(r.stats.rows.back().best_fitness) << '\n'
        << "height_limit "
        << (gp.height_limit ? std::to_string(*gp.height_limit) : "none") << '\n';
    sum << "\n[monolithic variation events, all generations]\n";
    write_pooled_variation(sum, r.stats);
    if (config.analysis.fdp) {
      Rng rng(config.analysis_seed());
      mono_fdp = fdp_statistics(r.final_population.members, suite,
                                config.analysis.fdp_trials, bins, rng, fdp_options);
      sum << "\n[monolithic fdp, final population, " << config.analysis.fdp_trials
          << " trials per bin]\n";
      write_fdp_table(sum, *mono_fdp);
    }
    if (config.analysis.entropy) {
      std::vector<ExprTree> trees;
      for (const Individual& ind : r.final_population.members) trees.push_back(ind.tree);
      sum << "\n[monolithic entropy, final population]\n";
      write_entropy(sum, summarize_entropy(trees, suite));
    }
    if (config.analysis.fit_target > 0) {
      const FitTreePool pool = collect_fit_trees(gp, suite, config.analysis.fit_target,
                                                 config.analysis.fit_max_runs,
                                                 options, &r);
      std::string text;
      for (const ExprTree& t : pool.trees) text += to_sexpr(t) + '\n';
      files.push_back({"fit_trees.txt", text});
      sum << "\n[fit trees]\n"
          << "source pooled final populations of " << pool.runs
          << " runs, gp seeds " << pool.seeds.front() << ".." << pool.seeds.back() << '\n'
          << "collected " << pool.trees.size() << " target "
          << config.analysis.fit_target << '\n';
      if (!pool.trees.empty()) write_population(sum, summarize_trees(pool.trees), "tree");
    }
  }

  if (want_open) {
    OrganismParams op = *config.organism;
    if (config.organism_members_auto) {
      op.member_count = auto_member_count(outcome.monolithic->stats);
    }
    outcome.resolved_organism = op;
    outcome.open = run_open(gp, op, suite, options);
    const OpenRunResult& r = *outcome.open;
    files.push_back({"stats_open.csv", csv_text(r.stats)});
    const PopulationSummary ps = summarize_population(r.final_population, suite.count());
    sum << "\n[open final population]\n"
        << "member_count " << op.member_count << '\n'
        << "depth_cap " << (op.depth_cap ? std::to_string(*op.depth_cap) : "none") << '\n'
        << "register_count " << op.register_count << '\n'
        << "organism_reading the organism is one program built from member_count "
           "separate member programs\n"
        << "member_height_reading heights below are per member tree, for side by "
           "side reading against monolithic tree heights\n";
    if (config.organism_members_auto) {
      sum << "member_count_source auto, evolved over initial monolithic mean size\n";
    }
    for (const std::string& w : op.validate()) sum << "warning " << w << '\n';
    write_population(sum, ps, "member");
    sum << "fit_count " << ps.fit_count << '\n'
        << "best_fitness " << fmt(r.stats.rows.back().best_fitness) << '\n';
    sum << "\n[open variation events, all generations]\n";
    write_pooled_variation(sum, r.stats);
    if (config.analysis.fdp) {
      Rng rng(config.analysis_seed() ^ 0x9e3779b97f4a7c15ULL);
      open_fdp = member_fdp_statistics(r.final_population, suite,
                                       config.analysis.fdp_trials, bins, rng,
                                       fdp_options);
      sum << "\n[open fdp by member site depth, member output unchanged]\n";
      write_fdp_table(sum, open_fdp->member_output);
      sum << "\n[open fdp by member site depth, organism fitness unchanged]\n";
      write_fdp_table(sum, open_fdp->organism_fitness);
    }
    if (config.analysis.entropy) {
      sum << "\n[open entropy, final population member trees]\n";
      write_entropy(sum, summarize_entropy(r.final_population, suite));
    }
  }

  if (want_mono && want_open) {
    sum << "\n[comparison, silent fraction of variation events by site depth]\n"
        << "bin monolithic open\n";
    const auto mono = pooled_variation(outcome.monolithic->stats);
    const auto open = pooled_variation(outcome.open->stats);
    for (std::size_t b = 0; b < bins.size(); ++b) {
      sum << bin_spec(bins[b]) << ' ' << fmt(mono[b].fraction()) << ' '
          << fmt(open[b].fraction()) << '\n';
    }
    if (mono_fdp && open_fdp) {
      sum << "\n[comparison, fdp silent fraction by site depth]\n"
          << "bin monolithic open_member_output open_organism_fitness\n";
      for (std::size_t b = 0; b < bins.size(); ++b) {
        sum << bin_spec(bins[b]) << ' ' << fmt(mono_fdp->bins[b].silent_fraction) << ' '
            << fmt(open_fdp->member_output.bins[b].silent_fraction) << ' '
            << fmt(open_fdp->organism_fitness.bins[b].silent_fraction) << '\n';
      }
    }
  }

  ExperimentConfig resolved = config;
  resolved.gp.seed = config.seed;
  resolved.suite.seed = config.suite_seed();
  resolved.analysis.seed = config.analysis_seed();
  if (outcome.resolved_organism) {
    resolved.organism = outcome.resolved_organism;
    resolved.organism_members_auto = false;
  }
  outcome.manifest = "# opengp manifest\n# artifact_version " + std::string(version()) +
                     "\n" + config_text(resolved);
  outcome.summary = sum.str();
  files.push_back({"summary.txt", outcome.summary});
  files.push_back({"manifest.txt", outcome.manifest});

  const std::filesystem::path dir = config.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + dir.string() +
                             "': " + ec.message());
  }
  try {
    for (const PendingFile& f : files) {
      write_file_atomic(dir / f.name, f.content);
      outcome.files.push_back(dir / f.name);
    }
  } catch (...) {
    for (const auto& p : outcome.files) std::filesystem::remove(p, ec);
    throw;
  }
  return outcome;
}

}  // namespace opengp
