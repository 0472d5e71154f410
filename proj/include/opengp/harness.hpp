#ifndef OPENGP_HARNESS_HPP
#define OPENGP_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "opengp/config.hpp"
#include "opengp/gp_engine.hpp"
#include "opengp/info_analysis.hpp"
#include "opengp/open_arch.hpp"
#include "opengp/stats.hpp"

namespace opengp {

const char* version() noexcept;

struct PopulationSummary {
  std::size_t trees = 0;  // members for organisms
  double height_mean = 0.0;
  Quartiles height;
  double size_mean = 0.0;
  std::int64_t fit_count = 0;  // individuals hitting every case
};

/// Height and size statistics over the trees; throws std::invalid_argument
/// on an empty population.
PopulationSummary summarize_population(std::span<const Individual> pop,
                                       std::size_t n_cases);

/// Heights and sizes over every member tree; fit_count over organisms.
PopulationSummary summarize_population(std::span<const OrganismIndividual> pop,
                                       std::size_t n_cases);

/// Same, for bare trees (fit_count is left at zero).
PopulationSummary summarize_trees(std::span<const ExprTree> trees);

/// Fit trees pooled from the final populations of runs with gp seeds
/// params.seed, params.seed + 1, ... until `target` trees are collected or
/// `max_runs` runs have been made.
struct FitTreePool {
  std::vector<ExprTree> trees;
  int runs = 0;
  std::vector<std::uint64_t> seeds;
};

FitTreePool collect_fit_trees(const GpParams& params, const TestSuite& suite,
                              int target, int max_runs,
                              const EngineOptions& options = {},
                              const RunResult* first_run = nullptr);

/// Whole-population entropy figures.
struct EntropySummary {
  std::size_t trees = 0;
  std::size_t internal_nodes = 0;
  std::size_t lossy_nodes = 0;        // loss_bits > 0
  double mean_loss_bits = 0.0;        // per internal node
  double max_loss_bits = 0.0;
  double mean_root_entropy_bits = 0.0;
};

EntropySummary summarize_entropy(std::span<const ExprTree> trees,
                                 const TestSuite& suite);

/// Over every member tree, evaluated against the registers it actually sees.
EntropySummary summarize_entropy(std::span<const OrganismIndividual> pop,
                                 const TestSuite& suite);

struct ExperimentOutcome {
  std::vector<std::filesystem::path> files;
  std::optional<RunResult> monolithic;
  std::optional<OpenRunResult> open;
  std::optional<OrganismParams> resolved_organism;
  std::string summary;
  std::string manifest;
};

/// Runs the configured mode(s) and writes stats_<mode>.csv, summary.txt,
/// manifest.txt and (when fit trees are pooled) fit_trees.txt into
/// config.output_dir. Files appear atomically; on an I/O failure everything
/// written by this call is removed and std::runtime_error is thrown.
/// `workers` never changes the output bytes.
ExperimentOutcome run_experiment(const ExperimentConfig& config, int workers = 1);

/// Writes `content` to `path` through a temporary file and a rename.
/// Throws std::runtime_error on failure.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// One s-expression per line; blank lines and lines starting with '#' are
/// skipped. Throws ParseError (with the line number in the message) or
/// std::runtime_error when the file cannot be read.
std::vector<ExprTree> read_tree_file(const std::filesystem::path& path);

}  // namespace opengp

#endif  // OPENGP_HARNESS_HPP
