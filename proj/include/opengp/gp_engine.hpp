#ifndef OPENGP_GP_ENGINE_HPP
#define OPENGP_GP_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "opengp/eval.hpp"
#include "opengp/expr_tree.hpp"
#include "opengp/run_stats.hpp"

namespace opengp {

struct GpParams {
  int population_size = 500;
  int generations = 50;
  int tournament_size = 7;
  double crossover_rate = 0.9;
  double mutation_rate = 0.05;  // reproduction gets the remainder
  int init_min_height = 2;
  int init_max_height = 6;
  std::optional<int> height_limit;  // absent: unlimited growth
  std::uint64_t seed = 0;
  bool shortcut_enabled = true;
  double hit_threshold = 0.01;
  int mutation_height = 4;            // max height of fresh mutation subtrees
  double internal_site_bias = 0.9;    // crossover sites drawn from internal nodes
  int variation_attempts = 10;        // tries before falling back to a copy

  /// Throws std::invalid_argument whose message starts with the field name.
  void validate() const;
};

/// Limits shared by every variation operator.
struct VariationLimits {
  std::optional<int> height_limit;
  double internal_site_bias = 0.9;
  int attempts = 10;
  int mutation_height = 4;

  static VariationLimits from(const GpParams& p) {
    return {p.height_limit, p.internal_site_bias, p.variation_attempts,
            p.mutation_height};
  }
};

struct Individual {
  ExprTree tree;
  double fitness = 0.0;
  bool fitness_copied = false;  // inherited through the shortcut evaluator
  std::uint32_t hits = 0;       // cases within hit_threshold of the target
};

/// Full evaluation of `tree`.
Individual evaluate_individual(ExprTree tree, const TestSuite& suite,
                               double hit_threshold);

struct Population {
  std::vector<Individual> members;
  int generation = 0;
};

/// Ramped half-and-half: individual i gets height
/// init_min_height + (i / 2) % span, FULL for even i and GROW for odd i.
/// Every member is evaluated.
Population init_population(const GpParams& params, const TestSuite& suite,
                           Rng& rng, int workers = 1);

/// k uniform draws with replacement over [0, n); lowest fitness wins, ties go
/// to the smaller size, then to the lower index.
template <typename FitnessOf, typename SizeOf>
std::size_t tournament_select_by(std::size_t n, int k, Rng& rng,
                                 FitnessOf fitness_of, SizeOf size_of) {
  if (n == 0 || k < 1) {
    throw std::invalid_argument("tournament needs a population and k >= 1");
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t best = pick(rng);
  for (int i = 1; i < k; ++i) {
    const std::size_t c = pick(rng);
    const double fc = fitness_of(c);
    const double fb = fitness_of(best);
    if (fc < fb || (fc == fb && (size_of(c) < size_of(best) ||
                                 (size_of(c) == size_of(best) && c < best)))) {
      best = c;
    }
  }
  return best;
}

std::size_t tournament_select(std::span<const Individual> pop, int k, Rng& rng);

/// Site choice: with probability `internal_bias` a uniform internal node
/// (when the tree has any), else a uniform leaf.
NodeId pick_site(const ExprTree& tree, double internal_bias, Rng& rng);

struct CrossoverInfo {
  NodeId site = 0;        // in parent 1
  NodeId donor_site = 0;  // in parent 2
};

struct CrossoverResult {
  ExprTree child;
  std::optional<CrossoverInfo> info;  // empty: every attempt broke the limit
  ExprTree donated;                   // subtree inserted at info->site
};

CrossoverResult subtree_crossover(const ExprTree& parent1,
                                  const ExprTree& parent2, Rng& rng,
                                  const VariationLimits& limits = {});

struct MutationResult {
  ExprTree child;
  std::optional<NodeId> site;  // empty: every attempt broke the limit
  ExprTree inserted;
};

/// Replaces a uniformly chosen node's subtree with a fresh GROW tree.
MutationResult subtree_mutation(const ExprTree& parent, Rng& rng,
                                const VariationLimits& limits = {},
                                const PrimitiveSet& prims = {});

/// Analysis switches that do not change the evolutionary trajectory.
struct EngineOptions {
  int workers = 1;
  std::vector<DepthBin> depth_bins = default_depth_bins();
};

struct Generation {
  Population population;
  GenStats stats;
};

/// Statistics for an already-evaluated population; variation counters are
/// left at zero.
GenStats population_stats(const Population& pop, std::size_t n_cases,
                          const std::vector<DepthBin>& bins);

Generation evolve_generation(const Population& pop, const GpParams& params,
                             const TestSuite& suite, Rng& rng,
                             const EngineOptions& options = {});

struct RunResult {
  RunStats stats;
  Population final_population;
};

using GenerationObserver = std::function<void(const Population&, const GenStats&)>;

/// Full seeded run: generation 0 is the initial population, followed by
/// params.generations evolved generations.
RunResult run(const GpParams& params, const TestSuite& suite,
              const EngineOptions& options = {},
              const GenerationObserver& observer = {});

}  // namespace opengp

#endif  // OPENGP_GP_ENGINE_HPP
