#include "opengp/gp_engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "opengp/info_analysis.hpp"
#include "opengp/parallel.hpp"

namespace opengp {

namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw std::invalid_argument(std::string(field) + ": " + what);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void GpParams::validate() const {
  require(population_size >= 2, "population_size", "must be >= 2");
  require(generations >= 0, "generations", "must be >= 0");
  require(tournament_size >= 1 && tournament_size <= population_size,
          "tournament_size", "must be in [1, population_size]");
  require(is_probability(crossover_rate), "crossover_rate", "must be in [0, 1]");
  require(is_probability(mutation_rate), "mutation_rate", "must be in [0, 1]");
  require(crossover_rate + mutation_rate <= 1.0, "mutation_rate",
          "crossover_rate + mutation_rate must be <= 1");
  require(init_min_height >= 1, "init_min_height", "must be >= 1");
  require(init_max_height >= init_min_height, "init_max_height",
          "must be >= init_min_height");
  require(!height_limit || *height_limit >= init_max_height, "height_limit",
          "must be >= init_max_height");
  require(hit_threshold > 0.0 && std::isfinite(hit_threshold), "hit_threshold",
          "must be finite and > 0");
  require(mutation_height >= 1, "mutation_height", "must be >= 1");
  require(is_probability(internal_site_bias), "internal_site_bias",
          "must be in [0, 1]");
  require(variation_attempts >= 1, "variation_attempts", "must be >= 1");
}

Individual evaluate_individual(ExprTree tree, const TestSuite& suite,
                               double hit_threshold) {
  const NodeValues values = eval_all_nodes(tree, suite);
  const auto out = values.row(tree.root());
  Individual ind{std::move(tree)};
  ind.fitness = score_outputs(out, suite);
  ind.hits = static_cast<std::uint32_t>(count_hits(out, suite, hit_threshold));
  return ind;
}

Population init_population(const GpParams& params, const TestSuite& suite,
                           Rng& rng, int workers) {
  params.validate();
  const int span = params.init_max_height - params.init_min_height + 1;
  std::vector<ExprTree> trees;
  trees.reserve(static_cast<std::size_t>(params.population_size));
  for (int i = 0; i < params.population_size; ++i) {
    const int height = params.init_min_height + (i / 2) % span;
    const InitMethod method = i % 2 == 0 ? InitMethod::Full : InitMethod::Grow;
    trees.push_back(random_tree(method, height, rng));
  }
  Population pop;
  pop.members.resize(trees.size());
  parallel_for(trees.size(), workers, [&](std::size_t i) {
    pop.members[i] =
        evaluate_individual(std::move(trees[i]), suite, params.hit_threshold);
  });
  return pop;
}

std::size_t tournament_select(std::span<const Individual> pop, int k, Rng& rng) {
  return tournament_select_by(
      pop.size(), k, rng, [&](std::size_t i) { return pop[i].fitness; },
      [&](std::size_t i) { return pop[i].tree.size(); });
}

NodeId pick_site(const ExprTree& tree, double internal_bias, Rng& rng) {
  const auto nodes = tree.nodes();
  const auto internal = static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const Node& n) { return is_function(n.kind); }));
  const std::size_t leaves = nodes.size() - internal;
  bool want_internal = false;
  if (internal > 0) {
    std::bernoulli_distribution coin(internal_bias);
    want_internal = coin(rng);
  }
  std::uniform_int_distribution<std::size_t> pick(
      0, (want_internal ? internal : leaves) - 1);
  std::size_t rank = pick(rng);
  for (NodeId id = 0; id < nodes.size(); ++id) {
    if (is_function(nodes[id].kind) == want_internal && rank-- == 0) return id;
  }
  return 0;  // unreachable
}

CrossoverResult subtree_crossover(const ExprTree& parent1,
                                  const ExprTree& parent2, Rng& rng,
                                  const VariationLimits& limits) {
  for (int attempt = 0; attempt < limits.attempts; ++attempt) {
    const NodeId site = pick_site(parent1, limits.internal_site_bias, rng);
    const NodeId donor = pick_site(parent2, limits.internal_site_bias, rng);
    ExprTree donated = subtree_at(parent2, donor);
    ExprTree child = replace_subtree(parent1, site, donated);
    if (!limits.height_limit || tree_height(child) <= *limits.height_limit) {
      return {std::move(child), CrossoverInfo{site, donor}, std::move(donated)};
    }
  }
  return {parent1, std::nullopt, ExprTree()};
}

MutationResult subtree_mutation(const ExprTree& parent, Rng& rng,
                                const VariationLimits& limits,
                                const PrimitiveSet& prims) {
  std::uniform_int_distribution<NodeId> pick(
      0, static_cast<NodeId>(parent.size() - 1));
  for (int attempt = 0; attempt < limits.attempts; ++attempt) {
    const NodeId site = pick(rng);
    ExprTree fresh =
        random_tree(InitMethod::Grow, limits.mutation_height, rng, prims);
    ExprTree child = replace_subtree(parent, site, fresh);
    if (!limits.height_limit || tree_height(child) <= *limits.height_limit) {
      return {std::move(child), site, std::move(fresh)};
    }
  }
  return {parent, std::nullopt, ExprTree()};
}

GenStats population_stats(const Population& pop, std::size_t n_cases,
                          const std::vector<DepthBin>& bins) {
  if (pop.members.empty()) throw std::invalid_argument("empty population");
  GenStats g;
  g.generation = pop.generation;
  g.silent_by_bin.assign(bins.size(), BinCount{});
  std::vector<double> fitnesses;
  std::vector<double> sizes;
  std::vector<double> heights;
  for (const Individual& ind : pop.members) {
    fitnesses.push_back(ind.fitness);
    sizes.push_back(static_cast<double>(ind.tree.size()));
    heights.push_back(static_cast<double>(tree_height(ind.tree)));
    if (ind.hits == n_cases) ++g.fit_count;
  }
  g.best_fitness = *std::min_element(fitnesses.begin(), fitnesses.end());
  g.mean_fitness = mean(fitnesses);
  g.mean_size = mean(sizes);
  g.mean_height = mean(heights);
  g.height = quartiles(heights);
  return g;
}

namespace {

enum class ChildKind { Copy, Varied };

struct ChildPlan {
  ChildKind kind = ChildKind::Copy;
  std::size_t parent = 0;
  NodeId site = 0;
  ExprTree inserted;
  ExprTree child;
};

struct EvalOutcome {
  double fitness = 0.0;
  std::uint32_t hits = 0;
  bool copied = false;
};

}  // namespace

Generation evolve_generation(const Population& pop, const GpParams& params,
                             const TestSuite& suite, Rng& rng,
                             const EngineOptions& options) {
  const auto members = std::span<const Individual>(pop.members);
  const VariationLimits limits = VariationLimits::from(params);
  const std::size_t n = pop.members.size();

  // Sequential, RNG-consuming phase.
  std::vector<ChildPlan> plans(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    ChildPlan& plan = plans[i];
    const double u = unit(rng);
    if (u < params.crossover_rate) {
      plan.parent = tournament_select(members, params.tournament_size, rng);
      const std::size_t other = tournament_select(members, params.tournament_size, rng);
      CrossoverResult x = subtree_crossover(members[plan.parent].tree,
                                            members[other].tree, rng, limits);
      if (x.info) {
        plan.kind = ChildKind::Varied;
        plan.site = x.info->site;
        plan.inserted = std::move(x.donated);
        plan.child = std::move(x.child);
      }
    } else if (u < params.crossover_rate + params.mutation_rate) {
      plan.parent = tournament_select(members, params.tournament_size, rng);
      MutationResult m = subtree_mutation(members[plan.parent].tree, rng, limits);
      if (m.site) {
        plan.kind = ChildKind::Varied;
        plan.site = *m.site;
        plan.inserted = std::move(m.inserted);
        plan.child = std::move(m.child);
      }
    } else {
      plan.parent = tournament_select(members, params.tournament_size, rng);
    }
  }

  // Pure evaluation phase; results land in per-child slots.
  std::vector<EvalOutcome> outcomes(n);
  std::int64_t nodes_evaluated = 0;
  if (params.shortcut_enabled) {
    std::map<std::size_t, std::vector<std::size_t>> by_parent;
    for (std::size_t i = 0; i < n; ++i) {
      if (plans[i].kind == ChildKind::Varied) by_parent[plans[i].parent].push_back(i);
    }
    const std::vector<std::pair<std::size_t, std::vector<std::size_t>>> groups(
        by_parent.begin(), by_parent.end());
    std::vector<std::int64_t> group_nodes(groups.size(), 0);
    parallel_for(groups.size(), options.workers, [&](std::size_t g) {
      const Individual& parent = members[groups[g].first];
      const NodeValues values = eval_all_nodes(parent.tree, suite);
      std::int64_t cost = static_cast<std::int64_t>(parent.tree.size());
      for (std::size_t i : groups[g].second) {
        const PathUpdate up = propagate_replacement(
            parent.tree, values, plans[i].site, plans[i].inserted, suite);
        cost += static_cast<std::int64_t>(up.nodes_evaluated);
        EvalOutcome& o = outcomes[i];
        if (up.unchanged) {
          o = {parent.fitness, parent.hits, true};
        } else {
          o.fitness = score_outputs(up.root_values, suite);
          o.hits = static_cast<std::uint32_t>(
              count_hits(up.root_values, suite, params.hit_threshold));
        }
      }
      group_nodes[g] = cost;
    });
    for (std::int64_t c : group_nodes) nodes_evaluated += c;
  } else {
    std::vector<std::int64_t> child_nodes(n, 0);
    parallel_for(n, options.workers, [&](std::size_t i) {
      if (plans[i].kind != ChildKind::Varied) return;
      const Individual ind =
          evaluate_individual(plans[i].child, suite, params.hit_threshold);
      outcomes[i] = {ind.fitness, ind.hits, false};
      child_nodes[i] = static_cast<std::int64_t>(plans[i].child.size());
    });
    for (std::int64_t c : child_nodes) nodes_evaluated += c;
  }

  Generation next;
  next.population.generation = pop.generation + 1;
  next.population.members.reserve(n);
  std::vector<BinCount> bins(options.depth_bins.size());
  std::int64_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Individual& parent = members[plans[i].parent];
    if (plans[i].kind == ChildKind::Copy) {
      Individual copy = parent;
      copy.fitness_copied = false;
      next.population.members.push_back(std::move(copy));
      continue;
    }
    const EvalOutcome& o = outcomes[i];
    if (o.copied) ++hits;
    // Depth of the site = number of nodes on its root path.
    int depth = 1;
    for (NodeId id = plans[i].site; id != parent.tree.root();
         id = parent.tree.node(id).parent) {
      ++depth;
    }
    if (const auto b = find_bin(options.depth_bins, depth)) {
      ++bins[*b].trials;
      if (std::bit_cast<std::uint64_t>(o.fitness) ==
          std::bit_cast<std::uint64_t>(parent.fitness)) {
        ++bins[*b].silent;
      }
    }
    Individual child{std::move(plans[i].child)};
    child.fitness = o.fitness;
    child.fitness_copied = o.copied;
    child.hits = o.hits;
    next.population.members.push_back(std::move(child));
  }

  next.stats = population_stats(next.population, suite.count(), options.depth_bins);
  next.stats.shortcut_hits = hits;
  next.stats.nodes_evaluated = nodes_evaluated;
  next.stats.silent_by_bin = std::move(bins);
  return next;
}

RunResult run(const GpParams& params, const TestSuite& suite,
              const EngineOptions& options, const GenerationObserver& observer) {
  params.validate();
  Rng rng(params.seed);
  RunResult result;
  result.stats.bins = options.depth_bins;
  Population pop = init_population(params, suite, rng, options.workers);
  GenStats initial = population_stats(pop, suite.count(), options.depth_bins);
  for (const Individual& ind : pop.members) {
    initial.nodes_evaluated += static_cast<std::int64_t>(ind.tree.size());
  }
  if (observer) observer(pop, initial);
  result.stats.rows.push_back(std::move(initial));
  for (int g = 0; g < params.generations; ++g) {
    Generation next = evolve_generation(pop, params, suite, rng, options);
    if (observer) observer(next.population, next.stats);
    result.stats.rows.push_back(std::move(next.stats));
    pop = std::move(next.population);
  }
  result.final_population = std::move(pop);
  return result;
}

}  // namespace opengp
