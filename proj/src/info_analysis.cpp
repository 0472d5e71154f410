#include "opengp/info_analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include "opengp/parallel.hpp"

namespace opengp {

namespace {

template <typename T>
double entropy_of_sorted(const std::vector<T>& sorted) {
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    counts.push_back(j - i);
    i = j;
  }
  // Summing over sorted counts makes equal partitions give equal bits.
  std::sort(counts.begin(), counts.end());
  const double n = static_cast<double>(sorted.size());
  double h = 0.0;
  for (std::size_t c : counts) {
    const double cd = static_cast<double>(c);
    h += (cd / n) * std::log2(n / cd);
  }
  return h;
}

std::size_t count_differences(std::span<const double> a,
                              std::span<const double> b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) {
      ++d;
    }
  }
  return d;
}

bool same_double(double a, double b) noexcept {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

}  // namespace

double value_entropy(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("entropy of empty vector");
  std::vector<std::uint64_t> bits(v.size());
  std::transform(v.begin(), v.end(), bits.begin(),
                 [](double d) { return std::bit_cast<std::uint64_t>(d); });
  std::sort(bits.begin(), bits.end());
  return entropy_of_sorted(bits);
}

double joint_entropy(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || a.size() != b.size()) {
    throw std::invalid_argument("joint entropy needs two equal non-empty vectors");
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    pairs[i] = {std::bit_cast<std::uint64_t>(a[i]),
                std::bit_cast<std::uint64_t>(b[i])};
  }
  std::sort(pairs.begin(), pairs.end());
  return entropy_of_sorted(pairs);
}

EntropyReport entropy_report(const ExprTree& tree, const NodeValues& values) {
  EntropyReport report;
  report.per_node.resize(tree.size());
  for (NodeId id = 0; id < tree.size(); ++id) {
    NodeEntropy& e = report.per_node[id];
    e.entropy_bits = value_entropy(values.row(id));
    const Node& n = tree.node(id);
    if (is_function(n.kind)) {
      e.operand_joint_entropy_bits =
          joint_entropy(values.row(n.left), values.row(n.right));
      e.loss_bits = e.operand_joint_entropy_bits - e.entropy_bits;
    } else {
      e.operand_joint_entropy_bits = e.entropy_bits;
    }
  }
  return report;
}

EntropyReport entropy_report(const ExprTree& tree, const TestSuite& suite) {
  return entropy_report(tree, eval_all_nodes(tree, suite));
}

PropagationTrace inject_disruption(const ExprTree& tree, const TestSuite& suite,
                                   NodeId origin, const ValueVector& perturbed) {
  return inject_disruption(tree, suite, eval_all_nodes(tree, suite), origin,
                           perturbed);
}

PropagationTrace inject_disruption(const ExprTree& tree, const TestSuite& suite,
                                   const NodeValues& values, NodeId origin,
                                   const ValueVector& perturbed) {
  if (!tree.contains(origin)) {
    throw std::out_of_range("origin " + std::to_string(origin) +
                            " out of range");
  }
  if (perturbed.size() != suite.count()) {
    throw std::invalid_argument("perturbed vector length " +
                                std::to_string(perturbed.size()) +
                                " != suite size " +
                                std::to_string(suite.count()));
  }
  const auto depth = node_depths(tree);

  PropagationTrace trace;
  trace.origin = origin;
  trace.perturbation = {PerturbationKind::ReplaceValues, perturbed};
  auto record = [&](NodeId id, std::span<const double> now) {
    const std::size_t visible = count_differences(now, values.row(id));
    trace.per_ancestor.push_back({id, depth[id], visible});
    if (visible == 0 && !trace.absorbed_at) trace.absorbed_at = id;
  };

  ValueVector current = perturbed;
  ValueVector next(suite.count());
  record(origin, current);
  for (NodeId id = origin; id != tree.root();) {
    const NodeId p = tree.node(id).parent;
    const Node& pn = tree.node(p);
    const auto left = pn.left == id ? std::span<const double>(current)
                                    : values.row(pn.left);
    const auto right = pn.right == id ? std::span<const double>(current)
                                      : values.row(pn.right);
    apply_op(to_op_kind(pn.kind), left, right, next, suite.pdiv_threshold());
    std::swap(current, next);
    record(p, current);
    id = p;
  }
  const double before = score_outputs(values.row(tree.root()), suite);
  const double after = score_outputs(current, suite);
  trace.fitness_changed = !same_double(before, after);
  return trace;
}

ValueVector additive_perturbation(std::span<const double> values,
                                  double epsilon) {
  ValueVector out(values.begin(), values.end());
  for (double& v : out) v += epsilon;
  return out;
}

ValueVector subtree_perturbation(const ExprTree& replacement,
                                 const TestSuite& suite,
                                 RegisterView registers) {
  return eval_tree(replacement, suite, registers);
}

PathUpdate propagate_replacement(const ExprTree& tree, const NodeValues& values,
                                 NodeId site, const ExprTree& replacement,
                                 const TestSuite& suite,
                                 RegisterView registers) {
  if (!tree.contains(site)) {
    throw std::out_of_range("site " + std::to_string(site) + " out of range");
  }
  PathUpdate update;
  const NodeValues sub = eval_all_nodes(replacement, suite, registers);
  update.nodes_evaluated = replacement.size();
  ValueVector current(sub.row(replacement.root()).begin(),
                      sub.row(replacement.root()).end());
  if (same_bits(current, values.row(site))) {
    update.unchanged = true;
    return update;
  }
  ValueVector next(suite.count());
  for (NodeId id = site; id != tree.root();) {
    const NodeId p = tree.node(id).parent;
    const Node& pn = tree.node(p);
    const auto left = pn.left == id ? std::span<const double>(current)
                                    : values.row(pn.left);
    const auto right = pn.right == id ? std::span<const double>(current)
                                      : values.row(pn.right);
    apply_op(to_op_kind(pn.kind), left, right, next, suite.pdiv_threshold());
    ++update.ancestors_evaluated;
    ++update.nodes_evaluated;
    if (same_bits(next, values.row(p))) {
      update.unchanged = true;
      return update;
    }
    std::swap(current, next);
    id = p;
  }
  update.root_values = std::move(current);
  return update;
}

ShortcutResult incremental_child_fitness(const Individual& parent,
                                         const NodeValues& parent_values,
                                         NodeId site,
                                         const ExprTree& new_subtree,
                                         const TestSuite& suite) {
  const PathUpdate update = propagate_replacement(
      parent.tree, parent_values, site, new_subtree, suite);
  ShortcutResult r;
  r.ancestors_evaluated = update.ancestors_evaluated;
  r.nodes_evaluated = update.nodes_evaluated;
  if (update.unchanged) {
    r.fitness = parent.fitness;
    r.copied = true;
  } else {
    r.fitness = score_outputs(update.root_values, suite);
  }
  return r;
}

bool near_equal_fitness(double a, double b, double tolerance) noexcept {
  if (same_double(a, b) || a == b) return true;
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  return std::fabs(a - b) <= tolerance * std::max(1.0, std::fabs(b));
}

void finalize_fdp(FdpStats& stats) {
  for (FdpBin& b : stats.bins) {
    b.silent_fraction = b.trials == 0 ? 0.0
                                      : static_cast<double>(b.silent) /
                                            static_cast<double>(b.trials);
    b.near_silent_fraction = b.trials == 0
                                 ? 0.0
                                 : static_cast<double>(b.near_silent) /
                                       static_cast<double>(b.trials);
  }
}

FdpStats fdp_statistics(std::span<const Individual> pop, const TestSuite& suite,
                        int trials_per_bin, std::span<const DepthBin> bins,
                        Rng& rng, const FdpOptions& options) {
  if (trials_per_bin < 0) throw std::invalid_argument("trials_per_bin < 0");

  std::vector<std::vector<int>> depths(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) depths[i] = node_depths(pop[i].tree);

  struct Trial {
    std::size_t individual;
    NodeId site;
    std::size_t bin;
    ExprTree subtree;
  };
  std::vector<Trial> trials;

  FdpStats stats;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    stats.bins.push_back({bins[b]});
    // prefix[i] = number of in-bin sites in individuals [0, i]
    std::vector<std::int64_t> prefix(pop.size());
    std::int64_t total = 0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      total += std::count_if(depths[i].begin(), depths[i].end(),
                             [&](int d) { return bins[b].contains(d); });
      prefix[i] = total;
    }
    if (total == 0) continue;
    std::uniform_int_distribution<std::int64_t> pick(0, total - 1);
    for (int t = 0; t < trials_per_bin; ++t) {
      const std::int64_t k = pick(rng);
      const auto it = std::upper_bound(prefix.begin(), prefix.end(), k);
      const auto ind = static_cast<std::size_t>(it - prefix.begin());
      std::int64_t rank = k - (ind == 0 ? 0 : prefix[ind - 1]);
      NodeId site = 0;
      for (NodeId id = 0; id < depths[ind].size(); ++id) {
        if (bins[b].contains(depths[ind][id]) && rank-- == 0) {
          site = id;
          break;
        }
      }
      ExprTree sub = random_tree(InitMethod::Grow, options.mutation_height, rng);
      trials.push_back({ind, site, b, std::move(sub)});
    }
  }

  // Group by individual so each parent is evaluated once.
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t t = 0; t < trials.size(); ++t) {
    groups[trials[t].individual].push_back(t);
  }
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> work(
      groups.begin(), groups.end());
  std::vector<double> child_fitness(trials.size());
  parallel_for(work.size(), options.workers, [&](std::size_t g) {
    const Individual& parent = pop[work[g].first];
    const NodeValues values = eval_all_nodes(parent.tree, suite);
    for (std::size_t t : work[g].second) {
      child_fitness[t] = incremental_child_fitness(parent, values, trials[t].site,
                                                   trials[t].subtree, suite)
                             .fitness;
    }
  });

  for (std::size_t t = 0; t < trials.size(); ++t) {
    FdpBin& bin = stats.bins[trials[t].bin];
    const double parent = pop[trials[t].individual].fitness;
    ++bin.trials;
    if (same_double(child_fitness[t], parent)) ++bin.silent;
    if (near_equal_fitness(child_fitness[t], parent, options.tolerance)) {
      ++bin.near_silent;
    }
  }
  finalize_fdp(stats);
  return stats;
}

}  // namespace opengp
