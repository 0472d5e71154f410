#ifndef OPENGP_INFO_ANALYSIS_HPP
#define OPENGP_INFO_ANALYSIS_HPP

#include <optional>
#include <span>
#include <vector>

#include "opengp/eval.hpp"
#include "opengp/expr_tree.hpp"
#include "opengp/gp_engine.hpp"
#include "opengp/run_stats.hpp"

namespace opengp {

// ---------------------------------------------------------------------------
// Entropy
//
// All entropies are empirical Shannon entropies in bits over exact (bitwise)
// distinct doubles. With no binning a deterministic operator can only merge
// operand pairs, so the loss joint - output is never negative.
// ---------------------------------------------------------------------------

/// -sum p_i log2 p_i over the distinct values of `v`. Throws on empty input.
double value_entropy(std::span<const double> v);

/// Entropy of the distinct (a[i], b[i]) pairs.
double joint_entropy(std::span<const double> a, std::span<const double> b);

struct NodeEntropy {
  double entropy_bits = 0.0;
  double operand_joint_entropy_bits = 0.0;  // equals entropy_bits on leaves
  double loss_bits = 0.0;                   // 0 on leaves
};

struct EntropyReport {
  std::vector<NodeEntropy> per_node;  // indexed by NodeId
};

EntropyReport entropy_report(const ExprTree& tree, const TestSuite& suite);
EntropyReport entropy_report(const ExprTree& tree, const NodeValues& values);

// ---------------------------------------------------------------------------
// Disruption tracing
// ---------------------------------------------------------------------------

enum class PerturbationKind { ReplaceValues };

struct Perturbation {
  PerturbationKind kind = PerturbationKind::ReplaceValues;
  ValueVector values;
};

struct AncestorRecord {
  NodeId node = 0;
  int depth = 0;
  std::size_t visible_cases = 0;  // cases differing bitwise from the original
};

struct PropagationTrace {
  NodeId origin = 0;
  Perturbation perturbation;
  std::vector<AncestorRecord> per_ancestor;  // origin first, root last
  std::optional<NodeId> absorbed_at;         // first record with 0 visible
  bool fitness_changed = false;
};

/// Treats `origin`'s output as `perturbed` and re-evaluates only its root
/// path; siblings keep their undisrupted vectors. Throws std::out_of_range on
/// a bad origin and std::invalid_argument on a wrong-length vector.
PropagationTrace inject_disruption(const ExprTree& tree, const TestSuite& suite,
                                   NodeId origin, const ValueVector& perturbed);

/// Same, reusing precomputed eval_all_nodes() output.
PropagationTrace inject_disruption(const ExprTree& tree, const TestSuite& suite,
                                   const NodeValues& values, NodeId origin,
                                   const ValueVector& perturbed);

inline constexpr double kDefaultPerturbationEpsilon = 1e-3;

/// values[i] + epsilon for every case.
ValueVector additive_perturbation(std::span<const double> values,
                                  double epsilon = kDefaultPerturbationEpsilon);

/// Output vector of `replacement`, i.e. the disruption caused by swapping a
/// node's subtree for `replacement`.
ValueVector subtree_perturbation(const ExprTree& replacement,
                                 const TestSuite& suite,
                                 RegisterView registers = {});

// ---------------------------------------------------------------------------
// Fitness-copy shortcut
// ---------------------------------------------------------------------------

/// Result of pushing a replacement subtree's output up a cached root path.
struct PathUpdate {
  bool unchanged = false;         // some path vector matched the cached one
  ValueVector root_values;        // new root output when !unchanged
  std::size_t ancestors_evaluated = 0;
  std::size_t nodes_evaluated = 0;  // subtree nodes + ancestors
};

/// Evaluates `replacement` and recomputes the ancestors of `site` from one
/// changed and one cached operand, stopping as soon as a recomputed vector
/// is bitwise equal to the cached one.
PathUpdate propagate_replacement(const ExprTree& tree, const NodeValues& values,
                                 NodeId site, const ExprTree& replacement,
                                 const TestSuite& suite,
                                 RegisterView registers = {});

struct ShortcutResult {
  double fitness = 0.0;
  bool copied = false;
  std::size_t ancestors_evaluated = 0;
  std::size_t nodes_evaluated = 0;
};

/// Fitness of `parent` with the subtree at `site` replaced by `new_subtree`.
/// Always bitwise-equal to fitness() of the child tree; when the disruption
/// is absorbed on the root path the parent's fitness is copied instead.
ShortcutResult incremental_child_fitness(const Individual& parent,
                                         const NodeValues& parent_values,
                                         NodeId site,
                                         const ExprTree& new_subtree,
                                         const TestSuite& suite);

// ---------------------------------------------------------------------------
// FDP statistics
// ---------------------------------------------------------------------------

inline constexpr double kDefaultSilentTolerance = 1e-9;

struct FdpBin {
  DepthBin range;
  std::int64_t trials = 0;
  std::int64_t silent = 0;           // child fitness bitwise == parent fitness
  double silent_fraction = 0.0;      // 0 when trials == 0
  std::int64_t near_silent = 0;      // |delta| <= tolerance * max(1, |parent|)
  double near_silent_fraction = 0.0;
};

struct FdpStats {
  std::vector<FdpBin> bins;
};

struct FdpOptions {
  int mutation_height = 4;
  double tolerance = kDefaultSilentTolerance;
  int workers = 1;
};

/// For each bin, draws `trials_per_bin` sites uniformly among all nodes of
/// the population whose depth falls in the bin, replaces each with a fresh
/// GROW subtree, and counts children whose fitness is unchanged. All random
/// draws happen up front, so results do not depend on the worker count.
FdpStats fdp_statistics(std::span<const Individual> pop, const TestSuite& suite,
                        int trials_per_bin, std::span<const DepthBin> bins,
                        Rng& rng, const FdpOptions& options = {});

/// Shared counting rule for tolerant silence.
bool near_equal_fitness(double a, double b, double tolerance) noexcept;

/// Finalizes silent fractions from trial and silent counts.
void finalize_fdp(FdpStats& stats);

}  // namespace opengp

#endif  // OPENGP_INFO_ANALYSIS_HPP
