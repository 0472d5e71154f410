#ifndef OPENGP_OPEN_ARCH_HPP
#define OPENGP_OPEN_ARCH_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "opengp/eval.hpp"
#include "opengp/expr_tree.hpp"
#include "opengp/gp_engine.hpp"
#include "opengp/info_analysis.hpp"
#include "opengp/run_stats.hpp"

namespace opengp {

// Open architecture: an organism is an ordered list of small member trees.
// Members run in list order; each reads x, constants and the shared register
// file, then overwrites its own write register with its output vector.
// Registers start at 0.0 and pass values verbatim, so a disruption only has
// to cross the member's own depth to reach the environment.

inline constexpr int kMinRecommendedDepthCap = 10;
inline constexpr int kMaxRecommendedDepthCap = 100;

struct OrganismParams {
  int member_count = 1;
  std::optional<int> depth_cap = 10;  // absent: unlimited member height
  int register_count = 1;
  int output_register = 0;
  double member_swap_rate = 0.5;      // member_crossover whole-member swaps
  double wiring_mutation_rate = 0.0;  // 0 keeps write registers fixed

  /// Throws std::invalid_argument (message starts with the field name) on
  /// hard violations; returns warnings for a depth cap outside [10, 100].
  std::vector<std::string> validate() const;

  friend bool operator==(const OrganismParams&, const OrganismParams&) = default;
};

struct Member {
  ExprTree tree;
  std::uint32_t write_register = 0;
};

class Organism {
 public:
  /// Throws std::invalid_argument if the member count, heights, register
  /// reads or write registers violate `params`.
  Organism(OrganismParams params, std::vector<Member> members);

  const OrganismParams& params() const noexcept { return params_; }
  std::span<const Member> members() const noexcept { return members_; }
  const Member& member(std::size_t j) const { return members_.at(j); }
  std::size_t total_size() const noexcept;

  /// Copy with member j replaced (validated).
  Organism with_member(std::size_t j, Member m) const;

  friend bool operator==(const Organism& a, const Organism& b);

 private:
  OrganismParams params_;
  std::vector<Member> members_;
};

/// Terminals for new code in member j: x, constants and the registers written
/// by members before j (anything else would only ever read 0.0).
PrimitiveSet member_primitives(const Organism& org, std::size_t j);

/// Round-robin wiring: member j writes register j % register_count.
std::uint32_t default_write_register(const OrganismParams& params, std::size_t j);

/// Organism i of a ramped half-and-half population: member j uses flat index
/// q = i * K + j, height init_min + (q / 2) % span (capped at D), FULL for
/// even q, GROW otherwise.
Organism random_organism(const OrganismParams& params, int init_min_height,
                         int init_max_height, std::size_t index, Rng& rng);

/// Output vector of every member, in execution order, and optionally every
/// member's per-node values.
struct OrganismTrace {
  std::vector<ValueVector> member_outputs;
  std::vector<NodeValues> member_values;  // empty unless requested
  ValueVector output;
};

OrganismTrace trace_organism(const Organism& org, const TestSuite& suite,
                             bool keep_node_values = false);

/// Final contents of the output register.
ValueVector eval_organism(const Organism& org, const TestSuite& suite);

/// Sum-abs-error of eval_organism() against the suite targets; +inf sentinel.
double organism_fitness(const Organism& org, const TestSuite& suite);

/// Register file as seen by member j (after members 0..j-1 ran).
std::vector<ValueVector> registers_before(const Organism& org,
                                          const OrganismTrace& trace,
                                          std::size_t j, std::size_t n_cases);

enum class MemberOp {
  None,     // child is a copy of the parent
  Subtree,  // one subtree of member j replaced by `inserted` at `site`
  Replace,  // member j swapped in whole or rewired
};

struct MemberVariation {
  Organism child;
  std::size_t member = 0;
  MemberOp op = MemberOp::None;
  NodeId site = 0;        // Subtree only
  ExprTree inserted;      // Subtree only
};

/// subtree_mutation on a uniformly chosen member under the depth cap.
MemberVariation member_mutation(const Organism& org, Rng& rng,
                                const VariationLimits& limits = {});

/// Uniform member index j; with probability member_swap_rate member j of
/// org2 (tree and write register) replaces member j of org1, otherwise
/// subtree_crossover between the two member-j trees under the depth cap.
/// Throws std::invalid_argument if the params differ.
MemberVariation member_crossover(const Organism& org1, const Organism& org2,
                                 Rng& rng, const VariationLimits& limits = {});

/// Depth of `node` in member `member_index` (root = 1): the number of
/// function applications between the site and the register fabric.
/// Throws std::out_of_range on an invalid site.
int site_distance_to_environment(const Organism& org, std::size_t member_index,
                                 NodeId node);

struct OrganismIndividual {
  Organism org;
  double fitness = 0.0;
  bool fitness_copied = false;
  std::uint32_t hits = 0;
};

OrganismIndividual evaluate_organism(Organism org, const TestSuite& suite,
                                     double hit_threshold);

/// Fitness of the parent organism with member j now producing `new_output`
/// into `new_write_register`; all other members are unchanged. Downstream
/// members are re-run until the register file matches the parent's again, at
/// which point the parent's fitness is copied.
struct OrganismChildEval {
  double fitness = 0.0;
  std::uint32_t hits = 0;
  bool copied = false;
  std::size_t nodes_evaluated = 0;
};

OrganismChildEval evaluate_changed_member(const OrganismIndividual& parent,
                                          const OrganismTrace& parent_trace,
                                          std::size_t j,
                                          std::uint32_t new_write_register,
                                          const ValueVector& new_output,
                                          const TestSuite& suite,
                                          double hit_threshold);

struct OpenRunResult {
  RunStats stats;
  std::vector<OrganismIndividual> final_population;
};

/// Generational loop of gp_engine::run over organisms. With member_count 1,
/// an unlimited depth cap and member_swap_rate 0 it consumes random numbers
/// exactly like the monolithic run.
OpenRunResult run_open(const GpParams& gp, const OrganismParams& params,
                       const TestSuite& suite, const EngineOptions& options = {});

/// Per-member FDP: sites are binned by site_distance_to_environment, and a
/// trial is silent when the member's output vector is bitwise unchanged.
/// `organism_fitness` counts the same trials against organism fitness.
struct OrganismFdp {
  FdpStats member_output;
  FdpStats organism_fitness;
};

OrganismFdp member_fdp_statistics(std::span<const OrganismIndividual> pop,
                                  const TestSuite& suite, int trials_per_bin,
                                  std::span<const DepthBin> bins, Rng& rng,
                                  const FdpOptions& options = {});

/// Text form: a header of params followed by one `member <reg> <sexpr>` line
/// per member. Round-trips exactly.
void write_organism(std::ostream& out, const Organism& org);
Organism read_organism(std::istream& in);

}  // namespace opengp

#endif  // OPENGP_OPEN_ARCH_HPP
