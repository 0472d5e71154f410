#include "opengp/open_arch.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "opengp/parallel.hpp"
#include "opengp/sexpr.hpp"

namespace opengp {

namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw std::invalid_argument(std::string(field) + ": " + what);
}

bool same_double(double a, double b) noexcept {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool same_registers(const std::vector<ValueVector>& a,
                    const std::vector<ValueVector>& b) {
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (!same_bits(a[r], b[r])) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> OrganismParams::validate() const {
  require(member_count >= 1, "member_count", "must be >= 1");
  require(!depth_cap || *depth_cap >= 1, "depth_cap", "must be >= 1");
  require(register_count >= 1, "register_count", "must be >= 1");
  require(output_register >= 0 && output_register < register_count,
          "output_register", "must be in [0, register_count)");
  require(member_swap_rate >= 0.0 && member_swap_rate <= 1.0,
          "member_swap_rate", "must be in [0, 1]");
  require(wiring_mutation_rate >= 0.0 && wiring_mutation_rate <= 1.0,
          "wiring_mutation_rate", "must be in [0, 1]");
  std::vector<std::string> warnings;
  if (depth_cap && (*depth_cap < kMinRecommendedDepthCap ||
                    *depth_cap > kMaxRecommendedDepthCap)) {
    warnings.push_back("depth_cap " + std::to_string(*depth_cap) +
                       " is outside the recommended range [10, 100]");
  }
  if (!depth_cap) warnings.push_back("depth_cap unlimited: members may grow without bound");
  return warnings;
}

Organism::Organism(OrganismParams params, std::vector<Member> members)
    : params_(params), members_(std::move(members)) {
  params_.validate();
  if (members_.size() != static_cast<std::size_t>(params_.member_count)) {
    throw std::invalid_argument("member_count: organism has " +
                                std::to_string(members_.size()) +
                                " members, params say " +
                                std::to_string(params_.member_count));
  }
  const auto m = static_cast<std::uint32_t>(params_.register_count);
  for (std::size_t j = 0; j < members_.size(); ++j) {
    const Member& mem = members_[j];
    if (mem.write_register >= m) {
      throw std::invalid_argument("member " + std::to_string(j) +
                                  " writes register " +
                                  std::to_string(mem.write_register) +
                                  " >= register_count");
    }
    if (params_.depth_cap && tree_height(mem.tree) > *params_.depth_cap) {
      throw std::invalid_argument("member " + std::to_string(j) +
                                  " exceeds depth_cap");
    }
    for (const Node& n : mem.tree.nodes()) {
      if (n.kind == NodeKind::Reg && n.reg >= m) {
        throw std::invalid_argument("member " + std::to_string(j) +
                                    " reads register " + std::to_string(n.reg) +
                                    " >= register_count");
      }
    }
  }
}

std::size_t Organism::total_size() const noexcept {
  std::size_t total = 0;
  for (const Member& m : members_) total += m.tree.size();
  return total;
}

Organism Organism::with_member(std::size_t j, Member m) const {
  std::vector<Member> members = members_;
  members.at(j) = std::move(m);
  return Organism(params_, std::move(members));
}

bool operator==(const Organism& a, const Organism& b) {
  if (!(a.params_ == b.params_) || a.members_.size() != b.members_.size()) {
    return false;
  }
  for (std::size_t j = 0; j < a.members_.size(); ++j) {
    if (a.members_[j].write_register != b.members_[j].write_register ||
        !(a.members_[j].tree == b.members_[j].tree)) {
      return false;
    }
  }
  return true;
}

std::uint32_t default_write_register(const OrganismParams& params,
                                     std::size_t j) {
  return static_cast<std::uint32_t>(j % static_cast<std::size_t>(params.register_count));
}

namespace {

PrimitiveSet primitives_from_writers(std::vector<std::uint32_t> written) {
  std::sort(written.begin(), written.end());
  written.erase(std::unique(written.begin(), written.end()), written.end());
  PrimitiveSet prims;
  prims.registers = std::move(written);
  return prims;
}

}  // namespace

PrimitiveSet member_primitives(const Organism& org, std::size_t j) {
  std::vector<std::uint32_t> written;
  for (std::size_t i = 0; i < j && i < org.members().size(); ++i) {
    written.push_back(org.members()[i].write_register);
  }
  return primitives_from_writers(std::move(written));
}

Organism random_organism(const OrganismParams& params, int init_min_height,
                         int init_max_height, std::size_t index, Rng& rng) {
  params.validate();
  if (init_min_height < 1 || init_max_height < init_min_height) {
    throw std::invalid_argument("init heights must satisfy 1 <= min <= max");
  }
  const auto k = static_cast<std::size_t>(params.member_count);
  const int span = init_max_height - init_min_height + 1;
  std::vector<Member> members;
  members.reserve(k);
  std::vector<std::uint32_t> written;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t q = index * k + j;
    int height = init_min_height + static_cast<int>((q / 2) % static_cast<std::size_t>(span));
    if (params.depth_cap) height = std::min(height, *params.depth_cap);
    const InitMethod method = q % 2 == 0 ? InitMethod::Full : InitMethod::Grow;
    const PrimitiveSet prims = primitives_from_writers(written);
    Member m{random_tree(method, height, rng, prims),
             default_write_register(params, j)};
    written.push_back(m.write_register);
    members.push_back(std::move(m));
  }
  return Organism(params, std::move(members));
}

OrganismTrace trace_organism(const Organism& org, const TestSuite& suite,
                             bool keep_node_values) {
  const auto& params = org.params();
  std::vector<ValueVector> regs(static_cast<std::size_t>(params.register_count),
                                ValueVector(suite.count(), 0.0));
  OrganismTrace trace;
  trace.member_outputs.reserve(org.members().size());
  for (const Member& m : org.members()) {
    NodeValues values = eval_all_nodes(m.tree, suite, regs);
    const auto out = values.row(m.tree.root());
    regs[m.write_register].assign(out.begin(), out.end());
    trace.member_outputs.push_back(regs[m.write_register]);
    if (keep_node_values) trace.member_values.push_back(std::move(values));
  }
  trace.output = regs[static_cast<std::size_t>(params.output_register)];
  return trace;
}

ValueVector eval_organism(const Organism& org, const TestSuite& suite) {
  return trace_organism(org, suite).output;
}

double organism_fitness(const Organism& org, const TestSuite& suite) {
  return score_outputs(eval_organism(org, suite), suite);
}

std::vector<ValueVector> registers_before(const Organism& org,
                                          const OrganismTrace& trace,
                                          std::size_t j, std::size_t n_cases) {
  std::vector<ValueVector> regs(
      static_cast<std::size_t>(org.params().register_count),
      ValueVector(n_cases, 0.0));
  for (std::size_t i = 0; i < j; ++i) {
    regs[org.member(i).write_register] = trace.member_outputs[i];
  }
  return regs;
}

namespace {

VariationLimits capped(const VariationLimits& limits, const OrganismParams& p) {
  VariationLimits l = limits;
  l.height_limit = p.depth_cap;
  return l;
}

std::size_t pick_member(const Organism& org, Rng& rng) {
  const auto k = org.members().size();
  if (k == 1) return 0;
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  return pick(rng);
}

// Optional rewiring of member j after a variation.
void maybe_rewire(MemberVariation& v, Rng& rng) {
  const OrganismParams& p = v.child.params();
  if (p.wiring_mutation_rate <= 0.0) return;
  std::bernoulli_distribution coin(p.wiring_mutation_rate);
  if (!coin(rng)) return;
  std::uniform_int_distribution<std::uint32_t> reg(
      0, static_cast<std::uint32_t>(p.register_count - 1));
  Member m = v.child.member(v.member);
  const std::uint32_t w = reg(rng);
  if (w == m.write_register) return;
  m.write_register = w;
  v.child = v.child.with_member(v.member, std::move(m));
  v.op = MemberOp::Replace;
}

}  // namespace

MemberVariation member_mutation(const Organism& org, Rng& rng,
                                const VariationLimits& limits) {
  const std::size_t j = pick_member(org, rng);
  const Member& m = org.member(j);
  MutationResult r = subtree_mutation(m.tree, rng, capped(limits, org.params()),
                                      member_primitives(org, j));
  MemberVariation v{org, j, MemberOp::None, 0, {}};
  if (r.site) {
    v.child = org.with_member(j, {std::move(r.child), m.write_register});
    v.op = MemberOp::Subtree;
    v.site = *r.site;
    v.inserted = std::move(r.inserted);
  }
  maybe_rewire(v, rng);
  return v;
}

MemberVariation member_crossover(const Organism& org1, const Organism& org2,
                                 Rng& rng, const VariationLimits& limits) {
  if (!(org1.params() == org2.params())) {
    throw std::invalid_argument("member_crossover: organism params differ");
  }
  const std::size_t j = pick_member(org1, rng);
  const OrganismParams& p = org1.params();
  bool swap = false;
  if (p.member_swap_rate > 0.0) {
    std::bernoulli_distribution coin(p.member_swap_rate);
    swap = coin(rng);
  }
  MemberVariation v{org1, j, MemberOp::None, 0, {}};
  if (swap) {
    const Member& donor = org2.member(j);
    const Member& own = org1.member(j);
    if (!(donor.tree == own.tree) || donor.write_register != own.write_register) {
      v.child = org1.with_member(j, donor);
      v.op = MemberOp::Replace;
    }
  } else {
    CrossoverResult r = subtree_crossover(org1.member(j).tree, org2.member(j).tree,
                                          rng, capped(limits, p));
    if (r.info) {
      v.child = org1.with_member(
          j, {std::move(r.child), org1.member(j).write_register});
      v.op = MemberOp::Subtree;
      v.site = r.info->site;
      v.inserted = std::move(r.donated);
    }
  }
  maybe_rewire(v, rng);
  return v;
}

int site_distance_to_environment(const Organism& org, std::size_t member_index,
                                 NodeId node) {
  if (member_index >= org.members().size()) {
    throw std::out_of_range("member index " + std::to_string(member_index) +
                            " out of range");
  }
  const ExprTree& tree = org.member(member_index).tree;
  if (!tree.contains(node)) {
    throw std::out_of_range("node " + std::to_string(node) +
                            " out of range in member " +
                            std::to_string(member_index));
  }
  int depth = 1;
  for (NodeId id = node; id != tree.root(); id = tree.node(id).parent) ++depth;
  return depth;
}

OrganismIndividual evaluate_organism(Organism org, const TestSuite& suite,
                                     double hit_threshold) {
  const ValueVector out = eval_organism(org, suite);
  OrganismIndividual ind{std::move(org)};
  ind.fitness = score_outputs(out, suite);
  ind.hits = static_cast<std::uint32_t>(count_hits(out, suite, hit_threshold));
  return ind;
}

OrganismChildEval evaluate_changed_member(const OrganismIndividual& parent,
                                          const OrganismTrace& parent_trace,
                                          std::size_t j,
                                          std::uint32_t new_write_register,
                                          const ValueVector& new_output,
                                          const TestSuite& suite,
                                          double hit_threshold) {
  const Organism& org = parent.org;
  if (new_write_register >= static_cast<std::uint32_t>(org.params().register_count)) {
    throw std::invalid_argument("write register out of range");
  }
  OrganismChildEval r;
  std::vector<ValueVector> regs =
      registers_before(org, parent_trace, j, suite.count());
  std::vector<ValueVector> parent_regs = regs;
  regs[new_write_register] = new_output;
  parent_regs[parent.org.member(j).write_register] = parent_trace.member_outputs[j];
  const std::size_t k = org.members().size();
  for (std::size_t i = j + 1;; ++i) {
    if (same_registers(regs, parent_regs)) {
      r.fitness = parent.fitness;
      r.hits = parent.hits;
      r.copied = true;
      return r;
    }
    if (i >= k) break;
    const Member& m = org.member(i);
    ValueVector out = eval_tree(m.tree, suite, regs);
    r.nodes_evaluated += m.tree.size();
    regs[m.write_register] = std::move(out);
    parent_regs[m.write_register] = parent_trace.member_outputs[i];
  }
  const auto& out = regs[static_cast<std::size_t>(org.params().output_register)];
  r.fitness = score_outputs(out, suite);
  r.hits = static_cast<std::uint32_t>(count_hits(out, suite, hit_threshold));
  return r;
}

namespace {

struct OrganismPlan {
  std::size_t parent = 0;
  MemberVariation variation;
  int site_depth = 0;
};

GenStats organism_population_stats(const std::vector<OrganismIndividual>& pop,
                                   int generation, std::size_t n_cases,
                                   const std::vector<DepthBin>& bins) {
  GenStats g;
  g.generation = generation;
  g.silent_by_bin.assign(bins.size(), BinCount{});
  std::vector<double> fitnesses;
  std::vector<double> sizes;
  std::vector<double> heights;
  MemberColumns mc;
  for (const OrganismIndividual& ind : pop) {
    fitnesses.push_back(ind.fitness);
    sizes.push_back(static_cast<double>(ind.org.total_size()));
    for (const Member& m : ind.org.members()) {
      const int h = tree_height(m.tree);
      heights.push_back(static_cast<double>(h));
      mc.max_member_height = std::max(mc.max_member_height, h);
      ++mc.member_count;
    }
    if (ind.hits == n_cases) ++g.fit_count;
  }
  g.best_fitness = *std::min_element(fitnesses.begin(), fitnesses.end());
  g.mean_fitness = mean(fitnesses);
  g.mean_size = mean(sizes);
  g.mean_height = mean(heights);
  g.height = quartiles(heights);
  g.members = mc;
  return g;
}

}  // namespace

OpenRunResult run_open(const GpParams& gp, const OrganismParams& params,
                       const TestSuite& suite, const EngineOptions& options) {
  gp.validate();
  params.validate();
  Rng rng(gp.seed);
  const VariationLimits limits = VariationLimits::from(gp);
  const auto n = static_cast<std::size_t>(gp.population_size);

  OpenRunResult result;
  result.stats.bins = options.depth_bins;
  result.stats.open_architecture = true;

  std::vector<Organism> initial;
  initial.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    initial.push_back(random_organism(params, gp.init_min_height,
                                      gp.init_max_height, i, rng));
  }
  std::vector<OrganismIndividual> pop(n, OrganismIndividual{initial.front()});
  parallel_for(n, options.workers, [&](std::size_t i) {
    pop[i] = evaluate_organism(std::move(initial[i]), suite, gp.hit_threshold);
  });
  {
    GenStats g0 = organism_population_stats(pop, 0, suite.count(), options.depth_bins);
    for (const auto& ind : pop) {
      g0.nodes_evaluated += static_cast<std::int64_t>(ind.org.total_size());
    }
    result.stats.rows.push_back(std::move(g0));
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int gen = 1; gen <= gp.generations; ++gen) {
    auto fitness_of = [&](std::size_t i) { return pop[i].fitness; };
    auto size_of = [&](std::size_t i) { return pop[i].org.total_size(); };

    std::vector<OrganismPlan> plans;
    plans.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = unit(rng);
      const std::size_t parent =
          tournament_select_by(n, gp.tournament_size, rng, fitness_of, size_of);
      MemberVariation variation = [&] {
        if (u < gp.crossover_rate) {
          const std::size_t other =
              tournament_select_by(n, gp.tournament_size, rng, fitness_of, size_of);
          return member_crossover(pop[parent].org, pop[other].org, rng, limits);
        }
        if (u < gp.crossover_rate + gp.mutation_rate) {
          return member_mutation(pop[parent].org, rng, limits);
        }
        return MemberVariation{pop[parent].org, 0, MemberOp::None, 0, {}};
      }();
      OrganismPlan plan{parent, std::move(variation), 0};
      if (plan.variation.op == MemberOp::Subtree) {
        plan.site_depth = site_distance_to_environment(
            pop[plan.parent].org, plan.variation.member, plan.variation.site);
      }
      plans.push_back(std::move(plan));
    }

    std::vector<OrganismChildEval> outcomes(n);
    std::int64_t nodes_evaluated = 0;
    if (gp.shortcut_enabled) {
      std::map<std::size_t, std::vector<std::size_t>> by_parent;
      for (std::size_t i = 0; i < n; ++i) {
        if (plans[i].variation.op != MemberOp::None) by_parent[plans[i].parent].push_back(i);
      }
      const std::vector<std::pair<std::size_t, std::vector<std::size_t>>> groups(
          by_parent.begin(), by_parent.end());
      std::vector<std::int64_t> group_nodes(groups.size(), 0);
      parallel_for(groups.size(), options.workers, [&](std::size_t g) {
        const OrganismIndividual& parent = pop[groups[g].first];
        const OrganismTrace trace = trace_organism(parent.org, suite, true);
        std::int64_t cost = static_cast<std::int64_t>(parent.org.total_size());
        for (std::size_t i : groups[g].second) {
          const MemberVariation& v = plans[i].variation;
          const std::vector<ValueVector> regs =
              registers_before(parent.org, trace, v.member, suite.count());
          ValueVector member_out;
          if (v.op == MemberOp::Subtree) {
            PathUpdate up = propagate_replacement(
                parent.org.member(v.member).tree, trace.member_values[v.member],
                v.site, v.inserted, suite, regs);
            cost += static_cast<std::int64_t>(up.nodes_evaluated);
            member_out = up.unchanged ? trace.member_outputs[v.member]
                                      : std::move(up.root_values);
          } else {
            const ExprTree& t = v.child.member(v.member).tree;
            member_out = eval_tree(t, suite, regs);
            cost += static_cast<std::int64_t>(t.size());
          }
          outcomes[i] = evaluate_changed_member(
              parent, trace, v.member, v.child.member(v.member).write_register,
              member_out, suite, gp.hit_threshold);
          cost += static_cast<std::int64_t>(outcomes[i].nodes_evaluated);
        }
        group_nodes[g] = cost;
      });
      for (std::int64_t c : group_nodes) nodes_evaluated += c;
    } else {
      std::vector<std::int64_t> child_nodes(n, 0);
      parallel_for(n, options.workers, [&](std::size_t i) {
        const MemberVariation& v = plans[i].variation;
        if (v.op == MemberOp::None) return;
        const OrganismIndividual ind = evaluate_organism(v.child, suite, gp.hit_threshold);
        outcomes[i] = {ind.fitness, ind.hits, false, v.child.total_size()};
        child_nodes[i] = static_cast<std::int64_t>(v.child.total_size());
      });
      for (std::int64_t c : child_nodes) nodes_evaluated += c;
    }

    std::vector<OrganismIndividual> next;
    next.reserve(n);
    std::vector<BinCount> bins(options.depth_bins.size());
    std::int64_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const OrganismIndividual& parent = pop[plans[i].parent];
      MemberVariation& v = plans[i].variation;
      if (v.op == MemberOp::None) {
        OrganismIndividual copy = parent;
        copy.fitness_copied = false;
        next.push_back(std::move(copy));
        continue;
      }
      const OrganismChildEval& o = outcomes[i];
      if (o.copied) ++hits;
      if (v.op == MemberOp::Subtree) {
        if (const auto b = find_bin(options.depth_bins, plans[i].site_depth)) {
          ++bins[*b].trials;
          if (same_double(o.fitness, parent.fitness)) ++bins[*b].silent;
        }
      }
      OrganismIndividual child{std::move(v.child)};
      child.fitness = o.fitness;
      child.fitness_copied = o.copied;
      child.hits = o.hits;
      next.push_back(std::move(child));
    }
    pop = std::move(next);
    GenStats g = organism_population_stats(pop, gen, suite.count(), options.depth_bins);
    g.shortcut_hits = hits;
    g.nodes_evaluated = nodes_evaluated;
    g.silent_by_bin = std::move(bins);
    result.stats.rows.push_back(std::move(g));
  }
  result.final_population = std::move(pop);
  return result;
}

OrganismFdp member_fdp_statistics(std::span<const OrganismIndividual> pop,
                                  const TestSuite& suite, int trials_per_bin,
                                  std::span<const DepthBin> bins, Rng& rng,
                                  const FdpOptions& options) {
  if (trials_per_bin < 0) throw std::invalid_argument("trials_per_bin < 0");

  // depths[o][j] = node depths of member j of organism o
  std::vector<std::vector<std::vector<int>>> depths(pop.size());
  for (std::size_t o = 0; o < pop.size(); ++o) {
    for (const Member& m : pop[o].org.members()) depths[o].push_back(node_depths(m.tree));
  }

  struct Trial {
    std::size_t organism;
    std::size_t member;
    NodeId site;
    std::size_t bin;
    ExprTree subtree;
  };
  std::vector<Trial> trials;
  OrganismFdp result;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    result.member_output.bins.push_back({bins[b]});
    result.organism_fitness.bins.push_back({bins[b]});
    auto in_bin = [&](int d) { return bins[b].contains(d); };
    std::vector<std::int64_t> prefix(pop.size());
    std::int64_t total = 0;
    for (std::size_t o = 0; o < pop.size(); ++o) {
      for (const auto& d : depths[o]) total += std::count_if(d.begin(), d.end(), in_bin);
      prefix[o] = total;
    }
    if (total == 0) continue;
    std::uniform_int_distribution<std::int64_t> pick(0, total - 1);
    for (int t = 0; t < trials_per_bin; ++t) {
      const std::int64_t k = pick(rng);
      const auto o = static_cast<std::size_t>(
          std::upper_bound(prefix.begin(), prefix.end(), k) - prefix.begin());
      std::int64_t rank = k - (o == 0 ? 0 : prefix[o - 1]);
      std::size_t member = 0;
      NodeId site = 0;
      bool found = false;
      for (std::size_t j = 0; j < depths[o].size() && !found; ++j) {
        for (NodeId id = 0; id < depths[o][j].size(); ++id) {
          if (in_bin(depths[o][j][id]) && rank-- == 0) {
            member = j;
            site = id;
            found = true;
            break;
          }
        }
      }
      ExprTree sub = random_tree(InitMethod::Grow, options.mutation_height, rng,
                                 member_primitives(pop[o].org, member));
      trials.push_back({o, member, site, b, std::move(sub)});
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t t = 0; t < trials.size(); ++t) groups[trials[t].organism].push_back(t);
  const std::vector<std::pair<std::size_t, std::vector<std::size_t>>> work(
      groups.begin(), groups.end());
  std::vector<char> member_silent(trials.size(), 0);
  std::vector<double> child_fitness(trials.size(), 0.0);
  parallel_for(work.size(), options.workers, [&](std::size_t g) {
    const OrganismIndividual& parent = pop[work[g].first];
    const OrganismTrace trace = trace_organism(parent.org, suite, true);
    for (std::size_t t : work[g].second) {
      const Trial& tr = trials[t];
      const std::vector<ValueVector> regs =
          registers_before(parent.org, trace, tr.member, suite.count());
      const ExprTree& tree = parent.org.member(tr.member).tree;
      PathUpdate up = propagate_replacement(tree, trace.member_values[tr.member],
                                            tr.site, tr.subtree, suite, regs);
      member_silent[t] = up.unchanged ? 1 : 0;
      if (up.unchanged) {
        child_fitness[t] = parent.fitness;
        continue;
      }
      child_fitness[t] =
          evaluate_changed_member(parent, trace, tr.member,
                                  parent.org.member(tr.member).write_register,
                                  up.root_values, suite, 0.0)
              .fitness;
    }
  });

  for (std::size_t t = 0; t < trials.size(); ++t) {
    const double parent = pop[trials[t].organism].fitness;
    FdpBin& mb = result.member_output.bins[trials[t].bin];
    FdpBin& ob = result.organism_fitness.bins[trials[t].bin];
    ++mb.trials;
    ++ob.trials;
    if (member_silent[t]) {
      ++mb.silent;
      ++mb.near_silent;
    }
    if (same_double(child_fitness[t], parent)) ++ob.silent;
    if (near_equal_fitness(child_fitness[t], parent, options.tolerance)) ++ob.near_silent;
  }
  finalize_fdp(result.member_output);
  finalize_fdp(result.organism_fitness);
  return result;
}

void write_organism(std::ostream& out, const Organism& org) {
  const OrganismParams& p = org.params();
  out << "organism\n"
      << "member_count " << p.member_count << '\n'
      << "depth_cap " << (p.depth_cap ? std::to_string(*p.depth_cap) : "none") << '\n'
      << "register_count " << p.register_count << '\n'
      << "output_register " << p.output_register << '\n'
      << "member_swap_rate " << format_real(p.member_swap_rate) << '\n'
      << "wiring_mutation_rate " << format_real(p.wiring_mutation_rate) << '\n';
  for (const Member& m : org.members()) {
    out << "member " << m.write_register << ' ' << to_sexpr(m.tree) << '\n';
  }
  out << "end\n";
}

namespace {

std::string next_line(std::istream& in, int& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return line;
  }
  throw std::invalid_argument("organism text: unexpected end of input after line " +
                              std::to_string(line_no));
}

std::string expect_field(std::istream& in, int& line_no, const std::string& key) {
  const std::string line = next_line(in, line_no);
  if (line.rfind(key + " ", 0) != 0) {
    throw std::invalid_argument("organism text line " + std::to_string(line_no) +
                                ": expected '" + key + "'");
  }
  return line.substr(key.size() + 1);
}

template <typename T>
T parse_number(const std::string& text, int line_no) {
  std::istringstream is(text);
  T v{};
  if (!(is >> v) || !(is >> std::ws).eof()) {
    throw std::invalid_argument("organism text line " + std::to_string(line_no) +
                                ": bad number '" + text + "'");
  }
  return v;
}

double parse_real(const std::string& text, int line_no) {
  try {
    const ExprTree t = from_sexpr(text);
    if (t.size() == 1 && t.node(0).kind == NodeKind::Const) return t.node(0).value;
  } catch (const ParseError&) {
  }
  throw std::invalid_argument("organism text line " + std::to_string(line_no) +
                              ": bad real '" + text + "'");
}

}  // namespace

Organism read_organism(std::istream& in) {
  int line_no = 0;
  if (next_line(in, line_no) != "organism") {
    throw std::invalid_argument("organism text: missing 'organism' header");
  }
  OrganismParams p;
  p.member_count = parse_number<int>(expect_field(in, line_no, "member_count"), line_no);
  const std::string cap = expect_field(in, line_no, "depth_cap");
  if (cap == "none") {
    p.depth_cap.reset();
  } else {
    p.depth_cap = parse_number<int>(cap, line_no);
  }
  p.register_count = parse_number<int>(expect_field(in, line_no, "register_count"), line_no);
  p.output_register = parse_number<int>(expect_field(in, line_no, "output_register"), line_no);
  p.member_swap_rate = parse_real(expect_field(in, line_no, "member_swap_rate"), line_no);
  p.wiring_mutation_rate =
      parse_real(expect_field(in, line_no, "wiring_mutation_rate"), line_no);
  std::vector<Member> members;
  for (;;) {
    const std::string line = next_line(in, line_no);
    if (line == "end") break;
    if (line.rfind("member ", 0) != 0) {
      throw std::invalid_argument("organism text line " + std::to_string(line_no) +
                                  ": expected 'member' or 'end'");
    }
    const std::size_t space = line.find(' ', 7);
    if (space == std::string::npos) {
      throw std::invalid_argument("organism text line " + std::to_string(line_no) +
                                  ": member needs a register and an expression");
    }
    Member m;
    m.write_register =
        parse_number<std::uint32_t>(line.substr(7, space - 7), line_no);
    m.tree = from_sexpr(std::string_view(line).substr(space + 1));
    members.push_back(std::move(m));
  }
  return Organism(p, std::move(members));
}

}  // namespace opengp
