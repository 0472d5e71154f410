#include "check.hpp"

#include <stdexcept>

#include <cstring>
#include <sstream>

#include "opengp/open_arch.hpp"
#include "opengp/sexpr.hpp"
#include "support.hpp"

using namespace opengp;
using opengp::testing::gen_tree;

namespace {

bool bits_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

OrganismParams params(int k, std::optional<int> d, int m, int out = 0) {
  OrganismParams p;
  p.member_count = k;
  p.depth_cap = d;
  p.register_count = m;
  p.output_register = out;
  return p;
}

Member member(const char* text, std::uint32_t reg) { return {from_sexpr(text), reg}; }

std::string csv_of(const RunStats& stats) {
  std::ostringstream o;
  write_csv(o, stats);
  return o.str();
}

}  // namespace

TEST_CASE("OrganismParams.Validation") {
  CHECK(params(3, 10, 2).validate().empty());
  CHECK_THROWS_AS(params(0, 10, 1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(params(1, 10, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(params(1, 10, 2, 2).validate(), std::invalid_argument);
  CHECK_THROWS_AS(params(1, 0, 1).validate(), std::invalid_argument);
  CHECK_EQ(params(1, 5, 1).validate().size(), 1u);      // below the advised range
  CHECK_EQ(params(1, 200, 1).validate().size(), 1u);    // above it
  CHECK_EQ(params(1, std::nullopt, 1).validate().size(), 1u);
}

TEST_CASE("Organism.RejectsInvalidMembers") {
  CHECK_THROWS_AS(Organism(params(2, 10, 1), {member("x", 0)}), std::invalid_argument);
  CHECK_THROWS_AS(Organism(params(1, 10, 1), {member("r1", 0)}), std::invalid_argument);
  CHECK_THROWS_AS(Organism(params(1, 10, 1), {member("x", 1)}), std::invalid_argument);
  // Height 3 under a cap of 2 (cap overridden below the advised range).
  CHECK_THROWS_AS(Organism(params(1, 2, 1), {member("(+ (* x x) x)", 0)}),
               std::invalid_argument);
}

TEST_CASE("EvalOrganism.SquareThenAddOne") {
  const Organism org(params(2, 10, 1), {member("(* x x)", 0), member("(+ r0 1.0)", 0)});
  CHECK_EQ(eval_organism(org, TestSuite({2.0}, {0.0})), ValueVector{5.0});
}

TEST_CASE("EvalOrganism.IdentityMember") {
  const Organism org(params(1, 10, 1), {member("x", 0)});
  CHECK_EQ(eval_organism(org, TestSuite({-0.5, 0.25}, {0, 0})), (ValueVector{-0.5, 0.25}));
}

TEST_CASE("EvalOrganism.UnwrittenOutputRegisterStaysZero") {
  const Organism org(params(1, 10, 2, 1), {member("(+ x 3)", 0)});
  const TestSuite s = make_sextic_suite(48, 1);
  CHECK_EQ(eval_organism(org, s), ValueVector(48, 0.0));
  double total = 0.0;
  for (double t : s.targets()) total += std::fabs(t - 0.0);
  CHECK(bits_equal(organism_fitness(org, s), total));
}

TEST_CASE("EvalOrganism.ExactSexticHasZeroFitness") {
  const Organism org(params(3, 10, 2),
                     {member("(* x x)", 0),
                      member("(* (* 2 r0) r0)", 1),
                      member("(+ (- (* (* r0 r0) r0) r1) r0)", 0)});
  CHECK_EQ(organism_fitness(org, make_sextic_suite(48, 2)), 0.0);
}

TEST_CASE("EvalOrganism.SingleMemberEqualsMonolithicTree") {
  std::mt19937_64 g(3);
  const TestSuite s = make_sextic_suite(48, 3);
  for (int i = 0; i < 500; ++i) {
    const ExprTree t = gen_tree(g, 12);
    const Organism org(params(1, std::nullopt, 1), {{t, 0}});
    REQUIRE(same_bits(eval_organism(org, s), eval_tree(t, s)));
    REQUIRE(bits_equal(organism_fitness(org, s), fitness(t, s)));
  }
}

TEST_CASE("EvalOrganism.RegisterFabricIsLossless") {
  const Organism org(params(3, 10, 2),
                     {member("(* x 0.5)", 0), member("(+ x 1)", 1), member("(- r1 r0)", 0)});
  const TestSuite s = make_sextic_suite(48, 4);
  const OrganismTrace tr = trace_organism(org, s);
  // Perturb member 0's output and check the downstream read sees it verbatim.
  ValueVector bumped = tr.member_outputs[0];
  for (double& v : bumped) v = std::nextafter(v, 2.0);
  std::vector<ValueVector> regs = registers_before(org, tr, 2, s.count());
  CHECK(same_bits(regs[0], tr.member_outputs[0]));
  regs[0] = bumped;
  const NodeValues v = eval_all_nodes(org.member(2).tree, s, regs);
  // node 2 is the r0 read
  REQUIRE_EQ(org.member(2).tree.node(2).kind, NodeKind::Reg);
  CHECK(same_bits(v.row(2), bumped));
}

TEST_CASE("SiteDistance.RootLeafAndBound") {
  Rng rng(5);
  const ExprTree full = random_tree(InitMethod::Full, 10, rng);
  const Organism org(params(2, 10, 1), {member("x", 0), {full, 0}});
  CHECK_EQ(site_distance_to_environment(org, 0, 0), 1);
  CHECK_EQ(site_distance_to_environment(org, 1, 0), 1);
  const NodeId last = static_cast<NodeId>(full.size() - 1);
  CHECK_EQ(site_distance_to_environment(org, 1, last), 10);
  CHECK_THROWS_AS(site_distance_to_environment(org, 0, 1), std::out_of_range);
  CHECK_THROWS_AS(site_distance_to_environment(org, 2, 0), std::out_of_range);
}

TEST_CASE("RandomOrganism.RampedMembersUnderCap") {
  Rng rng(6);
  const OrganismParams p = params(7, 4, 3);
  for (std::size_t i = 0; i < 20; ++i) {
    const Organism org = random_organism(p, 2, 6, i, rng);
    REQUIRE_EQ(org.members().size(), 7u);
    for (std::size_t j = 0; j < 7; ++j) {
      CHECK_LE(tree_height(org.member(j).tree), 4);
      CHECK_EQ(org.member(j).write_register, default_write_register(p, j));
      // Member j only reads registers written earlier.
      const PrimitiveSet prims = member_primitives(org, j);
      for (const Node& n : org.member(j).tree.nodes()) {
        if (n.kind != NodeKind::Reg) continue;
        CHECK_NE(std::find(prims.registers.begin(), prims.registers.end(), n.reg),
                  prims.registers.end());
      }
    }
    CHECK(member_primitives(org, 0).registers.empty());
  }
}

TEST_CASE("MemberOps.DepthCapHoldsOverManyOperations") {
  Rng rng(7);
  const OrganismParams p = params(5, 10, 2);
  std::vector<Organism> pool;
  for (std::size_t i = 0; i < 10; ++i) pool.push_back(random_organism(p, 2, 6, i, rng));
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int op = 0; op < 10000; ++op) {
    const std::size_t a = pick(rng);
    MemberVariation v = op % 2 == 0 ? member_mutation(pool[a], rng)
                                    : member_crossover(pool[a], pool[pick(rng)], rng);
    for (const Member& m : v.child.members()) REQUIRE_LE(tree_height(m.tree), 10);
    if (v.op == MemberOp::Subtree) {
      REQUIRE_LE(site_distance_to_environment(pool[a], v.member, v.site), 10);
      REQUIRE_EQ(v.child.member(v.member).tree,
                replace_subtree(pool[a].member(v.member).tree, v.site, v.inserted));
    }
    if (v.op == MemberOp::None) { REQUIRE(v.child == pool[a]); }
    pool[a] = std::move(v.child);
  }
}

TEST_CASE("MemberOps.SwapWithIdenticalMemberLeavesOrganismUnchanged") {
  OrganismParams p = params(2, 10, 1);
  p.member_swap_rate = 1.0;
  const Organism org(p, {member("(* x x)", 0), member("(+ r0 1)", 0)});
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const MemberVariation v = member_crossover(org, org, rng);
    CHECK_EQ(v.op, MemberOp::None);
    CHECK(v.child == org);
  }
}

TEST_CASE("MemberOps.SwapCarriesWriteRegister") {
  OrganismParams p = params(1, 10, 2);
  p.member_swap_rate = 1.0;
  const Organism a(p, {member("x", 0)});
  const Organism b(p, {member("(+ x 1)", 1)});
  Rng rng(9);
  const MemberVariation v = member_crossover(a, b, rng);
  CHECK_EQ(v.op, MemberOp::Replace);
  CHECK_EQ(v.child.member(0).write_register, 1u);
  CHECK_EQ(to_sexpr(v.child.member(0).tree), "(+ x 1)");
}

TEST_CASE("MemberOps.ParamsMismatchThrows") {
  const Organism a(params(1, 10, 1), {member("x", 0)});
  const Organism b(params(1, 20, 1), {member("x", 0)});
  Rng rng(10);
  CHECK_THROWS_AS(member_crossover(a, b, rng), std::invalid_argument);
}

TEST_CASE("MemberOps.SingleMemberMatchesMonolithicOperators") {
  // K = 1, no cap, no swaps: same random stream as the plain operators.
  OrganismParams p = params(1, std::nullopt, 1);
  p.member_swap_rate = 0.0;
  std::mt19937_64 g(11);
  Rng r1(11);
  Rng r2(11);
  for (int i = 0; i < 500; ++i) {
    const ExprTree t1 = gen_tree(g, 8);
    const ExprTree t2 = gen_tree(g, 8);
    const Organism o1(p, {{t1, 0}});
    const Organism o2(p, {{t2, 0}});
    REQUIRE_EQ(member_mutation(o1, r1).child.member(0).tree, subtree_mutation(t1, r2).child);
    REQUIRE_EQ(member_crossover(o1, o2, r1).child.member(0).tree,
              subtree_crossover(t1, t2, r2).child);
  }
}

TEST_CASE("ChangedMember.MatchesFullOrganismEvaluation") {
  Rng rng(12);
  const OrganismParams p = params(6, 10, 2);
  const TestSuite s = make_sextic_suite(48, 12);
  int copied = 0;
  for (std::size_t i = 0; i < 400; ++i) {
    const OrganismIndividual parent =
        evaluate_organism(random_organism(p, 2, 6, i, rng), s, 0.01);
    const OrganismTrace tr = trace_organism(parent.org, s, true);
    const MemberVariation v = member_mutation(parent.org, rng);
    if (v.op == MemberOp::None) continue;
    const std::size_t j = v.member;
    const ValueVector out = eval_tree(v.child.member(j).tree, s,
                                      registers_before(parent.org, tr, j, s.count()));
    const OrganismChildEval e = evaluate_changed_member(
        parent, tr, j, v.child.member(j).write_register, out, s, 0.01);
    const OrganismIndividual full = evaluate_organism(v.child, s, 0.01);
    REQUIRE(bits_equal(e.fitness, full.fitness));
    REQUIRE_EQ(e.hits, full.hits);
    copied += e.copied ? 1 : 0;
  }
  CHECK_GT(copied, 0);
}

TEST_CASE("RunOpen.SingleMemberUnlimitedMatchesMonolithicRun") {
  GpParams gp;
  gp.population_size = 100;
  gp.generations = 25;
  gp.crossover_rate = 0.5;
  gp.mutation_rate = 0.5;
  gp.seed = 13;
  OrganismParams p = params(1, std::nullopt, 1);
  p.member_swap_rate = 0.0;
  const TestSuite s = make_sextic_suite(48, 13);
  const RunResult mono = run(gp, s);
  const OpenRunResult open = run_open(gp, p, s);
  REQUIRE_EQ(mono.stats.rows.size(), open.stats.rows.size());
  for (std::size_t g = 0; g < mono.stats.rows.size(); ++g) {
    const GenStats& a = mono.stats.rows[g];
    const GenStats& b = open.stats.rows[g];
    INFO(g);
    CHECK(bits_equal(a.best_fitness, b.best_fitness));
    CHECK(bits_equal(a.mean_fitness, b.mean_fitness));
    CHECK(bits_equal(a.mean_size, b.mean_size));
    CHECK(bits_equal(a.mean_height, b.mean_height));
    CHECK_EQ(a.fit_count, b.fit_count);
  }
  for (std::size_t i = 0; i < mono.final_population.members.size(); ++i) {
    CHECK_EQ(mono.final_population.members[i].tree,
              open.final_population[i].org.member(0).tree);
  }
}

TEST_CASE("RunOpen.RowsRespectCapAndAreWorkerIndependent") {
  GpParams gp;
  gp.population_size = 60;
  gp.generations = 15;
  gp.seed = 14;
  const OrganismParams p = params(8, 10, 3);
  const TestSuite s = make_sextic_suite(48, 14);
  EngineOptions many;
  many.workers = 3;
  const OpenRunResult a = run_open(gp, p, s);
  const OpenRunResult b = run_open(gp, p, s, many);
  CHECK_EQ(csv_of(a.stats), csv_of(b.stats));
  for (const GenStats& g : a.stats.rows) {
    REQUIRE(g.members);
    CHECK_LE(g.members->max_member_height, 10);
    CHECK_EQ(g.members->member_count, 8 * 60);
  }
  GpParams off = gp;
  off.shortcut_enabled = false;
  const OpenRunResult c = run_open(off, p, s);
  REQUIRE_EQ(a.stats.rows.size(), c.stats.rows.size());
  for (std::size_t g = 0; g < a.stats.rows.size(); ++g) {
    CHECK(bits_equal(a.stats.rows[g].best_fitness, c.stats.rows[g].best_fitness));
    CHECK(bits_equal(a.stats.rows[g].mean_fitness, c.stats.rows[g].mean_fitness));
  }
  for (const OrganismIndividual& ind : a.final_population) {
    CHECK(bits_equal(ind.fitness, organism_fitness(ind.org, s)));
  }
}

TEST_CASE("MemberFdp.CountsAreConsistent") {
  Rng rng(15);
  const OrganismParams p = params(4, 10, 2);
  const TestSuite s = make_sextic_suite(48, 15);
  std::vector<OrganismIndividual> pop;
  for (std::size_t i = 0; i < 30; ++i) {
    pop.push_back(evaluate_organism(random_organism(p, 2, 6, i, rng), s, 0.01));
  }
  const std::vector<DepthBin> bins = {{1, 5}, {6, 10}, {11, kUnboundedDepth}};
  const OrganismFdp f = member_fdp_statistics(pop, s, 300, bins, rng);
  REQUIRE_EQ(f.member_output.bins.size(), 3u);
  CHECK_EQ(f.member_output.bins[0].trials, 300);
  CHECK_EQ(f.member_output.bins[2].trials, 0);
  for (std::size_t b = 0; b < 3; ++b) {
    CHECK_EQ(f.member_output.bins[b].trials, f.organism_fitness.bins[b].trials);
    // An unchanged member output can never change organism fitness.
    CHECK_LE(f.member_output.bins[b].silent, f.organism_fitness.bins[b].silent);
  }
}

TEST_CASE("Serialization.RoundTrip") {
  Rng rng(16);
  OrganismParams p = params(5, 12, 3, 2);
  p.member_swap_rate = 0.25;
  p.wiring_mutation_rate = 0.125;
  for (std::size_t i = 0; i < 50; ++i) {
    const Organism org = random_organism(p, 2, 6, i, rng);
    std::stringstream io;
    write_organism(io, org);
    const Organism back = read_organism(io);
    CHECK(back == org);
  }
  const Organism unlimited(params(1, std::nullopt, 1), {member("(pdiv x 0.1)", 0)});
  std::stringstream io;
  write_organism(io, unlimited);
  CHECK(read_organism(io) == unlimited);
}

TEST_CASE("Serialization.MalformedInputThrows") {
  std::stringstream bad("organism\nmember_count 1\n");
  CHECK_THROWS(read_organism(bad));
  std::stringstream garbage("hello\n");
  CHECK_THROWS(read_organism(garbage));
}
