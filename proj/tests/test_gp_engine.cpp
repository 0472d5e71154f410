#include "check.hpp"

#include <stdexcept>

#include <cstring>
#include <sstream>

#include "opengp/gp_engine.hpp"
#include "opengp/sexpr.hpp"
#include "support.hpp"

using namespace opengp;
using opengp::testing::gen_tree;

namespace {

GpParams small_params(std::uint64_t seed) {
  GpParams p;
  p.population_size = 100;
  p.generations = 30;
  p.crossover_rate = 0.5;
  p.mutation_rate = 0.5;
  p.seed = seed;
  return p;
}

std::string csv_of(const RunStats& stats) {
  std::ostringstream o;
  write_csv(o, stats);
  return o.str();
}

bool bits_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

Individual individual(const char* text, double fitness) {
  Individual ind{from_sexpr(text)};
  ind.fitness = fitness;
  return ind;
}

}  // namespace

TEST_CASE("GpParams.Validation") {
  GpParams p;
  CHECK_NOTHROW(p.validate());
  p.crossover_rate = 1.2;
  try {
    p.validate();
    FAIL("no exception");
  } catch (const std::invalid_argument& e) {
    CHECK_EQ(std::string(e.what()).rfind("crossover_rate", 0), 0u);
  }
  p = GpParams{};
  p.crossover_rate = 0.9;
  p.mutation_rate = 0.2;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = GpParams{};
  p.population_size = 1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("InitPopulation.FullHalfAtHeightTwo") {
  GpParams p;
  p.population_size = 10;
  p.init_min_height = 2;
  p.init_max_height = 2;
  p.tournament_size = 2;
  Rng rng(1);
  const Population pop = init_population(p, make_sextic_suite(48, 1), rng);
  REQUIRE_EQ(pop.members.size(), 10u);
  int full = 0;
  for (std::size_t i = 0; i < 10; i += 2) {
    // A FULL tree of height 2 is one function over two terminals.
    CHECK_EQ(pop.members[i].tree.size(), 3u);
    ++full;
  }
  CHECK_EQ(full, 5);
  for (std::size_t i = 1; i < 10; i += 2) {
    CHECK_LE(tree_height(pop.members[i].tree), 2);
  }
}

TEST_CASE("InitPopulation.RampedHeightsAndEvaluated") {
  GpParams p;
  p.population_size = 40;
  Rng rng(2);
  const TestSuite s = make_sextic_suite(48, 2);
  const Population pop = init_population(p, s, rng);
  for (std::size_t i = 0; i < pop.members.size(); ++i) {
    const int h = p.init_min_height + static_cast<int>(i / 2) % 5;
    const ExprTree& t = pop.members[i].tree;
    if (i % 2 == 0) {
      CHECK_EQ(tree_height(t), h);
      CHECK_EQ(t.size(), (1u << h) - 1);
    } else {
      CHECK_LE(tree_height(t), h);
    }
    CHECK(bits_equal(pop.members[i].fitness, fitness(t, s)));
  }
}

TEST_CASE("InitPopulation.SizeTwoAcceptedSizeOneRejected") {
  GpParams p;
  p.tournament_size = 2;
  p.population_size = 2;
  Rng rng(3);
  const TestSuite s = make_sextic_suite(48, 3);
  CHECK_EQ(init_population(p, s, rng).members.size(), 2u);
  p.population_size = 1;
  p.tournament_size = 1;
  CHECK_THROWS_AS(init_population(p, s, rng), std::invalid_argument);
}

TEST_CASE("InitPopulation.SameSeedSamePopulation") {
  GpParams p;
  const TestSuite s = make_sextic_suite(48, 4);
  Rng a(5);
  Rng b(5);
  const Population pa = init_population(p, s, a);
  const Population pb = init_population(p, s, b, 3);
  REQUIRE_EQ(pa.members.size(), pb.members.size());
  for (std::size_t i = 0; i < pa.members.size(); ++i) {
    CHECK_EQ(pa.members[i].tree, pb.members[i].tree);
    CHECK(bits_equal(pa.members[i].fitness, pb.members[i].fitness));
  }
}

TEST_CASE("Tournament.GlobalBestWinsWhenEveryoneDrawn") {
  const std::vector<Individual> pop = {individual("x", 3.0), individual("x", 1.0),
                                       individual("x", 2.0), individual("x", 4.0)};
  const int k = 4;
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    Rng rng(seed);
    Rng shadow(seed);
    std::uniform_int_distribution<std::size_t> pick(0, 3);
    std::vector<bool> seen(4, false);
    for (int i = 0; i < k; ++i) seen[pick(shadow)] = true;
    const std::size_t w = tournament_select(pop, k, rng);
    if (std::find(seen.begin(), seen.end(), false) == seen.end()) {
      CHECK_EQ(w, 1u);
      ++checked;
    }
  }
  CHECK_GT(checked, 0);
}

TEST_CASE("Tournament.SizeOneIsUniform") {
  std::vector<Individual> pop;
  for (int i = 0; i < 4; ++i) pop.push_back(individual("x", static_cast<double>(i)));
  Rng rng(6);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 20000; ++i) ++counts[tournament_select(pop, 1, rng)];
  for (int c : counts) {
    CHECK_GT(c, 4600);
    CHECK_LT(c, 5400);
  }
}

TEST_CASE("Tournament.EqualFitnessSmallerTreeWins") {
  const std::vector<Individual> pop = {individual("(+ (* x x) (- x 1))", 1.0),  // size 7
                                       individual("(+ (* x x) x)", 1.0),        // size 5
                                       individual("(+ (* (* x x) x) (- x (* x 1)))", 1.0)};
  REQUIRE_EQ(pop[1].tree.size(), 5u);
  Rng rng(7);
  for (int i = 0; i < 200; ++i) CHECK_EQ(tournament_select(pop, 60, rng), 1u);
  // Same fitness and size: lower index wins.
  const std::vector<Individual> twins = {individual("x", 1.0), individual("x", 1.0)};
  for (int i = 0; i < 200; ++i) CHECK_EQ(tournament_select(twins, 60, rng), 0u);
}

TEST_CASE("Crossover.LeafParentsSwapWholeTrees") {
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const CrossoverResult r = subtree_crossover(from_sexpr("x"), from_sexpr("1.0"), rng);
    REQUIRE(r.info);
    CHECK_EQ(to_sexpr(r.child), "1");
  }
}

TEST_CASE("Crossover.SizeIdentityAndSiteBias") {
  Rng rng(9);
  std::mt19937_64 g(9);
  int internal = 0;
  int total = 0;
  for (int i = 0; i < 5000; ++i) {
    const ExprTree a = gen_tree(g, 7);
    const ExprTree b = gen_tree(g, 7);
    const CrossoverResult r = subtree_crossover(a, b, rng);
    REQUIRE(r.info);
    const NodeId s = r.info->site;
    CHECK_EQ(r.donated, subtree_at(b, r.info->donor_site));
    CHECK_EQ(r.child.size(), a.size() - a.subtree_size(s) + r.donated.size());
    CHECK_EQ(r.child, replace_subtree(a, s, r.donated));
    if (a.size() > 1) {
      ++total;
      internal += a.is_leaf(s) ? 0 : 1;
    }
  }
  const double frac = static_cast<double>(internal) / total;
  CHECK_NEAR(frac, 0.9, 0.03);
}

TEST_CASE("Crossover.HeightLimitHolds") {
  Rng rng(10);
  VariationLimits lim;
  lim.height_limit = 3;
  int copies = 0;
  for (int i = 0; i < 1000; ++i) {
    const ExprTree a = random_tree(InitMethod::Full, 3, rng);
    const ExprTree b = random_tree(InitMethod::Full, 3, rng);
    const CrossoverResult r = subtree_crossover(a, b, rng, lim);
    REQUIRE_LE(tree_height(r.child), 3);
    if (!r.info) {
      ++copies;
      CHECK_EQ(r.child, a);
    }
  }
  CHECK_LT(copies, 1000);
}

TEST_CASE("Mutation.LeafParentBecomesGrowTree") {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const MutationResult r = subtree_mutation(from_sexpr("x"), rng);
    REQUIRE(r.site);
    CHECK_EQ(*r.site, 0u);
    CHECK_LE(tree_height(r.child), 4);
    CHECK_EQ(r.child, r.inserted);
  }
}

TEST_CASE("Mutation.SizeArithmeticAtLeaves") {
  Rng rng(12);
  std::mt19937_64 g(12);
  for (int i = 0; i < 2000; ++i) {
    const ExprTree t = gen_tree(g, 9);
    const MutationResult r = subtree_mutation(t, rng);
    REQUIRE(r.site);
    const std::size_t removed = t.subtree_size(*r.site);
    CHECK_EQ(r.child.size(), t.size() - removed + r.inserted.size());
    if (t.is_leaf(*r.site)) { CHECK_EQ(r.child.size(), t.size() + r.inserted.size() - 1); }
    CHECK_LE(tree_height(r.inserted), 4);
  }
}

TEST_CASE("Mutation.SeededReproducible") {
  const ExprTree t = from_sexpr("(+ (* x x) (- x 0.5))");
  Rng a(13);
  Rng b(13);
  for (int i = 0; i < 50; ++i) {
    CHECK_EQ(subtree_mutation(t, a).child, subtree_mutation(t, b).child);
  }
}

TEST_CASE("Mutation.HeightLimitHolds") {
  Rng rng(14);
  VariationLimits lim;
  lim.height_limit = 5;
  for (int i = 0; i < 1000; ++i) {
    const ExprTree t = random_tree(InitMethod::Full, 5, rng);
    REQUIRE_LE(tree_height(subtree_mutation(t, rng, lim).child), 5);
  }
}

TEST_CASE("PopulationStats.QuartilesOfKnownHeights") {
  Population pop;
  for (const char* t : {"x", "(+ x x)", "(+ (+ x x) x)", "(+ (+ (+ x x) x) x)"}) {
    pop.members.push_back(individual(t, 1.0));
  }
  const GenStats g = population_stats(pop, 48, default_depth_bins());
  CHECK_DOUBLE_EQ(g.height.q1, 1.75);
  CHECK_DOUBLE_EQ(g.height.median, 2.5);
  CHECK_DOUBLE_EQ(g.height.q3, 3.25);
  CHECK_DOUBLE_EQ(g.mean_height, 2.5);
}

TEST_CASE("Evolve.PureReproductionKeepsBestWithFullTournament") {
  GpParams p = small_params(15);
  p.crossover_rate = 0.0;
  p.mutation_rate = 0.0;
  p.tournament_size = p.population_size;
  const TestSuite s = make_sextic_suite(48, 15);
  double prev = 0.0;
  bool first = true;
  run(p, s, {}, [&](const Population&, const GenStats& g) {
    if (!first) { CHECK(bits_equal(g.best_fitness, prev)); }
    prev = g.best_fitness;
    first = false;
  });
}

TEST_CASE("Evolve.ShortcutMatchesFullEvaluation") {
  const TestSuite s = make_sextic_suite(48, 16);
  GpParams on = small_params(16);
  GpParams off = on;
  off.shortcut_enabled = false;
  std::vector<std::vector<double>> fit_on;
  std::vector<std::vector<double>> fit_off;
  const auto collect = [](std::vector<std::vector<double>>& out) {
    return [&out](const Population& pop, const GenStats&) {
      std::vector<double> f;
      for (const Individual& ind : pop.members) f.push_back(ind.fitness);
      out.push_back(std::move(f));
    };
  };
  const RunResult a = run(on, s, {}, collect(fit_on));
  const RunResult b = run(off, s, {}, collect(fit_off));
  REQUIRE_EQ(fit_on.size(), fit_off.size());
  for (std::size_t g = 0; g < fit_on.size(); ++g) {
    REQUIRE_EQ(fit_on[g].size(), fit_off[g].size());
    for (std::size_t i = 0; i < fit_on[g].size(); ++i) {
      INFO("gen ", g, " child ", i);
      REQUIRE(bits_equal(fit_on[g][i], fit_off[g][i]));
    }
  }
  std::int64_t nodes_on = 0;
  std::int64_t nodes_off = 0;
  std::int64_t hits = 0;
  for (std::size_t g = 1; g < a.stats.rows.size(); ++g) {
    nodes_on += a.stats.rows[g].nodes_evaluated;
    nodes_off += b.stats.rows[g].nodes_evaluated;
    hits += a.stats.rows[g].shortcut_hits;
    CHECK_EQ(b.stats.rows[g].shortcut_hits, 0);
  }
  CHECK_GT(hits, 0);
  CHECK_LT(nodes_on, nodes_off);
}

TEST_CASE("Evolve.StoredFitnessAlwaysMatchesReevaluation") {
  const TestSuite s = make_sextic_suite(48, 17);
  int copied = 0;
  run(small_params(17), s, {}, [&](const Population& pop, const GenStats&) {
    for (const Individual& ind : pop.members) {
      const Individual fresh = evaluate_individual(ind.tree, s, 0.01);
      REQUIRE(bits_equal(ind.fitness, fresh.fitness));
      REQUIRE_EQ(ind.hits, fresh.hits);
      copied += ind.fitness_copied ? 1 : 0;
    }
  });
  CHECK_GT(copied, 0);
}

TEST_CASE("Evolve.HeightLimitNeverExceeded") {
  GpParams p = small_params(18);
  p.height_limit = 8;
  run(p, make_sextic_suite(48, 18), {}, [&](const Population& pop, const GenStats& g) {
    CHECK_LE(g.height.q3, 8);
    for (const Individual& ind : pop.members) REQUIRE_LE(tree_height(ind.tree), 8);
  });
}

TEST_CASE("Run.ZeroGenerationsGivesInitialRowOnly") {
  GpParams p = small_params(19);
  p.generations = 0;
  const RunResult r = run(p, make_sextic_suite(48, 19));
  REQUIRE_EQ(r.stats.rows.size(), 1u);
  CHECK_EQ(r.stats.rows[0].generation, 0);
  CHECK_EQ(r.final_population.members.size(), 100u);
}

TEST_CASE("Run.GenerationIndexMonotone") {
  const RunResult r = run(small_params(20), make_sextic_suite(48, 20));
  REQUIRE_EQ(r.stats.rows.size(), 31u);
  for (std::size_t g = 0; g < r.stats.rows.size(); ++g) {
    CHECK_EQ(r.stats.rows[g].generation, static_cast<int>(g));
  }
}

TEST_CASE("Run.SameSeedSameCsvAcrossWorkerCounts") {
  const TestSuite s = make_sextic_suite(48, 21);
  EngineOptions one;
  EngineOptions many;
  many.workers = 4;
  const std::string a = csv_of(run(small_params(21), s, one).stats);
  const std::string b = csv_of(run(small_params(21), s, one).stats);
  const std::string c = csv_of(run(small_params(21), s, many).stats);
  CHECK_EQ(a, b);
  CHECK_EQ(a, c);
  CHECK_NE(a, csv_of(run(small_params(22), s, one).stats));
}

TEST_CASE("Run.UnlimitedGrowthBloats") {
  // Crossover and mutation at 0.5 each: at the 0.9 / 0.05 defaults a share of
  // seeds collapses onto a single constant leaf and never grows.
  GpParams p;
  p.population_size = 500;
  p.generations = 200;
  p.crossover_rate = 0.5;
  p.mutation_rate = 0.5;
  p.seed = 1;
  const RunResult r = run(p, make_sextic_suite(48, 1));
  CHECK_GT(r.stats.rows.back().mean_size, 4 * r.stats.rows.front().mean_size);
}
