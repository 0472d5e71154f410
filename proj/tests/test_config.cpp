#include "check.hpp"

#include <filesystem>
#include <fstream>

#include "opengp/config.hpp"

using namespace opengp;

namespace {

std::string key_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("Config.MinimalFillsDefaults") {
  const ExperimentConfig c = parse_config("mode = monolithic\nseed = 42\n");
  CHECK_EQ(c.mode, Mode::Monolithic);
  CHECK_EQ(c.seed, 42u);
  CHECK_EQ(c.gp.seed, 42u);
  CHECK_EQ(c.gp.population_size, 500);
  CHECK_EQ(c.gp.tournament_size, 7);
  CHECK_DOUBLE_EQ(c.gp.crossover_rate, 0.9);
  CHECK_DOUBLE_EQ(c.gp.mutation_rate, 0.05);
  CHECK_FALSE(c.gp.height_limit);
  CHECK_EQ(c.suite.n_cases, 48);
  CHECK_EQ(c.suite_seed(), 42u);
  CHECK_EQ(c.analysis_seed(), 43u);
  CHECK_FALSE(c.organism);
  CHECK_EQ(c.analysis.depth_bins.size(), 5u);
  // Echoed in the resolved text.
  const std::string text = config_text(c);
  CHECK_NE(text.find("gp.population_size = 500"), std::string::npos);
  CHECK_NE(text.find("suite.seed = 42"), std::string::npos);
}

TEST_CASE("Config.CrossoverRateOutOfRangeNamesKey") {
  try {
    parse_config("mode = monolithic\nseed = 1\ngp.crossover_rate = 1.2\n");
    FAIL("no exception");
  } catch (const ConfigError& e) {
    CHECK_EQ(e.key(), "gp.crossover_rate");
    CHECK_NE(std::string(e.what()).find("crossover_rate"), std::string::npos);
  }
}

TEST_CASE("Config.OpenModeNeedsOrganism") {
  CHECK_EQ(key_of("mode = open\nseed = 1\n"), "organism");
  CHECK_EQ(key_of("mode = both\nseed = 1\n"), "organism");
  CHECK_EQ(key_of("mode = open\nseed = 1\norganism.member_count = 4\n"), "organism.depth_cap");
  const ExperimentConfig c = parse_config(
      "mode = open\nseed = 1\norganism.member_count = 4\norganism.depth_cap = 10\n");
  REQUIRE(c.organism);
  CHECK_EQ(c.organism->member_count, 4);
}

TEST_CASE("Config.ErrorsNameTheKey") {
  CHECK_EQ(key_of("mode = monolithic\n"), "seed");
  CHECK_EQ(key_of("mode = monolithic\nseed = 1\ngp.typo = 3\n"), "gp.typo");
  CHECK_EQ(key_of("mode = monolithic\nseed = 1\nseed = 2\n"), "seed");
  CHECK_EQ(key_of("mode = sideways\nseed = 1\n"), "mode");
  CHECK_EQ(key_of("mode = monolithic\nseed = -4\n"), "seed");
  CHECK_EQ(key_of("mode = monolithic\nseed = 1\ngp.population_size = 12x\n"),
            "gp.population_size");
  CHECK_EQ(key_of("mode = monolithic\nseed = 1\ngp.shortcut_enabled = yes\n"),
            "gp.shortcut_enabled");
  CHECK_EQ(key_of("mode = monolithic\nseed = 1\ngp.mutation_rate = 0.5\n"),
            "gp.mutation_rate");
  CHECK_EQ(key_of("mode = monolithic\nseed = 1\nanalysis.depth_bins = 5-1\n"),
            "analysis.depth_bins");
  CHECK_EQ(key_of("mode = monolithic\nseed = 1\nsuite.benchmark = quartic\n"),
            "suite.benchmark");
  CHECK_EQ(key_of("mode = open\nseed = 1\norganism.member_count = 2\n"
                   "organism.depth_cap = 10\norganism.output_register = 3\n"),
            "organism.output_register");
  CHECK_EQ(key_of("mode = open\nseed = 1\norganism.member_count = auto\n"
                   "organism.depth_cap = 10\n"),
            "organism.member_count");
}

TEST_CASE("Config.MalformedLine") {
  try {
    parse_config("mode = monolithic\nseed 1\n");
    FAIL("no exception");
  } catch (const ConfigError& e) {
    CHECK_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST_CASE("Config.CommentsAndWhitespace") {
  const ExperimentConfig c = parse_config(
      "# experiment\n\n  mode=both   # trailing\nseed = 9\n"
      "organism.member_count = auto\norganism.depth_cap = none\n"
      "gp.height_limit = 17\nanalysis.depth_bins = 1-1, 2-inf\n");
  CHECK_EQ(c.mode, Mode::Both);
  CHECK(c.organism_members_auto);
  CHECK_FALSE(c.organism->depth_cap);
  CHECK_EQ(c.gp.height_limit, 17);
  REQUIRE_EQ(c.analysis.depth_bins.size(), 2u);
  CHECK_EQ(c.analysis.depth_bins[1].hi, kUnboundedDepth);
}

TEST_CASE("Config.ResolvedTextReparsesToSameText") {
  const ExperimentConfig c = parse_config(
      "mode = both\nseed = 5\ngp.generations = 3\ngp.crossover_rate = 0.7\n"
      "gp.mutation_rate = 0.3\norganism.member_count = 13\norganism.depth_cap = 10\n"
      "organism.register_count = 4\nanalysis.fdp = true\nanalysis.silent_tolerance = 1e-6\n"
      "output.dir = somewhere\n");
  const std::string text = config_text(c);
  const ExperimentConfig back = parse_config(text);
  CHECK_EQ(config_text(back), text);
  CHECK_EQ(back.organism, c.organism);
}

TEST_CASE("Config.LoadMissingFile") {
  CHECK_THROWS_AS(load_config("/nonexistent/dir/x.cfg"), ConfigError);
  const auto path = std::filesystem::temp_directory_path() / "opengp_cfg_test.cfg";
  {
    std::ofstream out(path);
    out << "mode = monolithic\nseed = 3\n";
  }
  CHECK_EQ(load_config(path).seed, 3u);
  std::filesystem::remove(path);
}

TEST_CASE("Config.ParseMode") {
  CHECK_EQ(parse_mode("open"), Mode::Open);
  CHECK_EQ(to_string(Mode::Both), "both");
  CHECK_THROWS_AS(parse_mode("OPEN"), ConfigError);
}
