#ifndef OPENGP_CONFIG_HPP
#define OPENGP_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "opengp/gp_engine.hpp"
#include "opengp/open_arch.hpp"
#include "opengp/run_stats.hpp"

namespace opengp {

/// Any problem with an experiment configuration. `key()` names the offending
/// key when there is one.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string key = {})
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class Mode { Monolithic, Open, Both };

std::string to_string(Mode mode);
Mode parse_mode(std::string_view text);  // throws ConfigError

struct SuiteSpec {
  std::string benchmark = "sextic";
  int n_cases = 48;
  std::optional<std::uint64_t> seed;  // defaults to the experiment seed
  double pdiv_threshold = kDefaultPdivThreshold;
};

struct AnalysisSpec {
  bool fdp = false;
  bool entropy = false;
  int fdp_trials = 1000;
  std::optional<std::uint64_t> seed;  // defaults to experiment seed + 1
  std::vector<DepthBin> depth_bins = default_depth_bins();
  double silent_tolerance = kDefaultSilentTolerance;
  int fit_target = 0;     // > 0: pool fit trees from extra seeded runs
  int fit_max_runs = 20;  // give up after this many runs
};

struct ExperimentConfig {
  Mode mode = Mode::Monolithic;
  std::uint64_t seed = 0;
  GpParams gp;
  std::optional<OrganismParams> organism;
  bool organism_members_auto = false;  // size K from the monolithic run
  SuiteSpec suite;
  AnalysisSpec analysis;
  std::string output_dir = "out";

  std::uint64_t suite_seed() const { return suite.seed.value_or(seed); }
  std::uint64_t analysis_seed() const { return analysis.seed.value_or(seed + 1); }

  /// Cross-field checks; throws ConfigError naming the key.
  void validate() const;
};

/// Parses `key = value` lines. `#` starts a comment; blank lines are ignored.
/// Unknown keys, duplicate keys and malformed values are errors.
ExperimentConfig parse_config(std::string_view text);

/// Reads and parses a config file. Throws ConfigError if it cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every resolved setting in config syntax; parse_config() of this text gives
/// back an equivalent config.
std::string config_text(const ExperimentConfig& config);

/// "1-5,6-10,51-inf" -> bins. Throws ConfigError naming `key`.
std::vector<DepthBin> parse_depth_bins(std::string_view text,
                                       const std::string& key = "analysis.depth_bins");

}  // namespace opengp

#endif  // OPENGP_CONFIG_HPP
