#include "opengp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "opengp/sexpr.hpp"

namespace opengp {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Monolithic:
      return "monolithic";
    case Mode::Open:
      return "open";
    case Mode::Both:
      return "both";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  if (text == "monolithic") return Mode::Monolithic;
  if (text == "open") return Mode::Open;
  if (text == "both") return Mode::Both;
  throw ConfigError("mode: expected monolithic, open or both, got '" +
                        std::string(text) + "'",
                    "mode");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, std::string_view value,
                            const std::string& expected) {
  throw ConfigError(key + ": expected " + expected + ", got '" +
                        std::string(value) + "'",
                    key);
}

template <typename T>
T parse_integer(const std::string& key, std::string_view v) {
  T out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    bad_value(key, v, "an integer");
  }
  return out;
}

int parse_int(const std::string& key, std::string_view v) {
  return parse_integer<int>(key, v);
}

std::uint64_t parse_u64(const std::string& key, std::string_view v) {
  return parse_integer<std::uint64_t>(key, v);
}

double parse_real(const std::string& key, std::string_view v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size() ||
      !std::isfinite(out)) {
    bad_value(key, v, "a finite real");
  }
  return out;
}

bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, v, "true or false");
}

std::optional<int> parse_optional_int(const std::string& key, std::string_view v) {
  if (v == "none") return std::nullopt;
  return parse_int(key, v);
}

std::string optional_text(const std::optional<int>& v) {
  return v ? std::to_string(*v) : "none";
}

using Setter = std::function<void(ExperimentConfig&, OrganismParams&,
                                  const std::string&, std::string_view)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"mode", [](auto& c, auto&, auto&, auto v) { c.mode = parse_mode(v); }},
      {"seed", [](auto& c, auto&, auto& k, auto v) { c.seed = parse_u64(k, v); }},
      {"output.dir", [](auto& c, auto&, auto&, auto v) { c.output_dir = std::string(v); }},

      {"gp.population_size",
       [](auto& c, auto&, auto& k, auto v) { c.gp.population_size = parse_int(k, v); }},
      {"gp.generations",
       [](auto& c, auto&, auto& k, auto v) { c.gp.generations = parse_int(k, v); }},
      {"gp.tournament_size",
       [](auto& c, auto&, auto& k, auto v) { c.gp.tournament_size = parse_int(k, v); }},
      {"gp.crossover_rate",
       [](auto& c, auto&, auto& k, auto v) { c.gp.crossover_rate = parse_real(k, v); }},
      {"gp.mutation_rate",
       [](auto& c, auto&, auto& k, auto v) { c.gp.mutation_rate = parse_real(k, v); }},
      {"gp.init_min_height",
       [](auto& c, auto&, auto& k, auto v) { c.gp.init_min_height = parse_int(k, v); }},
      {"gp.init_max_height",
       [](auto& c, auto&, auto& k, auto v) { c.gp.init_max_height = parse_int(k, v); }},
      {"gp.height_limit",
       [](auto& c, auto&, auto& k, auto v) { c.gp.height_limit = parse_optional_int(k, v); }},
      {"gp.shortcut_enabled",
       [](auto& c, auto&, auto& k, auto v) { c.gp.shortcut_enabled = parse_bool(k, v); }},
      {"gp.hit_threshold",
       [](auto& c, auto&, auto& k, auto v) { c.gp.hit_threshold = parse_real(k, v); }},
      {"gp.mutation_height",
       [](auto& c, auto&, auto& k, auto v) { c.gp.mutation_height = parse_int(k, v); }},
      {"gp.internal_site_bias",
       [](auto& c, auto&, auto& k, auto v) { c.gp.internal_site_bias = parse_real(k, v); }},
      {"gp.variation_attempts",
       [](auto& c, auto&, auto& k, auto v) { c.gp.variation_attempts = parse_int(k, v); }},

      {"organism.member_count",
       [](auto& c, auto& o, auto& k, auto v) {
         c.organism_members_auto = v == "auto";
         if (!c.organism_members_auto) o.member_count = parse_int(k, v);
       }},
      {"organism.depth_cap",
       [](auto&, auto& o, auto& k, auto v) { o.depth_cap = parse_optional_int(k, v); }},
      {"organism.register_count",
       [](auto&, auto& o, auto& k, auto v) { o.register_count = parse_int(k, v); }},
      {"organism.output_register",
       [](auto&, auto& o, auto& k, auto v) { o.output_register = parse_int(k, v); }},
      {"organism.member_swap_rate",
       [](auto&, auto& o, auto& k, auto v) { o.member_swap_rate = parse_real(k, v); }},
      {"organism.wiring_mutation_rate",
       [](auto&, auto& o, auto& k, auto v) { o.wiring_mutation_rate = parse_real(k, v); }},

      {"suite.benchmark",
       [](auto& c, auto&, auto& k, auto v) {
         if (v != "sextic") bad_value(k, v, "sextic");
         c.suite.benchmark = std::string(v);
       }},
      {"suite.n_cases",
       [](auto& c, auto&, auto& k, auto v) { c.suite.n_cases = parse_int(k, v); }},
      {"suite.seed", [](auto& c, auto&, auto& k, auto v) { c.suite.seed = parse_u64(k, v); }},
      {"suite.pdiv_threshold",
       [](auto& c, auto&, auto& k, auto v) { c.suite.pdiv_threshold = parse_real(k, v); }},

      {"analysis.fdp",
       [](auto& c, auto&, auto& k, auto v) { c.analysis.fdp = parse_bool(k, v); }},
      {"analysis.entropy",
       [](auto& c, auto&, auto& k, auto v) { c.analysis.entropy = parse_bool(k, v); }},
      {"analysis.fdp_trials",
       [](auto& c, auto&, auto& k, auto v) { c.analysis.fdp_trials = parse_int(k, v); }},
      {"analysis.seed",
       [](auto& c, auto&, auto& k, auto v) { c.analysis.seed = parse_u64(k, v); }},
      {"analysis.depth_bins",
       [](auto& c, auto&, auto& k, auto v) { c.analysis.depth_bins = parse_depth_bins(v, k); }},
      {"analysis.silent_tolerance",
       [](auto& c, auto&, auto& k, auto v) { c.analysis.silent_tolerance = parse_real(k, v); }},
      {"analysis.fit_target",
       [](auto& c, auto&, auto& k, auto v) { c.analysis.fit_target = parse_int(k, v); }},
      {"analysis.fit_max_runs",
       [](auto& c, auto&, auto& k, auto v) { c.analysis.fit_max_runs = parse_int(k, v); }},
  };
  return table;
}

}  // namespace

std::vector<DepthBin> parse_depth_bins(std::string_view text,
                                       const std::string& key) {
  std::vector<DepthBin> bins;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view item = trim(text.substr(start, comma - start));
    const std::size_t dash = item.find('-');
    if (dash == std::string_view::npos) bad_value(key, item, "lo-hi");
    DepthBin bin;
    bin.lo = parse_int(key, trim(item.substr(0, dash)));
    const std::string_view hi = trim(item.substr(dash + 1));
    bin.hi = hi == "inf" ? kUnboundedDepth : parse_int(key, hi);
    if (bin.lo < 1 || bin.hi < bin.lo) bad_value(key, item, "1 <= lo <= hi");
    if (!bins.empty() && bin.lo <= bins.back().hi) {
      bad_value(key, item, "ascending, non-overlapping bins");
    }
    bins.push_back(bin);
    start = comma + 1;
  }
  if (bins.empty()) bad_value(key, text, "at least one bin");
  return bins;
}

void ExperimentConfig::validate() const {
  try {
    gp.validate();
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    throw ConfigError("gp." + what, "gp." + what.substr(0, what.find(':')));
  }
  if ((mode == Mode::Open || mode == Mode::Both) && !organism) {
    throw ConfigError("organism: mode " + to_string(mode) +
                          " needs organism.member_count and organism.depth_cap",
                      "organism");
  }
  if (organism) {
    try {
      organism->validate();
    } catch (const std::invalid_argument& e) {
      const std::string what = e.what();
      throw ConfigError("organism." + what,
                        "organism." + what.substr(0, what.find(':')));
    }
    if (organism_members_auto && mode != Mode::Both) {
      throw ConfigError(
          "organism.member_count: 'auto' needs mode both (K is sized from the "
          "monolithic run)",
          "organism.member_count");
    }
  }
  if (suite.n_cases < 1) {
    throw ConfigError("suite.n_cases: must be >= 1", "suite.n_cases");
  }
  if (!(suite.pdiv_threshold >= 0.0)) {
    throw ConfigError("suite.pdiv_threshold: must be >= 0", "suite.pdiv_threshold");
  }
  if (analysis.fdp_trials < 0) {
    throw ConfigError("analysis.fdp_trials: must be >= 0", "analysis.fdp_trials");
  }
  if (!(analysis.silent_tolerance >= 0.0)) {
    throw ConfigError("analysis.silent_tolerance: must be >= 0",
                      "analysis.silent_tolerance");
  }
  if (analysis.fit_target < 0) {
    throw ConfigError("analysis.fit_target: must be >= 0", "analysis.fit_target");
  }
  if (analysis.fit_max_runs < 1) {
    throw ConfigError("analysis.fit_max_runs: must be >= 1", "analysis.fit_max_runs");
  }
  if (output_dir.empty()) throw ConfigError("output.dir: must not be empty", "output.dir");
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  OrganismParams organism;
  bool any_organism = false;
  std::set<std::string> seen;
  bool have_seed = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" +
                            key + "'",
                        key);
    }
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" +
                            key + "'",
                        key);
    }
    it->second(config, organism, key, value);
    if (key == "seed") have_seed = true;
    if (key.rfind("organism.", 0) == 0) any_organism = true;
  }
  if (!have_seed) throw ConfigError("seed: required (no implicit seeding)", "seed");
  if (any_organism) {
    if (!seen.contains("organism.member_count") || !seen.contains("organism.depth_cap")) {
      throw ConfigError(
          "organism: organism.member_count and organism.depth_cap are required",
          seen.contains("organism.member_count") ? "organism.depth_cap"
                                                 : "organism.member_count");
    }
    config.organism = organism;
  }
  config.gp.seed = config.seed;
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  if (in.bad()) throw ConfigError("cannot read config file '" + path.string() + "'");
  return parse_config(text.str());
}

std::string config_text(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "mode = " << to_string(c.mode) << '\n'
    << "seed = " << c.seed << '\n'
    << "output.dir = " << c.output_dir << '\n'
    << "gp.population_size = " << c.gp.population_size << '\n'
    << "gp.generations = " << c.gp.generations << '\n'
    << "gp.tournament_size = " << c.gp.tournament_size << '\n'
    << "gp.crossover_rate = " << format_real(c.gp.crossover_rate) << '\n'
    << "gp.mutation_rate = " << format_real(c.gp.mutation_rate) << '\n'
    << "gp.init_min_height = " << c.gp.init_min_height << '\n'
    << "gp.init_max_height = " << c.gp.init_max_height << '\n'
    << "gp.height_limit = " << optional_text(c.gp.height_limit) << '\n'
    << "gp.shortcut_enabled = " << (c.gp.shortcut_enabled ? "true" : "false") << '\n'
    << "gp.hit_threshold = " << format_real(c.gp.hit_threshold) << '\n'
    << "gp.mutation_height = " << c.gp.mutation_height << '\n'
    << "gp.internal_site_bias = " << format_real(c.gp.internal_site_bias) << '\n'
    << "gp.variation_attempts = " << c.gp.variation_attempts << '\n';
  if (c.organism) {
    const OrganismParams& p = *c.organism;
    o << "organism.member_count = "
      << (c.organism_members_auto ? std::string("auto") : std::to_string(p.member_count))
      << '\n'
      << "organism.depth_cap = " << optional_text(p.depth_cap) << '\n'
      << "organism.register_count = " << p.register_count << '\n'
      << "organism.output_register = " << p.output_register << '\n'
      << "organism.member_swap_rate = " << format_real(p.member_swap_rate) << '\n'
      << "organism.wiring_mutation_rate = " << format_real(p.wiring_mutation_rate)
      << '\n';
  }
  std::string bins;
  for (const DepthBin& b : c.analysis.depth_bins) {
    if (!bins.empty()) bins += ',';
    bins += bin_spec(b);
  }
  o << "suite.benchmark = " << c.suite.benchmark << '\n'
    << "suite.n_cases = " << c.suite.n_cases << '\n'
    << "suite.seed = " << c.suite_seed() << '\n'
    << "suite.pdiv_threshold = " << format_real(c.suite.pdiv_threshold) << '\n'
    << "analysis.fdp = " << (c.analysis.fdp ? "true" : "false") << '\n'
    << "analysis.entropy = " << (c.analysis.entropy ? "true" : "false") << '\n'
    << "analysis.fdp_trials = " << c.analysis.fdp_trials << '\n'
    << "analysis.seed = " << c.analysis_seed() << '\n'
    << "analysis.depth_bins = " << bins << '\n'
    << "analysis.silent_tolerance = " << format_real(c.analysis.silent_tolerance) << '\n'
    << "analysis.fit_target = " << c.analysis.fit_target << '\n'
    << "analysis.fit_max_runs = " << c.analysis.fit_max_runs << '\n';
  return o.str();
}

}  // namespace opengp
