#ifndef OPENGP_RUN_STATS_HPP
#define OPENGP_RUN_STATS_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "opengp/stats.hpp"

namespace opengp {

/// Inclusive depth range; hi == kUnboundedDepth means no upper end.
struct DepthBin {
  int lo = 1;
  int hi = 1;

  bool contains(int depth) const noexcept { return depth >= lo && depth <= hi; }
  friend bool operator==(const DepthBin&, const DepthBin&) = default;
};

inline constexpr int kUnboundedDepth = std::numeric_limits<int>::max();

/// [1,5] [6,10] [11,20] [21,50] [51,inf)
std::vector<DepthBin> default_depth_bins();

/// "1_5", "51_inf"
std::string bin_label(const DepthBin& bin);

/// "1-5", "51-inf"; the form used in config files.
std::string bin_spec(const DepthBin& bin);

/// Index of the bin holding `depth`, if any.
std::optional<std::size_t> find_bin(const std::vector<DepthBin>& bins,
                                    int depth);

/// Variation events in one depth bin: how many children were produced from a
/// site in that bin, and how many had bitwise-identical fitness to parent 1.
struct BinCount {
  std::int64_t trials = 0;
  std::int64_t silent = 0;

  double fraction() const noexcept {
    return trials == 0 ? 0.0
                       : static_cast<double>(silent) / static_cast<double>(trials);
  }
};

/// Extra columns for open-architecture runs.
struct MemberColumns {
  std::int64_t member_count = 0;
  int max_member_height = 0;
};

struct GenStats {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  double mean_size = 0.0;
  double mean_height = 0.0;
  Quartiles height;
  std::int64_t shortcut_hits = 0;
  std::int64_t nodes_evaluated = 0;
  std::vector<BinCount> silent_by_bin;
  std::int64_t fit_count = 0;
  std::optional<MemberColumns> members;
};

/// One row per generation, generation index strictly increasing.
struct RunStats {
  std::vector<DepthBin> bins;
  std::vector<GenStats> rows;
  bool open_architecture = false;
};

std::string csv_header(const RunStats& stats);

/// Header plus one row per generation. Reals use shortest round-trip form.
void write_csv(std::ostream& out, const RunStats& stats);

}  // namespace opengp

#endif  // OPENGP_RUN_STATS_HPP
