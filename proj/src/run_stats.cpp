#include "opengp/run_stats.hpp"

#include "opengp/sexpr.hpp"

namespace opengp {

std::vector<DepthBin> default_depth_bins() {
  return {{1, 5}, {6, 10}, {11, 20}, {21, 50}, {51, kUnboundedDepth}};
}

namespace {

std::string bin_hi(const DepthBin& bin) {
  return bin.hi == kUnboundedDepth ? "inf" : std::to_string(bin.hi);
}

}  // namespace

std::string bin_label(const DepthBin& bin) {
  return std::to_string(bin.lo) + "_" + bin_hi(bin);
}

std::string bin_spec(const DepthBin& bin) {
  return std::to_string(bin.lo) + "-" + bin_hi(bin);
}

std::optional<std::size_t> find_bin(const std::vector<DepthBin>& bins,
                                    int depth) {
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins[i].contains(depth)) return i;
  }
  return std::nullopt;
}

std::string csv_header(const RunStats& stats) {
  std::string h =
      "generation,best_fitness,mean_fitness,mean_size,mean_height,height_q1,"
      "height_median,height_q3,shortcut_hits,nodes_evaluated";
  for (const auto& b : stats.bins) h += ",silent_fraction_" + bin_label(b);
  for (const auto& b : stats.bins) h += ",trials_" + bin_label(b);
  h += ",fit_count";
  if (stats.open_architecture) h += ",member_count,max_member_height";
  return h;
}

void write_csv(std::ostream& out, const RunStats& stats) {
  out << csv_header(stats) << '\n';
  for (const GenStats& g : stats.rows) {
    out << g.generation << ',' << format_real(g.best_fitness) << ','
        << format_real(g.mean_fitness) << ',' << format_real(g.mean_size) << ','
        << format_real(g.mean_height) << ',' << format_real(g.height.q1) << ','
        << format_real(g.height.median) << ',' << format_real(g.height.q3)
        << ',' << g.shortcut_hits << ',' << g.nodes_evaluated;
    for (std::size_t b = 0; b < stats.bins.size(); ++b) {
      const BinCount c = b < g.silent_by_bin.size() ? g.silent_by_bin[b] : BinCount{};
      out << ',' << format_real(c.fraction());
    }
    for (std::size_t b = 0; b < stats.bins.size(); ++b) {
      const BinCount c = b < g.silent_by_bin.size() ? g.silent_by_bin[b] : BinCount{};
      out << ',' << c.trials;
    }
    out << ',' << g.fit_count;
    if (stats.open_architecture) {
      const MemberColumns m = g.members.value_or(MemberColumns{});
      out << ',' << m.member_count << ',' << m.max_member_height;
    }
    out << '\n';
  }
}

}  // namespace opengp
