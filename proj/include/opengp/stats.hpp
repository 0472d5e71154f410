#ifndef OPENGP_STATS_HPP
#define OPENGP_STATS_HPP

#include <span>
#include <vector>

namespace opengp {

/// Quantile by linear interpolation between order statistics (Hyndman & Fan
/// type 7): h = (n - 1) p, result = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
/// Throws std::invalid_argument on empty input.
double quantile(std::span<const double> values, double p);

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

Quartiles quartiles(std::span<const double> values);

double mean(std::span<const double> values);

}  // namespace opengp

#endif  // OPENGP_STATS_HPP
