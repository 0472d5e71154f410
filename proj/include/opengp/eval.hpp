#ifndef OPENGP_EVAL_HPP
#define OPENGP_EVAL_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "opengp/expr_tree.hpp"

namespace opengp {

/// One real per test case, in test-suite order.
using ValueVector = std::vector<double>;

inline constexpr double kDefaultPdivThreshold = 1e-9;

/// Fixed set of (x, target) cases: the environment a tree is scored against.
/// Also carries the protected-division threshold so every evaluation of a
/// given suite uses the same semantics.
class TestSuite {
 public:
  /// Throws std::invalid_argument on an empty suite, mismatched lengths or
  /// non-finite values.
  TestSuite(std::vector<double> xs, std::vector<double> targets,
            double pdiv_threshold = kDefaultPdivThreshold);

  std::size_t count() const noexcept { return xs_.size(); }
  std::span<const double> xs() const noexcept { return xs_; }
  std::span<const double> targets() const noexcept { return targets_; }
  double pdiv_threshold() const noexcept { return pdiv_threshold_; }

 private:
  std::vector<double> xs_;
  std::vector<double> targets_;
  double pdiv_threshold_;
};

/// x^6 - 2x^4 + x^2
double sextic(double x) noexcept;

/// Sextic regression suite: `n_cases` inputs drawn uniformly from [-1, 1)
/// using a generator seeded with `seed`.
TestSuite make_sextic_suite(std::size_t n_cases, std::uint64_t seed,
                            double pdiv_threshold = kDefaultPdivThreshold);

/// PDIV(a, b) = 1 when |b| <= threshold, else a / b.
inline double protected_div(double a, double b, double threshold) noexcept {
  return (b <= threshold && b >= -threshold) ? 1.0 : a / b;
}

/// out[i] = op(a[i], b[i]) for every case.
void apply_op(OpKind op, std::span<const double> a, std::span<const double> b,
              std::span<double> out, double pdiv_threshold) noexcept;

/// Row-major table of per-node value vectors (one row per NodeId).
class NodeValues {
 public:
  NodeValues() = default;
  NodeValues(std::size_t nodes, std::size_t cases)
      : cases_(cases), data_(nodes * cases) {}

  std::size_t node_count() const noexcept {
    return cases_ == 0 ? 0 : data_.size() / cases_;
  }
  std::size_t case_count() const noexcept { return cases_; }
  std::span<const double> row(NodeId id) const {
    return {data_.data() + static_cast<std::size_t>(id) * cases_, cases_};
  }
  std::span<double> row(NodeId id) {
    return {data_.data() + static_cast<std::size_t>(id) * cases_, cases_};
  }

 private:
  std::size_t cases_ = 0;
  std::vector<double> data_;
};

/// Register file contents visible to a tree: one value vector per register.
/// Reads past the end see the initial 0.0.
using RegisterView = std::span<const ValueVector>;

/// Output of every node, children before parents.
NodeValues eval_all_nodes(const ExprTree& tree, const TestSuite& suite,
                          RegisterView registers = {});

/// Root output per test case.
ValueVector eval_tree(const ExprTree& tree, const TestSuite& suite,
                      RegisterView registers = {});

/// Sum of absolute errors. Non-finite results map to +inf.
double score_outputs(std::span<const double> outputs, const TestSuite& suite);

/// Sum of |output - target| over the suite; +inf if anything is non-finite.
double fitness(const ExprTree& tree, const TestSuite& suite);

/// Number of cases with |output - target| < threshold.
std::size_t count_hits(std::span<const double> outputs, const TestSuite& suite,
                       double threshold);

/// True when every case is a hit.
bool is_fit(std::span<const double> outputs, const TestSuite& suite,
            double threshold);

/// Bitwise equality of two value vectors (distinguishes -0.0 and NaN payloads).
bool same_bits(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace opengp

#endif  // OPENGP_EVAL_HPP
