#include "opengp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

namespace opengp {

TestSuite::TestSuite(std::vector<double> xs, std::vector<double> targets,
                     double pdiv_threshold)
    : xs_(std::move(xs)),
      targets_(std::move(targets)),
      pdiv_threshold_(pdiv_threshold) {
  if (xs_.empty()) throw std::invalid_argument("test suite must not be empty");
  if (xs_.size() != targets_.size()) {
    throw std::invalid_argument("test suite inputs and targets differ in length");
  }
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    if (!std::isfinite(xs_[i]) || !std::isfinite(targets_[i])) {
      throw std::invalid_argument("non-finite test case at index " +
                                  std::to_string(i));
    }
  }
  if (!(pdiv_threshold_ >= 0.0) || !std::isfinite(pdiv_threshold_)) {
    throw std::invalid_argument("pdiv threshold must be finite and >= 0");
  }
}

double sextic(double x) noexcept {
  const double x2 = x * x;
  return x2 * x2 * x2 - 2.0 * x2 * x2 + x2;
}

TestSuite make_sextic_suite(std::size_t n_cases, std::uint64_t seed,
                            double pdiv_threshold) {
  Rng rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> xs(n_cases);
  std::vector<double> ys(n_cases);
  for (std::size_t i = 0; i < n_cases; ++i) {
    xs[i] = dist(rng);
    ys[i] = sextic(xs[i]);
  }
  return TestSuite(std::move(xs), std::move(ys), pdiv_threshold);
}

void apply_op(OpKind op, std::span<const double> a, std::span<const double> b,
              std::span<double> out, double pdiv_threshold) noexcept {
  const std::size_t n = out.size();
  switch (op) {
    case OpKind::Add:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
      break;
    case OpKind::Sub:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
      break;
    case OpKind::Mul:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
      break;
    case OpKind::PDiv:
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = protected_div(a[i], b[i], pdiv_threshold);
      }
      break;
  }
}

NodeValues eval_all_nodes(const ExprTree& tree, const TestSuite& suite,
                          RegisterView registers) {
  const auto nodes = tree.nodes();
  const std::size_t cases = suite.count();
  NodeValues values(nodes.size(), cases);
  const auto xs = suite.xs();
  for (std::size_t i = nodes.size(); i-- > 0;) {
    const Node& n = nodes[i];
    auto out = values.row(static_cast<NodeId>(i));
    switch (n.kind) {
      case NodeKind::X:
        std::copy(xs.begin(), xs.end(), out.begin());
        break;
      case NodeKind::Const:
        std::fill(out.begin(), out.end(), n.value);
        break;
      case NodeKind::Reg:
        if (n.reg < registers.size()) {
          std::copy(registers[n.reg].begin(), registers[n.reg].end(),
                    out.begin());
        } else {
          std::fill(out.begin(), out.end(), 0.0);
        }
        break;
      default: {
        const NodeValues& cv = values;
        apply_op(to_op_kind(n.kind), cv.row(n.left), cv.row(n.right), out,
                 suite.pdiv_threshold());
        break;
      }
    }
  }
  return values;
}

ValueVector eval_tree(const ExprTree& tree, const TestSuite& suite,
                      RegisterView registers) {
  const NodeValues values = eval_all_nodes(tree, suite, registers);
  const auto root = values.row(tree.root());
  return ValueVector(root.begin(), root.end());
}

double score_outputs(std::span<const double> outputs, const TestSuite& suite) {
  const auto targets = suite.targets();
  double sum = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    sum += std::fabs(outputs[i] - targets[i]);
  }
  return std::isfinite(sum) ? sum : std::numeric_limits<double>::infinity();
}

double fitness(const ExprTree& tree, const TestSuite& suite) {
  const NodeValues values = eval_all_nodes(tree, suite);
  return score_outputs(values.row(tree.root()), suite);
}

std::size_t count_hits(std::span<const double> outputs, const TestSuite& suite,
                       double threshold) {
  const auto targets = suite.targets();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (std::fabs(outputs[i] - targets[i]) < threshold) ++hits;
  }
  return hits;
}

bool is_fit(std::span<const double> outputs, const TestSuite& suite,
            double threshold) {
  return count_hits(outputs, suite, threshold) == suite.count();
}

bool same_bits(std::span<const double> a, std::span<const double> b) noexcept {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size_bytes()) == 0);
}

}  // namespace opengp
