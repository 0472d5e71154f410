#ifndef OPENGP_TESTS_SUPPORT_HPP
#define OPENGP_TESTS_SUPPORT_HPP

// Independent oracles and hand-rolled generators shared by the unit tests.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "opengp/eval.hpp"
#include "opengp/expr_tree.hpp"

namespace opengp::testing {

// Recursive reference evaluator following left/right links, one case at a
// time. Shares nothing with the arena loop in eval.cpp.
inline double oracle_eval(const ExprTree& t, NodeId id, double x,
                          const std::vector<double>& regs, double thr = 1e-9) {
  const Node& n = t.node(id);
  switch (n.kind) {
    case NodeKind::X:
      return x;
    case NodeKind::Const:
      return n.value;
    case NodeKind::Reg:
      return n.reg < regs.size() ? regs[n.reg] : 0.0;
    default:
      break;
  }
  const double a = oracle_eval(t, n.left, x, regs, thr);
  const double b = oracle_eval(t, n.right, x, regs, thr);
  switch (n.kind) {
    case NodeKind::Add:
      return a + b;
    case NodeKind::Sub:
      return a - b;
    case NodeKind::Mul:
      return a * b;
    default:
      return std::fabs(b) <= thr ? 1.0 : a / b;
  }
}

inline double oracle_fitness(const ExprTree& t, const TestSuite& s) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.count(); ++i) {
    const double v = oracle_eval(t, 0, s.xs()[i], {}, s.pdiv_threshold());
    if (!std::isfinite(v)) return INFINITY;
    total += std::fabs(v - s.targets()[i]);
  }
  return std::isfinite(total) ? total : INFINITY;
}

// Reference height via recursion on links.
inline int oracle_height(const ExprTree& t, NodeId id = 0) {
  const Node& n = t.node(id);
  if (!is_function(n.kind)) return 1;
  return 1 + std::max(oracle_height(t, n.left), oracle_height(t, n.right));
}

// Hand-rolled generator: shape chosen by coin flips, built with apply().
// Constants come from a small pool so that ties and repeated values occur.
inline ExprTree gen_tree(std::mt19937_64& g, int max_height,
                         const std::vector<std::uint32_t>& regs = {}) {
  std::uniform_int_distribution<int> pick(0, 9);
  const int r = pick(g);
  if (max_height <= 1 || r < 3) {
    const int leaf = std::uniform_int_distribution<int>(0, regs.empty() ? 2 : 3)(g);
    if (leaf == 0) return ExprTree::variable();
    if (leaf == 1) {
      static const double pool[] = {-1.0, -0.5, 0.0, 0.25, 0.5, 1.0};
      return ExprTree::constant(pool[std::uniform_int_distribution<int>(0, 5)(g)]);
    }
    if (leaf == 2) {
      return ExprTree::constant(std::uniform_real_distribution<double>(-1.0, 1.0)(g));
    }
    return ExprTree::reg(regs[std::uniform_int_distribution<std::size_t>(0, regs.size() - 1)(g)]);
  }
  const auto op = static_cast<OpKind>(std::uniform_int_distribution<int>(0, 3)(g));
  ExprTree left = gen_tree(g, max_height - 1, regs);
  ExprTree right = gen_tree(g, max_height - 1, regs);
  return ExprTree::apply(op, left, right);
}

inline TestSuite suite_of(std::vector<double> xs, std::vector<double> targets) {
  return TestSuite(std::move(xs), std::move(targets));
}

// Sextic suite built without the library's generator.
inline TestSuite oracle_sextic_suite(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> xs;
  std::vector<double> ts;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = u(g);
    xs.push_back(x);
    ts.push_back(std::pow(x, 6) - 2 * std::pow(x, 4) + x * x);
  }
  return TestSuite(xs, ts);
}

}  // namespace opengp::testing

#endif  // OPENGP_TESTS_SUPPORT_HPP
