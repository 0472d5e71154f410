#ifndef OPENGP_EXPR_TREE_HPP
#define OPENGP_EXPR_TREE_HPP

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace opengp {

using Rng = std::mt19937_64;

/// Dense index of a node inside one tree's arena. Node 0 is the root.
using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Arithmetic function set. Every function has arity 2.
enum class OpKind : std::uint8_t { Add, Sub, Mul, PDiv };

enum class NodeKind : std::uint8_t {
  Add,
  Sub,
  Mul,
  PDiv,
  X,      // the single input variable
  Const,  // ephemeral random constant
  Reg,    // shared-register read (open architecture members only)
};

constexpr bool is_function(NodeKind k) noexcept {
  return k == NodeKind::Add || k == NodeKind::Sub || k == NodeKind::Mul ||
         k == NodeKind::PDiv;
}

constexpr NodeKind to_node_kind(OpKind op) noexcept {
  return static_cast<NodeKind>(static_cast<std::uint8_t>(op));
}

constexpr OpKind to_op_kind(NodeKind k) noexcept {
  return static_cast<OpKind>(static_cast<std::uint8_t>(k));
}

struct Node {
  NodeKind kind = NodeKind::X;
  std::uint32_t reg = 0;  // register index for Reg
  double value = 0.0;     // constant value for Const
  NodeId left = kNoNode;
  NodeId right = kNoNode;
  NodeId parent = kNoNode;
};

/// Immutable binary expression tree stored in preorder.
///
/// The arena is always kept in preorder, so the subtree rooted at `id`
/// occupies the contiguous range [id, id + subtree_size(id)) and every child
/// has a larger index than its parent. Evaluation walks the arena backwards.
class ExprTree {
 public:
  /// A lone `x` terminal.
  ExprTree();

  static ExprTree variable();
  static ExprTree constant(double value);
  static ExprTree reg(std::uint32_t index);
  static ExprTree apply(OpKind op, const ExprTree& left, const ExprTree& right);

  /// Builds a tree from a preorder node list, validating the structure.
  /// Throws std::invalid_argument if the nodes do not form one rooted tree
  /// laid out in preorder.
  static ExprTree from_preorder(std::vector<Node> nodes);

  std::size_t size() const noexcept { return nodes_.size(); }
  NodeId root() const noexcept { return 0; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::uint32_t subtree_size(NodeId id) const { return subtree_size_.at(id); }
  bool is_leaf(NodeId id) const { return !is_function(node(id).kind); }
  bool contains(NodeId id) const noexcept { return id < nodes_.size(); }

  /// Node-for-node equality; constants compare bitwise.
  friend bool operator==(const ExprTree& a, const ExprTree& b);

 private:
  explicit ExprTree(std::vector<Node> nodes);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> subtree_size_;
};

struct TreeMetrics {
  std::size_t size = 0;
  int height = 0;
  std::vector<int> depth_of;  // root has depth 1
};

TreeMetrics tree_metrics(const ExprTree& tree);

/// Node count on the longest root-to-leaf path; a lone terminal has height 1.
int tree_height(const ExprTree& tree);

/// Depth of every node (root = 1).
std::vector<int> node_depths(const ExprTree& tree);

/// Copy of the subtree rooted at `id`. Throws std::out_of_range on a bad id.
ExprTree subtree_at(const ExprTree& tree, NodeId id);

/// New tree with the subtree at `id` replaced by `sub`. The input is unchanged.
/// Throws std::out_of_range on a bad id.
ExprTree replace_subtree(const ExprTree& tree, NodeId id, const ExprTree& sub);

enum class InitMethod { Grow, Full };

/// Terminals available to the tree generator. `registers` lists the register
/// indices a generated tree may read; empty for monolithic trees.
struct PrimitiveSet {
  std::vector<std::uint32_t> registers;
  double const_min = -1.0;
  double const_max = 1.0;
};

/// Random tree of height at most `max_height` (exactly `max_height` on every
/// branch for Full). Throws std::invalid_argument if max_height < 1.
ExprTree random_tree(InitMethod method, int max_height, Rng& rng,
                     const PrimitiveSet& prims = {});

}  // namespace opengp

#endif  // OPENGP_EXPR_TREE_HPP
