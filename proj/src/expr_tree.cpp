#include "opengp/expr_tree.hpp"

#include <algorithm>
#include <bit>
#include <string>

namespace opengp {

namespace {

std::vector<std::uint32_t> compute_subtree_sizes(std::span<const Node> nodes) {
  std::vector<std::uint32_t> sizes(nodes.size(), 1);
  for (std::size_t i = nodes.size(); i-- > 0;) {
    const Node& n = nodes[i];
    if (is_function(n.kind)) sizes[i] = 1 + sizes[n.left] + sizes[n.right];
  }
  return sizes;
}

}  // namespace

ExprTree::ExprTree() : ExprTree(std::vector<Node>{Node{}}) {}

ExprTree::ExprTree(std::vector<Node> nodes)
    : nodes_(std::move(nodes)), subtree_size_(compute_subtree_sizes(nodes_)) {}

ExprTree ExprTree::variable() { return ExprTree(); }

ExprTree ExprTree::constant(double value) {
  Node n;
  n.kind = NodeKind::Const;
  n.value = value;
  return ExprTree(std::vector<Node>{n});
}

ExprTree ExprTree::reg(std::uint32_t index) {
  Node n;
  n.kind = NodeKind::Reg;
  n.reg = index;
  return ExprTree(std::vector<Node>{n});
}

ExprTree ExprTree::apply(OpKind op, const ExprTree& left,
                         const ExprTree& right) {
  std::vector<Node> nodes;
  nodes.reserve(1 + left.size() + right.size());
  Node top;
  top.kind = to_node_kind(op);
  top.left = 1;
  top.right = static_cast<NodeId>(1 + left.size());
  nodes.push_back(top);
  auto append = [&nodes](const ExprTree& t, NodeId offset) {
    for (const Node& src : t.nodes_) {
      Node n = src;
      if (is_function(n.kind)) {
        n.left += offset;
        n.right += offset;
      }
      n.parent = n.parent == kNoNode ? 0 : n.parent + offset;
      nodes.push_back(n);
    }
  };
  append(left, 1);
  append(right, top.right);
  return ExprTree(std::move(nodes));
}

ExprTree ExprTree::from_preorder(std::vector<Node> nodes) {
  if (nodes.empty()) throw std::invalid_argument("empty tree");
  if (nodes.size() >= kNoNode) throw std::invalid_argument("tree too large");
  if (nodes[0].parent != kNoNode) {
    throw std::invalid_argument("root must not have a parent");
  }
  // Walking the tree depth-first (left before right) must visit 0, 1, 2, ...
  std::vector<NodeId> stack{0};
  NodeId expected = 0;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (id != expected) {
      throw std::invalid_argument("nodes are not in preorder at index " +
                                  std::to_string(expected));
    }
    ++expected;
    const Node& n = nodes[id];
    if (!is_function(n.kind)) {
      if (n.left != kNoNode || n.right != kNoNode) {
        throw std::invalid_argument("terminal with children at node " +
                                    std::to_string(id));
      }
      continue;
    }
    for (NodeId c : {n.left, n.right}) {
      if (c >= nodes.size() || c <= id) {
        throw std::invalid_argument("bad child index at node " +
                                    std::to_string(id));
      }
      if (nodes[c].parent != id) {
        throw std::invalid_argument("parent link mismatch at node " +
                                    std::to_string(c));
      }
    }
    stack.push_back(n.right);
    stack.push_back(n.left);
  }
  if (expected != nodes.size()) {
    throw std::invalid_argument("orphan nodes after index " +
                                std::to_string(expected));
  }
  return ExprTree(std::move(nodes));
}

bool operator==(const ExprTree& a, const ExprTree& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Node& x = a.nodes_[i];
    const Node& y = b.nodes_[i];
    if (x.kind != y.kind || x.left != y.left || x.right != y.right ||
        x.parent != y.parent) {
      return false;
    }
    if (x.kind == NodeKind::Const &&
        std::bit_cast<std::uint64_t>(x.value) !=
            std::bit_cast<std::uint64_t>(y.value)) {
      return false;
    }
    if (x.kind == NodeKind::Reg && x.reg != y.reg) return false;
  }
  return true;
}

std::vector<int> node_depths(const ExprTree& tree) {
  const auto nodes = tree.nodes();
  std::vector<int> depth(nodes.size(), 1);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    depth[i] = depth[nodes[i].parent] + 1;
  }
  return depth;
}

int tree_height(const ExprTree& tree) {
  const auto depth = node_depths(tree);
  return *std::max_element(depth.begin(), depth.end());
}

TreeMetrics tree_metrics(const ExprTree& tree) {
  TreeMetrics m;
  m.size = tree.size();
  m.depth_of = node_depths(tree);
  m.height = *std::max_element(m.depth_of.begin(), m.depth_of.end());
  return m;
}

ExprTree subtree_at(const ExprTree& tree, NodeId id) {
  if (!tree.contains(id)) {
    throw std::out_of_range("node id " + std::to_string(id) +
                            " out of range");
  }
  const auto nodes = tree.nodes();
  const std::uint32_t count = tree.subtree_size(id);
  std::vector<Node> out(nodes.begin() + id, nodes.begin() + id + count);
  for (Node& n : out) {
    if (is_function(n.kind)) {
      n.left -= id;
      n.right -= id;
    }
    n.parent = n.parent == kNoNode || n.parent < id ? kNoNode : n.parent - id;
  }
  out.front().parent = kNoNode;
  return ExprTree::from_preorder(std::move(out));
}

ExprTree replace_subtree(const ExprTree& tree, NodeId id, const ExprTree& sub) {
  if (!tree.contains(id)) {
    throw std::out_of_range("node id " + std::to_string(id) +
                            " out of range");
  }
  const auto nodes = tree.nodes();
  const std::int64_t old_size = tree.subtree_size(id);
  const std::int64_t delta = static_cast<std::int64_t>(sub.size()) - old_size;
  const std::int64_t tail = id + old_size;

  auto remap = [&](NodeId c) -> NodeId {
    if (c == kNoNode || c <= id) return c;
    return static_cast<NodeId>(c + delta);
  };

  std::vector<Node> out;
  out.reserve(static_cast<std::size_t>(nodes.size() + delta));
  for (NodeId i = 0; i < id; ++i) {
    Node n = nodes[i];
    n.left = remap(n.left);
    n.right = remap(n.right);
    out.push_back(n);
  }
  for (const Node& src : sub.nodes()) {
    Node n = src;
    if (is_function(n.kind)) {
      n.left += id;
      n.right += id;
    }
    n.parent = n.parent == kNoNode ? nodes[id].parent : n.parent + id;
    out.push_back(n);
  }
  for (std::size_t i = static_cast<std::size_t>(tail); i < nodes.size(); ++i) {
    Node n = nodes[i];
    n.left = remap(n.left);
    n.right = remap(n.right);
    n.parent = remap(n.parent);
    out.push_back(n);
  }
  return ExprTree::from_preorder(std::move(out));
}

namespace {

class TreeGenerator {
 public:
  TreeGenerator(InitMethod method, int max_height, Rng& rng,
                const PrimitiveSet& prims)
      : method_(method), max_height_(max_height), rng_(rng), prims_(prims) {}

  std::vector<Node> generate() {
    emit(1, kNoNode);
    return std::move(nodes_);
  }

 private:
  static constexpr int kFunctionCount = 4;

  int terminal_kinds() const { return prims_.registers.empty() ? 2 : 3; }

  NodeId emit(int depth, NodeId parent) {
    bool function = false;
    if (depth < max_height_) {
      if (method_ == InitMethod::Full) {
        function = true;
      } else {
        std::uniform_int_distribution<int> pick(
            0, kFunctionCount + terminal_kinds() - 1);
        function = pick(rng_) < kFunctionCount;
      }
    }
    const auto id = static_cast<NodeId>(nodes_.size());
    nodes_.emplace_back();
    nodes_[id].parent = parent;
    if (function) {
      std::uniform_int_distribution<int> op(0, kFunctionCount - 1);
      nodes_[id].kind = to_node_kind(static_cast<OpKind>(op(rng_)));
      const NodeId l = emit(depth + 1, id);
      const NodeId r = emit(depth + 1, id);
      nodes_[id].left = l;
      nodes_[id].right = r;
    } else {
      emit_terminal(nodes_[id]);
    }
    return id;
  }

  void emit_terminal(Node& n) {
    std::uniform_int_distribution<int> kind(0, terminal_kinds() - 1);
    switch (kind(rng_)) {
      case 0:
        n.kind = NodeKind::X;
        break;
      case 1: {
        n.kind = NodeKind::Const;
        std::uniform_real_distribution<double> c(prims_.const_min,
                                                 prims_.const_max);
        n.value = c(rng_);
        break;
      }
      default: {
        n.kind = NodeKind::Reg;
        std::uniform_int_distribution<std::size_t> r(
            0, prims_.registers.size() - 1);
        n.reg = prims_.registers[r(rng_)];
        break;
      }
    }
  }

  InitMethod method_;
  int max_height_;
  Rng& rng_;
  const PrimitiveSet& prims_;
  std::vector<Node> nodes_;
};

}  // namespace

ExprTree random_tree(InitMethod method, int max_height, Rng& rng,
                     const PrimitiveSet& prims) {
  if (max_height < 1) {
    throw std::invalid_argument("max_height must be >= 1, got " +
                                std::to_string(max_height));
  }
  return ExprTree::from_preorder(
      TreeGenerator(method, max_height, rng, prims).generate());
}

}  // namespace opengp
