#include "opengp/sexpr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

namespace opengp {

ParseError::ParseError(const std::string& what, std::size_t position)
    : std::runtime_error(what + " at position " + std::to_string(position)),
      position_(position) {}

std::string format_real(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

namespace {

const char* op_name(NodeKind k) {
  switch (k) {
    case NodeKind::Add:
      return "+";
    case NodeKind::Sub:
      return "-";
    case NodeKind::Mul:
      return "*";
    case NodeKind::PDiv:
      return "pdiv";
    default:
      return "?";
  }
}

}  // namespace

std::string to_sexpr(const ExprTree& tree) {
  std::string out;
  out.reserve(tree.size() * 6);
  const auto nodes = tree.nodes();
  // Preorder layout: emitting nodes in index order is a prefix walk; only
  // the closing parentheses need tracking.
  std::vector<std::uint32_t> pending;  // remaining operands per open list
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0) out += ' ';
    const Node& n = nodes[i];
    if (is_function(n.kind)) {
      out += '(';
      out += op_name(n.kind);
      pending.push_back(2);
      continue;
    }
    switch (n.kind) {
      case NodeKind::X:
        out += 'x';
        break;
      case NodeKind::Reg:
        out += 'r';
        out += std::to_string(n.reg);
        break;
      default:
        out += format_real(n.value);
        break;
    }
    while (!pending.empty() && --pending.back() == 0) {
      pending.pop_back();
      out += ')';
    }
  }
  return out;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprTree parse() {
    struct Frame {
      NodeId id;
      int operands;
    };
    std::vector<Frame> open;
    skip_space();
    do {
      if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
      const NodeId id = static_cast<NodeId>(nodes_.size());
      Node n;
      n.parent = open.empty() ? kNoNode : open.back().id;
      if (!open.empty()) {
        Node& p = nodes_[open.back().id];
        (open.back().operands == 0 ? p.left : p.right) = id;
      }
      if (text_[pos_] == '(') {
        ++pos_;
        skip_space();
        const std::size_t at = pos_;
        const std::string_view name = token();
        if (name == "+") {
          n.kind = NodeKind::Add;
        } else if (name == "-") {
          n.kind = NodeKind::Sub;
        } else if (name == "*") {
          n.kind = NodeKind::Mul;
        } else if (name == "pdiv") {
          n.kind = NodeKind::PDiv;
        } else if (name.empty()) {
          throw ParseError("expected operator", at);
        } else {
          throw ParseError("unknown operator '" + std::string(name) + "'", at);
        }
        nodes_.push_back(n);
        open.push_back({id, 0});
        skip_space();
        continue;
      }
      if (text_[pos_] == ')') throw ParseError("unexpected ')'", pos_);
      parse_terminal(n);
      nodes_.push_back(n);
      skip_space();
      // Close every list that is now complete.
      while (!open.empty()) {
        if (++open.back().operands < 2) break;
        if (pos_ >= text_.size()) {
          throw ParseError("unexpected end of input", pos_);
        }
        if (text_[pos_] != ')') {
          throw ParseError("expected ')' after two operands", pos_);
        }
        ++pos_;
        open.pop_back();
        skip_space();
      }
    } while (!open.empty());
    if (pos_ != text_.size()) throw ParseError("trailing characters", pos_);
    return ExprTree::from_preorder(std::move(nodes_));
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  std::string_view token() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  void parse_terminal(Node& n) {
    const std::size_t at = pos_;
    const std::string_view tok = token();
    if (tok == "x") {
      n.kind = NodeKind::X;
      return;
    }
    if (tok.size() > 1 && tok[0] == 'r') {
      std::uint32_t reg = 0;
      const auto res =
          std::from_chars(tok.data() + 1, tok.data() + tok.size(), reg);
      if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        throw ParseError("bad register '" + std::string(tok) + "'", at);
      }
      n.kind = NodeKind::Reg;
      n.reg = reg;
      return;
    }
    double value = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (tok.empty() || res.ec != std::errc{} ||
        res.ptr != tok.data() + tok.size() || !std::isfinite(value)) {
      throw ParseError("bad terminal '" + std::string(tok) + "'", at);
    }
    n.kind = NodeKind::Const;
    n.value = value;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Node> nodes_;
};

}  // namespace

ExprTree from_sexpr(std::string_view text) { return Parser(text).parse(); }

}  // namespace opengp
