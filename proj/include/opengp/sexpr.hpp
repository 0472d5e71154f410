#ifndef OPENGP_SEXPR_HPP
#define OPENGP_SEXPR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

#include "opengp/expr_tree.hpp"

namespace opengp {

/// Malformed s-expression text. `position()` is the byte offset of the
/// offending token (the text length for premature end of input).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Prefix notation: `(+ a b)`, `(- a b)`, `(* a b)`, `(pdiv a b)`, the input
/// `x`, register reads `r<N>`, and decimal constants printed in shortest
/// round-trip form.
std::string to_sexpr(const ExprTree& tree);

/// Parses exactly one expression (surrounding whitespace allowed).
ExprTree from_sexpr(std::string_view text);

/// Shortest decimal text that parses back to the same double.
std::string format_real(double value);

}  // namespace opengp

#endif  // OPENGP_SEXPR_HPP
