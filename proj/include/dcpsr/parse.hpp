#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dcpsr/expr.hpp"

namespace dcpsr {

enum class TokenKind { Number, Identifier, Plus, Minus, Star, Caret2, LParen, RParen, Comma, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string lexeme;
  std::size_t offset = 0;  // 0-based character position
};

/// Raised for any lexical or syntactic problem. `offset` points at the
/// offending character (== input length for end-of-input errors).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : std::runtime_error(message), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Splits the input into tokens (whitespace skipped). Numbers accept
/// integer, decimal and exponent forms; "^" is only legal as "^2".
/// The trailing End token is not included.
std::vector<Token> tokenize(std::string_view input);

/// Parses the expression grammar:
///
///   expr   := term (("+" | "-") term)* ;
///   term   := factor ("*" factor)* ;
///   factor := "-" factor | atom ("^2")? ;
///   atom   := number | varname | func "(" expr ("," expr)* ")" | "(" expr ")" ;
///   func   := "exp" | "sq" | "abs" | "max" ;
///   varname := "x" positive-integer <= n_vars ;
///
/// "a - b" becomes Add(a, Mul(Const(-1), b)), unary "-e" becomes
/// Mul(Const(-1), e) except that a minus directly attached to a numeric
/// literal folds into a negative constant (which is what format() emits),
/// and "e^2" becomes Square(e). max takes exactly 2 arguments, the other
/// functions exactly 1.
Expr parse(std::string_view input, int n_vars);

}  // namespace dcpsr
