#include "dcpsr/parse.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace dcpsr {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

}  // namespace

std::vector<Token> tokenize(std::string_view input) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = input.size();
  while (i < n) {
    const char c = input[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_digit(c)) {
      while (i < n && is_digit(input[i])) ++i;
      if (i < n && input[i] == '.') {
        ++i;
        if (i >= n || !is_digit(input[i])) {
          throw ParseError("malformed number: expected digit after '.'", i);
        }
        while (i < n && is_digit(input[i])) ++i;
      }
      if (i < n && (input[i] == 'e' || input[i] == 'E')) {
        ++i;
        if (i < n && (input[i] == '+' || input[i] == '-')) ++i;
        if (i >= n || !is_digit(input[i])) {
          throw ParseError("malformed number: expected digit in exponent", i);
        }
        while (i < n && is_digit(input[i])) ++i;
      }
      tokens.push_back({TokenKind::Number, std::string(input.substr(start, i - start)), start});
      continue;
    }
    if (is_ident_start(c)) {
      while (i < n && is_ident_char(input[i])) ++i;
      tokens.push_back({TokenKind::Identifier, std::string(input.substr(start, i - start)), start});
      continue;
    }
    switch (c) {
      case '+':
        tokens.push_back({TokenKind::Plus, "+", start});
        ++i;
        continue;
      case '-':
        tokens.push_back({TokenKind::Minus, "-", start});
        ++i;
        continue;
      case '*':
        tokens.push_back({TokenKind::Star, "*", start});
        ++i;
        continue;
      case '(':
        tokens.push_back({TokenKind::LParen, "(", start});
        ++i;
        continue;
      case ')':
        tokens.push_back({TokenKind::RParen, ")", start});
        ++i;
        continue;
      case ',':
        tokens.push_back({TokenKind::Comma, ",", start});
        ++i;
        continue;
      case '^':
        if (i + 1 >= n || input[i + 1] != '2') {
          throw ParseError("'^' is only legal as '^2'", i + 1 < n ? i + 1 : n);
        }
        tokens.push_back({TokenKind::Caret2, "^2", start});
        i += 2;
        continue;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", start);
    }
  }
  return tokens;
}

namespace {

constexpr int kMaxNestingDepth = 256;

class Parser {
 public:
  Parser(std::string_view input, int n_vars)
      : input_length_(input.size()), n_vars_(n_vars), tokens_(tokenize(input)) {}

  Expr run() {
    Expr e = parse_expr();
    if (!at_end()) {
      throw ParseError("trailing input after expression", peek().offset);
    }
    return e;
  }

 private:
  bool at_end() const { return pos_ >= tokens_.size(); }

  const Token& peek(std::size_t ahead = 0) const {
    static const Token end_token{TokenKind::End, "", 0};
    if (pos_ + ahead >= tokens_.size()) return end_token;
    return tokens_[pos_ + ahead];
  }

  std::size_t here() const { return at_end() ? input_length_ : peek().offset; }

  bool match(TokenKind kind) {
    if (!at_end() && peek().kind == kind) {
      ++pos_;
      return true;
    }
    return false;
  }

  Token expect(TokenKind kind, const char* what) {
    if (at_end() || peek().kind != kind) {
      throw ParseError(std::string("expected ") + what, here());
    }
    return tokens_[pos_++];
  }

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : parser(p) {
      if (++parser.depth_ > kMaxNestingDepth) {
        throw ParseError("expression nested too deeply", parser.here());
      }
    }
    ~DepthGuard() { --parser.depth_; }
    Parser& parser;
  };

  Expr parse_expr() {
    DepthGuard guard(*this);
    Expr acc = parse_term();
    while (!at_end()) {
      if (match(TokenKind::Plus)) {
        acc = Expr::binary(BinaryOp::Add, std::move(acc), parse_term());
      } else if (match(TokenKind::Minus)) {
        Expr rhs = Expr::binary(BinaryOp::Mul, Expr::constant(-1.0), parse_term());
        acc = Expr::binary(BinaryOp::Add, std::move(acc), std::move(rhs));
      } else {
        break;
      }
    }
    return acc;
  }

  Expr parse_term() {
    DepthGuard guard(*this);
    Expr acc = parse_factor();
    while (match(TokenKind::Star)) {
      acc = Expr::binary(BinaryOp::Mul, std::move(acc), parse_factor());
    }
    return acc;
  }

  Expr parse_factor() {
    DepthGuard guard(*this);
    if (peek().kind == TokenKind::Minus) {
      // A minus attached directly to a numeric literal (and not to a "^2"
      // form, which binds tighter) is a negative constant; this keeps
      // parse(format(e)) node-identical for trees with negative constants.
      if (peek(1).kind == TokenKind::Number && peek(2).kind != TokenKind::Caret2) {
        ++pos_;
        const Token num = tokens_[pos_++];
        return Expr::constant(-parse_number(num));
      }
      ++pos_;
      return Expr::binary(BinaryOp::Mul, Expr::constant(-1.0), parse_factor());
    }
    Expr atom = parse_atom();
    if (match(TokenKind::Caret2)) {
      atom = Expr::unary(UnaryOp::Square, std::move(atom));
    }
    return atom;
  }

  Expr parse_atom() {
    DepthGuard guard(*this);
    if (at_end()) {
      throw ParseError("unexpected end of input, expected an expression", input_length_);
    }
    const Token& tok = peek();
    switch (tok.kind) {
      case TokenKind::Number: {
        ++pos_;
        return Expr::constant(parse_number(tok));
      }
      case TokenKind::Identifier: {
        ++pos_;
        return parse_identifier(tok);
      }
      case TokenKind::LParen: {
        ++pos_;
        Expr inner = parse_expr();
        expect(TokenKind::RParen, "')'");
        return inner;
      }
      default:
        throw ParseError("unexpected token '" + tok.lexeme + "'", tok.offset);
    }
  }

  Expr parse_identifier(const Token& tok) {
    const std::string& name = tok.lexeme;
    if (name == "exp" || name == "sq" || name == "abs" || name == "max") {
      const int arity = name == "max" ? 2 : 1;
      expect(TokenKind::LParen, std::string("'(' after '" + name + "'").c_str());
      std::vector<Expr> args;
      args.push_back(parse_expr());
      while (peek().kind == TokenKind::Comma) {
        if (static_cast<int>(args.size()) == arity) {
          throw ParseError("'" + name + "' expects exactly " + std::to_string(arity) +
                               (arity == 1 ? " argument" : " arguments"),
                           peek().offset);
        }
        ++pos_;
        args.push_back(parse_expr());
      }
      const Token rparen = expect(TokenKind::RParen, "')'");
      if (static_cast<int>(args.size()) != arity) {
        throw ParseError("'" + name + "' expects exactly " + std::to_string(arity) +
                             (arity == 1 ? " argument" : " arguments"),
                         rparen.offset);
      }
      if (name == "exp") return Expr::unary(UnaryOp::Exp, std::move(args[0]));
      if (name == "sq") return Expr::unary(UnaryOp::Square, std::move(args[0]));
      if (name == "abs") return Expr::unary(UnaryOp::Abs, std::move(args[0]));
      return Expr::binary(BinaryOp::Max, std::move(args[0]), std::move(args[1]));
    }
    if (name.size() >= 2 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(), [](char c) { return is_digit(c); })) {
      int index = 0;
      const auto res = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (res.ec != std::errc{} || index < 1 || index > n_vars_) {
        throw ParseError("variable '" + name + "' out of range (expected x1..x" +
                             std::to_string(n_vars_) + ")",
                         tok.offset);
      }
      return Expr::variable(index - 1);
    }
    if (peek().kind == TokenKind::LParen) {
      throw ParseError("unknown function '" + name + "'", tok.offset);
    }
    throw ParseError("unknown identifier '" + name + "'", tok.offset);
  }

  double parse_number(const Token& tok) {
    double value = 0.0;
    const auto res = std::from_chars(tok.lexeme.data(), tok.lexeme.data() + tok.lexeme.size(), value);
    if (res.ec == std::errc::result_out_of_range || !std::isfinite(value)) {
      throw ParseError("number literal out of range", tok.offset);
    }
    if (res.ec != std::errc{} || res.ptr != tok.lexeme.data() + tok.lexeme.size()) {
      throw ParseError("malformed number", tok.offset);
    }
    return value;
  }

  std::size_t input_length_;
  int n_vars_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

Expr parse(std::string_view input, int n_vars) {
  if (n_vars < 1) {
    throw std::invalid_argument("parse: n_vars must be >= 1");
  }
  return Parser(input, n_vars).run();
}

}  // namespace dcpsr
