#include "tsym/parse.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace tsym {
namespace {

enum class Tok { Number, Name, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind = Tok::End;
  std::size_t offset = 0;
  std::string text;
};

struct Failure {
  ParseDiagnostic d;
};

void fill_position(ParseDiagnostic& d, std::string_view src) {
  d.line = 1;
  d.column = 1;
  for (std::size_t i = 0; i < d.offset && i < src.size(); ++i) {
    if (src[i] == '\n') {
      ++d.line;
      d.column = 1;
    } else {
      ++d.column;
    }
  }
}

[[noreturn]] void fail(std::string_view src, std::size_t offset, std::string message,
                       std::vector<std::string> expected) {
  ParseDiagnostic d;
  d.offset = offset;
  d.message = std::move(message);
  d.expected = std::move(expected);
  fill_position(d, src);
  throw Failure{std::move(d)};
}

bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
bool name_part(char c) { return std::isalnum(static_cast<unsigned char>(c)); }

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++i;
      continue;
    }
    std::size_t at = i;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::Number, at, std::string(src.substr(i, j - i))});
      i = j;
      continue;
    }
    if (name_start(c)) {
      std::size_t j = i;
      while (j < src.size() && name_part(src[j])) ++j;
      // a derivative index "_[2,0,1]" is part of the name
      if (j + 1 < src.size() && src[j] == '_' && src[j + 1] == '[') {
        std::size_t k = j + 2;
        bool want_digit = true;
        while (k < src.size() && src[k] != ']') {
          char b = src[k];
          if (std::isdigit(static_cast<unsigned char>(b)))
            want_digit = false;
          else if (b == ',' && !want_digit)
            want_digit = true;
          else
            fail(src, k, "malformed derivative index", {"digit", ",", "]"});
          ++k;
        }
        if (k >= src.size() || want_digit)
          fail(src, k, "malformed derivative index", {"digit", "]"});
        j = k + 1;
      }
      out.push_back({Tok::Name, at, std::string(src.substr(i, j - i))});
      i = j;
      continue;
    }
    Tok k;
    switch (c) {
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '/': k = Tok::Slash; break;
      case '^': k = Tok::Caret; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      default:
        fail(src, at, std::string("unexpected character '") + c + "'",
             {"number", "name", "operator", "(", ")"});
    }
    out.push_back({k, at, std::string(1, c)});
    ++i;
  }
  out.push_back({Tok::End, src.size(), ""});
  return out;
}

int infix_power(Tok t) {
  switch (t) {
    case Tok::Plus:
    case Tok::Minus: return 10;
    case Tok::Star:
    case Tok::Slash: return 20;
    case Tok::Caret: return 30;
    default: return -1;
  }
}

struct Parser {
  std::string_view src;
  const JetContext& ctx;
  const std::vector<std::string>& params;
  std::vector<Token> toks;
  std::size_t pos = 0;
  int depth = 0;

  const Token& peek() const { return toks[pos]; }
  const Token& take() { return toks[pos++]; }

  std::vector<std::string> operator_expectation() const {
    std::vector<std::string> e = {"+", "-", "*", "/", "^"};
    e.push_back(depth > 0 ? ")" : "end of input");
    return e;
  }

  Expr resolve_name(const Token& t) {
    if (auto f = func_by_name(t.text)) {
      if (peek().kind != Tok::LParen)
        fail(src, peek().offset, "expected '(' after function name", {"("});
      take();
      ++depth;
      Expr arg = expression(0);
      if (peek().kind != Tok::RParen)
        fail(src, peek().offset, "expected operator", operator_expectation());
      take();
      --depth;
      return Expr::call(*f, arg);
    }
    if (auto coord = ctx.resolve(t.text)) return *coord;
    if (std::find(params.begin(), params.end(), t.text) != params.end())
      return Expr::symbol(t.text);
    fail(src, t.offset, "undeclared name: " + t.text, {"coordinate", "parameter"});
  }

  Expr operand() {
    const Token& t = take();
    switch (t.kind) {
      case Tok::Number:
        return Expr::number(Rational(t.text));
      case Tok::Name:
        return resolve_name(t);
      case Tok::LParen: {
        ++depth;
        Expr inner = expression(0);
        if (peek().kind != Tok::RParen)
          fail(src, peek().offset, "expected operator", operator_expectation());
        take();
        --depth;
        return inner;
      }
      case Tok::Minus:
        // unary minus binds tighter than * and / but below ^
        return -expression(25);
      default:
        fail(src, t.offset, "expected an operand", {"number", "name", "(", "-"});
    }
  }

  Expr expression(int min_power) {
    Expr lhs = operand();
    for (;;) {
      Tok k = peek().kind;
      int power = infix_power(k);
      if (power < 0) {
        if (k == Tok::End || k == Tok::RParen) return lhs;
        fail(src, peek().offset, "expected operator", operator_expectation());
      }
      if (power <= min_power) return lhs;
      take();
      Expr rhs = expression(k == Tok::Caret ? power - 1 : power);
      switch (k) {
        case Tok::Plus: lhs = lhs + rhs; break;
        case Tok::Minus: lhs = lhs - rhs; break;
        case Tok::Star: lhs = lhs * rhs; break;
        case Tok::Slash: lhs = lhs / rhs; break;
        default: lhs = Expr::pow(lhs, rhs); break;
      }
    }
  }
};

}  // namespace

std::string ParseDiagnostic::render() const {
  std::ostringstream os;
  os << "line " << line << ", column " << column << ": " << message;
  if (!expected.empty()) {
    os << " (expected: ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) os << ", ";
      os << expected[i];
    }
    os << ")";
  }
  return os.str();
}

ParseResult parse_expression(std::string_view text, const JetContext& ctx,
                             const std::vector<std::string>& params) {
  ParseResult out;
  try {
    Parser p{text, ctx, params, tokenize(text)};
    if (p.peek().kind == Tok::End)
      fail(text, 0, "expected an operand", {"number", "name", "(", "-"});
    Expr e = p.expression(0);
    if (p.peek().kind != Tok::End) {
      if (p.peek().kind == Tok::RParen)
        fail(text, p.peek().offset, "unmatched ')'", {"end of input"});
      fail(text, p.peek().offset, "expected operator", p.operator_expectation());
    }
    out.expr = e;
  } catch (const Failure& f) {
    out.diagnostic = f.d;
  }
  return out;
}

}  // namespace tsym
