#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsym/jet.hpp"

namespace tsym {

struct ParseDiagnostic {
  std::size_t offset = 0;  // byte offset into the source text
  int line = 1;            // 1-based
  int column = 1;          // 1-based, in bytes
  std::string message;
  std::vector<std::string> expected;

  std::string render() const;  // "line 1, column 2: message (expected: ...)"
};

struct ParseResult {
  std::optional<Expr> expr;
  std::optional<ParseDiagnostic> diagnostic;

  bool ok() const { return expr.has_value(); }
};

/* Expression grammar: decimal integers (ratios come out of `/`, which folds
 * exactly), coordinate names in the jet naming convention, declared parameter
 * names, `+ - * / ^` with `^` right-associative and unary minus binding below
 * `^`, and exp/log/sin/cos/tan/sqrt with a parenthesized argument.  There is
 * no implicit multiplication: "2x" stops with "expected operator" at the x.
 * Identifiers resolve against the context first, then against `params`. */
ParseResult parse_expression(std::string_view text, const JetContext& ctx,
                             const std::vector<std::string>& params = {});

}  // namespace tsym
