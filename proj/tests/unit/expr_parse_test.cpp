#include "doctest.h"
#include "tsym/errors.hpp"
#include "tsym/oracle.hpp"
#include "tsym/parse.hpp"

using namespace tsym;

namespace {
bool eq(const Expr& a, const Expr& b) {
  EqualityConfig cfg;
  return equal_numeric(a, b, cfg).equal;
}
}  // namespace

TEST_CASE("arithmetic canonicalization") {
  Expr x = Expr::symbol("x"), y = Expr::symbol("y");
  CHECK((x + y).same(y + x));
  CHECK((x * y).same(y * x));
  CHECK((x + x).same(Expr::number(2) * x));
  CHECK((x * x).same(Expr::pow(x, Expr::number(2))));
  CHECK((x - x).is_zero());
  CHECK((x / x).is_one());
  CHECK((x + Expr::number(0)).same(x));
  CHECK((x * Expr::number(1)).same(x));
  CHECK((x * Expr::number(0)).is_zero());
  CHECK(Expr::pow(x, Expr::number(0)).is_one());
  CHECK(Expr::pow(x, Expr::number(1)).same(x));
}

TEST_CASE("rational constants fold exactly") {
  Expr r = Expr::number(Rational(1) / 3) + Expr::number(Rational(1) / 6);
  CHECK(r.same(Expr::number(Rational(1) / 2)));
  Expr q = Expr::number(2) / Expr::number(4);
  CHECK(q.same(Expr::number(Rational(1) / 2)));
  CHECK((Expr::number(Rational(3) / 4) * Expr::number(4)).same(Expr::number(3)));
}

TEST_CASE("differentiation") {
  Expr x = Expr::symbol("x");
  CHECK(diff(x * x, x).same(Expr::number(2) * x));
  CHECK(diff(Expr::call(Func::Exp, x), x).same(Expr::call(Func::Exp, x)));
  CHECK(eq(diff(Expr::call(Func::Log, x), x), Expr::number(1) / x));
  CHECK(eq(diff(Expr::call(Func::Sin, x * x), x),
           Expr::number(2) * x * Expr::call(Func::Cos, x * x)));
  CHECK(eq(diff(Expr::call(Func::Sqrt, x), x),
           Expr::number(Rational(1) / 2) / Expr::call(Func::Sqrt, x)));
  CHECK(diff(Expr::symbol("y"), x).is_zero());
}

TEST_CASE("substitute and evaluate") {
  Expr x = Expr::symbol("x"), y = Expr::symbol("y");
  Subst s{{x.symbol_id(), y * y}};
  CHECK(substitute(x + Expr::number(1), s).same(y * y + Expr::number(1)));

  Valuation v{{x.symbol_id(), 2.0}};
  auto r = eval_numeric(x * x + Expr::number(1), v);
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(5.0));
  CHECK_FALSE(eval_numeric(Expr::number(1) / (x - Expr::number(2)), v).has_value());
  CHECK_THROWS_AS(eval_numeric(y, v), UndeclaredSymbolError);
}

TEST_CASE("numeric equality oracle") {
  EqualityConfig cfg;
  Expr x = Expr::symbol("x");
  Expr lhs = (x + Expr::number(1)) * (x - Expr::number(1));
  CHECK(equal_numeric(lhs, x * x - Expr::number(1), cfg).equal);
  CHECK_FALSE(equal_numeric(lhs, x * x, cfg).equal);
  // singular factors get resampled rather than failing the comparison
  Expr sing = (x * x - Expr::number(1)) / (x - Expr::number(1));
  CHECK(equal_numeric(sing, x + Expr::number(1), cfg).equal);
  // the sequence of verdicts is deterministic for a fixed seed
  EqualityReport a = equal_numeric(lhs, x * x - Expr::number(1), cfg);
  EqualityReport b = equal_numeric(lhs, x * x - Expr::number(1), cfg);
  CHECK(a.worst_abs == b.worst_abs);
}

TEST_CASE("snap_rational recovers simple fractions") {
  REQUIRE(snap_rational(0.5).has_value());
  CHECK(*snap_rational(0.5) == Rational(1) / 2);
  CHECK(*snap_rational(-2.0 / 3.0 + 1e-12) == Rational(-2) / 3);
  CHECK_FALSE(snap_rational(0.123456789123, 1000, 1e-12).has_value());
}

TEST_CASE("grammar desk examples") {
  JetContext ctx(1, 1, 3);
  MultiIndex J1 = MultiIndex::zero(1).plus(0);

  ParseResult a = parse_expression("u_[1] - 3/2*u", ctx);
  REQUIRE(a.ok());
  CHECK(a.expr->same(ctx.u(0, J1) - Expr::number(Rational(3) / 2) * ctx.u(0)));

  ParseResult b = parse_expression("exp(x)^2", ctx);
  REQUIRE(b.ok());
  CHECK(b.expr->same(Expr::pow(Expr::call(Func::Exp, ctx.x(0)), Expr::number(2))));

  ParseResult c = parse_expression("2x", ctx);
  REQUIRE_FALSE(c.ok());
  CHECK(c.diagnostic->message == "expected operator");
  CHECK(c.diagnostic->offset == 1);
  CHECK(c.diagnostic->line == 1);
  CHECK(c.diagnostic->column == 2);
}

TEST_CASE("precedence and associativity") {
  JetContext ctx(1, 1, 3);
  MultiIndex J1 = MultiIndex::zero(1).plus(0), J2 = J1.plus(0);

  CHECK(parse_expression("2^3^2", ctx).expr->same(Expr::number(512)));
  CHECK(parse_expression("-u^2", ctx).expr->same(-Expr::pow(ctx.u(0), Expr::number(2))));
  CHECK(parse_expression("1 - u_[2] - u_[1]", ctx)
            .expr->same(Expr::number(1) - ctx.u(0, J2) - ctx.u(0, J1)));
  CHECK(parse_expression("2*u + 3*x", ctx)
            .expr->same(Expr::number(2) * ctx.u(0) + Expr::number(3) * ctx.x(0)));
  CHECK(parse_expression("6/4", ctx).expr->same(Expr::number(Rational(3) / 2)));
  CHECK(parse_expression("(u + x)^2", ctx)
            .expr->same(Expr::pow(ctx.u(0) + ctx.x(0), Expr::number(2))));
}

TEST_CASE("parse diagnostics") {
  JetContext ctx(1, 1, 3);
  ParseResult a = parse_expression("c*u", ctx);
  REQUIRE_FALSE(a.ok());
  CHECK(a.diagnostic->message.find("undeclared name") != std::string::npos);
  CHECK(parse_expression("c*u", ctx, {"c"}).ok());

  CHECK_FALSE(parse_expression("exp + 1", ctx).ok());
  CHECK_FALSE(parse_expression("(u + 1", ctx).ok());
  ParseResult b = parse_expression("u + 1)", ctx);
  REQUIRE_FALSE(b.ok());
  CHECK(b.diagnostic->message.find("unmatched") != std::string::npos);
  ParseResult c = parse_expression("", ctx);
  REQUIRE_FALSE(c.ok());
  CHECK(c.diagnostic->message == "expected an operand");
  CHECK_FALSE(parse_expression("u_[1,2]", ctx).ok());
  CHECK_FALSE(parse_expression("u_[", ctx).ok());
  CHECK_FALSE(parse_expression("u +", ctx).ok());
  // expectation sets surface in the rendered diagnostic
  std::string rendered = parse_expression("", ctx).diagnostic->render();
  CHECK(rendered.find("line 1, column 1") != std::string::npos);
  CHECK(rendered.find("number") != std::string::npos);
}

TEST_CASE("printer output reparses to the same tree") {
  JetContext ctx(1, 2, 3);
  MultiIndex J1 = MultiIndex::zero(1).plus(0), J2 = J1.plus(0);
  std::vector<Expr> cases = {
      ctx.u(0, J1) - Expr::number(Rational(3) / 2) * ctx.u(1),
      Expr::pow(Expr::call(Func::Exp, ctx.x(0)), Expr::number(2)),
      -ctx.u(0) * ctx.u(1, J2) + Expr::number(Rational(-7) / 3),
      Expr::pow(ctx.u(0) + ctx.x(0), Expr::number(-2)),
      Expr::call(Func::Sin, ctx.x(0)) * Expr::call(Func::Log, Expr::number(2) + ctx.u(1)),
      Expr::pow(Expr::number(2), ctx.u(0)) / (ctx.x(0) - Expr::number(1)),
      Expr::call(Func::Sqrt, Expr::number(1) + Expr::pow(ctx.u(0, J1), Expr::number(2))),
  };
  for (const Expr& e : cases) {
    ParseResult r = parse_expression(e.str(), ctx);
    REQUIRE(r.ok());
    CHECK(r.expr->same(e));
  }
}
