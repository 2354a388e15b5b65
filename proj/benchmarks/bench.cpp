#include <benchmark/benchmark.h>

#include "tsym/oracle.hpp"
#include "tsym/parse.hpp"
#include "tsym/prolong.hpp"

using namespace tsym;

static void BM_ProlongStandard(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  JetContext ctx(1, 1, n + 1);
  VectorField X = make_vector_field(ctx, {ctx.x(0) * ctx.x(0)}, {ctx.x(0) * ctx.u(0)});
  for (auto _ : state) benchmark::DoNotOptimize(prolong(X, n));
}
BENCHMARK(BM_ProlongStandard)->Arg(2)->Arg(4)->Arg(6);

static void BM_ProlongLambda(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  JetContext ctx(1, 1, n + 1);
  MultiIndex J1 = MultiIndex::zero(1).plus(0);
  VectorField X = make_vector_field(ctx, {Expr::number(0)}, {Expr::number(1)});
  Expr lam = ctx.u(0, J1) - Expr::symbol("c") * ctx.u(0);
  for (auto _ : state) benchmark::DoNotOptimize(prolong_lambda(X, lam, n));
}
BENCHMARK(BM_ProlongLambda)->Arg(2)->Arg(4)->Arg(6);

static void BM_ProlongMuPde(benchmark::State& state) {
  JetContext ctx(2, 2, 3);
  MatrixExpr A = MatrixExpr::identity(2);
  A.at(0, 1) = ctx.x(0) + ctx.u(0);
  MatrixExpr Ainv = A.inverse();
  std::vector<MatrixExpr> L;
  for (int i = 0; i < 2; ++i) L.push_back(Ainv * A.total_derivative(ctx, i));
  VectorField X = make_vector_field(ctx, {Expr::number(0), Expr::number(0)},
                                    {ctx.u(1), ctx.u(0)});
  for (auto _ : state) benchmark::DoNotOptimize(prolong_mu(X, L, 2, true));
}
BENCHMARK(BM_ProlongMuPde);

static void BM_TotalDerivative(benchmark::State& state) {
  JetContext ctx(1, 1, 6);
  MultiIndex J1 = MultiIndex::zero(1).plus(0);
  Expr e = Expr::call(Func::Exp, ctx.u(0)) * ctx.u(0, J1) +
           Expr::pow(ctx.x(0) + ctx.u(0), Expr::number(3));
  for (auto _ : state) {
    Expr d = e;
    for (int k = 0; k < 4; ++k) d = total_derivative(ctx, d, 0);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_TotalDerivative);

static void BM_EqualNumeric(benchmark::State& state) {
  JetContext ctx(1, 1, 2);
  Expr lhs = Expr::pow(ctx.x(0) + ctx.u(0), Expr::number(2));
  Expr rhs = ctx.x(0) * ctx.x(0) + Expr::number(2) * ctx.x(0) * ctx.u(0) +
             ctx.u(0) * ctx.u(0);
  EqualityConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(equal_numeric(lhs, rhs, cfg));
}
BENCHMARK(BM_EqualNumeric);

static void BM_ParseRoundTrip(benchmark::State& state) {
  JetContext ctx(1, 2, 3);
  MultiIndex J2 = MultiIndex::zero(1).plus(0).plus(0);
  Expr e = ctx.u(0, J2) * Expr::call(Func::Sin, ctx.x(0)) -
           Expr::number(Rational(3) / 7) * Expr::pow(ctx.u(1), Expr::number(-2));
  std::string text = e.str();
  for (auto _ : state) benchmark::DoNotOptimize(parse_expression(text, ctx));
}
BENCHMARK(BM_ParseRoundTrip);

BENCHMARK_MAIN();
