#pragma once

// Deterministic generators for property tests: random polynomial vector
// fields, twist payloads and nowhere-zero gauge factors over small jet
// contexts.  Everything is driven by one SampleRng so a seed pins the
// whole scenario.

#include <cstdint>
#include <string>
#include <vector>

#include "tsym/gauge.hpp"
#include "tsym/oracle.hpp"
#include "tsym/prolong.hpp"

namespace tsymgen {

using namespace tsym;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int pick(int lo, int hi) {
    return lo + static_cast<int>(rng_.raw() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  // nonzero integer coefficient in [-3, 3]
  Expr coef() {
    int c = pick(1, 3);
    return Expr::number(pick(0, 1) ? c : -c);
  }

  Expr monomial(const std::vector<Expr>& vars, int degree) {
    Expr m = coef();
    for (int d = 0; d < degree; ++d) m = m * vars[static_cast<std::size_t>(
        pick(0, static_cast<int>(vars.size()) - 1))];
    return m;
  }

  // polynomial with 1..terms monomials of degree <= max_degree
  Expr poly(const std::vector<Expr>& vars, int max_degree, int terms) {
    Expr s = monomial(vars, pick(0, max_degree));
    int extra = pick(0, terms - 1);
    for (int t = 0; t < extra; ++t) s = s + monomial(vars, pick(0, max_degree));
    return s;
  }

  // order-0 coordinates of the context
  std::vector<Expr> base_vars(const JetContext& ctx) {
    std::vector<Expr> v;
    for (int i = 0; i < ctx.q(); ++i) v.push_back(ctx.x(i));
    for (int a = 0; a < ctx.p(); ++a) v.push_back(ctx.u(a));
    return v;
  }

  // coordinates of order <= 1
  std::vector<Expr> order1_vars(const JetContext& ctx) {
    std::vector<Expr> v = base_vars(ctx);
    for (int a = 0; a < ctx.p(); ++a)
      for (int i = 0; i < ctx.q(); ++i) v.push_back(ctx.u(a, MultiIndex::zero(ctx.q()).plus(i)));
    return v;
  }

  VectorField liepoint(const JetContext& ctx, int max_degree = 2, int terms = 2) {
    std::vector<Expr> vars = base_vars(ctx);
    std::vector<Expr> xi, phi;
    for (int i = 0; i < ctx.q(); ++i) xi.push_back(poly(vars, max_degree, terms));
    for (int a = 0; a < ctx.p(); ++a) phi.push_back(poly(vars, max_degree, terms));
    return make_vector_field(ctx, std::move(xi), std::move(phi));
  }

  VectorField vertical(const JetContext& ctx, int max_degree = 2, int terms = 2) {
    std::vector<Expr> vars = base_vars(ctx);
    std::vector<Expr> xi(static_cast<std::size_t>(ctx.q()), Expr::number(0));
    std::vector<Expr> phi;
    for (int a = 0; a < ctx.p(); ++a) phi.push_back(poly(vars, max_degree, terms));
    return make_vector_field(ctx, std::move(xi), std::move(phi));
  }

  // scalar twist component, order <= 1 coordinates allowed
  Expr lambda_expr(const JetContext& ctx, int max_degree = 2) {
    return poly(order1_vars(ctx), max_degree, 2);
  }

  MatrixExpr matrix(const JetContext& ctx, int dim, int max_degree = 1) {
    std::vector<Expr> vars = order1_vars(ctx);
    MatrixExpr M(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        M.at(i, j) = pick(0, 2) ? poly(vars, max_degree, 2) : Expr::number(0);
    return M;
  }

  // nowhere-zero scalar on the base manifold: 1 + p^2, 2 + p, or exp(small)
  Expr nowhere_zero(const JetContext& ctx) {
    std::vector<Expr> vars = base_vars(ctx);
    switch (pick(0, 2)) {
      case 0: {
        Expr p = poly(vars, 1, 2);
        return Expr::number(1) + p * p;
      }
      case 1: {
        Expr v = vars[static_cast<std::size_t>(pick(0, static_cast<int>(vars.size()) - 1))];
        return Expr::number(pick(2, 4)) + v * v;
      }
      default: {
        Expr v = vars[static_cast<std::size_t>(pick(0, static_cast<int>(vars.size()) - 1))];
        return Expr::call(Func::Exp, pick(0, 1) ? v : v * Expr::number(-1));
      }
    }
  }

  // invertible on the sampling box: triangular with nowhere-zero diagonal
  MatrixExpr invertible_matrix(const JetContext& ctx, int dim) {
    std::vector<Expr> vars = base_vars(ctx);
    MatrixExpr M(dim, dim);
    bool upper = pick(0, 1) == 1;
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        if (i == j)
          M.at(i, j) = pick(0, 1) ? nowhere_zero(ctx) : Expr::number(1);
        else if ((upper && j > i) || (!upper && j < i))
          M.at(i, j) = pick(0, 1) ? poly(vars, 1, 2) : Expr::number(0);
        else
          M.at(i, j) = Expr::number(0);
      }
    }
    return M;
  }

  // determinant 1: identity plus one strictly triangular polynomial in x
  MatrixExpr unimodular_x(const JetContext& ctx, int dim) {
    std::vector<Expr> vars;
    for (int i = 0; i < ctx.q(); ++i) vars.push_back(ctx.x(i));
    MatrixExpr M = MatrixExpr::identity(dim);
    bool upper = pick(0, 1) == 1;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        if ((upper && j > i) || (!upper && j < i)) M.at(i, j) = poly(vars, 2, 2);
    return M;
  }

  // random expression tree for printer round trips
  Expr expr_tree(const JetContext& ctx, int depth) {
    if (depth <= 0) {
      switch (pick(0, 3)) {
        case 0:
          return Expr::number(pick(-9, 9));
        case 1:
          return Expr::number(Rational(pick(-9, 9)) / pick(2, 7));
        case 2:
          return Expr::symbol("c");
        default: {
          std::vector<Expr> vars = order1_vars(ctx);
          return vars[static_cast<std::size_t>(pick(0, static_cast<int>(vars.size()) - 1))];
        }
      }
    }
    switch (pick(0, 6)) {
      case 0:
        return expr_tree(ctx, depth - 1) + expr_tree(ctx, depth - 1);
      case 1:
        return expr_tree(ctx, depth - 1) - expr_tree(ctx, depth - 1);
      case 2:
        return expr_tree(ctx, depth - 1) * expr_tree(ctx, depth - 1);
      case 3:
        return expr_tree(ctx, depth - 1) / expr_tree(ctx, depth - 1);
      case 4:
        return Expr::pow(expr_tree(ctx, depth - 1), Expr::number(pick(-3, 3)));
      case 5: {
        Func fs[] = {Func::Exp, Func::Log, Func::Sin, Func::Cos, Func::Tan, Func::Sqrt};
        return Expr::call(fs[pick(0, 5)], expr_tree(ctx, depth - 1));
      }
      default:
        return -expr_tree(ctx, depth - 1);
    }
  }

  SampleRng& rng() { return rng_; }

 private:
  SampleRng rng_;
};

}  // namespace tsymgen
