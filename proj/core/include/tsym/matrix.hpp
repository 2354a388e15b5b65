#pragma once

#include <vector>

#include "tsym/expr.hpp"
#include "tsym/jet.hpp"

namespace tsym {

/* Dense matrix of expressions.  Small sizes only (gauge and twist matrices),
 * so determinants and inverses go through cofactor expansion. */
class MatrixExpr {
 public:
  MatrixExpr() : rows_(0), cols_(0) {}
  MatrixExpr(int rows, int cols);
  static MatrixExpr identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Expr& at(int i, int j);
  const Expr& at(int i, int j) const;

  MatrixExpr operator+(const MatrixExpr& o) const;
  MatrixExpr operator-(const MatrixExpr& o) const;
  MatrixExpr operator*(const MatrixExpr& o) const;
  MatrixExpr scaled(const Expr& s) const;

  MatrixExpr total_derivative(const JetContext& ctx, int dir) const;  // entrywise
  Expr det() const;
  MatrixExpr inverse() const;  // adjugate over determinant; det must not be the zero expression

  // max jet order over entries
  int jet_order(const JetContext& ctx) const;
  bool is_square() const { return rows_ == cols_; }

 private:
  int rows_, cols_;
  std::vector<Expr> a_;  // row-major
};

MatrixExpr commutator(const MatrixExpr& A, const MatrixExpr& B);  // AB - BA

}  // namespace tsym
