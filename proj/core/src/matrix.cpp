#include "tsym/matrix.hpp"

#include "tsym/errors.hpp"

namespace tsym {

MatrixExpr::MatrixExpr(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw InputError("matrix dimensions must be positive");
  a_.assign(static_cast<std::size_t>(rows) * cols, Expr::number(0));
}

MatrixExpr MatrixExpr::identity(int n) {
  MatrixExpr m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = Expr::number(1);
  return m;
}

Expr& MatrixExpr::at(int i, int j) {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw InternalError("matrix index out of range");
  return a_[static_cast<std::size_t>(i) * cols_ + j];
}

const Expr& MatrixExpr::at(int i, int j) const {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw InternalError("matrix index out of range");
  return a_[static_cast<std::size_t>(i) * cols_ + j];
}

MatrixExpr MatrixExpr::operator+(const MatrixExpr& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw InputError("matrix addition: shape mismatch");
  MatrixExpr r(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(i, j) = at(i, j) + o.at(i, j);
  return r;
}

MatrixExpr MatrixExpr::operator-(const MatrixExpr& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw InputError("matrix subtraction: shape mismatch");
  MatrixExpr r(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(i, j) = at(i, j) - o.at(i, j);
  return r;
}

MatrixExpr MatrixExpr::operator*(const MatrixExpr& o) const {
  if (cols_ != o.rows_) throw InputError("matrix product: shape mismatch");
  MatrixExpr r(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < o.cols_; ++j) {
      std::vector<Expr> terms;
      terms.reserve(cols_);
      for (int k = 0; k < cols_; ++k) terms.push_back(at(i, k) * o.at(k, j));
      r.at(i, j) = Expr::sum(std::move(terms));
    }
  }
  return r;
}

MatrixExpr MatrixExpr::scaled(const Expr& s) const {
  MatrixExpr r(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(i, j) = s * at(i, j);
  return r;
}

MatrixExpr MatrixExpr::total_derivative(const JetContext& ctx, int dir) const {
  MatrixExpr r(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(i, j) = tsym::total_derivative(ctx, at(i, j), dir);
  return r;
}

Expr MatrixExpr::det() const {
  if (!is_square()) throw InputError("determinant of a non-square matrix");
  if (rows_ == 1) return at(0, 0);
  if (rows_ == 2) return at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
  // Laplace expansion along the first row; fine for the small sizes in use
  std::vector<Expr> terms;
  for (int j = 0; j < cols_; ++j) {
    MatrixExpr minor(rows_ - 1, cols_ - 1);
    for (int r = 1; r < rows_; ++r) {
      int cc = 0;
      for (int c = 0; c < cols_; ++c) {
        if (c == j) continue;
        minor.at(r - 1, cc++) = at(r, c);
      }
    }
    Expr term = at(0, j) * minor.det();
    terms.push_back(j % 2 == 0 ? term : -term);
  }
  return Expr::sum(std::move(terms));
}

MatrixExpr MatrixExpr::inverse() const {
  if (!is_square()) throw InputError("inverse of a non-square matrix");
  Expr d = det();
  if (d.is_zero()) throw InputError("matrix is singular (zero determinant)");
  MatrixExpr r(rows_, cols_);
  if (rows_ == 1) {
    r.at(0, 0) = inv(d);
    return r;
  }
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) {
      MatrixExpr minor(rows_ - 1, cols_ - 1);
      int rr = 0;
      for (int r2 = 0; r2 < rows_; ++r2) {
        if (r2 == i) continue;
        int cc = 0;
        for (int c2 = 0; c2 < cols_; ++c2) {
          if (c2 == j) continue;
          minor.at(rr, cc++) = at(r2, c2);
        }
        ++rr;
      }
      Expr cof = minor.det();
      if ((i + j) % 2 == 1) cof = -cof;
      r.at(j, i) = cof / d;  // adjugate transposes
    }
  }
  return r;
}

int MatrixExpr::jet_order(const JetContext& ctx) const {
  int best = 0;
  for (const Expr& e : a_) best = std::max(best, ctx.jet_order(e));
  return best;
}

MatrixExpr commutator(const MatrixExpr& A, const MatrixExpr& B) { return A * B - B * A; }

}  // namespace tsym
