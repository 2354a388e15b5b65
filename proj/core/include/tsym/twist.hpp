#pragma once

#include <string>
#include <variant>
#include <vector>

#include "tsym/matrix.hpp"

namespace tsym {

/* The deformation applied to the prolongation recursion.  Scalar and matrix
 * payloads may depend on jet coordinates of order <= 1. */
struct TwistStandard {};

struct TwistLambda {
  Expr lambda;
};

struct TwistMu {
  std::vector<MatrixExpr> Lambda;  // one p-by-p matrix per independent variable
};

struct TwistSigma {
  MatrixExpr sigma;  // r-by-r, acting across a family of r fields; q == 1 only
};

struct TwistChi {
  MatrixExpr Lambda;  // p-by-p
  MatrixExpr sigma;   // r-by-r; q == 1 only, vertical fields only
};

using TwistSpec = std::variant<TwistStandard, TwistLambda, TwistMu, TwistSigma, TwistChi>;

const char* twist_name(const TwistSpec& t);

/* Shape and order checks: payload dimensions against the context and family
 * size, entries of order <= 1, sigma/chi restricted to q == 1. */
void validate_twist(const JetContext& ctx, const TwistSpec& t, int family_size);

/* Structural equality of twist payloads (same variant, same expressions). */
bool same_twist(const TwistSpec& a, const TwistSpec& b);

}  // namespace tsym
