#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tsym/jet.hpp"
#include "tsym/oracle.hpp"
#include "tsym/twist.hpp"

namespace tsym {

/* Vector field xi^i d/dx_i + phi^a d/du^a.  Lie-point when the coefficients
 * live on the base manifold; generalized coefficients may involve jet
 * coordinates up to the context order. */
struct VectorField {
  JetContext ctx;
  std::vector<Expr> xi;   // size q
  std::vector<Expr> phi;  // size p

  bool is_lie_point() const;
  bool is_vertical() const;   // all xi structurally zero
  int coefficient_order() const;
};

VectorField make_vector_field(const JetContext& ctx, std::vector<Expr> xi, std::vector<Expr> phi);

/* Vector field on the jet space of order `order`, with one coefficient per
 * coordinate: xi^i d/dx_i plus psi^a_J d/du^a_J for |J| <= order.  Prolonged
 * fields are stored this way, as are their brackets and gauge rescalings.
 * The context carries at least `order` (often more, so coefficients that
 * mention one extra order stay representable). */
struct JetVectorField {
  JetContext ctx;
  int order = 0;
  std::vector<Expr> xi;                 // size q
  std::vector<std::vector<Expr>> psi;   // [a][index position], |J| <= order

  const Expr& coeff(int a, const MultiIndex& J) const;
  Expr& coeff(int a, const MultiIndex& J);

  /* Apply as a derivation to a function on the jet space of order `order`. */
  Expr apply(const Expr& f) const;

  JetVectorField scaled(const Expr& g) const;  // g * field, coefficientwise
};

JetVectorField make_jet_field(const JetContext& ctx, int order);

/* Order-0 slice of a vector field viewed as a jet field, or extension of a
 * VectorField into the coefficient table shape (no prolongation involved). */
JetVectorField as_jet_field(const VectorField& X);

/* Prolonged field: a jet field remembering how it was produced. */
struct ProlongedField {
  JetVectorField field;
  TwistSpec twist;
  VectorField source;
  bool path_consistent = true;     // multi-path recursion agreement (PDE case)
  double path_residual = 0.0;
};

/* Componentwise numeric comparison of two jet fields of equal order. */
struct FieldComparison {
  bool equal = true;
  double worst = 0.0;          // worst |lhs-rhs| over all coefficients
  std::string worst_coeff;     // which coefficient it occurred in
};
FieldComparison compare_fields(const JetVectorField& A, const JetVectorField& B,
                               const EqualityConfig& cfg);

/* Evolutionary representative Q^a = phi^a - u^a_i xi^i, as a vertical field. */
VectorField evolutionary_rep(const VectorField& X);

/* Reconstruct a Lie-point field from a vertical characteristic: Q must be
 * affine in the first derivatives with every dependent component naming the
 * same xi.  Errors: "not affine in u_i", "inconsistent reconstruction". */
VectorField reconstruct_liepoint(const JetContext& ctx, const std::vector<Expr>& Q,
                                 const EqualityConfig& cfg);

/* Lie bracket.  Coefficients of generalized fields are acted on through the
 * standard prolongation of the other field, so the result is again a vector
 * field of the shared coefficient order. */
VectorField commutator(const VectorField& X, const VectorField& Y);

/* Bracket of two fields on the same jet space, componentwise. */
JetVectorField bracket(const JetVectorField& A, const JetVectorField& B);

/* Checks prolong(X, n) bracket prolong(Y, n) == prolong([X, Y], n). */
struct BracketCheck {
  bool ok = true;
  double worst = 0.0;
  std::string detail;
};
BracketCheck verify_prolong_commutator(const VectorField& X, const VectorField& Y, int n,
                                       const EqualityConfig& cfg);

/* A set of fields closed under the bracket: [X_a, X_b] = f_ab^c X_c with
 * structure functions on the base manifold.  Structure functions are fitted
 * numerically and then confirmed symbolically; when confirmation fails the
 * numeric fit is kept and flagged. */
struct InvolutionSystem {
  std::vector<VectorField> fields;
  std::vector<std::vector<std::vector<Expr>>> f;  // [alpha][beta][gamma]
  bool numeric_only = false;
};

InvolutionSystem check_involution(const std::vector<VectorField>& fields,
                                  const EqualityConfig& cfg, int ansatz_degree = 2);

/* Builds the system from known structure functions, verifying them by oracle. */
InvolutionSystem involution_from_structure(const std::vector<VectorField>& fields,
                                           const std::vector<std::vector<std::vector<Expr>>>& f,
                                           const EqualityConfig& cfg);

}  // namespace tsym
