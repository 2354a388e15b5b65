#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tsym/matrix.hpp"
#include "tsym/oracle.hpp"
#include "tsym/twist.hpp"
#include "tsym/vector_field.hpp"

namespace tsym {

/* Compatibility of a mu twist: D_i Lambda_j - D_j Lambda_i + [Lambda_i,
 * Lambda_j] = 0 for all i < j (the zero-curvature condition on the deformed
 * total derivatives).  Trivially true with a single independent variable. */
struct MaurerCartanReport {
  bool ok = true;
  double worst = 0.0;                                // worst |entry| over all residuals
  std::vector<std::pair<int, int>> pairs;            // (i, j), i < j, aligned with residuals
  std::vector<MatrixExpr> residuals;                 // the matrix residual per pair
  std::vector<std::size_t> failing;                  // positions into pairs with nonzero residual
};

MaurerCartanReport check_maurer_cartan(const JetContext& ctx,
                                       const std::vector<MatrixExpr>& Lambda,
                                       const EqualityConfig& cfg = {});

/* Standard prolongation to order n: psi^a_{J,i} = D_i psi^a_J - u^a_{J,k}
 * D_i xi^k with psi^a_empty = phi^a.  With several independent variables the
 * table is filled along one recursion path per coordinate and the remaining
 * paths are compared numerically; the outcome lands in path_consistent /
 * path_residual of the result. */
ProlongedField prolong(const VectorField& X, int n, const EqualityConfig& cfg = {});

/* Lambda-prolongation (one independent variable): each step applies
 * (D_x + lambda) in place of D_x.  lambda may depend on coordinates of order
 * <= 1. */
ProlongedField prolong_lambda(const VectorField& X, const Expr& lambda, int n,
                              const EqualityConfig& cfg = {});

/* Mu-prolongation: psi^a_{J,i} = (delta^a_b D_i + (Lambda_i)^a_b) psi^b_J
 * - u^b_{J,k} (delta^a_b D_i + (Lambda_i)^a_b) xi^k, one p-by-p matrix per
 * independent variable.  Unless skip_compat is set, the Maurer-Cartan check
 * must pass first; with skip_compat the recursion still runs and any
 * path disagreement shows up in the result flags. */
ProlongedField prolong_mu(const VectorField& X, const std::vector<MatrixExpr>& Lambda,
                          int n, bool skip_compat = false, const EqualityConfig& cfg = {});

/* Sigma-prolongation of a family of r fields (one independent variable):
 * psi^a_{alpha,(k+1)} = (D_x psi^a_{alpha,(k)} - u^a_{(k+1)} D_x xi_alpha)
 * + sigma_alpha^beta (psi^a_{beta,(k)} - u^a_{(k+1)} xi_beta).  The family
 * recursion is joint, so all r prolonged fields come back together, in the
 * input order. */
std::vector<ProlongedField> prolong_sigma(const std::vector<VectorField>& fields,
                                          const MatrixExpr& sigma, int n);
std::vector<ProlongedField> prolong_sigma(const InvolutionSystem& system,
                                          const MatrixExpr& sigma, int n);

/* Chi-prolongation of a family of vertical fields (one independent variable):
 * Psi^a_{alpha,(k+1)} = D_x Psi^a_{alpha,(k)} + Lambda^a_b Psi^b_{alpha,(k)}
 * + sigma_alpha^beta Psi^a_{beta,(k)}. */
std::vector<ProlongedField> prolong_chi(const std::vector<VectorField>& fields,
                                        const MatrixExpr& Lambda, const MatrixExpr& sigma,
                                        int n);

/* Dispatch on a twist tag.  Standard, lambda and mu twists prolong each field
 * independently; sigma and chi treat the list as one family whose size must
 * match the sigma payload. */
std::vector<ProlongedField> prolong_twisted(const std::vector<VectorField>& fields,
                                            const TwistSpec& twist, int n,
                                            bool skip_compat = false,
                                            const EqualityConfig& cfg = {});

/* Difference table between the mu- and standard prolongations of a vertical
 * field Q^a d/du^a: F^a_empty = 0, F^a_{J,i} = [delta^a_b D_i +
 * (Lambda_i)^a_b] F^b_J + (Lambda_i)^a_b (D_J Q^b).  The decomposition
 * Psi = Phi + F is verified numerically; `verified` reports the outcome. */
struct MuDifference {
  JetVectorField F;       // vertical table, xi = 0
  bool verified = false;  // Psi == Phi + F under the oracle
  double worst = 0.0;
};

MuDifference mu_difference(const VectorField& Qfield, const std::vector<MatrixExpr>& Lambda,
                           int n, const EqualityConfig& cfg = {});

/* Commutator identities of twisted prolongations, checked against a basket of
 * random test functions of order <= n-1:
 *   scalar twists  [Y, D_i] = lambda_i Y - (lambda_i xi^k + D_i xi^k) D_k
 *   sigma          [Y_alpha, D_x] = sigma_alpha^beta Y_beta
 *                  - (D_x xi_alpha + sigma_alpha^beta xi_beta) D_x
 *   chi (Lambda = lambda I)  [Q_alpha, D_x] = rho_alpha^beta Q_beta,
 *                  rho = lambda I + sigma
 * The fields must share one twist tag; mu twists qualify only when every
 * Lambda_i is a scalar multiple of the identity (otherwise
 * EligibilityError "identity not applicable").  For sigma and chi the list
 * is the family, in order. */
struct IdentityCheck {
  int field = 0;           // position in the input list
  bool ok = true;
  double worst = 0.0;
  std::string identity;    // which identity was checked
};

std::vector<IdentityCheck> commutator_identity_report(
    const std::vector<ProlongedField>& prolonged, const EqualityConfig& cfg = {},
    int test_functions = 10);

/* Involution conditions on a sigma twist: whether the sigma-prolongations of
 * an involution system satisfy the same involution relations.  `sufficient`
 * is the condition (Y_alpha(sigma_beta^gamma) - Y_beta(sigma_alpha^gamma))
 * + (D_x f_ab^g + sigma_a^e f_eb^g - sigma_b^e f_ea^g - f_ab^e sigma_e^g)
 * = 0 per (alpha < beta, gamma); `contracted` is the necessary-and-sufficient
 * form with the same bracket contracted against phi^a_gamma. */
struct SigmaInvolutionReport {
  bool sufficient_ok = true;
  double sufficient_worst = 0.0;
  bool contracted_ok = true;
  double contracted_worst = 0.0;
};

SigmaInvolutionReport sigma_involution_condition(const InvolutionSystem& system,
                                                 const MatrixExpr& sigma, int n,
                                                 const EqualityConfig& cfg = {});

/* Rescaling a lambda-symmetry generator X by a nowhere-zero function f turns
 * it into a (lambda - X(f)/f)-symmetry of the same equation.  f must live on
 * the base manifold; for higher-order f the action of X on f would depend on
 * the prolongation, so such input is refused. */
Expr lambda_rescaled(const VectorField& X, const Expr& lambda, const Expr& f,
                     const EqualityConfig& cfg = {});

}  // namespace tsym
