#pragma once

#include <string>
#include <vector>

#include "tsym/prolong.hpp"

namespace tsym {

/* Scalar gauge factor on the base manifold, nowhere zero on the sampling
 * box (checked statistically at construction). */
struct GaugeScalar {
  Expr beta;
};

GaugeScalar make_gauge_scalar(const JetContext& ctx, const Expr& beta,
                              const EqualityConfig& cfg = {});

/* Matrix gauge factor on the base manifold.  The role records which index it
 * acts on: the dependent-variable (vector) index for mu gauges, the family
 * (module) index for sigma gauges. */
enum class GaugeRole { VectorIndex, ModuleIndex };

struct GaugeMatrix {
  MatrixExpr M;
  GaugeRole role = GaugeRole::VectorIndex;
};

GaugeMatrix make_gauge_matrix(const JetContext& ctx, const MatrixExpr& M, GaugeRole role,
                              const EqualityConfig& cfg = {});

/* The two directions of gauge equivalence:
 *   Forward: gauge . (twisted prolongation of X) = standard prolongation of (gauge . X)
 *   Inverse: gauge . (standard prolongation of W) = twisted prolongation of (gauge . W)
 * The twist produced by the same gauge factor differs between them. */
enum class GaugeDirection { Forward, Inverse };

/* Forward: lambda = (D_x beta) / beta.  Inverse: lambda = -(D_x beta) / beta. */
Expr lambda_from_beta(const JetContext& ctx, const GaugeScalar& beta,
                      GaugeDirection dir = GaugeDirection::Forward);

/* Forward: Lambda_i = A^{-1} (D_i A).  Inverse: Lambda_i = -(D_i A) A^{-1}.
 * Either way the result is a pure-gauge twist, so it satisfies Maurer-Cartan;
 * that is verified numerically as a self-check. */
std::vector<MatrixExpr> mu_from_A(const JetContext& ctx, const GaugeMatrix& A,
                                  GaugeDirection dir = GaugeDirection::Forward,
                                  const EqualityConfig& cfg = {});

/* Forward: sigma = Gamma^{-1} (D_x Gamma).  Inverse: sigma = -(D_x Gamma) Gamma^{-1}. */
MatrixExpr sigma_from_Gamma(const JetContext& ctx, const GaugeMatrix& Gamma,
                            GaugeDirection dir = GaugeDirection::Forward);

struct GaugeCheck {
  bool ok = true;
  double worst = 0.0;
  std::string detail;
};

/* Scalar gauge diagram for a Lie-point field (one independent variable). */
GaugeCheck verify_gauge_lambda(const VectorField& X, const GaugeScalar& beta, int n,
                               GaugeDirection dir = GaugeDirection::Forward,
                               const EqualityConfig& cfg = {});

/* Matrix gauge on the dependent-variable index; the field must be vertical. */
GaugeCheck verify_gauge_mu(const VectorField& Qfield, const GaugeMatrix& A, int n,
                           GaugeDirection dir = GaugeDirection::Forward,
                           const EqualityConfig& cfg = {});

/* Matrix gauge on the family index (one independent variable).  Also checks
 * that the twisted and standard prolonged families span the same distribution
 * at sample points. */
GaugeCheck verify_gauge_sigma(const std::vector<VectorField>& fields, const GaugeMatrix& Gamma,
                              int n, GaugeDirection dir = GaugeDirection::Forward,
                              const EqualityConfig& cfg = {});
GaugeCheck verify_gauge_sigma(const InvolutionSystem& system, const GaugeMatrix& Gamma, int n,
                              GaugeDirection dir = GaugeDirection::Forward,
                              const EqualityConfig& cfg = {});

/* Both gauges at once on a vertical family: A on the vector index gives the
 * mu edge, B on the module index gives the sigma edge, and their composition
 * matches the chi-prolongation of (A B W). */
struct ChiGaugeCheck {
  GaugeCheck mu_edge;
  GaugeCheck sigma_edge;
  GaugeCheck composite;
  bool ok = true;
};

ChiGaugeCheck verify_gauge_chi(const std::vector<VectorField>& fields, const GaugeMatrix& A,
                               const GaugeMatrix& B, int n, const EqualityConfig& cfg = {});

/* Numeric gauge factor beta(x) = exp of the integral of lambda from x0, on a
 * uniform grid.  Only lambda depending on x alone is representable this way;
 * anything else is refused as a nonlocal gauge factor. */
struct GaugeGrid {
  std::vector<double> x;
  std::vector<double> beta;
};

GaugeGrid beta_from_lambda_quadrature(const JetContext& ctx, const Expr& lambda, double x0,
                                      double x1, int points = 33);

}  // namespace tsym
