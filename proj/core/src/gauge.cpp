#include "tsym/gauge.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "tsym/errors.hpp"

namespace tsym {

namespace {

constexpr double kZeroOnBox = 1e-9;

void check_on_base(const JetContext& ctx, const Expr& e, const char* what) {
  if (!ctx.on_base_manifold(e))
    throw InputError(std::string(what) + " must live on the base manifold");
}

/* Evaluates e at cfg.samples regular points and returns the smallest |e|. */
double min_abs_on_box(const Expr& e, const EqualityConfig& cfg) {
  SampleRng rng(cfg.seed);
  std::vector<Expr> exprs = {e};
  double best = HUGE_VAL;
  for (int s = 0; s < cfg.samples; ++s) {
    Valuation pt = sample_point(exprs, rng, cfg);
    auto v = eval_numeric(e, pt);
    if (!v) throw SingularRegionError("expression singular on box");
    best = std::min(best, std::fabs(*v));
  }
  return best;
}

JetContext derivative_context(const JetContext& ctx) {
  return ctx.n() >= 1 ? ctx : ctx.with_order(1);
}

/* Matrix action on the dependent-variable index of a coefficient table. */
JetVectorField gauge_apply_vector(const JetVectorField& F, const MatrixExpr& A) {
  JetVectorField out = make_jet_field(F.ctx, F.order);
  out.xi = F.xi;
  const int p = F.ctx.p();
  for (int a = 0; a < p; ++a) {
    for (std::size_t pos = 0; pos < F.psi[a].size(); ++pos) {
      std::vector<Expr> parts;
      for (int b = 0; b < p; ++b) parts.push_back(A.at(a, b) * F.psi[b][pos]);
      out.psi[a][pos] = simplify(Expr::sum(std::move(parts)));
    }
  }
  return out;
}

/* Matrix action on the family index: row alpha of Gamma applied to a list of
 * tables, xi included. */
JetVectorField module_combine(const std::vector<JetVectorField>& Z, const MatrixExpr& G,
                              int alpha) {
  JetVectorField out = make_jet_field(Z[0].ctx, Z[0].order);
  const int r = static_cast<int>(Z.size());
  for (int i = 0; i < out.ctx.q(); ++i) {
    std::vector<Expr> parts;
    for (int be = 0; be < r; ++be) parts.push_back(G.at(alpha, be) * Z[be].xi[i]);
    out.xi[i] = simplify(Expr::sum(std::move(parts)));
  }
  for (int a = 0; a < out.ctx.p(); ++a) {
    for (std::size_t pos = 0; pos < out.psi[a].size(); ++pos) {
      std::vector<Expr> parts;
      for (int be = 0; be < r; ++be) parts.push_back(G.at(alpha, be) * Z[be].psi[a][pos]);
      out.psi[a][pos] = simplify(Expr::sum(std::move(parts)));
    }
  }
  return out;
}

VectorField scale_field(const VectorField& X, const Expr& g) {
  std::vector<Expr> xi(X.ctx.q()), phi(X.ctx.p());
  for (int i = 0; i < X.ctx.q(); ++i) xi[i] = simplify(g * X.xi[i]);
  for (int a = 0; a < X.ctx.p(); ++a) phi[a] = simplify(g * X.phi[a]);
  return VectorField{X.ctx, std::move(xi), std::move(phi)};
}

VectorField vector_gauge_field(const VectorField& Q, const MatrixExpr& A) {
  std::vector<Expr> phi(Q.ctx.p());
  for (int a = 0; a < Q.ctx.p(); ++a) {
    std::vector<Expr> parts;
    for (int b = 0; b < Q.ctx.p(); ++b) parts.push_back(A.at(a, b) * Q.phi[b]);
    phi[a] = simplify(Expr::sum(std::move(parts)));
  }
  return VectorField{Q.ctx, Q.xi, std::move(phi)};
}

std::vector<VectorField> module_gauge_family(const std::vector<VectorField>& fields,
                                             const MatrixExpr& G) {
  const int r = static_cast<int>(fields.size());
  const JetContext& ctx = fields[0].ctx;
  std::vector<VectorField> out;
  out.reserve(r);
  for (int al = 0; al < r; ++al) {
    std::vector<Expr> xi(ctx.q(), Expr::number(0)), phi(ctx.p(), Expr::number(0));
    for (int i = 0; i < ctx.q(); ++i) {
      std::vector<Expr> parts;
      for (int be = 0; be < r; ++be) parts.push_back(G.at(al, be) * fields[be].xi[i]);
      xi[i] = simplify(Expr::sum(std::move(parts)));
    }
    for (int a = 0; a < ctx.p(); ++a) {
      std::vector<Expr> parts;
      for (int be = 0; be < r; ++be) parts.push_back(G.at(al, be) * fields[be].phi[a]);
      phi[a] = simplify(Expr::sum(std::move(parts)));
    }
    out.push_back(VectorField{ctx, std::move(xi), std::move(phi)});
  }
  return out;
}

GaugeCheck compare_as_check(const JetVectorField& L, const JetVectorField& R,
                            const EqualityConfig& cfg) {
  FieldComparison cmp = compare_fields(L, R, cfg);
  GaugeCheck out;
  out.ok = cmp.equal;
  out.worst = cmp.worst;
  if (!cmp.equal) out.detail = "mismatch at " + cmp.worst_coeff;
  return out;
}

void merge_check(GaugeCheck& into, const GaugeCheck& part) {
  if (!part.ok) {
    into.ok = false;
    if (into.detail.empty()) into.detail = part.detail;
  }
  into.worst = std::max(into.worst, part.worst);
}

}  // namespace

GaugeScalar make_gauge_scalar(const JetContext& ctx, const Expr& beta,
                              const EqualityConfig& cfg) {
  check_on_base(ctx, beta, "gauge factor");
  if (min_abs_on_box(beta, cfg) < kZeroOnBox)
    throw InputError("gauge factor vanishes on the sampling box");
  return GaugeScalar{beta};
}

GaugeMatrix make_gauge_matrix(const JetContext& ctx, const MatrixExpr& M, GaugeRole role,
                              const EqualityConfig& cfg) {
  if (!M.is_square()) throw InputError("gauge matrix must be square");
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) check_on_base(ctx, M.at(i, j), "gauge matrix");
  if (min_abs_on_box(simplify(M.det()), cfg) < kZeroOnBox)
    throw InputError("gauge matrix singular on the sampling box");
  return GaugeMatrix{M, role};
}

Expr lambda_from_beta(const JetContext& ctx, const GaugeScalar& beta, GaugeDirection dir) {
  if (ctx.q() != 1) throw InputError("scalar gauge requires a single independent variable");
  JetContext wctx = derivative_context(ctx);
  Expr lam = total_derivative(wctx, beta.beta, 0) / beta.beta;
  if (dir == GaugeDirection::Inverse) lam = -lam;
  return simplify(lam);
}

std::vector<MatrixExpr> mu_from_A(const JetContext& ctx, const GaugeMatrix& A,
                                  GaugeDirection dir, const EqualityConfig& cfg) {
  if (A.M.rows() != ctx.p()) throw InputError("mu gauge matrix must act on the vector index");
  JetContext wctx = derivative_context(ctx);
  MatrixExpr Ainv = A.M.inverse();
  std::vector<MatrixExpr> out;
  out.reserve(ctx.q());
  for (int i = 0; i < ctx.q(); ++i) {
    MatrixExpr L = dir == GaugeDirection::Forward
                       ? Ainv * A.M.total_derivative(wctx, i)
                       : (A.M.total_derivative(wctx, i) * Ainv).scaled(Expr::number(-1));
    for (int a = 0; a < L.rows(); ++a)
      for (int b = 0; b < L.cols(); ++b) L.at(a, b) = simplify(L.at(a, b));
    out.push_back(std::move(L));
  }
  MaurerCartanReport mc = check_maurer_cartan(ctx, out, cfg);
  if (!mc.ok) throw InternalError("pure-gauge twist failed the compatibility self-check");
  return out;
}

MatrixExpr sigma_from_Gamma(const JetContext& ctx, const GaugeMatrix& Gamma,
                            GaugeDirection dir) {
  if (ctx.q() != 1) throw InputError("sigma gauge requires a single independent variable");
  JetContext wctx = derivative_context(ctx);
  MatrixExpr Ginv = Gamma.M.inverse();
  MatrixExpr S = dir == GaugeDirection::Forward
                     ? Ginv * Gamma.M.total_derivative(wctx, 0)
                     : (Gamma.M.total_derivative(wctx, 0) * Ginv).scaled(Expr::number(-1));
  for (int a = 0; a < S.rows(); ++a)
    for (int b = 0; b < S.cols(); ++b) S.at(a, b) = simplify(S.at(a, b));
  return S;
}

GaugeCheck verify_gauge_lambda(const VectorField& X, const GaugeScalar& beta, int n,
                               GaugeDirection dir, const EqualityConfig& cfg) {
  if (X.ctx.q() != 1) throw InputError("scalar gauge requires a single independent variable");
  if (!X.is_lie_point()) throw InputError("scalar gauge check requires a lie-point field");
  Expr lam = lambda_from_beta(X.ctx, beta, dir);
  VectorField BX = scale_field(X, beta.beta);
  if (dir == GaugeDirection::Forward) {
    JetVectorField L = prolong_lambda(X, lam, n, cfg).field.scaled(beta.beta);
    JetVectorField R = prolong(BX, n, cfg).field;
    return compare_as_check(L, R, cfg);
  }
  JetVectorField L = prolong(X, n, cfg).field.scaled(beta.beta);
  JetVectorField R = prolong_lambda(BX, lam, n, cfg).field;
  return compare_as_check(L, R, cfg);
}

GaugeCheck verify_gauge_mu(const VectorField& Qfield, const GaugeMatrix& A, int n,
                           GaugeDirection dir, const EqualityConfig& cfg) {
  if (!Qfield.is_vertical()) throw InputError("mu gauge check: the field must be vertical");
  if (A.role != GaugeRole::VectorIndex)
    throw InputError("mu gauge check needs a vector-index gauge matrix");
  std::vector<MatrixExpr> Lam = mu_from_A(Qfield.ctx, A, dir, cfg);
  VectorField AQ = vector_gauge_field(Qfield, A.M);
  if (dir == GaugeDirection::Forward) {
    JetVectorField L = gauge_apply_vector(prolong_mu(Qfield, Lam, n, true, cfg).field, A.M);
    JetVectorField R = prolong(AQ, n, cfg).field;
    return compare_as_check(L, R, cfg);
  }
  JetVectorField L = gauge_apply_vector(prolong(Qfield, n, cfg).field, A.M);
  JetVectorField R = prolong_mu(AQ, Lam, n, true, cfg).field;
  return compare_as_check(L, R, cfg);
}

namespace {

/* Pointwise span comparison of two prolonged families; both must have full
 * rank at each sample point, and their joint rank must not exceed it. */
GaugeCheck distributions_coincide(const std::vector<JetVectorField>& Y,
                                  const std::vector<JetVectorField>& Z,
                                  const EqualityConfig& cfg) {
  const int r = static_cast<int>(Y.size());
  const JetContext& ctx = Y[0].ctx;
  const int order = Y[0].order;
  std::vector<Expr> all;
  for (const auto& fam : {std::cref(Y), std::cref(Z)}) {
    for (const JetVectorField& F : fam.get()) {
      for (const Expr& e : F.xi) all.push_back(e);
      for (const auto& row : F.psi)
        for (const Expr& e : row) all.push_back(e);
    }
  }
  int dim = ctx.q();
  for (const MultiIndex& J : ctx.indices())
    if (J.order() <= order) dim += ctx.p();

  SampleRng rng(cfg.seed);
  GaugeCheck out;
  auto eval_at = [](const Expr& e, const Valuation& pt) {
    auto v = eval_numeric(e, pt);
    if (!v) throw SingularRegionError("expression singular on box");
    return *v;
  };
  for (int s = 0; s < 8; ++s) {
    Valuation pt = sample_point(all, rng, cfg);
    Eigen::MatrixXd MY(dim, r), MZ(dim, r);
    for (int c = 0; c < r; ++c) {
      int k = 0;
      for (int i = 0; i < ctx.q(); ++i) {
        MY(k, c) = eval_at(Y[c].xi[i], pt);
        MZ(k, c) = eval_at(Z[c].xi[i], pt);
        ++k;
      }
      for (int a = 0; a < ctx.p(); ++a) {
        for (const MultiIndex& J : ctx.indices()) {
          if (J.order() > order) continue;
          MY(k, c) = eval_at(Y[c].coeff(a, J), pt);
          MZ(k, c) = eval_at(Z[c].coeff(a, J), pt);
          ++k;
        }
      }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qy(MY), qz(MZ);
    qy.setThreshold(1e-8);
    qz.setThreshold(1e-8);
    if (static_cast<int>(qy.rank()) < r || static_cast<int>(qz.rank()) < r)
      throw InputError("distribution rank degenerate at sample");
    Eigen::MatrixXd joint(dim, 2 * r);
    joint << MY, MZ;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qj(joint);
    qj.setThreshold(1e-8);
    if (static_cast<int>(qj.rank()) > r) {
      out.ok = false;
      out.detail = "prolonged families span different distributions";
    }
  }
  return out;
}

}  // namespace

GaugeCheck verify_gauge_sigma(const std::vector<VectorField>& fields, const GaugeMatrix& Gamma,
                              int n, GaugeDirection dir, const EqualityConfig& cfg) {
  if (fields.empty()) throw InputError("sigma gauge check: empty field family");
  const JetContext& ctx = fields[0].ctx;
  if (ctx.q() != 1) throw InputError("sigma gauge requires a single independent variable");
  if (Gamma.role != GaugeRole::ModuleIndex)
    throw InputError("sigma gauge check needs a module-index gauge matrix");
  const int r = static_cast<int>(fields.size());
  if (Gamma.M.rows() != r)
    throw InputError("sigma gauge matrix size does not match the family");

  MatrixExpr sig = sigma_from_Gamma(ctx, Gamma, dir);
  std::vector<VectorField> GX = module_gauge_family(fields, Gamma.M);

  std::vector<JetVectorField> twisted, straight;
  if (dir == GaugeDirection::Forward) {
    for (const ProlongedField& P : prolong_sigma(fields, sig, n)) twisted.push_back(P.field);
    for (const VectorField& X : GX) straight.push_back(prolong(X, n, cfg).field);
  } else {
    for (const VectorField& X : fields) straight.push_back(prolong(X, n, cfg).field);
    for (const ProlongedField& P : prolong_sigma(GX, sig, n)) twisted.push_back(P.field);
  }

  GaugeCheck out;
  for (int al = 0; al < r; ++al) {
    JetVectorField L = dir == GaugeDirection::Forward ? module_combine(twisted, Gamma.M, al)
                                                      : module_combine(straight, Gamma.M, al);
    const JetVectorField& R = dir == GaugeDirection::Forward ? straight[al] : twisted[al];
    merge_check(out, compare_as_check(L, R, cfg));
  }
  merge_check(out, distributions_coincide(twisted, straight, cfg));
  return out;
}

GaugeCheck verify_gauge_sigma(const InvolutionSystem& system, const GaugeMatrix& Gamma, int n,
                              GaugeDirection dir, const EqualityConfig& cfg) {
  return verify_gauge_sigma(system.fields, Gamma, n, dir, cfg);
}

ChiGaugeCheck verify_gauge_chi(const std::vector<VectorField>& fields, const GaugeMatrix& A,
                               const GaugeMatrix& B, int n, const EqualityConfig& cfg) {
  if (fields.empty()) throw InputError("chi gauge check: empty field family");
  const JetContext& ctx = fields[0].ctx;
  if (ctx.q() != 1) throw InputError("chi gauge requires a single independent variable");
  for (const VectorField& X : fields)
    if (!X.is_vertical()) throw InputError("chi gauge check: fields must be vertical");
  if (A.role != GaugeRole::VectorIndex || B.role != GaugeRole::ModuleIndex)
    throw InputError("chi gauge check needs a vector-index A and a module-index B");
  const int r = static_cast<int>(fields.size());
  if (B.M.rows() != r) throw InputError("chi gauge matrix B size does not match the family");

  std::vector<MatrixExpr> LamA = mu_from_A(ctx, A, GaugeDirection::Inverse, cfg);
  MatrixExpr sigB = sigma_from_Gamma(ctx, B, GaugeDirection::Inverse);

  std::vector<JetVectorField> Z;
  Z.reserve(r);
  for (const VectorField& W : fields) Z.push_back(prolong(W, n, cfg).field);

  ChiGaugeCheck out;
  for (int al = 0; al < r; ++al) {
    JetVectorField L = gauge_apply_vector(Z[al], A.M);
    JetVectorField R = prolong_mu(vector_gauge_field(fields[al], A.M), LamA, n, true, cfg).field;
    merge_check(out.mu_edge, compare_as_check(L, R, cfg));
  }

  std::vector<VectorField> BW = module_gauge_family(fields, B.M);
  std::vector<ProlongedField> SP = prolong_sigma(BW, sigB, n);
  for (int al = 0; al < r; ++al) {
    JetVectorField L = module_combine(Z, B.M, al);
    merge_check(out.sigma_edge, compare_as_check(L, SP[al].field, cfg));
  }

  std::vector<VectorField> ABW;
  ABW.reserve(r);
  for (const VectorField& W : BW) ABW.push_back(vector_gauge_field(W, A.M));
  std::vector<ProlongedField> CP = prolong_chi(ABW, LamA[0], sigB, n);
  for (int al = 0; al < r; ++al) {
    JetVectorField L = gauge_apply_vector(module_combine(Z, B.M, al), A.M);
    merge_check(out.composite, compare_as_check(L, CP[al].field, cfg));
  }

  out.ok = out.mu_edge.ok && out.sigma_edge.ok && out.composite.ok;
  return out;
}

GaugeGrid beta_from_lambda_quadrature(const JetContext& ctx, const Expr& lambda, double x0,
                                      double x1, int points) {
  if (ctx.q() != 1) throw InputError("gauge quadrature requires a single independent variable");
  if (points < 2) throw InputError("gauge quadrature needs at least two grid points");
  std::uint32_t xid = ctx.x(0).symbol_id();
  for (std::uint32_t id : lambda.free_symbols()) {
    if (id != xid)
      throw InputError("nonlocal gauge factor: lambda must depend on the independent "
                       "variable only");
  }
  auto f = [&](double t) {
    Valuation pt;
    pt[xid] = t;
    auto v = eval_numeric(lambda, pt);
    return v ? *v : std::numeric_limits<double>::quiet_NaN();
  };
  GaugeGrid grid;
  grid.x.resize(points);
  grid.beta.resize(points);
  double acc = 0.0;
  grid.x[0] = x0;
  grid.beta[0] = 1.0;
  for (int k = 1; k < points; ++k) {
    double a = x0 + (x1 - x0) * (k - 1) / (points - 1);
    double b = x0 + (x1 - x0) * k / (points - 1);
    double piece = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 15, 1e-10);
    if (!std::isfinite(piece))
      throw SingularRegionError("gauge quadrature: lambda singular on the interval");
    acc += piece;
    grid.x[k] = b;
    grid.beta[k] = std::exp(acc);
  }
  return grid;
}

}  // namespace tsym
