#include "tsym/prolong.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <variant>

#include "tsym/errors.hpp"

namespace tsym {

namespace {

/* Context large enough that every total derivative taken while filling an
 * order-n table stays representable. */
JetContext working_context(const JetContext& ctx, int n, int coeff_order) {
  int need = n + std::max(1, coeff_order);
  return need > ctx.n() ? ctx.with_order(need) : ctx;
}

/* One recursion step: from the coefficients at J (one per dependent
 * variable), produce the coefficients at J+e_i. */
using StepFn =
    std::function<std::vector<Expr>(const std::vector<Expr>& psiJ, const MultiIndex& J, int i)>;

/* Fills the coefficient table of a single field, walking each multi-index
 * from its canonical parent (drop the largest direction, so the recursion
 * path reads in ascending direction order).  With several independent
 * variables the other parents are recomputed and compared numerically. */
JetVectorField fill_table(const JetContext& wctx, const VectorField& X, int n,
                          const StepFn& step, const EqualityConfig& cfg, bool& consistent,
                          double& residual) {
  JetVectorField out = make_jet_field(wctx, n);
  out.xi = X.xi;
  const int p = wctx.p();
  for (int a = 0; a < p; ++a) out.psi[a][0] = X.phi[a];

  auto row_at = [&](const MultiIndex& J) {
    std::vector<Expr> row(p);
    for (int a = 0; a < p; ++a) row[a] = out.coeff(a, J);
    return row;
  };

  for (const MultiIndex& J : wctx.indices()) {
    if (J.order() == 0 || J.order() > n) continue;
    int istar = -1;
    for (int i = 0; i < wctx.q(); ++i)
      if (J[i] > 0) istar = i;
    MultiIndex P = J.minus(istar);
    std::vector<Expr> v = step(row_at(P), P, istar);
    for (int a = 0; a < p; ++a) out.coeff(a, J) = simplify(v[a]);

    for (int i = 0; i < istar; ++i) {
      if (J[i] == 0) continue;
      MultiIndex P2 = J.minus(i);
      std::vector<Expr> alt = step(row_at(P2), P2, i);
      for (int a = 0; a < p; ++a) {
        EqualityReport rep = equal_numeric(alt[a], out.coeff(a, J), cfg);
        if (!rep.equal) consistent = false;
        residual = std::max(residual, rep.worst_abs);
      }
    }
  }
  return out;
}

void check_family(const std::vector<VectorField>& fields, const char* what) {
  if (fields.empty()) throw InputError(std::string(what) + ": empty field family");
  for (const VectorField& X : fields)
    if (!X.ctx.same_space(fields[0].ctx))
      throw InputError(std::string(what) + ": fields share no context");
}

int family_coefficient_order(const std::vector<VectorField>& fields) {
  int m = 0;
  for (const VectorField& X : fields) m = std::max(m, X.coefficient_order());
  return m;
}

/* Scalar part of a matrix that must be a multiple of the identity; throws
 * when it is not. */
Expr scalar_of_identity_multiple(const MatrixExpr& L, const EqualityConfig& cfg,
                                 const char* what) {
  for (int i = 0; i < L.rows(); ++i) {
    for (int j = 0; j < L.cols(); ++j) {
      if (i == j ? !equal_numeric(L.at(i, j), L.at(0, 0), cfg).equal
                 : !numerically_zero(L.at(i, j), cfg))
        throw EligibilityError(std::string("identity not applicable: ") + what +
                               " is not a scalar multiple of the identity");
    }
  }
  return L.at(0, 0);
}

}  // namespace

MaurerCartanReport check_maurer_cartan(const JetContext& ctx,
                                       const std::vector<MatrixExpr>& Lambda,
                                       const EqualityConfig& cfg) {
  validate_twist(ctx, TwistMu{Lambda}, 1);
  MaurerCartanReport out;
  if (ctx.q() < 2) return out;
  JetContext wctx = ctx.n() >= 2 ? ctx : ctx.with_order(2);
  for (int i = 0; i < ctx.q(); ++i) {
    for (int j = i + 1; j < ctx.q(); ++j) {
      MatrixExpr R = Lambda[j].total_derivative(wctx, i) - Lambda[i].total_derivative(wctx, j) +
                     commutator(Lambda[i], Lambda[j]);
      bool zero = true;
      for (int a = 0; a < R.rows(); ++a) {
        for (int b = 0; b < R.cols(); ++b) {
          R.at(a, b) = simplify(R.at(a, b));
          EqualityReport rep = equal_numeric(R.at(a, b), Expr::number(0), cfg);
          if (!rep.equal) zero = false;
          out.worst = std::max(out.worst, rep.worst_abs);
        }
      }
      if (!zero) {
        out.ok = false;
        out.failing.push_back(out.pairs.size());
      }
      out.pairs.emplace_back(i, j);
      out.residuals.push_back(std::move(R));
    }
  }
  return out;
}

ProlongedField prolong(const VectorField& X, int n, const EqualityConfig& cfg) {
  JetContext wctx = working_context(X.ctx, n, X.coefficient_order());
  const int q = wctx.q(), p = wctx.p();

  std::vector<std::vector<Expr>> dxi(q, std::vector<Expr>(q));
  for (int i = 0; i < q; ++i)
    for (int k = 0; k < q; ++k) dxi[i][k] = simplify(total_derivative(wctx, X.xi[k], i));

  StepFn step = [&](const std::vector<Expr>& psiJ, const MultiIndex& J, int i) {
    std::vector<Expr> next(p);
    for (int a = 0; a < p; ++a) {
      std::vector<Expr> parts = {total_derivative(wctx, psiJ[a], i)};
      for (int k = 0; k < q; ++k) parts.push_back(-(wctx.u(a, J.plus(k)) * dxi[i][k]));
      next[a] = Expr::sum(std::move(parts));
    }
    return next;
  };

  bool consistent = true;
  double residual = 0.0;
  JetVectorField tbl = fill_table(wctx, X, n, step, cfg, consistent, residual);
  return ProlongedField{std::move(tbl), TwistStandard{}, X, consistent, residual};
}

ProlongedField prolong_lambda(const VectorField& X, const Expr& lambda, int n,
                              const EqualityConfig& cfg) {
  if (X.ctx.q() != 1)
    throw InputError("lambda prolongation requires a single independent variable");
  validate_twist(X.ctx, TwistLambda{lambda}, 1);
  JetContext wctx = working_context(X.ctx, n, std::max(X.coefficient_order(), 1));
  const int p = wctx.p();

  Expr txi = simplify(total_derivative(wctx, X.xi[0], 0) + lambda * X.xi[0]);

  StepFn step = [&](const std::vector<Expr>& psiJ, const MultiIndex& J, int i) {
    std::vector<Expr> next(p);
    for (int a = 0; a < p; ++a)
      next[a] = total_derivative(wctx, psiJ[a], i) + lambda * psiJ[a] -
                wctx.u(a, J.plus(i)) * txi;
    return next;
  };

  bool consistent = true;
  double residual = 0.0;
  JetVectorField tbl = fill_table(wctx, X, n, step, cfg, consistent, residual);
  return ProlongedField{std::move(tbl), TwistLambda{lambda}, X, consistent, residual};
}

ProlongedField prolong_mu(const VectorField& X, const std::vector<MatrixExpr>& Lambda, int n,
                          bool skip_compat, const EqualityConfig& cfg) {
  validate_twist(X.ctx, TwistMu{Lambda}, 1);
  if (!skip_compat) {
    MaurerCartanReport mc = check_maurer_cartan(X.ctx, Lambda, cfg);
    if (!mc.ok) throw InputError("mu prolongation: Maurer-Cartan compatibility fails");
  }
  JetContext wctx = working_context(X.ctx, n, std::max(X.coefficient_order(), 1));
  const int q = wctx.q(), p = wctx.p();

  // twisted derivative of xi: (delta^a_b D_i + Lambda_i) xi^k per direction
  std::vector<std::vector<Expr>> dxi(q, std::vector<Expr>(q));
  for (int i = 0; i < q; ++i)
    for (int k = 0; k < q; ++k) dxi[i][k] = simplify(total_derivative(wctx, X.xi[k], i));

  StepFn step = [&](const std::vector<Expr>& psiJ, const MultiIndex& J, int i) {
    std::vector<Expr> next(p);
    for (int a = 0; a < p; ++a) {
      std::vector<Expr> parts = {total_derivative(wctx, psiJ[a], i)};
      for (int b = 0; b < p; ++b) parts.push_back(Lambda[i].at(a, b) * psiJ[b]);
      for (int k = 0; k < q; ++k) {
        parts.push_back(-(wctx.u(a, J.plus(k)) * dxi[i][k]));
        for (int b = 0; b < p; ++b)
          parts.push_back(-(Lambda[i].at(a, b) * wctx.u(b, J.plus(k)) * X.xi[k]));
      }
      next[a] = Expr::sum(std::move(parts));
    }
    return next;
  };

  bool consistent = true;
  double residual = 0.0;
  JetVectorField tbl = fill_table(wctx, X, n, step, cfg, consistent, residual);
  return ProlongedField{std::move(tbl), TwistMu{Lambda}, X, consistent, residual};
}

std::vector<ProlongedField> prolong_sigma(const std::vector<VectorField>& fields,
                                          const MatrixExpr& sigma, int n) {
  check_family(fields, "sigma prolongation");
  const JetContext& ctx = fields[0].ctx;
  if (ctx.q() != 1)
    throw InputError("sigma prolongation requires a single independent variable");
  const int r = static_cast<int>(fields.size());
  validate_twist(ctx, TwistSigma{sigma}, r);

  JetContext wctx = working_context(ctx, n, std::max(family_coefficient_order(fields), 1));
  const int p = wctx.p();

  std::vector<ProlongedField> out;
  out.reserve(r);
  for (int al = 0; al < r; ++al) {
    out.push_back(ProlongedField{make_jet_field(wctx, n), TwistSigma{sigma}, fields[al],
                                 true, 0.0});
    out[al].field.xi = fields[al].xi;
    for (int a = 0; a < p; ++a) out[al].field.psi[a][0] = fields[al].phi[a];
  }

  std::vector<Expr> dxi(r);
  for (int al = 0; al < r; ++al) dxi[al] = simplify(total_derivative(wctx, fields[al].xi[0], 0));

  MultiIndex J = MultiIndex::zero(1);
  for (int k = 0; k < n; ++k) {
    MultiIndex Jn = J.plus(0);
    for (int al = 0; al < r; ++al) {
      for (int a = 0; a < p; ++a) {
        std::vector<Expr> parts = {total_derivative(wctx, out[al].field.coeff(a, J), 0),
                                   -(wctx.u(a, Jn) * dxi[al])};
        for (int be = 0; be < r; ++be)
          parts.push_back(sigma.at(al, be) *
                          (out[be].field.coeff(a, J) - wctx.u(a, Jn) * fields[be].xi[0]));
        out[al].field.coeff(a, Jn) = simplify(Expr::sum(std::move(parts)));
      }
    }
    J = Jn;
  }
  return out;
}

std::vector<ProlongedField> prolong_sigma(const InvolutionSystem& system,
                                          const MatrixExpr& sigma, int n) {
  return prolong_sigma(system.fields, sigma, n);
}

std::vector<ProlongedField> prolong_chi(const std::vector<VectorField>& fields,
                                        const MatrixExpr& Lambda, const MatrixExpr& sigma,
                                        int n) {
  check_family(fields, "chi prolongation");
  const JetContext& ctx = fields[0].ctx;
  if (ctx.q() != 1) throw InputError("chi prolongation requires a single independent variable");
  for (const VectorField& X : fields)
    if (!X.is_vertical()) throw InputError("chi prolongation: fields must be vertical");
  const int r = static_cast<int>(fields.size());
  validate_twist(ctx, TwistChi{Lambda, sigma}, r);

  JetContext wctx = working_context(ctx, n, std::max(family_coefficient_order(fields), 1));
  const int p = wctx.p();

  std::vector<ProlongedField> out;
  out.reserve(r);
  for (int al = 0; al < r; ++al) {
    out.push_back(ProlongedField{make_jet_field(wctx, n), TwistChi{Lambda, sigma}, fields[al],
                                 true, 0.0});
    for (int a = 0; a < p; ++a) out[al].field.psi[a][0] = fields[al].phi[a];
  }

  MultiIndex J = MultiIndex::zero(1);
  for (int k = 0; k < n; ++k) {
    MultiIndex Jn = J.plus(0);
    for (int al = 0; al < r; ++al) {
      for (int a = 0; a < p; ++a) {
        std::vector<Expr> parts = {total_derivative(wctx, out[al].field.coeff(a, J), 0)};
        for (int b = 0; b < p; ++b) parts.push_back(Lambda.at(a, b) * out[al].field.coeff(b, J));
        for (int be = 0; be < r; ++be) parts.push_back(sigma.at(al, be) * out[be].field.coeff(a, J));
        out[al].field.coeff(a, Jn) = simplify(Expr::sum(std::move(parts)));
      }
    }
    J = Jn;
  }
  return out;
}

std::vector<ProlongedField> prolong_twisted(const std::vector<VectorField>& fields,
                                            const TwistSpec& twist, int n, bool skip_compat,
                                            const EqualityConfig& cfg) {
  check_family(fields, "prolongation");
  std::vector<ProlongedField> out;
  if (const auto* s = std::get_if<TwistSigma>(&twist)) return prolong_sigma(fields, s->sigma, n);
  if (const auto* c = std::get_if<TwistChi>(&twist))
    return prolong_chi(fields, c->Lambda, c->sigma, n);
  out.reserve(fields.size());
  for (const VectorField& X : fields) {
    if (std::holds_alternative<TwistStandard>(twist)) {
      out.push_back(prolong(X, n, cfg));
    } else if (const auto* l = std::get_if<TwistLambda>(&twist)) {
      out.push_back(prolong_lambda(X, l->lambda, n, cfg));
    } else {
      out.push_back(prolong_mu(X, std::get<TwistMu>(twist).Lambda, n, skip_compat, cfg));
    }
  }
  return out;
}

MuDifference mu_difference(const VectorField& Qfield, const std::vector<MatrixExpr>& Lambda,
                           int n, const EqualityConfig& cfg) {
  if (!Qfield.is_vertical()) throw InputError("mu difference: the field must be vertical");
  validate_twist(Qfield.ctx, TwistMu{Lambda}, 1);
  JetContext wctx = working_context(Qfield.ctx, n, std::max(Qfield.coefficient_order(), 1));
  const int q = wctx.q(), p = wctx.p();

  // total derivatives D_J Q^b alongside the difference table itself
  JetVectorField dq = make_jet_field(wctx, n);
  JetVectorField F = make_jet_field(wctx, n);
  for (int a = 0; a < p; ++a) dq.psi[a][0] = Qfield.phi[a];

  for (const MultiIndex& J : wctx.indices()) {
    if (J.order() == 0 || J.order() > n) continue;
    int istar = -1;
    for (int i = 0; i < q; ++i)
      if (J[i] > 0) istar = i;
    MultiIndex P = J.minus(istar);
    for (int a = 0; a < p; ++a) {
      dq.coeff(a, J) = simplify(total_derivative(wctx, dq.coeff(a, P), istar));
      std::vector<Expr> parts = {total_derivative(wctx, F.coeff(a, P), istar)};
      for (int b = 0; b < p; ++b) {
        parts.push_back(Lambda[istar].at(a, b) * F.coeff(b, P));
        parts.push_back(Lambda[istar].at(a, b) * dq.coeff(b, P));
      }
      F.coeff(a, J) = simplify(Expr::sum(std::move(parts)));
    }
  }

  MuDifference out{std::move(F), true, 0.0};
  JetVectorField Psi = prolong_mu(Qfield, Lambda, n, true, cfg).field;
  JetVectorField Phi = prolong(Qfield, n, cfg).field;
  for (int a = 0; a < p; ++a) {
    for (const MultiIndex& J : wctx.indices()) {
      if (J.order() > n) continue;
      EqualityReport rep =
          equal_numeric(Psi.coeff(a, J), Phi.coeff(a, J) + out.F.coeff(a, J), cfg);
      if (!rep.equal) out.verified = false;
      out.worst = std::max(out.worst, rep.worst_abs);
    }
  }
  return out;
}

namespace {

/* Deterministic basket of polynomial test functions in the coordinates of
 * order <= top; every coordinate of the top order shows up in at least one
 * function when the basket is large enough. */
std::vector<Expr> test_function_basket(const JetContext& ctx, int top, int count,
                                       std::uint64_t seed) {
  std::vector<Expr> vars;
  std::vector<Expr> topvars;
  for (int i = 0; i < ctx.q(); ++i) vars.push_back(ctx.x(i));
  for (int a = 0; a < ctx.p(); ++a) {
    for (const MultiIndex& J : ctx.indices()) {
      if (J.order() > top) continue;
      vars.push_back(ctx.u(a, J));
      if (J.order() == top) topvars.push_back(ctx.u(a, J));
    }
  }
  SampleRng rng(seed);
  auto pick = [&](const std::vector<Expr>& from) {
    return from[static_cast<std::size_t>(rng.raw() % from.size())];
  };
  auto coeffn = [&]() {
    long long c = static_cast<long long>(rng.raw() % 3) + 1;
    return Expr::number(rng.raw() % 2 == 0 ? c : -c);
  };
  std::vector<Expr> out;
  out.reserve(count);
  for (int t = 0; t < count; ++t) {
    std::vector<Expr> terms;
    terms.push_back(coeffn() * topvars[t % topvars.size()]);
    terms.push_back(coeffn() * pick(vars) * pick(vars));
    terms.push_back(coeffn() * pick(vars));
    out.push_back(simplify(Expr::sum(std::move(terms))));
  }
  return out;
}

}  // namespace

std::vector<IdentityCheck> commutator_identity_report(
    const std::vector<ProlongedField>& prolonged, const EqualityConfig& cfg,
    int test_functions) {
  if (prolonged.empty()) throw InputError("identity report: empty field list");
  const TwistSpec& twist = prolonged[0].twist;
  const int r = static_cast<int>(prolonged.size());
  const int n = prolonged[0].field.order;
  for (const ProlongedField& P : prolonged) {
    if (!same_twist(P.twist, twist))
      throw InputError("identity report: fields carry different twists");
    if (!P.field.ctx.same_space(prolonged[0].field.ctx) || P.field.order != n)
      throw InputError("identity report: fields live on different jet spaces");
  }
  if (n < 1) throw InputError("identity report: prolongation order must be at least 1");

  const JetContext base = prolonged[0].field.ctx;
  JetContext wctx = base.with_order(base.n() + 1);
  const int q = base.q();
  std::vector<Expr> basket = test_function_basket(base, n - 1, test_functions, cfg.seed);

  // scalar twist factor per direction, when one applies
  bool family_sigma = std::holds_alternative<TwistSigma>(twist);
  bool family_chi = std::holds_alternative<TwistChi>(twist);
  std::vector<Expr> lam(q, Expr::number(0));
  std::string name;
  if (std::holds_alternative<TwistStandard>(twist)) {
    name = "[Y,D_i] = -(D_i xi^k) D_k";
  } else if (const auto* l = std::get_if<TwistLambda>(&twist)) {
    lam[0] = l->lambda;
    name = "[Y,D_x] = lambda Y - (lambda xi + D_x xi) D_x";
  } else if (const auto* m = std::get_if<TwistMu>(&twist)) {
    for (int i = 0; i < q; ++i)
      lam[i] = scalar_of_identity_multiple(m->Lambda[i], cfg, "mu twist");
    name = "[Y,D_i] = lambda_i Y - (lambda_i xi^k + D_i xi^k) D_k";
  } else if (family_sigma) {
    name = "[Y_a,D_x] = sigma_a^b Y_b - (D_x xi_a + sigma_a^b xi_b) D_x";
  } else {
    name = "[Q_a,D_x] = (lambda I + sigma)_a^b Q_b";
  }

  MatrixExpr rho;
  if (family_sigma) {
    rho = std::get<TwistSigma>(twist).sigma;
  } else if (family_chi) {
    const auto& c = std::get<TwistChi>(twist);
    Expr clam = scalar_of_identity_multiple(c.Lambda, cfg, "chi twist");
    rho = c.sigma + MatrixExpr::identity(c.sigma.rows()).scaled(clam);
  }
  if ((family_sigma || family_chi) && rho.rows() != r)
    throw InputError("identity report: family size does not match the twist payload");

  std::vector<IdentityCheck> out;
  out.reserve(r);
  for (int al = 0; al < r; ++al) {
    IdentityCheck chk;
    chk.field = al;
    chk.identity = name;
    const JetVectorField& Y = prolonged[al].field;
    const VectorField& src = prolonged[al].source;
    for (const Expr& f : basket) {
      for (int i = 0; i < (family_sigma || family_chi ? 1 : q); ++i) {
        Expr lhs = Y.apply(total_derivative(wctx, f, i)) -
                   total_derivative(wctx, Y.apply(f), i);
        std::vector<Expr> parts;
        if (family_sigma) {
          std::vector<Expr> drift = {simplify(total_derivative(wctx, src.xi[0], 0))};
          for (int be = 0; be < r; ++be) {
            parts.push_back(rho.at(al, be) * prolonged[be].field.apply(f));
            drift.push_back(rho.at(al, be) * prolonged[be].source.xi[0]);
          }
          parts.push_back(-(Expr::sum(std::move(drift)) * total_derivative(wctx, f, 0)));
        } else if (family_chi) {
          for (int be = 0; be < r; ++be)
            parts.push_back(rho.at(al, be) * prolonged[be].field.apply(f));
        } else {
          parts.push_back(lam[i] * Y.apply(f));
          for (int k = 0; k < q; ++k)
            parts.push_back(-((lam[i] * src.xi[k] + total_derivative(wctx, src.xi[k], i)) *
                              total_derivative(wctx, f, k)));
        }
        EqualityReport rep = equal_numeric(lhs, Expr::sum(std::move(parts)), cfg);
        if (!rep.equal) chk.ok = false;
        chk.worst = std::max(chk.worst, rep.worst_abs);
      }
    }
    out.push_back(std::move(chk));
  }
  return out;
}

SigmaInvolutionReport sigma_involution_condition(const InvolutionSystem& system,
                                                 const MatrixExpr& sigma, int n,
                                                 const EqualityConfig& cfg) {
  const int r = static_cast<int>(system.fields.size());
  if (r == 0) throw InputError("involution condition: empty field family");
  std::vector<ProlongedField> Y = prolong_sigma(system.fields, sigma, std::max(n, 1));
  const JetContext wctx = Y[0].field.ctx;
  const int p = wctx.p();

  SigmaInvolutionReport out;
  for (int al = 0; al < r; ++al) {
    for (int be = al + 1; be < r; ++be) {
      std::vector<Expr> bracket(r);
      for (int g = 0; g < r; ++g) {
        std::vector<Expr> parts = {Y[al].field.apply(sigma.at(be, g)),
                                   -Y[be].field.apply(sigma.at(al, g)),
                                   total_derivative(wctx, system.f[al][be][g], 0)};
        for (int et = 0; et < r; ++et) {
          parts.push_back(sigma.at(al, et) * system.f[et][be][g]);
          parts.push_back(-(sigma.at(be, et) * system.f[et][al][g]));
          parts.push_back(-(system.f[al][be][et] * sigma.at(et, g)));
        }
        bracket[g] = simplify(Expr::sum(std::move(parts)));
        EqualityReport rep = equal_numeric(bracket[g], Expr::number(0), cfg);
        if (!rep.equal) out.sufficient_ok = false;
        out.sufficient_worst = std::max(out.sufficient_worst, rep.worst_abs);
      }
      for (int a = 0; a < p; ++a) {
        std::vector<Expr> parts;
        for (int g = 0; g < r; ++g) parts.push_back(bracket[g] * system.fields[g].phi[a]);
        EqualityReport rep = equal_numeric(Expr::sum(std::move(parts)), Expr::number(0), cfg);
        if (!rep.equal) out.contracted_ok = false;
        out.contracted_worst = std::max(out.contracted_worst, rep.worst_abs);
      }
    }
  }
  return out;
}

Expr lambda_rescaled(const VectorField& X, const Expr& lambda, const Expr& f,
                     const EqualityConfig& cfg) {
  const JetContext& ctx = X.ctx;
  if (ctx.q() != 1) throw InputError("lambda rescaling requires a single independent variable");
  if (!ctx.on_base_manifold(f))
    throw InputError("rescaling function must live on the base manifold");
  SampleRng rng(cfg.seed);
  for (int s = 0; s < cfg.samples; ++s) {
    Valuation pt = sample_point({f}, rng, cfg);
    auto v = eval_numeric(f, pt);
    if (v && std::abs(*v) < 1e-9)
      throw InputError("rescaling function vanishes on the sampling box");
  }
  return simplify(lambda - as_jet_field(X).apply(f) / f);
}

}  // namespace tsym
