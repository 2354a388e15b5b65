#include "tsym/vector_field.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>

#include "tsym/prolong.hpp"

namespace tsym {

bool VectorField::is_lie_point() const {
  for (const Expr& e : xi)
    if (ctx.jet_order(e) > 0) return false;
  for (const Expr& e : phi)
    if (ctx.jet_order(e) > 0) return false;
  return true;
}

bool VectorField::is_vertical() const {
  for (const Expr& e : xi)
    if (!e.is_zero()) return false;
  return true;
}

int VectorField::coefficient_order() const {
  int best = 0;
  for (const Expr& e : xi) best = std::max(best, ctx.jet_order(e));
  for (const Expr& e : phi) best = std::max(best, ctx.jet_order(e));
  return best;
}

VectorField make_vector_field(const JetContext& ctx, std::vector<Expr> xi,
                              std::vector<Expr> phi) {
  if (static_cast<int>(xi.size()) != ctx.q() || static_cast<int>(phi.size()) != ctx.p())
    throw InputError("vector field: expected q xi components and p phi components");
  for (const Expr& e : xi)
    if (ctx.jet_order(e) > ctx.n())
      throw InputError("vector field: coefficient order exceeds the context order");
  for (const Expr& e : phi)
    if (ctx.jet_order(e) > ctx.n())
      throw InputError("vector field: coefficient order exceeds the context order");
  return VectorField{ctx, std::move(xi), std::move(phi)};
}

const Expr& JetVectorField::coeff(int a, const MultiIndex& J) const {
  return psi.at(a).at(ctx.index_position(J));
}

Expr& JetVectorField::coeff(int a, const MultiIndex& J) {
  return psi.at(a).at(ctx.index_position(J));
}

Expr JetVectorField::apply(const Expr& f) const {
  if (ctx.jet_order(f) > order)
    throw TruncationError("truncation order exceeded: field of order " + std::to_string(order) +
                          " applied to higher-order function");
  std::vector<Expr> parts;
  for (int i = 0; i < ctx.q(); ++i) {
    if (!f.depends_on(ctx.x(i).symbol_id())) continue;
    parts.push_back(xi[i] * diff(f, ctx.x(i)));
  }
  for (std::uint32_t id : f.free_symbols()) {
    auto c = ctx.classify(id);
    if (!c || c->indep) continue;
    parts.push_back(psi[c->a][ctx.index_position(c->J)] * diff(f, id));
  }
  return Expr::sum(std::move(parts));
}

JetVectorField JetVectorField::scaled(const Expr& g) const {
  JetVectorField r = *this;
  for (Expr& e : r.xi) e = g * e;
  for (auto& row : r.psi)
    for (Expr& e : row) e = g * e;
  return r;
}

JetVectorField make_jet_field(const JetContext& ctx, int order) {
  if (order > ctx.n()) throw InputError("jet field order exceeds the context order");
  int ncoords = 0;
  for (const MultiIndex& J : ctx.indices())
    if (J.order() <= order) ++ncoords;
  return JetVectorField{
      ctx, order, std::vector<Expr>(ctx.q(), Expr::number(0)),
      std::vector<std::vector<Expr>>(ctx.p(), std::vector<Expr>(ncoords, Expr::number(0)))};
}

JetVectorField as_jet_field(const VectorField& X) {
  JetVectorField f = make_jet_field(X.ctx, 0);
  f.xi = X.xi;
  for (int a = 0; a < X.ctx.p(); ++a) f.psi[a][0] = X.phi[a];
  return f;
}

FieldComparison compare_fields(const JetVectorField& A, const JetVectorField& B,
                               const EqualityConfig& cfg) {
  if (!A.ctx.same_space(B.ctx) || A.order != B.order)
    throw InputError("field comparison: fields live on different jet spaces");
  FieldComparison out;
  auto check = [&](const Expr& a, const Expr& b, const std::string& label) {
    EqualityReport rep = equal_numeric(a, b, cfg);
    if (!rep.equal) out.equal = false;
    if (rep.worst_abs > out.worst) {
      out.worst = rep.worst_abs;
      out.worst_coeff = label;
    }
  };
  for (int i = 0; i < A.ctx.q(); ++i) check(A.xi[i], B.xi[i], "xi " + A.ctx.indep_name(i));
  for (int a = 0; a < A.ctx.p(); ++a) {
    for (const MultiIndex& J : A.ctx.indices()) {
      if (J.order() > A.order) continue;
      check(A.coeff(a, J), B.coeff(a, J), "psi " + A.ctx.coord_name(a, J));
    }
  }
  return out;
}

VectorField evolutionary_rep(const VectorField& X) {
  const JetContext& ctx = X.ctx;
  std::vector<Expr> Q(ctx.p());
  for (int a = 0; a < ctx.p(); ++a) {
    std::vector<Expr> parts = {X.phi[a]};
    for (int i = 0; i < ctx.q(); ++i)
      parts.push_back(-(ctx.u(a, MultiIndex::zero(ctx.q()).plus(i)) * X.xi[i]));
    Q[a] = Expr::sum(std::move(parts));
  }
  return VectorField{ctx, std::vector<Expr>(ctx.q(), Expr::number(0)), std::move(Q)};
}

VectorField reconstruct_liepoint(const JetContext& ctx, const std::vector<Expr>& Q,
                                 const EqualityConfig& cfg) {
  if (static_cast<int>(Q.size()) != ctx.p())
    throw InputError("reconstruct: one characteristic component per dependent variable");
  for (const Expr& e : Q)
    if (ctx.jet_order(e) > 1)
      throw InputError("not affine in u_i: characteristic depends on higher derivatives");

  // xi candidates from each dependent component; a Lie-point characteristic
  // names the same xi through every diagonal slot
  std::vector<std::vector<Expr>> cand(ctx.p(), std::vector<Expr>(ctx.q()));
  for (int a = 0; a < ctx.p(); ++a) {
    for (int i = 0; i < ctx.q(); ++i) {
      Expr ui = ctx.u(a, MultiIndex::zero(ctx.q()).plus(i));
      Expr c = simplify(-diff(Q[a], ui));
      if (ctx.jet_order(c) > 0)
        throw InputError("not affine in u_i: nonlinear dependence on first derivatives");
      cand[a][i] = c;
    }
  }
  for (int a = 1; a < ctx.p(); ++a) {
    for (int i = 0; i < ctx.q(); ++i) {
      if (!equal_numeric(cand[a][i], cand[0][i], cfg).equal)
        throw InputError("inconsistent reconstruction: dependent components disagree on xi");
    }
  }
  std::vector<Expr> xi = cand[0];
  std::vector<Expr> phi(ctx.p());
  for (int a = 0; a < ctx.p(); ++a) {
    std::vector<Expr> parts = {Q[a]};
    for (int i = 0; i < ctx.q(); ++i)
      parts.push_back(ctx.u(a, MultiIndex::zero(ctx.q()).plus(i)) * xi[i]);
    phi[a] = simplify(Expr::sum(std::move(parts)));
    if (ctx.jet_order(phi[a]) > 0)
      throw InputError("inconsistent reconstruction: residual derivative dependence in phi");
  }
  return VectorField{ctx, std::move(xi), std::move(phi)};
}

namespace {

/* Derivation action of a Lie-point field on a function of the base manifold. */
Expr apply_base(const VectorField& X, const Expr& f) {
  std::vector<Expr> parts;
  for (int i = 0; i < X.ctx.q(); ++i) parts.push_back(X.xi[i] * diff(f, X.ctx.x(i)));
  for (int a = 0; a < X.ctx.p(); ++a) parts.push_back(X.phi[a] * diff(f, X.ctx.u(a)));
  return Expr::sum(std::move(parts));
}

}  // namespace

VectorField commutator(const VectorField& X, const VectorField& Y) {
  if (!X.ctx.same_space(Y.ctx)) throw InputError("commutator: fields share no context");
  const JetContext& ctx = X.ctx;
  int mx = X.coefficient_order(), my = Y.coefficient_order();
  std::vector<Expr> xi(ctx.q()), phi(ctx.p());
  if (mx == 0 && my == 0) {
    for (int i = 0; i < ctx.q(); ++i)
      xi[i] = apply_base(X, Y.xi[i]) - apply_base(Y, X.xi[i]);
    for (int a = 0; a < ctx.p(); ++a)
      phi[a] = apply_base(X, Y.phi[a]) - apply_base(Y, X.phi[a]);
  } else {
    // generalized coefficients are acted on through the standard prolongation
    JetVectorField PX = prolong(X, my).field;
    JetVectorField PY = prolong(Y, mx).field;
    for (int i = 0; i < ctx.q(); ++i) xi[i] = PX.apply(Y.xi[i]) - PY.apply(X.xi[i]);
    for (int a = 0; a < ctx.p(); ++a) phi[a] = PX.apply(Y.phi[a]) - PY.apply(X.phi[a]);
  }
  for (const Expr& e : xi)
    if (ctx.jet_order(e) > ctx.n())
      throw TruncationError("truncation order exceeded in commutator coefficients");
  for (const Expr& e : phi)
    if (ctx.jet_order(e) > ctx.n())
      throw TruncationError("truncation order exceeded in commutator coefficients");
  return VectorField{ctx, std::move(xi), std::move(phi)};
}

JetVectorField bracket(const JetVectorField& A, const JetVectorField& B) {
  if (!A.ctx.same_space(B.ctx) || A.order != B.order)
    throw InputError("bracket: fields live on different jet spaces");
  JetVectorField R = make_jet_field(A.ctx, A.order);
  for (int i = 0; i < A.ctx.q(); ++i) R.xi[i] = A.apply(B.xi[i]) - B.apply(A.xi[i]);
  for (int a = 0; a < A.ctx.p(); ++a) {
    for (const MultiIndex& J : R.ctx.indices()) {
      if (J.order() > R.order) continue;
      R.coeff(a, J) = A.apply(B.coeff(a, J)) - B.apply(A.coeff(a, J));
    }
  }
  return R;
}

BracketCheck verify_prolong_commutator(const VectorField& X, const VectorField& Y, int n,
                                       const EqualityConfig& cfg) {
  ProlongedField PX = prolong(X, n);
  ProlongedField PY = prolong(Y, n);
  JetVectorField lhs = bracket(PX.field, PY.field);
  VectorField Z = commutator(X, Y);
  ProlongedField PZ = prolong(Z, n);
  FieldComparison cmp = compare_fields(lhs, PZ.field, cfg);
  BracketCheck out;
  out.ok = cmp.equal;
  out.worst = cmp.worst;
  if (!cmp.equal) out.detail = "mismatch at " + cmp.worst_coeff;
  return out;
}

/* ---- involution analysis ---- */

namespace {

std::vector<Expr> monomials_up_to(const std::vector<Expr>& vars, int degree) {
  std::vector<Expr> out;
  std::vector<int> expo(vars.size(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
    if (pos == vars.size()) {
      std::vector<Expr> fs;
      for (std::size_t v = 0; v < vars.size(); ++v)
        if (expo[v] > 0) fs.push_back(Expr::pow(vars[v], Expr::number(expo[v])));
      out.push_back(fs.empty() ? Expr::number(1) : Expr::product(std::move(fs)));
      return;
    }
    for (int k = 0; k <= left; ++k) {
      expo[pos] = k;
      rec(pos + 1, left - k);
    }
    expo[pos] = 0;
  };
  rec(0, degree);
  return out;
}

}  // namespace

InvolutionSystem check_involution(const std::vector<VectorField>& fields,
                                  const EqualityConfig& cfg, int ansatz_degree) {
  if (fields.empty()) throw InputError("involution check: empty field set");
  const JetContext& ctx = fields[0].ctx;
  const int r = static_cast<int>(fields.size());
  for (const VectorField& X : fields) {
    if (!X.ctx.same_space(ctx)) throw InputError("involution check: fields share no context");
    if (!X.is_lie_point())
      throw InputError("involution check: fields must have coefficients on the base manifold");
  }
  const int dim = ctx.q() + ctx.p();

  // brackets and the component expressions everything is sampled from
  std::vector<std::vector<VectorField>> br(r);
  std::vector<Expr> all_exprs;
  for (int al = 0; al < r; ++al) {
    br[al].reserve(r);
    for (int be = 0; be < r; ++be) br[al].push_back(commutator(fields[al], fields[be]));
  }
  for (const VectorField& X : fields) {
    for (const Expr& e : X.xi) all_exprs.push_back(e);
    for (const Expr& e : X.phi) all_exprs.push_back(e);
  }
  for (int al = 0; al < r; ++al)
    for (int be = al + 1; be < r; ++be) {
      for (const Expr& e : br[al][be].xi) all_exprs.push_back(e);
      for (const Expr& e : br[al][be].phi) all_exprs.push_back(e);
    }

  // ansatz variables: base coordinates plus free parameters of the coefficients
  std::vector<Expr> vars;
  for (int i = 0; i < ctx.q(); ++i) vars.push_back(ctx.x(i));
  for (int a = 0; a < ctx.p(); ++a) vars.push_back(ctx.u(a));
  for (std::uint32_t id : collect_symbols(all_exprs)) {
    if (!ctx.classify(id)) vars.push_back(Expr::symbol(symbol_name(id)));
  }
  std::vector<Expr> mono = monomials_up_to(vars, ansatz_degree);
  const int M = static_cast<int>(mono.size());
  for (const Expr& m : mono) all_exprs.push_back(m);

  const int nsamples = std::max(2 * r * M / std::max(1, dim) + 8, 2 * M + 8);
  SampleRng rng(cfg.seed);

  auto eval_at = [](const Expr& e, const Valuation& pt) {
    auto v = eval_numeric(e, pt);
    if (!v) throw SingularRegionError("expression singular on box");
    return *v;
  };

  std::vector<Valuation> pts;
  pts.reserve(nsamples);
  for (int s = 0; s < nsamples; ++s) pts.push_back(sample_point(all_exprs, rng, cfg));

  // generic rank of the field set, and pointwise solvability of each bracket
  int max_rank = 0;
  for (int s = 0; s < std::min(nsamples, 8); ++s) {
    Eigen::MatrixXd G(dim, r);
    for (int c = 0; c < r; ++c) {
      for (int i = 0; i < ctx.q(); ++i) G(i, c) = eval_at(fields[c].xi[i], pts[s]);
      for (int a = 0; a < ctx.p(); ++a) G(ctx.q() + a, c) = eval_at(fields[c].phi[a], pts[s]);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G);
    qr.setThreshold(1e-8);
    max_rank = std::max(max_rank, static_cast<int>(qr.rank()));
  }
  if (max_rank < r) throw InputError("fields dependent: rank drop across sample points");

  for (int al = 0; al < r; ++al) {
    for (int be = al + 1; be < r; ++be) {
      for (int s = 0; s < std::min(nsamples, 8); ++s) {
        Eigen::MatrixXd G(dim, r);
        Eigen::VectorXd bb(dim);
        for (int c = 0; c < r; ++c) {
          for (int i = 0; i < ctx.q(); ++i) G(i, c) = eval_at(fields[c].xi[i], pts[s]);
          for (int a = 0; a < ctx.p(); ++a) G(ctx.q() + a, c) = eval_at(fields[c].phi[a], pts[s]);
        }
        for (int i = 0; i < ctx.q(); ++i) bb(i) = eval_at(br[al][be].xi[i], pts[s]);
        for (int a = 0; a < ctx.p(); ++a) bb(ctx.q() + a) = eval_at(br[al][be].phi[a], pts[s]);
        Eigen::VectorXd c = G.colPivHouseholderQr().solve(bb);
        double resid = (G * c - bb).norm();
        if (resid > 1e-6 * (1.0 + bb.norm()))
          throw InputError("not in involution: bracket leaves the span of the fields");
      }
    }
  }

  // global polynomial fit of the structure functions, all gamma at once
  InvolutionSystem sys;
  sys.fields = fields;
  sys.f.assign(r, std::vector<std::vector<Expr>>(r, std::vector<Expr>(r, Expr::number(0))));

  for (int al = 0; al < r; ++al) {
    for (int be = al + 1; be < r; ++be) {
      Eigen::MatrixXd A(nsamples * dim, r * M);
      Eigen::VectorXd b(nsamples * dim);
      for (int s = 0; s < nsamples; ++s) {
        std::vector<double> mv(M);
        for (int m = 0; m < M; ++m) mv[m] = eval_at(mono[m], pts[s]);
        std::vector<double> comp(dim * r);
        for (int c = 0; c < r; ++c) {
          for (int i = 0; i < ctx.q(); ++i) comp[i * r + c] = eval_at(fields[c].xi[i], pts[s]);
          for (int a = 0; a < ctx.p(); ++a)
            comp[(ctx.q() + a) * r + c] = eval_at(fields[c].phi[a], pts[s]);
        }
        for (int k = 0; k < dim; ++k) {
          for (int c = 0; c < r; ++c)
            for (int m = 0; m < M; ++m) A(s * dim + k, c * M + m) = comp[k * r + c] * mv[m];
          double bv = k < ctx.q() ? eval_at(br[al][be].xi[k], pts[s])
                                  : eval_at(br[al][be].phi[k - ctx.q()], pts[s]);
          b(s * dim + k) = bv;
        }
      }
      Eigen::VectorXd cvec = A.colPivHouseholderQr().solve(b);
      // structure functions singular on the box (or outside the ansatz space)
      // leave a residual the polynomial fit cannot remove
      if ((A * cvec - b).norm() > 1e-6 * (1.0 + b.norm()))
        throw InputError("not in involution: no consistent structure functions at degree " +
                         std::to_string(ansatz_degree));

      bool confirmed = true;
      std::vector<Expr> fg(r, Expr::number(0));
      for (int g = 0; g < r; ++g) {
        std::vector<Expr> terms;
        for (int m = 0; m < M; ++m) {
          double v = cvec(g * M + m);
          if (std::fabs(v) < 1e-9) continue;
          auto ratio = snap_rational(v);
          if (!ratio) {
            confirmed = false;
            terms.push_back(Expr::number(0));
            continue;
          }
          terms.push_back(Expr::number(*ratio) * mono[m]);
        }
        fg[g] = Expr::sum(std::move(terms));
      }
      if (confirmed) {
        // symbolic confirmation: bracket minus the combination vanishes
        for (int i = 0; i < ctx.q() && confirmed; ++i) {
          std::vector<Expr> parts = {br[al][be].xi[i]};
          for (int g = 0; g < r; ++g) parts.push_back(-(fg[g] * fields[g].xi[i]));
          if (!numerically_zero(Expr::sum(std::move(parts)), cfg)) confirmed = false;
        }
        for (int a = 0; a < ctx.p() && confirmed; ++a) {
          std::vector<Expr> parts = {br[al][be].phi[a]};
          for (int g = 0; g < r; ++g) parts.push_back(-(fg[g] * fields[g].phi[a]));
          if (!numerically_zero(Expr::sum(std::move(parts)), cfg)) confirmed = false;
        }
      }
      if (!confirmed) sys.numeric_only = true;
      for (int g = 0; g < r; ++g) {
        sys.f[al][be][g] = fg[g];
        sys.f[be][al][g] = -fg[g];
      }
    }
  }
  return sys;
}

InvolutionSystem involution_from_structure(const std::vector<VectorField>& fields,
                                           const std::vector<std::vector<std::vector<Expr>>>& f,
                                           const EqualityConfig& cfg) {
  const int r = static_cast<int>(fields.size());
  if (static_cast<int>(f.size()) != r)
    throw InputError("involution system: structure function table has wrong shape");
  InvolutionSystem sys;
  sys.fields = fields;
  sys.f = f;
  const JetContext& ctx = fields[0].ctx;
  for (int al = 0; al < r; ++al) {
    for (int be = al + 1; be < r; ++be) {
      VectorField B = commutator(fields[al], fields[be]);
      for (int i = 0; i < ctx.q(); ++i) {
        std::vector<Expr> parts = {B.xi[i]};
        for (int g = 0; g < r; ++g) parts.push_back(-(f[al][be][g] * fields[g].xi[i]));
        if (!numerically_zero(Expr::sum(std::move(parts)), cfg))
          throw InputError("structure functions do not close the bracket");
      }
      for (int a = 0; a < ctx.p(); ++a) {
        std::vector<Expr> parts = {B.phi[a]};
        for (int g = 0; g < r; ++g) parts.push_back(-(f[al][be][g] * fields[g].phi[a]));
        if (!numerically_zero(Expr::sum(std::move(parts)), cfg))
          throw InputError("structure functions do not close the bracket");
      }
    }
  }
  return sys;
}

}  // namespace tsym
