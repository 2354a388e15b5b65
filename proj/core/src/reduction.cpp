#include "tsym/reduction.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "tsym/errors.hpp"

namespace tsym {
namespace {

/* Jet order of an expression whose coordinates may exceed the context's
 * truncation order: raise the probe context until the answer is below the
 * cap, so no coordinate is misread as a plain parameter. */
int true_jet_order(const JetContext& ctx, const Expr& e) {
  int cap = std::max(ctx.n(), 1);
  for (;;) {
    int m = ctx.with_order(cap).jet_order(e);
    if (m < cap) return m;
    cap += 4;
    if (cap > 200) throw InternalError("jet order probe exceeded 200");
  }
}

bool above_order_coordinate(const JetContext& ctx, const Expr& e, int n) {
  JetContext tall = ctx.with_order(std::max(ctx.n(), true_jet_order(ctx, e)));
  for (std::uint32_t sy : e.free_symbols()) {
    auto c = tall.classify(sy);
    if (c && !c->indep && c->J.order() > n) return true;
  }
  return false;
}

/* Replaces every coordinate covered by a lead with the total-derivative
 * consequence of the solved system, computed on demand and memoized.
 * Consequences are stored fully restricted, so one substitution pass cannot
 * reintroduce covered coordinates; a cyclic consequence chain means the
 * restriction cannot be closed. */
struct Restrictor {
  const SolvedSystem& S;
  JetContext wctx;
  std::unordered_map<std::uint32_t, Expr> memo;
  std::unordered_set<std::uint32_t> busy;

  Restrictor(const SolvedSystem& s, JetContext w) : S(s), wctx(std::move(w)) {}

  Expr restricted(const Expr& e) {
    Expr cur = e;
    for (int round = 0; round < 64; ++round) {
      Subst sub;
      for (std::uint32_t sy : cur.free_symbols()) {
        auto c = wctx.classify(sy);
        if (!c || c->indep) continue;
        if (c->J.covers(S.leads[c->a])) sub.emplace(sy, consequence(c->a, c->J, sy));
      }
      if (sub.empty()) return cur;
      cur = substitute(cur, sub);
    }
    throw InputError("system not normal: restriction incomplete");
  }

  Expr consequence(int a, const MultiIndex& J, std::uint32_t sy) {
    if (auto it = memo.find(sy); it != memo.end()) return it->second;
    if (!busy.insert(sy).second)
      throw InputError("system not normal: restriction incomplete");
    Expr out;
    if (J == S.leads[a]) {
      out = restricted(S.rhs[a]);
    } else {
      int dir = -1;
      for (int i = 0; i < J.size(); ++i)
        if (J[i] > S.leads[a][i]) dir = i;
      MultiIndex parent = J.minus(dir);
      Expr par = consequence(a, parent, wctx.u(a, parent).symbol_id());
      out = restricted(total_derivative(wctx, par, dir));
    }
    out = simplify(out);
    busy.erase(sy);
    memo.emplace(sy, out);
    return out;
  }
};

SymmetryVerdict residual_check(const SolvedSystem& S, const std::vector<JetVectorField>& Y,
                               bool strong, const EqualityConfig& cfg) {
  if (Y.empty()) throw InputError("symmetry check needs at least one field");
  const int n = S.ctx.n();
  SymmetryVerdict v;
  v.ok = true;
  v.strong = strong;
  for (const JetVectorField& F : Y) {
    if (!F.ctx.same_space(S.ctx))
      throw InputError("field and system live on different jet spaces");
    if (F.order != n)
      throw InputError("prolongation order must match the equation order");
    std::vector<Expr> row;
    for (int a = 0; a < S.ctx.p(); ++a) {
      Expr delta = S.ctx.u(a, S.leads[a]) - S.rhs[a];
      Expr resid = F.apply(delta);
      Expr red;
      if (strong) {
        red = simplify(resid);
      } else {
        int m = std::max(true_jet_order(F.ctx, resid), n);
        Restrictor r(S, F.ctx.with_order(m));
        red = simplify(r.restricted(resid));
      }
      EqualityReport rep = equal_numeric(red, Expr::number(0), cfg);
      if (!rep.equal) {
        if (!strong && above_order_coordinate(F.ctx, red, n))
          throw InputError("system not normal: restriction incomplete");
        v.ok = false;
      }
      v.worst = std::max(v.worst, rep.worst_abs);
      row.push_back(std::move(red));
    }
    v.residuals.push_back(std::move(row));
  }
  return v;
}

std::vector<JetVectorField> bare(const std::vector<ProlongedField>& Y) {
  std::vector<JetVectorField> out;
  out.reserve(Y.size());
  for (const ProlongedField& f : Y) out.push_back(f.field);
  return out;
}

bool identity_multiple(const MatrixExpr& M, const EqualityConfig& cfg) {
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) {
      if (i == j ? !equal_numeric(M.at(i, i), M.at(0, 0), cfg).equal
                 : !numerically_zero(M.at(i, j), cfg))
        return false;
    }
  return true;
}

/* Parameter symbols of a set of expressions: free symbols that classify
 * neither as independent variables nor as jet coordinates. */
std::vector<std::uint32_t> parameter_symbols(const JetContext& ctx,
                                             const std::vector<Expr>& exprs) {
  int top = 0;
  for (const Expr& e : exprs) top = std::max(top, true_jet_order(ctx, e));
  JetContext tall = ctx.with_order(std::max(ctx.n(), top));
  std::vector<std::uint32_t> out;
  for (std::uint32_t sy : collect_symbols(exprs))
    if (!tall.classify(sy)) out.push_back(sy);
  return out;
}

/* Monomials over `vars` of total degree lo..hi, ordered by degree and then
 * lexicographically in the variable order. */
void monomials_rec(const std::vector<Expr>& vars, std::size_t from, int degree, const Expr& acc,
                   std::vector<Expr>& out) {
  if (degree == 0) {
    out.push_back(acc);
    return;
  }
  if (from >= vars.size()) return;
  for (int k = degree; k >= 0; --k) {
    Expr next = acc;
    for (int t = 0; t < k; ++t) next = next * vars[from];
    monomials_rec(vars, from + 1, degree - k, next, out);
  }
}

std::vector<Expr> monomials(const std::vector<Expr>& vars, int lo, int hi) {
  std::vector<Expr> out;
  for (int d = lo; d <= hi; ++d) monomials_rec(vars, 0, d, Expr::number(1), out);
  return out;
}

/* Reduced row echelon form with tolerance pivoting; near-zero rows drop. */
Eigen::MatrixXd reduced_echelon(Eigen::MatrixXd M, double tol) {
  const int rows = static_cast<int>(M.rows());
  const int cols = static_cast<int>(M.cols());
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int pivot = -1;
    double best = tol;
    for (int i = r; i < rows; ++i)
      if (std::abs(M(i, c)) > best) {
        best = std::abs(M(i, c));
        pivot = i;
      }
    if (pivot < 0) continue;
    M.row(pivot).swap(M.row(r));
    M.row(r) /= M(r, c);
    for (int i = 0; i < rows; ++i)
      if (i != r && M(i, c) != 0.0) M.row(i) -= M(i, c) * M.row(r);
    ++r;
  }
  return M.topRows(r);
}

std::optional<Expr> snap_combination(const Eigen::VectorXd& coef, const std::vector<Expr>& basis) {
  std::vector<Expr> terms;
  for (int j = 0; j < coef.size(); ++j) {
    double c = coef(j);
    if (std::abs(c) < 1e-9) continue;
    auto r = snap_rational(c, 1000000, 1e-6);
    if (!r) return std::nullopt;
    terms.push_back(Expr::number(*r) * basis[static_cast<std::size_t>(j)]);
  }
  if (terms.empty()) return std::nullopt;
  if (terms.size() == 1) return simplify(terms[0]);
  return simplify(Expr::sum(std::move(terms)));
}

/* Name picking for derived contexts: a candidate is usable when it is not a
 * coordinate of the source context and its symbol (if interned) does not
 * occur in the expressions being carried over. */
bool name_is_free(const JetContext& src, const std::vector<std::uint32_t>& used,
                  const std::string& name) {
  auto id = lookup_symbol(name);
  if (!id) return true;
  if (std::find(used.begin(), used.end(), *id) != used.end()) return false;
  return !src.classify(*id).has_value();
}

std::string pick_name(const JetContext& src, const std::vector<std::uint32_t>& used,
                      const std::vector<std::string>& candidates) {
  for (const std::string& c : candidates)
    if (name_is_free(src, used, c)) return c;
  throw InternalError("no free coordinate name among candidates");
}

double eval_or_throw(const Expr& e, const Valuation& pt) {
  auto v = eval_numeric(e, pt);
  if (!v) throw SingularRegionError("sample point became singular during fitting");
  return *v;
}

}  // namespace

SymmetryVerdict check_symmetry(const SolvedSystem& system, const std::vector<JetVectorField>& Y,
                               const EqualityConfig& cfg) {
  return residual_check(system, Y, false, cfg);
}

SymmetryVerdict check_symmetry(const SolvedSystem& system, const std::vector<ProlongedField>& Y,
                               const EqualityConfig& cfg) {
  return residual_check(system, bare(Y), false, cfg);
}

SymmetryVerdict check_symmetry(const OdeSystem& system, const std::vector<ProlongedField>& Y,
                               const EqualityConfig& cfg) {
  return residual_check(system.solved(), bare(Y), false, cfg);
}

SymmetryVerdict check_symmetry(const OdeSystem& system, const ProlongedField& Y,
                               const EqualityConfig& cfg) {
  return residual_check(system.solved(), {Y.field}, false, cfg);
}

SymmetryVerdict check_symmetry(const OdeSystem& system, const JetVectorField& Y,
                               const EqualityConfig& cfg) {
  return residual_check(system.solved(), {Y}, false, cfg);
}

SymmetryVerdict check_strong_symmetry(const SolvedSystem& system,
                                      const std::vector<JetVectorField>& Y,
                                      const EqualityConfig& cfg) {
  return residual_check(system, Y, true, cfg);
}

SymmetryVerdict check_strong_symmetry(const SolvedSystem& system,
                                      const std::vector<ProlongedField>& Y,
                                      const EqualityConfig& cfg) {
  return residual_check(system, bare(Y), true, cfg);
}

SymmetryVerdict check_strong_symmetry(const OdeSystem& system,
                                      const std::vector<ProlongedField>& Y,
                                      const EqualityConfig& cfg) {
  return residual_check(system.solved(), bare(Y), true, cfg);
}

SymmetryVerdict check_strong_symmetry(const OdeSystem& system, const ProlongedField& Y,
                                      const EqualityConfig& cfg) {
  return residual_check(system.solved(), {Y.field}, true, cfg);
}

bool ibdp_eligible(const TwistSpec& twist, const EqualityConfig& cfg) {
  if (std::get_if<TwistStandard>(&twist) || std::get_if<TwistLambda>(&twist) ||
      std::get_if<TwistSigma>(&twist))
    return true;
  if (const auto* mu = std::get_if<TwistMu>(&twist)) {
    for (const MatrixExpr& L : mu->Lambda)
      if (!identity_multiple(L, cfg)) return false;
    return true;
  }
  if (const auto* chi = std::get_if<TwistChi>(&twist)) return identity_multiple(chi->Lambda, cfg);
  return false;
}

Expr ibdp_next(const std::vector<ProlongedField>& Y, const Expr& eta, const Expr& zeta,
               const EqualityConfig& cfg, int direction) {
  if (Y.empty()) throw InputError("IBDP extension needs at least one field");
  const JetContext& ctx = Y[0].field.ctx;
  if (direction < 0 || direction >= ctx.q())
    throw InputError("derivation direction out of range");
  for (std::size_t k = 1; k < Y.size(); ++k) {
    if (!Y[k].field.ctx.same_space(ctx))
      throw InputError("IBDP fields live on different jet spaces");
    if (!same_twist(Y[k].twist, Y[0].twist))
      throw InputError("IBDP fields carry different twists");
  }
  if (!ibdp_eligible(Y[0].twist, cfg)) throw EligibilityError("twist not IBDP-eligible");

  const int m = std::max({true_jet_order(ctx, eta), true_jet_order(ctx, zeta), 1});
  std::vector<VectorField> sources;
  sources.reserve(Y.size());
  for (const ProlongedField& f : Y) sources.push_back(f.source);
  std::vector<ProlongedField> tall = prolong_twisted(sources, Y[0].twist, m + 1, false, cfg);

  for (const ProlongedField& f : tall)
    if (!numerically_zero(f.field.apply(eta), cfg) || !numerically_zero(f.field.apply(zeta), cfg))
      throw InputError("inputs not invariant");

  const JetContext& wctx = tall[0].field.ctx;
  Expr deta = total_derivative(wctx, eta, direction);
  if (numerically_zero(deta, cfg)) throw InputError("degenerate invariant pair");
  Expr next = simplify(total_derivative(wctx, zeta, direction) / deta);

  for (const ProlongedField& f : tall)
    if (!numerically_zero(f.field.apply(next), cfg))
      throw InternalError("IBDP extension produced a non-invariant");
  return next;
}

InvariantChain make_invariant_chain(std::vector<ProlongedField> fields, Expr eta,
                                    std::vector<Expr> first, const EqualityConfig& cfg) {
  if (fields.empty()) throw InputError("invariant chain needs at least one field");
  if (first.empty()) throw InputError("invariant chain needs at least one first-stage invariant");
  for (const ProlongedField& f : fields) {
    if (!numerically_zero(f.field.apply(eta), cfg)) throw InputError("inputs not invariant");
    for (const Expr& z : first)
      if (!numerically_zero(f.field.apply(z), cfg)) throw InputError("inputs not invariant");
  }
  InvariantChain c{std::move(fields), std::move(eta), {}};
  c.levels.push_back(std::move(first));
  return c;
}

void extend_chain(InvariantChain& chain, const EqualityConfig& cfg, int direction) {
  const JetContext& ctx = chain.fields[0].field.ctx;
  std::vector<Expr> next;
  next.reserve(chain.levels.back().size());
  for (const Expr& z : chain.levels.back()) {
    Expr e = ibdp_next(chain.fields, chain.eta, z, cfg, direction);
    if (true_jet_order(ctx, e) <= true_jet_order(ctx, z))
      throw InputError("chain orders must strictly increase");
    next.push_back(std::move(e));
  }
  chain.levels.push_back(std::move(next));
}

InvariantSearch find_first_invariants(const std::vector<ProlongedField>& Y, int ansatz_degree,
                                      const EqualityConfig& cfg) {
  if (Y.empty()) throw InputError("invariant search needs at least one field");
  if (ansatz_degree < 1) throw InputError("ansatz degree must be positive");
  const JetContext& ctx = Y[0].field.ctx;
  for (std::size_t k = 1; k < Y.size(); ++k)
    if (!Y[k].field.ctx.same_space(ctx))
      throw InputError("invariant search fields live on different jet spaces");

  std::vector<Expr> coeffs;
  for (const ProlongedField& f : Y) {
    coeffs.insert(coeffs.end(), f.field.xi.begin(), f.field.xi.end());
    for (const auto& row : f.field.psi) coeffs.insert(coeffs.end(), row.begin(), row.end());
  }

  std::vector<Expr> vars;
  for (int i = 0; i < ctx.q(); ++i) vars.push_back(ctx.x(i));
  for (int a = 0; a < ctx.p(); ++a)
    for (const MultiIndex& J : ctx.indices())
      if (J.order() <= 1) vars.push_back(ctx.u(a, J));
  // parameters join the ansatz so invariants like u_[1] - c*u are reachable
  for (std::uint32_t sy : parameter_symbols(ctx, coeffs))
    vars.push_back(Expr::symbol(symbol_name(sy)));

  std::vector<Expr> mono = monomials(vars, 1, ansatz_degree);
  const std::size_t nm = mono.size();
  const std::size_t nf = Y.size();

  std::vector<Expr> actions;
  actions.reserve(nf * nm);
  for (const ProlongedField& f : Y)
    for (const Expr& m : mono) actions.push_back(simplify(f.field.apply(m)));

  const std::size_t ns = (2 * nm + 8 + nf - 1) / nf;
  Eigen::MatrixXd A(static_cast<Eigen::Index>(nf * ns), static_cast<Eigen::Index>(nm));
  SampleRng rng(cfg.seed);
  for (std::size_t s = 0; s < ns; ++s) {
    Valuation pt = sample_point(actions, rng, cfg);
    for (std::size_t k = 0; k < nf; ++k)
      for (std::size_t j = 0; j < nm; ++j)
        A(static_cast<Eigen::Index>(s * nf + k), static_cast<Eigen::Index>(j)) =
            eval_or_throw(actions[k * nm + j], pt);
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  lu.setThreshold(1e-8 * std::max(1.0, A.cwiseAbs().maxCoeff()));
  InvariantSearch out;
  if (lu.dimensionOfKernel() == 0) {
    out.note = "no invariants in ansatz";
    return out;
  }
  Eigen::MatrixXd kernel = lu.kernel();
  Eigen::MatrixXd rows = reduced_echelon(kernel.transpose(), 1e-8);

  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    auto cand = snap_combination(rows.row(r).transpose(), mono);
    if (!cand) continue;
    bool confirmed = true;
    for (const ProlongedField& f : Y)
      if (!numerically_zero(f.field.apply(*cand), cfg)) {
        confirmed = false;
        break;
      }
    if (confirmed) out.invariants.push_back(*cand);
  }
  if (out.invariants.empty()) out.note = "no invariants in ansatz";
  return out;
}

AdaptedReduction reduce_adapted(const OdeSystem& ode, int v_index, const EqualityConfig& cfg) {
  const JetContext& ctx = ode.ctx;
  const int n = ctx.n();
  const int p = ctx.p();
  if (v_index < 0 || v_index >= p) throw InputError("dependent variable index out of range");
  if (n < 2) throw InputError("equation order must be at least 2");

  std::uint32_t vsym = ctx.u(v_index).symbol_id();
  for (const Expr& rhs : ode.rhs) {
    Expr s = simplify(rhs);
    if (s.depends_on(vsym) && !numerically_zero(diff(s, vsym), cfg))
      throw InputError("equation depends on v: coordinates not adapted");
  }

  std::vector<std::uint32_t> used = collect_symbols(ode.rhs);
  std::string wname = pick_name(ctx, used, {"w", "w0", "wred"});

  std::vector<std::string> dep_names;
  for (int a = 0; a < p; ++a) dep_names.push_back(a == v_index ? wname : ctx.dep_name(a));

  AdaptedReduction out{
      JetContext(1, p, p == 1 ? n - 1 : n, {ctx.indep_name(0)}, dep_names), {}, {}, "", {}};

  Subst sub;
  for (int k = 0; k + 1 <= n; ++k)
    sub.emplace(ctx.u(v_index, MultiIndex({k + 1})).symbol_id(),
                out.ctx.u(v_index, MultiIndex({k})));
  // the order-0 coordinate of v cannot occur; other dependents map to themselves
  for (int a = 0; a < p; ++a) {
    if (a == v_index) continue;
    for (int k = 0; k <= n; ++k) {
      if (k == n && p == 1) break;
      sub.emplace(ctx.u(a, MultiIndex({k})).symbol_id(), out.ctx.u(a, MultiIndex({k})));
    }
  }
  sub.emplace(ctx.x(0).symbol_id(), out.ctx.x(0));

  for (int a = 0; a < p; ++a) {
    out.orders.push_back(a == v_index ? n - 1 : n);
    out.rhs.push_back(simplify(substitute(simplify(ode.rhs[a]), sub)));
  }
  out.reconstruction =
      ctx.dep_name(v_index) + " = C + int " + wname + " d" + ctx.indep_name(0);
  if (p == 1) out.uniform = make_ode_system(out.ctx, out.rhs);
  return out;
}

InvariantReduction reduce_by_invariants(const OdeSystem& ode, const InvariantChain& chain,
                                        int ansatz_degree, const EqualityConfig& cfg) {
  const JetContext& ctx = ode.ctx;
  const int n = ctx.n();
  const int p = ctx.p();
  if (n < 2) throw InputError("equation order must be at least 2");
  if (ansatz_degree < 1) throw InputError("ansatz degree must be positive");

  std::vector<VectorField> sources;
  for (const ProlongedField& f : chain.fields) sources.push_back(f.source);
  std::vector<ProlongedField> at_n = prolong_twisted(sources, chain.fields[0].twist, n, false, cfg);
  if (!check_symmetry(ode, at_n, cfg).ok) throw InputError("symmetry check failed");

  InvariantChain ch = chain;
  while (static_cast<int>(ch.levels.size()) < n) extend_chain(ch, cfg);

  const std::size_t m = ch.levels[0].size();

  std::vector<Expr> carried = ode.rhs;
  carried.push_back(ch.eta);
  for (const auto& lvl : ch.levels) carried.insert(carried.end(), lvl.begin(), lvl.end());
  std::vector<std::uint32_t> used = collect_symbols(carried);

  std::string yname = pick_name(ctx, used, {"y", "y0", "yred"});
  std::vector<std::string> znames;
  for (const std::string& base : {std::string("z"), std::string("zz"), std::string("zred")}) {
    znames.clear();
    bool all_free = true;
    for (std::size_t c = 0; c < m; ++c) {
      std::string cand = m == 1 ? base : base + std::to_string(c + 1);
      if (!name_is_free(ctx, used, cand)) {
        all_free = false;
        break;
      }
      znames.push_back(cand);
    }
    if (all_free) break;
  }
  if (znames.size() != m) throw InternalError("no free coordinate name among candidates");

  InvariantReduction out{JetContext(1, static_cast<int>(m), n - 1, {yname}, znames),
                         {}, {}, {}, false, {}, {}};

  out.dictionary.emplace_back(yname, ch.eta);
  Subst back;
  back.emplace(out.ctx.x(0).symbol_id(), ch.eta);
  for (int k = 0; k < n; ++k)
    for (std::size_t c = 0; c < m; ++c) {
      Expr zc = out.ctx.u(static_cast<int>(c), MultiIndex({k}));
      out.dictionary.emplace_back(out.ctx.coord_name(static_cast<int>(c), MultiIndex({k})),
                                  ch.levels[k][c]);
      back.emplace(zc.symbol_id(), ch.levels[k][c]);
    }

  // sampled Jacobian certificate: gradients of the invariants with and
  // without the equation, over all jet coordinates
  std::vector<Expr> jet_vars;
  jet_vars.push_back(ctx.x(0));
  for (int a = 0; a < p; ++a)
    for (const MultiIndex& J : ctx.indices()) jet_vars.push_back(ctx.u(a, J));

  std::vector<Expr> inv_list;
  inv_list.push_back(ch.eta);
  for (const auto& lvl : ch.levels)
    for (const Expr& z : lvl) inv_list.push_back(z);

  std::vector<std::vector<Expr>> inv_grad;
  for (const Expr& f : inv_list) {
    std::vector<Expr> g;
    for (const Expr& v : jet_vars) g.push_back(diff(f, v.symbol_id()));
    inv_grad.push_back(std::move(g));
  }

  std::vector<Expr> fit_vars;
  fit_vars.push_back(out.ctx.x(0));
  for (int k = 0; k < n; ++k)
    for (std::size_t c = 0; c < m; ++c)
      fit_vars.push_back(out.ctx.u(static_cast<int>(c), MultiIndex({k})));
  std::vector<Expr> ode_exprs = ode.rhs;
  ode_exprs.insert(ode_exprs.end(), inv_list.begin(), inv_list.end());
  for (std::uint32_t sy : parameter_symbols(ctx, ode_exprs))
    fit_vars.push_back(Expr::symbol(symbol_name(sy)));

  std::vector<Expr> mono = monomials(fit_vars, 0, ansatz_degree);
  std::vector<Expr> mono_sub;
  mono_sub.reserve(mono.size());
  for (const Expr& mn : mono) mono_sub.push_back(simplify(substitute(mn, back)));

  SampleRng rng(cfg.seed);
  const std::size_t nm = mono.size();
  const std::size_t ns = 2 * nm + 8;

  for (int a = 0; a < p; ++a) {
    Expr delta = ctx.u(a, MultiIndex({n})) - ode.rhs[a];
    std::vector<Expr> grad_delta;
    for (const Expr& v : jet_vars) grad_delta.push_back(diff(delta, v.symbol_id()));

    std::vector<Expr> all = mono_sub;
    all.push_back(delta);
    for (const auto& g : inv_grad) all.insert(all.end(), g.begin(), g.end());
    all.insert(all.end(), grad_delta.begin(), grad_delta.end());

    // (i) rank test at a handful of points
    bool dependent = true;
    for (int s = 0; s < 8; ++s) {
      Valuation pt = sample_point(all, rng, cfg);
      Eigen::MatrixXd Minv(static_cast<Eigen::Index>(inv_grad.size()),
                           static_cast<Eigen::Index>(jet_vars.size()));
      Eigen::MatrixXd Mfull(Minv.rows() + 1, Minv.cols());
      for (std::size_t r = 0; r < inv_grad.size(); ++r)
        for (std::size_t cvar = 0; cvar < jet_vars.size(); ++cvar)
          Minv(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cvar)) =
              eval_or_throw(inv_grad[r][cvar], pt);
      Mfull.topRows(Minv.rows()) = Minv;
      for (std::size_t cvar = 0; cvar < jet_vars.size(); ++cvar)
        Mfull(Minv.rows(), static_cast<Eigen::Index>(cvar)) = eval_or_throw(grad_delta[cvar], pt);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> q1(Minv.transpose()), q2(Mfull.transpose());
      q1.setThreshold(1e-8);
      q2.setThreshold(1e-8);
      if (q1.rank() != q2.rank()) {
        dependent = false;
        break;
      }
    }
    out.dependent.push_back(dependent);

    // (ii) bounded-degree fit of the equation through the invariants
    Eigen::MatrixXd A(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(nm));
    Eigen::VectorXd b(static_cast<Eigen::Index>(ns));
    for (std::size_t s = 0; s < ns; ++s) {
      Valuation pt = sample_point(all, rng, cfg);
      for (std::size_t j = 0; j < nm; ++j)
        A(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) =
            eval_or_throw(mono_sub[j], pt);
      b(static_cast<Eigen::Index>(s)) = eval_or_throw(delta, pt);
    }
    Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
    std::string note;
    Expr relation = Expr::number(0);
    if ((A * coef - b).norm() > 1e-6 * (1.0 + b.norm())) {
      note = "not expressible in chain at ansatz degree";
    } else {
      auto G = snap_combination(coef, mono);
      if (G && equal_numeric(simplify(substitute(*G, back)), delta, cfg).equal)
        relation = *G;
      else
        note = "not expressible in chain at ansatz degree";
    }
    out.relations.push_back(std::move(relation));
    out.notes.push_back(std::move(note));
  }

  out.ok = std::all_of(out.notes.begin(), out.notes.end(),
                       [](const std::string& s) { return s.empty(); });

  // solved form when each relation is linear in its own top derivative with
  // a coefficient free of reduced coordinates
  if (out.ok && m == static_cast<std::size_t>(p)) {
    std::vector<Expr> solved_rhs;
    bool solvable = true;
    for (int a = 0; a < p && solvable; ++a) {
      Expr top = out.ctx.u(a, MultiIndex({n - 1}));
      Expr c = simplify(diff(out.relations[a], top.symbol_id()));
      bool c_constant = true;
      for (std::uint32_t sy : c.free_symbols())
        if (out.ctx.classify(sy)) c_constant = false;
      if (!c_constant || numerically_zero(c, cfg)) {
        solvable = false;
        break;
      }
      Expr rest = simplify(out.relations[a] - c * top);
      for (int b2 = 0; b2 < p; ++b2)
        if (rest.depends_on(out.ctx.u(b2, MultiIndex({n - 1})).symbol_id())) solvable = false;
      if (!solvable) break;
      solved_rhs.push_back(simplify(Expr::number(0) - rest / c));
    }
    if (solvable) {
      bool orders_fit = true;
      for (const Expr& r : solved_rhs)
        if (true_jet_order(out.ctx, r) > n - 2) orders_fit = false;
      if (orders_fit) out.solved = make_ode_system(out.ctx, solved_rhs);
    }
  }
  return out;
}

InvariantSolutionReport invariant_solution_check(const SolvedSystem& system,
                                                 const std::vector<VectorField>& fields,
                                                 const std::vector<Expr>& sections,
                                                 const EqualityConfig& cfg) {
  const JetContext& ctx = system.ctx;
  if (static_cast<int>(sections.size()) != ctx.p())
    throw InputError("one section expression per dependent variable required");
  Subst sub = section_substitution(ctx, sections);

  InvariantSolutionReport rep;
  rep.invariant = true;
  rep.solution = true;
  for (const VectorField& X : fields) {
    if (!X.ctx.same_space(ctx)) throw InputError("field and system live on different jet spaces");
    VectorField Q = evolutionary_rep(X);
    for (int a = 0; a < ctx.p(); ++a) {
      Expr g = simplify(substitute(Q.phi[a], sub));
      EqualityReport e = equal_numeric(g, Expr::number(0), cfg);
      if (!e.equal) rep.invariant = false;
      rep.worst_invariance = std::max(rep.worst_invariance, e.worst_abs);
    }
  }
  for (int a = 0; a < ctx.p(); ++a) {
    Expr delta = ctx.u(a, system.leads[a]) - system.rhs[a];
    Expr g = simplify(substitute(delta, sub));
    EqualityReport e = equal_numeric(g, Expr::number(0), cfg);
    if (!e.equal) rep.solution = false;
    rep.worst_solution = std::max(rep.worst_solution, e.worst_abs);
  }
  rep.ok = rep.invariant && rep.solution;
  return rep;
}

InvariantSolutionReport invariant_solution_check(const OdeSystem& system,
                                                 const std::vector<VectorField>& fields,
                                                 const std::vector<Expr>& sections,
                                                 const EqualityConfig& cfg) {
  return invariant_solution_check(system.solved(), fields, sections, cfg);
}

}  // namespace tsym
