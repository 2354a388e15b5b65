#include "tsym/twist.hpp"

#include "tsym/errors.hpp"

namespace tsym {

const char* twist_name(const TwistSpec& t) {
  switch (t.index()) {
    case 0: return "standard";
    case 1: return "lambda";
    case 2: return "mu";
    case 3: return "sigma";
    case 4: return "chi";
  }
  return "?";
}

namespace {

void check_entry_order(const JetContext& ctx, const Expr& e, const char* what) {
  if (ctx.jet_order(e) > 1)
    throw InputError(std::string(what) + " may depend on jet coordinates of order at most 1");
}

void check_matrix(const JetContext& ctx, const MatrixExpr& m, int dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim)
    throw InputError(std::string(what) + ": expected a " + std::to_string(dim) + "x" +
                     std::to_string(dim) + " matrix");
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) check_entry_order(ctx, m.at(i, j), what);
}

}  // namespace

void validate_twist(const JetContext& ctx, const TwistSpec& t, int family_size) {
  if (std::holds_alternative<TwistStandard>(t)) return;
  if (const auto* l = std::get_if<TwistLambda>(&t)) {
    check_entry_order(ctx, l->lambda, "lambda twist");
    return;
  }
  if (const auto* m = std::get_if<TwistMu>(&t)) {
    if (static_cast<int>(m->Lambda.size()) != ctx.q())
      throw InputError("mu twist: one matrix per independent variable");
    for (const MatrixExpr& L : m->Lambda) check_matrix(ctx, L, ctx.p(), "mu twist");
    return;
  }
  if (const auto* s = std::get_if<TwistSigma>(&t)) {
    if (ctx.q() != 1) throw InputError("sigma twist requires a single independent variable");
    check_matrix(ctx, s->sigma, family_size, "sigma twist");
    return;
  }
  if (const auto* c = std::get_if<TwistChi>(&t)) {
    if (ctx.q() != 1) throw InputError("chi twist requires a single independent variable");
    check_matrix(ctx, c->Lambda, ctx.p(), "chi twist (Lambda)");
    check_matrix(ctx, c->sigma, family_size, "chi twist (sigma)");
    return;
  }
}

namespace {

bool same_matrix(const MatrixExpr& a, const MatrixExpr& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (!a.at(i, j).same(b.at(i, j))) return false;
  return true;
}

}  // namespace

bool same_twist(const TwistSpec& a, const TwistSpec& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<TwistStandard>(a)) return true;
  if (const auto* la = std::get_if<TwistLambda>(&a))
    return la->lambda.same(std::get<TwistLambda>(b).lambda);
  if (const auto* ma = std::get_if<TwistMu>(&a)) {
    const auto& mb = std::get<TwistMu>(b);
    if (ma->Lambda.size() != mb.Lambda.size()) return false;
    for (std::size_t i = 0; i < ma->Lambda.size(); ++i)
      if (!same_matrix(ma->Lambda[i], mb.Lambda[i])) return false;
    return true;
  }
  if (const auto* sa = std::get_if<TwistSigma>(&a))
    return same_matrix(sa->sigma, std::get<TwistSigma>(b).sigma);
  const auto& ca = std::get<TwistChi>(a);
  const auto& cb = std::get<TwistChi>(b);
  return same_matrix(ca.Lambda, cb.Lambda) && same_matrix(ca.sigma, cb.sigma);
}

}  // namespace tsym
