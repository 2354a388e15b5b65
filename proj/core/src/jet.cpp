#include "tsym/jet.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "tsym/errors.hpp"

namespace tsym {

int MultiIndex::order() const { return std::accumulate(j.begin(), j.end(), 0); }

MultiIndex MultiIndex::plus(int i) const {
  MultiIndex r = *this;
  r.j.at(i) += 1;
  return r;
}

MultiIndex MultiIndex::minus(int i) const {
  MultiIndex r = *this;
  if (r.j.at(i) <= 0) throw InternalError("MultiIndex::minus on zero component");
  r.j[i] -= 1;
  return r;
}

bool MultiIndex::covers(const MultiIndex& o) const {
  if (j.size() != o.j.size()) return false;
  for (std::size_t i = 0; i < j.size(); ++i)
    if (j[i] < o.j[i]) return false;
  return true;
}

std::string MultiIndex::str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (i) os << ',';
    os << j[i];
  }
  os << ']';
  return os.str();
}

bool multi_index_less(const MultiIndex& a, const MultiIndex& b) {
  int oa = a.order(), ob = b.order();
  if (oa != ob) return oa < ob;
  return a.j < b.j;
}

namespace {

std::vector<MultiIndex> enumerate_indices(int q, int n) {
  std::vector<MultiIndex> out;
  std::vector<int> cur(q, 0);
  // all multi-indices with total order <= n, collected then sorted graded-lex
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == q - 1) {
      for (int k = 0; k <= left; ++k) {
        cur[pos] = k;
        out.push_back(MultiIndex(cur));
      }
      cur[pos] = 0;
      return;
    }
    for (int k = 0; k <= left; ++k) {
      cur[pos] = k;
      rec(pos + 1, left - k);
    }
    cur[pos] = 0;
  };
  rec(0, n);
  std::sort(out.begin(), out.end(), multi_index_less);
  return out;
}

std::vector<std::string> default_indep_names(int q) {
  if (q == 1) return {"x"};
  std::vector<std::string> v;
  for (int i = 1; i <= q; ++i) v.push_back("x" + std::to_string(i));
  return v;
}

std::vector<std::string> default_dep_names(int p) {
  if (p == 1) return {"u"};
  std::vector<std::string> v;
  for (int a = 1; a <= p; ++a) v.push_back("u" + std::to_string(a));
  return v;
}

}  // namespace

struct JetContext::Impl {
  int q, p, n;
  std::vector<std::string> indep_names, dep_names;
  std::vector<Expr> xs;
  std::vector<MultiIndex> indices;                   // |J| <= n, graded-lex
  std::map<std::vector<int>, int> index_pos;
  std::vector<std::vector<Expr>> us;                 // [a][index position]
  std::unordered_map<std::uint32_t, Coord> coords;   // symbol id -> role
  std::unordered_map<std::string, Expr> names;       // resolvable names incl. aliases
};

JetContext::JetContext(int q, int p, int n)
    : JetContext(q, p, n, default_indep_names(q), default_dep_names(p)) {}

JetContext::JetContext(int q, int p, int n, std::vector<std::string> indep_names,
                       std::vector<std::string> dep_names) {
  if (q < 1 || p < 1 || n < 1) throw InputError("jet context needs q >= 1, p >= 1, n >= 1");
  if (static_cast<int>(indep_names.size()) != q || static_cast<int>(dep_names.size()) != p)
    throw InputError("jet context: name list sizes must match q and p");
  auto impl = std::make_shared<Impl>();
  impl->q = q;
  impl->p = p;
  impl->n = n;
  impl->indep_names = std::move(indep_names);
  impl->dep_names = std::move(dep_names);

  for (int i = 0; i < q; ++i) {
    Expr s = Expr::symbol(impl->indep_names[i]);
    impl->xs.push_back(s);
    Coord c;
    c.indep = true;
    c.i = i;
    impl->coords[s.symbol_id()] = c;
    impl->names.emplace(impl->indep_names[i], s);
  }
  // default-name alias: x1 for x when q == 1
  if (q == 1 && impl->indep_names[0] == "x") impl->names.emplace("x1", impl->xs[0]);

  impl->indices = enumerate_indices(q, n);
  for (std::size_t k = 0; k < impl->indices.size(); ++k)
    impl->index_pos.emplace(impl->indices[k].j, static_cast<int>(k));

  impl->us.resize(p);
  for (int a = 0; a < p; ++a) {
    for (const MultiIndex& J : impl->indices) {
      std::string nm = impl->dep_names[a];
      if (J.order() > 0) nm += "_" + J.str();
      Expr s = Expr::symbol(nm);
      impl->us[a].push_back(s);
      Coord c;
      c.a = a;
      c.J = J;
      impl->coords[s.symbol_id()] = c;
      impl->names.emplace(nm, s);
      if (p == 1 && impl->dep_names[0] == "u") {
        std::string alias = "u1";
        if (J.order() > 0) alias += "_" + J.str();
        impl->names.emplace(alias, s);
      }
    }
  }
  impl_ = std::move(impl);
}

int JetContext::q() const { return impl_->q; }
int JetContext::p() const { return impl_->p; }
int JetContext::n() const { return impl_->n; }

const Expr& JetContext::x(int i) const { return impl_->xs.at(i); }

const Expr& JetContext::u(int a) const { return impl_->us.at(a).at(0); }

const Expr& JetContext::u(int a, const MultiIndex& J) const {
  auto it = impl_->index_pos.find(J.j);
  if (it == impl_->index_pos.end())
    throw TruncationError("truncation order exceeded: no coordinate " + coord_name(a, J));
  return impl_->us.at(a).at(it->second);
}

const std::vector<MultiIndex>& JetContext::indices() const { return impl_->indices; }

int JetContext::index_position(const MultiIndex& J) const {
  auto it = impl_->index_pos.find(J.j);
  if (it == impl_->index_pos.end()) throw TruncationError("truncation order exceeded");
  return it->second;
}

std::string JetContext::coord_name(int a, const MultiIndex& J) const {
  std::string nm = impl_->dep_names.at(a);
  if (J.order() > 0) nm += "_" + J.str();
  return nm;
}

const std::string& JetContext::indep_name(int i) const { return impl_->indep_names.at(i); }
const std::string& JetContext::dep_name(int a) const { return impl_->dep_names.at(a); }

std::optional<JetContext::Coord> JetContext::classify(std::uint32_t sym) const {
  auto it = impl_->coords.find(sym);
  if (it == impl_->coords.end()) return std::nullopt;
  return it->second;
}

int JetContext::jet_order(const Expr& e) const {
  int best = 0;
  for (std::uint32_t id : e.free_symbols()) {
    auto c = classify(id);
    if (c && !c->indep) best = std::max(best, c->J.order());
  }
  return best;
}

bool JetContext::on_base_manifold(const Expr& e) const {
  for (std::uint32_t id : e.free_symbols()) {
    auto c = classify(id);
    if (c && !c->indep && c->J.order() > 0) return false;
  }
  return true;
}

JetContext JetContext::with_order(int m) const {
  if (m == impl_->n) return *this;
  return JetContext(impl_->q, impl_->p, m, impl_->indep_names, impl_->dep_names);
}

bool JetContext::same_space(const JetContext& o) const {
  return impl_->q == o.impl_->q && impl_->p == o.impl_->p &&
         impl_->indep_names == o.impl_->indep_names && impl_->dep_names == o.impl_->dep_names;
}

std::optional<Expr> JetContext::resolve(const std::string& name) const {
  auto it = impl_->names.find(name);
  if (it == impl_->names.end()) return std::nullopt;
  return it->second;
}

Expr total_derivative(const JetContext& ctx, const Expr& e, int i) {
  if (i < 0 || i >= ctx.q()) throw InputError("total_derivative: direction out of range");
  std::vector<Expr> parts;
  parts.push_back(diff(e, ctx.x(i)));
  for (std::uint32_t id : e.free_symbols()) {
    auto c = ctx.classify(id);
    if (!c || c->indep) continue;
    if (c->J.order() >= ctx.n())
      throw TruncationError("truncation order exceeded: total derivative at order " +
                            std::to_string(ctx.n()));
    parts.push_back(ctx.u(c->a, c->J.plus(i)) * diff(e, id));
  }
  return Expr::sum(std::move(parts));
}

SolvedSystem make_solved_system(const JetContext& ctx, std::vector<MultiIndex> leads,
                                std::vector<Expr> rhs) {
  if (static_cast<int>(leads.size()) != ctx.p() || static_cast<int>(rhs.size()) != ctx.p())
    throw InputError("solved system: one lead and one right-hand side per dependent variable");
  for (int a = 0; a < ctx.p(); ++a) {
    if (leads[a].size() != ctx.q() || leads[a].order() != ctx.n())
      throw InputError("solved system: lead derivatives must have order n");
    if (ctx.jet_order(rhs[a]) > ctx.n())
      throw InputError("solved system: right-hand side exceeds context order");
    for (std::uint32_t id : rhs[a].free_symbols()) {
      auto c = ctx.classify(id);
      if (c && !c->indep && c->J.covers(leads[c->a]))
        throw InputError("solved system: right-hand side contains a lead derivative");
    }
  }
  return SolvedSystem{ctx, std::move(leads), std::move(rhs)};
}

SolvedSystem OdeSystem::solved() const {
  std::vector<MultiIndex> leads(ctx.p(), MultiIndex({ctx.n()}));
  return SolvedSystem{ctx, leads, rhs};
}

OdeSystem make_ode_system(const JetContext& ctx, std::vector<Expr> rhs) {
  if (ctx.q() != 1) throw InputError("ODE system needs a single independent variable");
  if (static_cast<int>(rhs.size()) != ctx.p())
    throw InputError("ODE system: one right-hand side per dependent variable");
  for (const Expr& f : rhs)
    if (ctx.jet_order(f) >= ctx.n())
      throw InputError("ODE system: right-hand side must have order at most n-1");
  return OdeSystem{ctx, std::move(rhs)};
}

Subst section_substitution(const JetContext& ctx, const std::vector<Expr>& sections) {
  if (static_cast<int>(sections.size()) != ctx.p())
    throw InputError("section substitution: one expression per dependent variable");
  for (const Expr& f : sections) {
    for (std::uint32_t id : f.free_symbols()) {
      auto c = ctx.classify(id);
      if (c && !c->indep)
        throw InputError("section substitution: sections may depend on independent variables only");
    }
  }
  Subst s;
  for (int a = 0; a < ctx.p(); ++a) {
    // walk indices in graded order so lower derivatives are already available
    std::vector<Expr> derivs(ctx.indices().size());
    for (std::size_t k = 0; k < ctx.indices().size(); ++k) {
      const MultiIndex& J = ctx.indices()[k];
      if (J.order() == 0) {
        derivs[k] = sections[a];
      } else {
        int i = 0;
        while (J[i] == 0) ++i;
        const MultiIndex prev = J.minus(i);
        derivs[k] = diff(derivs[ctx.index_position(prev)], ctx.x(i));
      }
      s.emplace(ctx.u(a, J).symbol_id(), derivs[k]);
    }
  }
  return s;
}

}  // namespace tsym
