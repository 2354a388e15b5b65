#include "tsym/expr.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <mutex>
#include <sstream>

namespace tsym {

namespace {

/* ---- symbol registry ---- */

struct SymbolRegistry {
  std::mutex mu;
  std::deque<std::string> names;  // deque: references stay valid as names are added
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<NodePtr> nodes;  // one shared node per symbol
};

SymbolRegistry& registry() {
  static SymbolRegistry r;
  return r;
}

std::size_t hash_mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::vector<std::uint32_t> merge_frees(const std::vector<Expr>& kids) {
  std::vector<std::uint32_t> out;
  for (const Expr& k : kids) {
    const auto& f = k.free_symbols();
    std::vector<std::uint32_t> merged;
    merged.reserve(out.size() + f.size());
    std::set_union(out.begin(), out.end(), f.begin(), f.end(), std::back_inserter(merged));
    out = std::move(merged);
  }
  return out;
}

bool rational_is_integer(const Rational& r) { return denominator(r) == 1; }

/* Exact power with a small integer exponent; nullopt when we prefer to keep
 * the node symbolic (huge exponent, or 0 to a negative power). */
std::optional<Rational> rational_pow(const Rational& base, const Rational& exp) {
  if (!rational_is_integer(exp)) return std::nullopt;
  Integer e = numerator(exp);
  if (abs(e) > 128) return std::nullopt;
  long k = e.convert_to<long>();
  if (base == 0) {
    if (k > 0) return Rational(0);
    return std::nullopt;  // 0^0 handled before, 0^negative stays symbolic
  }
  Integer num = numerator(base), den = denominator(base);
  bool neg = k < 0;
  unsigned long a = static_cast<unsigned long>(neg ? -k : k);
  Integer pn = pow(num, a), pd = pow(den, a);
  if (!neg) return Rational(pn, pd);
  // the constructor rejects negative denominators, so move the sign up
  if (pn < 0) return Rational(-pd, -pn);
  return Rational(pd, pn);
}

std::optional<Rational> rational_sqrt(const Rational& r) {
  if (r < 0) return std::nullopt;
  Integer num = numerator(r), den = denominator(r);
  Integer sn = sqrt(num), sd = sqrt(den);
  if (sn * sn == num && sd * sd == den) return Rational(sn, sd);
  return std::nullopt;
}

int rank_of(Kind k) { return static_cast<int>(k); }

}  // namespace

const char* func_name(Func f) {
  switch (f) {
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Sqrt: return "sqrt";
  }
  return "?";
}

std::optional<Func> func_by_name(std::string_view name) {
  if (name == "exp") return Func::Exp;
  if (name == "log") return Func::Log;
  if (name == "sin") return Func::Sin;
  if (name == "cos") return Func::Cos;
  if (name == "tan") return Func::Tan;
  if (name == "sqrt") return Func::Sqrt;
  return std::nullopt;
}

std::uint32_t intern_symbol(const std::string& name) {
  auto& r = registry();
  std::lock_guard<std::mutex> lock(r.mu);
  auto it = r.ids.find(name);
  if (it != r.ids.end()) return it->second;
  std::uint32_t id = static_cast<std::uint32_t>(r.names.size());
  r.names.push_back(name);
  r.ids.emplace(name, id);

  ExprNode n;
  n.kind = Kind::Symbol;
  n.sym = id;
  n.hash = hash_mix(static_cast<std::size_t>(Kind::Symbol), std::hash<std::string>{}(name));
  n.frees = {id};
  r.nodes.push_back(std::make_shared<const ExprNode>(std::move(n)));
  return id;
}

std::optional<std::uint32_t> lookup_symbol(const std::string& name) {
  auto& r = registry();
  std::lock_guard<std::mutex> lock(r.mu);
  auto it = r.ids.find(name);
  if (it == r.ids.end()) return std::nullopt;
  return it->second;
}

const std::string& symbol_name(std::uint32_t id) {
  auto& r = registry();
  std::lock_guard<std::mutex> lock(r.mu);
  return r.names.at(id);
}

Expr make_node(ExprNode&& n) {
  n.frees = merge_frees(n.kids);
  std::size_t h = static_cast<std::size_t>(n.kind);
  switch (n.kind) {
    case Kind::Number:
      h = hash_mix(h, std::hash<double>{}(n.value.convert_to<double>()));
      break;
    case Kind::Symbol:
      break;  // interned elsewhere
    case Kind::Call:
      h = hash_mix(h, static_cast<std::size_t>(n.func));
      break;
    default:
      break;
  }
  for (const Expr& k : n.kids) h = hash_mix(h, k.hash());
  n.hash = h;
  return Expr(std::make_shared<const ExprNode>(std::move(n)));
}

/* ---- construction ---- */

Expr::Expr() : node_() {
  static NodePtr zero = [] {
    ExprNode n;
    n.kind = Kind::Number;
    n.value = 0;
    n.hash = hash_mix(static_cast<std::size_t>(Kind::Number), std::hash<double>{}(0.0));
    return std::make_shared<const ExprNode>(std::move(n));
  }();
  node_ = zero;
}

Expr Expr::number(Rational v) {
  ExprNode n;
  n.kind = Kind::Number;
  n.value = std::move(v);
  return make_node(std::move(n));
}

Expr Expr::number(long long v) { return number(Rational(v)); }

Expr Expr::symbol(const std::string& name) {
  std::uint32_t id = intern_symbol(name);
  auto& r = registry();
  std::lock_guard<std::mutex> lock(r.mu);
  return Expr(r.nodes.at(id));
}

bool Expr::is_zero() const { return node_->kind == Kind::Number && node_->value == 0; }
bool Expr::is_one() const { return node_->kind == Kind::Number && node_->value == 1; }
bool Expr::is_integer() const {
  return node_->kind == Kind::Number && rational_is_integer(node_->value);
}

const Rational& Expr::value() const {
  if (node_->kind != Kind::Number) throw InternalError("value() on non-number");
  return node_->value;
}

std::uint32_t Expr::symbol_id() const {
  if (node_->kind != Kind::Symbol) throw InternalError("symbol_id() on non-symbol");
  return node_->sym;
}

const std::string& Expr::symbol_name() const { return tsym::symbol_name(symbol_id()); }

Func Expr::func() const {
  if (node_->kind != Kind::Call) throw InternalError("func() on non-call");
  return node_->func;
}

bool Expr::depends_on(std::uint32_t sym) const {
  const auto& f = node_->frees;
  return std::binary_search(f.begin(), f.end(), sym);
}

int compare(const Expr& a, const Expr& b) {
  if (a.raw() == b.raw()) return 0;
  int ra = rank_of(a.kind()), rb = rank_of(b.kind());
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (a.kind()) {
    case Kind::Number: {
      if (a.value() < b.value()) return -1;
      if (b.value() < a.value()) return 1;
      return 0;
    }
    case Kind::Symbol:
      return a.symbol_name().compare(b.symbol_name());
    case Kind::Call: {
      int fa = static_cast<int>(a.func()), fb = static_cast<int>(b.func());
      if (fa != fb) return fa < fb ? -1 : 1;
      return compare(a.kids()[0], b.kids()[0]);
    }
    default: {
      const auto& ka = a.kids();
      const auto& kb = b.kids();
      std::size_t m = std::min(ka.size(), kb.size());
      for (std::size_t i = 0; i < m; ++i) {
        int c = compare(ka[i], kb[i]);
        if (c != 0) return c;
      }
      if (ka.size() != kb.size()) return ka.size() < kb.size() ? -1 : 1;
      return 0;
    }
  }
}

bool Expr::same(const Expr& o) const {
  if (node_.get() == o.node_.get()) return true;
  if (node_->hash != o.node_->hash) return false;
  return compare(*this, o) == 0;
}

namespace {

/* Split a canonical term into (rational coefficient, rest).  Products carry
 * an optional leading Number child, everything else has coefficient 1. */
std::pair<Rational, Expr> split_coefficient(const Expr& t) {
  if (t.kind() == Kind::Product && t.kids().front().is_number()) {
    const auto& ks = t.kids();
    if (ks.size() == 2) return {ks[0].value(), ks[1]};
    ExprNode n;
    n.kind = Kind::Product;
    n.kids.assign(ks.begin() + 1, ks.end());
    return {ks[0].value(), make_node(std::move(n))};
  }
  return {Rational(1), t};
}

Expr term_with_coefficient(const Rational& c, const Expr& core) {
  if (c == 1) return core;
  ExprNode n;
  n.kind = Kind::Product;
  n.kids.push_back(Expr::number(c));
  if (core.kind() == Kind::Product) {
    for (const Expr& k : core.kids()) n.kids.push_back(k);
  } else {
    n.kids.push_back(core);
  }
  return make_node(std::move(n));
}

std::pair<Expr, Expr> split_power(const Expr& f) {
  if (f.kind() == Kind::Power) return {f.kids()[0], f.kids()[1]};
  return {f, Expr::number(1)};
}

}  // namespace

Expr Expr::sum(std::vector<Expr> terms) {
  Rational constant = 0;
  std::map<Expr, Rational, ExprLess> by_core;
  std::vector<Expr> stack(std::make_move_iterator(terms.begin()),
                          std::make_move_iterator(terms.end()));
  std::reverse(stack.begin(), stack.end());
  while (!stack.empty()) {
    Expr t = std::move(stack.back());
    stack.pop_back();
    if (t.kind() == Kind::Sum) {
      for (auto it = t.kids().rbegin(); it != t.kids().rend(); ++it) stack.push_back(*it);
    } else if (t.is_number()) {
      constant += t.value();
    } else {
      auto [c, core] = split_coefficient(t);
      by_core[core] += c;
    }
  }
  std::vector<Expr> out;
  if (constant != 0) out.push_back(number(constant));
  for (const auto& [core, c] : by_core) {
    if (c == 0) continue;
    out.push_back(term_with_coefficient(c, core));
  }
  if (out.empty()) return number(0);
  if (out.size() == 1) return out[0];
  std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
  ExprNode n;
  n.kind = Kind::Sum;
  n.kids = std::move(out);
  return make_node(std::move(n));
}

Expr Expr::product(std::vector<Expr> factors) {
  Rational coeff = 1;
  std::map<Expr, std::vector<Expr>, ExprLess> by_base;  // base -> exponents
  std::vector<Expr> stack(std::make_move_iterator(factors.begin()),
                          std::make_move_iterator(factors.end()));
  std::reverse(stack.begin(), stack.end());
  while (!stack.empty()) {
    Expr f = std::move(stack.back());
    stack.pop_back();
    if (f.kind() == Kind::Product) {
      for (auto it = f.kids().rbegin(); it != f.kids().rend(); ++it) stack.push_back(*it);
    } else if (f.is_number()) {
      coeff *= f.value();
      if (coeff == 0) return number(0);
    } else {
      auto [base, ex] = split_power(f);
      by_base[base].push_back(ex);
    }
  }
  std::vector<Expr> out;
  for (auto& [base, exps] : by_base) {
    Expr e = exps.size() == 1 ? exps[0] : sum(exps);
    Expr factor = pow(base, e);
    if (factor.is_number()) {
      coeff *= factor.value();
      if (coeff == 0) return number(0);
    } else if (!factor.is_one()) {
      if (factor.kind() == Kind::Product) {
        // pow() folded into a product (rare; keep flat)
        for (const Expr& k : factor.kids()) {
          if (k.is_number())
            coeff *= k.value();
          else
            out.push_back(k);
        }
      } else {
        out.push_back(factor);
      }
    }
  }
  if (out.empty()) return number(coeff);
  std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
  if (coeff != 1) out.insert(out.begin(), number(coeff));
  if (out.size() == 1) return out[0];
  ExprNode n;
  n.kind = Kind::Product;
  n.kids = std::move(out);
  return make_node(std::move(n));
}

Expr Expr::pow(Expr base, Expr exponent) {
  if (exponent.is_number()) {
    const Rational& ev = exponent.value();
    if (ev == 0) return number(1);
    if (ev == 1) return base;
    if (base.is_number()) {
      if (auto folded = rational_pow(base.value(), ev)) return number(*folded);
    }
  }
  if (base.is_one()) return number(1);
  ExprNode n;
  n.kind = Kind::Power;
  n.kids = {std::move(base), std::move(exponent)};
  return make_node(std::move(n));
}

Expr Expr::call(Func f, Expr arg) {
  if (arg.is_number()) {
    const Rational& v = arg.value();
    switch (f) {
      case Func::Exp:
        if (v == 0) return number(1);
        break;
      case Func::Log:
        if (v == 1) return number(0);
        break;
      case Func::Sin:
      case Func::Tan:
        if (v == 0) return number(0);
        break;
      case Func::Cos:
        if (v == 0) return number(1);
        break;
      case Func::Sqrt:
        if (auto r = rational_sqrt(v)) return number(*r);
        break;
    }
  }
  ExprNode n;
  n.kind = Kind::Call;
  n.func = f;
  n.kids = {std::move(arg)};
  return make_node(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) {
  return Expr::sum({a, Expr::product({Expr::number(-1), b})});
}
Expr operator*(const Expr& a, const Expr& b) { return Expr::product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) {
  return Expr::product({a, Expr::pow(b, Expr::number(-1))});
}
Expr operator-(const Expr& a) { return Expr::product({Expr::number(-1), a}); }
Expr inv(const Expr& a) { return Expr::pow(a, Expr::number(-1)); }

/* ---- differentiation ---- */

namespace {

Expr diff_impl(const Expr& e, std::uint32_t v,
               std::unordered_map<const ExprNode*, Expr>& memo) {
  if (!e.depends_on(v)) return Expr::number(0);
  auto it = memo.find(e.raw());
  if (it != memo.end()) return it->second;
  Expr result;
  switch (e.kind()) {
    case Kind::Number:
      result = Expr::number(0);
      break;
    case Kind::Symbol:
      result = Expr::number(e.symbol_id() == v ? 1 : 0);
      break;
    case Kind::Sum: {
      std::vector<Expr> parts;
      for (const Expr& k : e.kids()) parts.push_back(diff_impl(k, v, memo));
      result = Expr::sum(std::move(parts));
      break;
    }
    case Kind::Product: {
      std::vector<Expr> parts;
      const auto& ks = e.kids();
      for (std::size_t i = 0; i < ks.size(); ++i) {
        if (!ks[i].depends_on(v)) continue;
        std::vector<Expr> fs;
        fs.push_back(diff_impl(ks[i], v, memo));
        for (std::size_t j = 0; j < ks.size(); ++j)
          if (j != i) fs.push_back(ks[j]);
        parts.push_back(Expr::product(std::move(fs)));
      }
      result = Expr::sum(std::move(parts));
      break;
    }
    case Kind::Power: {
      const Expr& f = e.kids()[0];
      const Expr& g = e.kids()[1];
      Expr df = diff_impl(f, v, memo);
      Expr dg = diff_impl(g, v, memo);
      if (dg.is_zero()) {
        // plain power rule, avoids introducing log for constant exponents
        result = Expr::product({g, Expr::pow(f, g - Expr::number(1)), df});
      } else if (df.is_zero()) {
        result = Expr::product({e, Expr::call(Func::Log, f), dg});
      } else {
        Expr bracket = dg * Expr::call(Func::Log, f) + g * df * inv(f);
        result = Expr::product({e, bracket});
      }
      break;
    }
    case Kind::Call: {
      const Expr& f = e.kids()[0];
      Expr df = diff_impl(f, v, memo);
      Expr outer;
      switch (e.func()) {
        case Func::Exp: outer = e; break;
        case Func::Log: outer = inv(f); break;
        case Func::Sin: outer = Expr::call(Func::Cos, f); break;
        case Func::Cos: outer = -Expr::call(Func::Sin, f); break;
        case Func::Tan:
          outer = Expr::number(1) + Expr::pow(Expr::call(Func::Tan, f), Expr::number(2));
          break;
        case Func::Sqrt:
          outer = inv(Expr::number(2) * Expr::call(Func::Sqrt, f));
          break;
      }
      result = Expr::product({outer, df});
      break;
    }
  }
  memo.emplace(e.raw(), result);
  return result;
}

}  // namespace

Expr diff(const Expr& e, std::uint32_t sym) {
  std::unordered_map<const ExprNode*, Expr> memo;
  return diff_impl(e, sym, memo);
}

Expr diff(const Expr& e, const Expr& v) {
  if (!v.is_symbol()) throw InputError("diff: differentiation variable must be a symbol");
  return diff(e, v.symbol_id());
}

Expr diff(const Expr& e, const std::string& name) {
  auto id = lookup_symbol(name);
  if (!id) throw UndeclaredSymbolError("undeclared symbol: " + name);
  return diff(e, *id);
}

/* ---- substitution ---- */

namespace {

Expr subst_impl(const Expr& e, const Subst& s,
                std::unordered_map<const ExprNode*, Expr>& memo) {
  bool touched = false;
  for (std::uint32_t id : e.free_symbols()) {
    if (s.count(id)) {
      touched = true;
      break;
    }
  }
  if (!touched) return e;
  auto it = memo.find(e.raw());
  if (it != memo.end()) return it->second;
  Expr result;
  switch (e.kind()) {
    case Kind::Number:
      result = e;
      break;
    case Kind::Symbol: {
      auto f = s.find(e.symbol_id());
      result = f == s.end() ? e : f->second;
      break;
    }
    case Kind::Sum:
    case Kind::Product: {
      std::vector<Expr> ks;
      ks.reserve(e.kids().size());
      for (const Expr& k : e.kids()) ks.push_back(subst_impl(k, s, memo));
      result = e.kind() == Kind::Sum ? Expr::sum(std::move(ks)) : Expr::product(std::move(ks));
      break;
    }
    case Kind::Power:
      result = Expr::pow(subst_impl(e.kids()[0], s, memo), subst_impl(e.kids()[1], s, memo));
      break;
    case Kind::Call:
      result = Expr::call(e.func(), subst_impl(e.kids()[0], s, memo));
      break;
  }
  memo.emplace(e.raw(), result);
  return result;
}

}  // namespace

Expr substitute(const Expr& e, const Subst& s) {
  if (s.empty()) return e;
  std::unordered_map<const ExprNode*, Expr> memo;
  return subst_impl(e, s, memo);
}

/* ---- numeric evaluation ---- */

namespace {

constexpr double kNearZero = 1e-3;   // guard band around poles and branch points
constexpr double kOverflow = 1e100;  // beyond this we call the sample singular

std::optional<double> eval_impl(const Expr& e, const Valuation& pt,
                                std::unordered_map<const ExprNode*, std::optional<double>>& memo) {
  auto it = memo.find(e.raw());
  if (it != memo.end()) return it->second;
  std::optional<double> result;
  switch (e.kind()) {
    case Kind::Number:
      result = e.value().convert_to<double>();
      break;
    case Kind::Symbol: {
      auto f = pt.find(e.symbol_id());
      if (f == pt.end())
        throw UndeclaredSymbolError("unbound symbol in evaluation: " + e.symbol_name());
      result = f->second;
      break;
    }
    case Kind::Sum: {
      double acc = 0;
      result = 0.0;
      for (const Expr& k : e.kids()) {
        auto v = eval_impl(k, pt, memo);
        if (!v) {
          result = std::nullopt;
          break;
        }
        acc += *v;
      }
      if (result) result = acc;
      break;
    }
    case Kind::Product: {
      double acc = 1;
      result = 1.0;
      for (const Expr& k : e.kids()) {
        auto v = eval_impl(k, pt, memo);
        if (!v) {
          result = std::nullopt;
          break;
        }
        acc *= *v;
      }
      if (result) result = acc;
      break;
    }
    case Kind::Power: {
      auto b = eval_impl(e.kids()[0], pt, memo);
      auto x = eval_impl(e.kids()[1], pt, memo);
      if (!b || !x) break;
      if (*x < 0 && std::fabs(*b) < kNearZero) break;  // near a denominator zero
      double r = std::pow(*b, *x);
      if (std::isnan(r) || std::isinf(r)) break;
      result = r;
      break;
    }
    case Kind::Call: {
      auto a = eval_impl(e.kids()[0], pt, memo);
      if (!a) break;
      double r = 0;
      switch (e.func()) {
        case Func::Exp: r = std::exp(*a); break;
        case Func::Log:
          if (*a < kNearZero) { a.reset(); break; }
          r = std::log(*a);
          break;
        case Func::Sin: r = std::sin(*a); break;
        case Func::Cos: r = std::cos(*a); break;
        case Func::Tan:
          if (std::fabs(std::cos(*a)) < kNearZero) { a.reset(); break; }
          r = std::tan(*a);
          break;
        case Func::Sqrt:
          if (*a < 0) { a.reset(); break; }
          r = std::sqrt(*a);
          break;
      }
      if (!a) break;
      if (std::isnan(r) || std::isinf(r)) break;
      result = r;
      break;
    }
  }
  if (result && std::fabs(*result) > kOverflow) result = std::nullopt;
  memo.emplace(e.raw(), result);
  return result;
}

}  // namespace

std::optional<double> eval_numeric(const Expr& e, const Valuation& point) {
  std::unordered_map<const ExprNode*, std::optional<double>> memo;
  return eval_impl(e, point, memo);
}

/* ---- simplify ---- */

namespace {

Expr simplify_impl(const Expr& e, std::unordered_map<const ExprNode*, Expr>& memo) {
  auto it = memo.find(e.raw());
  if (it != memo.end()) return it->second;
  Expr result;
  switch (e.kind()) {
    case Kind::Number:
    case Kind::Symbol:
      result = e;
      break;
    case Kind::Sum:
    case Kind::Product: {
      std::vector<Expr> ks;
      ks.reserve(e.kids().size());
      for (const Expr& k : e.kids()) ks.push_back(simplify_impl(k, memo));
      result = e.kind() == Kind::Sum ? Expr::sum(std::move(ks)) : Expr::product(std::move(ks));
      break;
    }
    case Kind::Power:
      result = Expr::pow(simplify_impl(e.kids()[0], memo), simplify_impl(e.kids()[1], memo));
      break;
    case Kind::Call:
      result = Expr::call(e.func(), simplify_impl(e.kids()[0], memo));
      break;
  }
  memo.emplace(e.raw(), result);
  return result;
}

}  // namespace

Expr simplify(const Expr& e) {
  std::unordered_map<const ExprNode*, Expr> memo;
  return simplify_impl(e, memo);
}

/* ---- printing ----
 *
 * Output must reparse to the same tree, so parenthesization follows the
 * grammar exactly: ^ binds tightest (right-assoc), then * and /, then + and -.
 * A number is atomic only when it is a nonnegative integer; other numbers get
 * parentheses wherever they would fuse with an adjacent operator. */

namespace {

bool is_plain_integer(const Expr& e) {
  return e.is_number() && rational_is_integer(e.value()) && e.value() >= 0;
}

// prec: 0 top level, 1 sum operand, 2 product operand (power positions are
// parenthesized by the power printer itself when the operand is compound)
void print_expr(std::ostringstream& os, const Expr& e, int prec);

void print_number(std::ostringstream& os, const Rational& v) {
  if (v < 0) {
    os << '-';
    Rational a = -v;
    os << numerator(a);
    if (denominator(a) != 1) os << '/' << denominator(a);
  } else {
    os << numerator(v);
    if (denominator(v) != 1) os << '/' << denominator(v);
  }
}

/* A product never appears directly under another product (flattened) and the
 * power printer wraps compound operands, so products need no parentheses of
 * their own.  A leading negative coefficient is printed as a prefix minus,
 * which reparses to the same tree since unary minus spans the whole product. */
void print_product(std::ostringstream& os, const Expr& e) {
  const auto& ks = e.kids();
  std::size_t first = 0;
  if (ks[0].is_number() && ks[0].value() < 0) {
    os << '-';
    Rational a = -ks[0].value();
    if (a == 1) {
      first = 1;
    } else {
      print_number(os, a);
      os << '*';
      first = 1;
    }
  }
  for (std::size_t i = first; i < ks.size(); ++i) {
    if (i > first) os << '*';
    print_expr(os, ks[i], 2);
  }
}

void print_sum(std::ostringstream& os, const Expr& e, int prec) {
  bool parens = prec >= 2;
  if (parens) os << '(';
  const auto& ks = e.kids();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const Expr& t = ks[i];
    if (i == 0) {
      print_expr(os, t, 1);
      continue;
    }
    // fold the sign of the term into the joining operator
    if (t.is_number() && t.value() < 0) {
      os << " - ";
      print_number(os, -t.value());
    } else if (t.kind() == Kind::Product && t.kids()[0].is_number() && t.kids()[0].value() < 0) {
      os << " - ";
      std::vector<Expr> ks2(t.kids().begin(), t.kids().end());
      ks2[0] = Expr::number(-ks2[0].value());
      // the negated product can collapse to a bare sum, which needs parens
      // here: "a - (b + c)" must not print as "a - b + c"
      print_expr(os, Expr::product(std::move(ks2)), 2);
    } else {
      os << " + ";
      print_expr(os, t, 1);
    }
  }
  if (parens) os << ')';
}

void print_expr(std::ostringstream& os, const Expr& e, int prec) {
  switch (e.kind()) {
    case Kind::Number:
      print_number(os, e.value());
      break;
    case Kind::Symbol:
      os << e.symbol_name();
      break;
    case Kind::Call:
      os << func_name(e.func()) << '(';
      print_expr(os, e.kids()[0], 0);
      os << ')';
      break;
    case Kind::Power: {
      const Expr& b = e.kids()[0];
      const Expr& x = e.kids()[1];
      bool base_atomic = b.kind() == Kind::Symbol || b.kind() == Kind::Call || is_plain_integer(b);
      if (base_atomic) {
        print_expr(os, b, 2);
      } else {
        os << '(';
        print_expr(os, b, 0);
        os << ')';
      }
      os << '^';
      bool exp_atomic = x.kind() == Kind::Symbol || x.kind() == Kind::Call || is_plain_integer(x);
      if (exp_atomic) {
        print_expr(os, x, 2);
      } else {
        os << '(';
        print_expr(os, x, 0);
        os << ')';
      }
      break;
    }
    case Kind::Product:
      print_product(os, e);
      break;
    case Kind::Sum:
      print_sum(os, e, prec);
      break;
  }
}

}  // namespace

std::string Expr::str() const {
  std::ostringstream os;
  print_expr(os, *this, 0);
  return os.str();
}

}  // namespace tsym
