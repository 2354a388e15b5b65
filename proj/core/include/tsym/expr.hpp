#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tsym/errors.hpp"

namespace tsym {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class Kind : std::uint8_t { Number, Symbol, Power, Call, Product, Sum };

enum class Func : std::uint8_t { Exp, Log, Sin, Cos, Tan, Sqrt };

const char* func_name(Func f);
std::optional<Func> func_by_name(std::string_view name);

class Expr;
struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

/* Immutable expression node.  Trees are canonicalized on construction: sums
 * and products are flattened, children sorted under the total order below,
 * numeric parts folded into a single exact rational.  Subtrees are shared
 * freely, so all traversals key their memo tables on node addresses. */
struct ExprNode {
  Kind kind;
  Func func = Func::Exp;         // Call only
  Rational value;                // Number only
  std::uint32_t sym = 0;         // Symbol only, intern id
  std::vector<Expr> kids;        // Sum/Product: >= 2, Power: exactly 2, Call: 1
  std::size_t hash = 0;
  std::vector<std::uint32_t> frees;  // sorted ids of free symbols below here
};

class Expr {
 public:
  Expr();  // the number 0

  static Expr number(Rational v);
  static Expr number(long long v);
  static Expr symbol(const std::string& name);
  static Expr sum(std::vector<Expr> terms);
  static Expr product(std::vector<Expr> factors);
  static Expr pow(Expr base, Expr exponent);
  static Expr call(Func f, Expr arg);

  Kind kind() const { return node_->kind; }
  bool is_number() const { return node_->kind == Kind::Number; }
  bool is_symbol() const { return node_->kind == Kind::Symbol; }
  bool is_zero() const;
  bool is_one() const;
  bool is_integer() const;

  const Rational& value() const;           // Number only
  std::uint32_t symbol_id() const;         // Symbol only
  const std::string& symbol_name() const;  // Symbol only
  Func func() const;                       // Call only
  const std::vector<Expr>& kids() const { return node_->kids; }

  std::size_t hash() const { return node_->hash; }
  const std::vector<std::uint32_t>& free_symbols() const { return node_->frees; }
  bool depends_on(std::uint32_t sym) const;

  bool same(const Expr& o) const;  // structural equality
  std::string str() const;         // canonical single-line form, reparseable

  const ExprNode* raw() const { return node_.get(); }

 private:
  explicit Expr(NodePtr n) : node_(std::move(n)) {}
  NodePtr node_;
  friend Expr make_node(ExprNode&& n);
};

/* Fixed total order on expressions; canonical child order of sums and
 * products.  Returns <0, 0, >0. */
int compare(const Expr& a, const Expr& b);

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

/* Symbol interning.  Symbols are global: two Expr::symbol("x") calls yield
 * the same node.  Lookup of a name that was never interned reports absence,
 * which callers surface as "undeclared symbol". */
std::uint32_t intern_symbol(const std::string& name);
std::optional<std::uint32_t> lookup_symbol(const std::string& name);
const std::string& symbol_name(std::uint32_t id);

// Convenience arithmetic; all routes through the canonicalizing factories.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr inv(const Expr& a);

// Partial derivative with respect to a symbol, treating all other symbols as
// independent.  The string overload requires the name to have been interned.
Expr diff(const Expr& e, const Expr& v);
Expr diff(const Expr& e, std::uint32_t sym);
Expr diff(const Expr& e, const std::string& name);

// Simultaneous substitution symbol -> expression (replacements are not
// re-substituted).
using Subst = std::unordered_map<std::uint32_t, Expr>;
Expr substitute(const Expr& e, const Subst& s);

/* Numeric evaluation at a point.  Returns nullopt when the point is singular
 * for the expression (division by ~0, log/sqrt domain edge, tan pole,
 * overflow); throws UndeclaredSymbolError when a free symbol has no binding. */
using Valuation = std::unordered_map<std::uint32_t, double>;
std::optional<double> eval_numeric(const Expr& e, const Valuation& point);

/* Bottom-up rebuild through the canonicalizing factories: folds constants,
 * absorbs 0/1, collects like sum terms and product powers.  Idempotent, and
 * numeric equality is preserved (the test suite checks both). */
Expr simplify(const Expr& e);

}  // namespace tsym
