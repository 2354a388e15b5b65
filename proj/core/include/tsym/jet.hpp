#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsym/expr.hpp"

namespace tsym {

/* Derivative multi-index over q independent variables. */
struct MultiIndex {
  std::vector<int> j;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> v) : j(std::move(v)) {}
  static MultiIndex zero(int q) { return MultiIndex(std::vector<int>(q, 0)); }

  int order() const;
  int size() const { return static_cast<int>(j.size()); }
  int operator[](int i) const { return j[i]; }
  MultiIndex plus(int i) const;   // one more derivative in direction i
  MultiIndex minus(int i) const;  // one fewer (requires j[i] > 0)
  bool covers(const MultiIndex& o) const;  // componentwise >=
  bool operator==(const MultiIndex& o) const { return j == o.j; }
  std::string str() const;  // "[2,0,1]"
};

/* Graded order: by total order, then lexicographically.  This is the
 * enumeration order of jet coordinates everywhere (tables, reports). */
bool multi_index_less(const MultiIndex& a, const MultiIndex& b);

/* Coordinates of the jet space of order n over q independent and p dependent
 * variables, plus the naming convention used by the parser and printer:
 * x1..xq (plain "x" when q = 1), u1..up (plain "u" when p = 1), derivatives
 * "u2_[1,0]" with the multi-index in brackets ("u_[3]" in the ODE case).
 * Custom base names may be supplied; the single-variable aliases above then
 * apply only to the names they replace.  Contexts are cheap value types
 * sharing immutable state. */
class JetContext {
 public:
  JetContext(int q, int p, int n);
  JetContext(int q, int p, int n, std::vector<std::string> indep_names,
             std::vector<std::string> dep_names);

  int q() const;
  int p() const;
  int n() const;

  const Expr& x(int i) const;                          // independent variable
  const Expr& u(int a) const;                          // dependent, order 0
  const Expr& u(int a, const MultiIndex& J) const;     // jet coordinate
  const std::vector<MultiIndex>& indices() const;      // all |J| <= n, graded
  int index_position(const MultiIndex& J) const;       // position in indices()

  std::string coord_name(int a, const MultiIndex& J) const;
  const std::string& indep_name(int i) const;
  const std::string& dep_name(int a) const;

  struct Coord {
    bool indep = false;
    int i = -1;          // independent index, when indep
    int a = -1;          // dependent index, otherwise
    MultiIndex J;
  };
  // classify a symbol: independent variable, jet coordinate, or neither
  std::optional<Coord> classify(std::uint32_t sym) const;

  // highest derivative order appearing in e (0 when e has no jet coordinates)
  int jet_order(const Expr& e) const;
  bool on_base_manifold(const Expr& e) const;  // only x, u and non-jet symbols

  // same space, possibly different truncation order
  JetContext with_order(int m) const;
  bool same_space(const JetContext& o) const;

  // resolve a coordinate name (including aliases), nullopt if not a coordinate
  std::optional<Expr> resolve(const std::string& name) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/* Total derivative along x_i: the chain rule through every jet coordinate
 * present in e.  e must have order < ctx.n() so the result is representable;
 * otherwise throws TruncationError("truncation order exceeded"). */
Expr total_derivative(const JetContext& ctx, const Expr& e, int i);

/* System in solved form: one lead derivative u^a_{lead_a} per dependent
 * variable, each of order n, with right-hand side free of every coordinate
 * covered by a lead. */
struct SolvedSystem {
  JetContext ctx;
  std::vector<MultiIndex> leads;  // per dependent, |lead| == n
  std::vector<Expr> rhs;          // per dependent
};

SolvedSystem make_solved_system(const JetContext& ctx, std::vector<MultiIndex> leads,
                                std::vector<Expr> rhs);

/* ODE system u^a_(n) = F^a with every F^a of order <= n-1. */
struct OdeSystem {
  JetContext ctx;  // q == 1
  std::vector<Expr> rhs;

  int order() const { return ctx.n(); }
  SolvedSystem solved() const;
};

OdeSystem make_ode_system(const JetContext& ctx, std::vector<Expr> rhs);

/* Substitution map sending each jet coordinate to the corresponding partial
 * derivative of a given section f^a(x); used to plug explicit solutions into
 * equations and fields. */
Subst section_substitution(const JetContext& ctx, const std::vector<Expr>& sections);

}  // namespace tsym
