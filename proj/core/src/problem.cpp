#include "tsym/problem.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <variant>

#include "json.hpp"
#include "tsym/errors.hpp"

namespace tsym {
namespace {

using nlohmann::ordered_json;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

bool valid_identifier(const std::string& s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string gen(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

[[noreturn]] void fail_at(const std::string& path, int line, const std::string& msg) {
  throw InputError(path + ":" + std::to_string(line) + ": " + msg);
}

int parse_int(const std::string& path, int line, const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    int r = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    fail_at(path, line, key + " expects an integer, got '" + v + "'");
  }
}

double parse_double(const std::string& path, int line, const std::string& key,
                    const std::string& v) {
  try {
    std::size_t used = 0;
    double r = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    fail_at(path, line, key + " expects a number, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& path, int line, const std::string& key,
                        const std::string& v) {
  try {
    std::size_t used = 0;
    std::uint64_t r = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    fail_at(path, line, key + " expects a non-negative integer, got '" + v + "'");
  }
}

const char* const kVerbs[] = {"prolong",     "check-symmetry", "check-strong",
                              "check-mc",    "gauge-verify",   "invariants",
                              "ibdp-extend", "reduce",         "involution",
                              "commutator-identity"};

bool known_verb(const std::string& v) {
  for (const char* k : kVerbs)
    if (v == k) return true;
  return false;
}

struct PendingMatrix {
  std::string name;
  std::vector<std::vector<Expr>> rows;
  int line = 0;
};

MatrixExpr build_matrix(const std::string& path, const PendingMatrix& pm) {
  if (pm.rows.empty()) fail_at(path, pm.line, "matrix '" + pm.name + "' has no rows");
  std::size_t w = pm.rows[0].size();
  for (const auto& r : pm.rows)
    if (r.size() != w) fail_at(path, pm.line, "matrix '" + pm.name + "' rows differ in width");
  MatrixExpr M(static_cast<int>(pm.rows.size()), static_cast<int>(w));
  for (std::size_t i = 0; i < pm.rows.size(); ++i)
    for (std::size_t j = 0; j < w; ++j) M.at(static_cast<int>(i), static_cast<int>(j)) = pm.rows[i][j];
  return M;
}

struct ProblemParser {
  const std::string& path;
  ProblemFile pf;

  // [context] accumulators
  std::optional<int> q, p, n;
  std::vector<std::string> indep_names, dep_names;
  bool ctx_built = false;
  int context_line = 0;

  // [twist] accumulators
  std::string twist_kind;
  std::optional<Expr> twist_lambda;
  std::vector<PendingMatrix> twist_matrices;
  int twist_line = 0;
  bool saw_twist = false;

  // [equations] accumulators
  std::vector<std::optional<Expr>> eq_rhs;
  bool saw_equations = false;
  int equations_line = 0;

  // matrix block currently collecting rows ([twist] or [gauge])
  std::vector<PendingMatrix>* matrix_sink = nullptr;

  explicit ProblemParser(const std::string& path_) : path(path_) {}

  Expr parse_expr(int line, const std::string& what, const std::string& text) {
    ParseResult r = parse_expression(text, pf.ctx, pf.params);
    if (!r.ok()) fail_at(path, line, what + ": " + r.diagnostic->message);
    return *r.expr;
  }

  void ensure_ctx(int line, const std::string& need) {
    if (ctx_built) return;
    if (!q || !p || !n)
      fail_at(path, line, "q, p and n must be set in [context] before " + need);
    if (!indep_names.empty() && static_cast<int>(indep_names.size()) != *q)
      fail_at(path, context_line, "indep lists " + std::to_string(indep_names.size()) +
                                      " names for q = " + std::to_string(*q));
    if (!dep_names.empty() && static_cast<int>(dep_names.size()) != *p)
      fail_at(path, context_line, "dep lists " + std::to_string(dep_names.size()) +
                                      " names for p = " + std::to_string(*p));
    try {
      if (indep_names.empty() && dep_names.empty())
        pf.ctx = JetContext(*q, *p, *n);
      else {
        std::vector<std::string> xs = indep_names, us = dep_names;
        if (xs.empty())
          for (int i = 0; i < *q; ++i) xs.push_back(*q == 1 ? "x" : "x" + std::to_string(i + 1));
        if (us.empty())
          for (int a = 0; a < *p; ++a) us.push_back(*p == 1 ? "u" : "u" + std::to_string(a + 1));
        pf.ctx = JetContext(*q, *p, *n, xs, us);
      }
    } catch (const Error& e) {
      fail_at(path, context_line, std::string("bad context: ") + e.what());
    }
    for (const std::string& prm : pf.params) {
      if (pf.ctx.resolve(prm))
        fail_at(path, context_line, "parameter '" + prm + "' collides with a coordinate");
    }
    eq_rhs.assign(static_cast<std::size_t>(*p), std::nullopt);
    ctx_built = true;
  }

  void context_line_entry(int line, const std::string& key, const std::string& value) {
    if (ctx_built) fail_at(path, line, "[context] entries must come before other sections");
    context_line = line;
    if (key == "q")
      q = parse_int(path, line, key, value);
    else if (key == "p")
      p = parse_int(path, line, key, value);
    else if (key == "n")
      n = parse_int(path, line, key, value);
    else if (key == "indep")
      indep_names = split_ws(value);
    else if (key == "dep")
      dep_names = split_ws(value);
    else if (key == "params") {
      pf.params = split_ws(value);
      for (const std::string& prm : pf.params)
        if (!valid_identifier(prm)) fail_at(path, line, "bad parameter name '" + prm + "'");
    } else
      fail_at(path, line, "unknown [context] entry '" + key + "'");
  }

  void vectorfield_entry(int line, const std::string& name, const std::string& value) {
    ensure_ctx(line, "[vectorfields]");
    if (!valid_identifier(name)) fail_at(path, line, "bad vector field name '" + name + "'");
    for (const auto& f : pf.fields)
      if (f.first == name) fail_at(path, line, "vector field '" + name + "' declared twice");
    std::vector<std::string> parts = split(value, ';');
    int want = pf.ctx.q() + pf.ctx.p();
    if (static_cast<int>(parts.size()) != want)
      fail_at(path, line, "field '" + name + "' needs " + std::to_string(want) +
                              " entries (xi then phi), got " + std::to_string(parts.size()));
    std::vector<Expr> xi, phi;
    for (int i = 0; i < pf.ctx.q(); ++i)
      xi.push_back(parse_expr(line, "field '" + name + "' entry " + std::to_string(i + 1),
                              parts[static_cast<std::size_t>(i)]));
    for (int a = 0; a < pf.ctx.p(); ++a)
      phi.push_back(parse_expr(
          line, "field '" + name + "' entry " + std::to_string(pf.ctx.q() + a + 1),
          parts[static_cast<std::size_t>(pf.ctx.q() + a)]));
    try {
      pf.fields.emplace_back(name, make_vector_field(pf.ctx, std::move(xi), std::move(phi)));
    } catch (const Error& e) {
      fail_at(path, line, "field '" + name + "': " + e.what());
    }
  }

  void twist_entry(int line, const std::string& key, const std::string& value) {
    ensure_ctx(line, "[twist]");
    saw_twist = true;
    if (twist_line == 0) twist_line = line;
    if (key == "kind") {
      if (!twist_kind.empty()) fail_at(path, line, "twist kind set twice");
      twist_kind = value;
      matrix_sink = nullptr;
    } else if (key == "lambda") {
      twist_lambda = parse_expr(line, "lambda", value);
      matrix_sink = nullptr;
    } else if (key == "matrix") {
      twist_matrices.push_back(PendingMatrix{value, {}, line});
      matrix_sink = &twist_matrices;
    } else {
      fail_at(path, line, "unknown [twist] entry '" + key + "'");
    }
  }

  std::vector<PendingMatrix> gauge_pending;

  void gauge_entry(int line, const std::string& key, const std::string& value) {
    ensure_ctx(line, "[gauge]");
    if (key == "matrix") {
      if (!valid_identifier(value)) fail_at(path, line, "bad gauge name '" + value + "'");
      gauge_pending.push_back(PendingMatrix{value, {}, line});
      matrix_sink = &gauge_pending;
      return;
    }
    if (!valid_identifier(key)) fail_at(path, line, "bad gauge name '" + key + "'");
    pf.gauge_scalars.emplace_back(key, parse_expr(line, "gauge '" + key + "'", value));
    matrix_sink = nullptr;
  }

  void matrix_row(int line, const std::string& text) {
    PendingMatrix& pm = matrix_sink->back();
    std::vector<std::string> parts = split(text, ';');
    std::vector<Expr> row;
    for (std::size_t j = 0; j < parts.size(); ++j)
      row.push_back(parse_expr(line, "matrix '" + pm.name + "' entry " + std::to_string(j + 1),
                               parts[j]));
    pm.rows.push_back(std::move(row));
  }

  void equation_entry(int line, const std::string& name, const std::string& value) {
    ensure_ctx(line, "[equations]");
    saw_equations = true;
    if (equations_line == 0) equations_line = line;
    std::optional<Expr> coord = pf.ctx.resolve(name);
    std::optional<JetContext::Coord> c;
    if (coord && coord->is_symbol()) c = pf.ctx.classify(coord->symbol_id());
    bool dep0 = c && !c->indep;
    if (dep0)
      for (int i = 0; i < c->J.size(); ++i) dep0 = dep0 && c->J[i] == 0;
    if (!dep0) fail_at(path, line, "'" + name + "' is not a dependent variable");
    if (eq_rhs[static_cast<std::size_t>(c->a)])
      fail_at(path, line, "equation for '" + name + "' given twice");
    eq_rhs[static_cast<std::size_t>(c->a)] = parse_expr(line, "rhs for " + name, value);
  }

  void task_entry(int line, const std::string& text) {
    std::vector<std::string> chunks = split(text, ';');
    std::string head = chunks[0];
    std::size_t sp = head.find_first_of(" \t");
    std::string verb = trim(sp == std::string::npos ? head : head.substr(0, sp));
    if (!known_verb(verb)) fail_at(path, line, "unknown task verb '" + verb + "'");
    ProblemTask task;
    task.verb = verb;
    task.line = line;
    std::vector<std::string> argchunks;
    if (sp != std::string::npos) {
      std::string rest = trim(head.substr(sp + 1));
      if (!rest.empty()) argchunks.push_back(rest);
    }
    for (std::size_t i = 1; i < chunks.size(); ++i)
      if (!chunks[i].empty()) argchunks.push_back(chunks[i]);
    for (const std::string& a : argchunks) {
      std::size_t eq = a.find('=');
      if (eq == std::string::npos)
        fail_at(path, line, "task argument '" + a + "' is not key = value");
      std::string k = trim(a.substr(0, eq)), v = trim(a.substr(eq + 1));
      if (k.empty()) fail_at(path, line, "task argument with empty key");
      task.args.emplace_back(k, v);
    }
    pf.tasks.push_back(std::move(task));
  }

  void oracle_entry(int line, const std::string& key, const std::string& value) {
    if (key == "samples") {
      int s = parse_int(path, line, key, value);
      if (s < 1) fail_at(path, line, "samples must be positive");
      pf.oracle.samples = s;
    } else if (key == "rtol") {
      double r = parse_double(path, line, key, value);
      if (r <= 0) fail_at(path, line, "rtol must be positive");
      pf.oracle.rtol = r;
    } else if (key == "seed") {
      pf.oracle.seed = parse_u64(path, line, key, value);
    } else {
      fail_at(path, line, "unknown [oracle] entry '" + key + "'");
    }
  }

  void finalize_twist() {
    if (!saw_twist) return;
    pf.has_twist = true;
    if (twist_kind.empty()) fail_at(path, twist_line, "[twist] needs a kind entry");
    auto built = [&](const PendingMatrix& pm) { return build_matrix(path, pm); };
    if (twist_kind == "standard") {
      pf.twist = TwistStandard{};
    } else if (twist_kind == "lambda") {
      if (!twist_lambda) fail_at(path, twist_line, "lambda twist needs a lambda entry");
      pf.twist = TwistLambda{*twist_lambda};
    } else if (twist_kind == "mu") {
      if (static_cast<int>(twist_matrices.size()) != pf.ctx.q())
        fail_at(path, twist_line, "mu twist needs one matrix per independent variable (" +
                                      std::to_string(pf.ctx.q()) + "), got " +
                                      std::to_string(twist_matrices.size()));
      TwistMu mu;
      for (const auto& pm : twist_matrices) mu.Lambda.push_back(built(pm));
      pf.twist = std::move(mu);
    } else if (twist_kind == "sigma") {
      if (twist_matrices.size() != 1)
        fail_at(path, twist_line, "sigma twist needs exactly one matrix");
      pf.twist = TwistSigma{built(twist_matrices[0])};
    } else if (twist_kind == "chi") {
      if (twist_matrices.size() != 2)
        fail_at(path, twist_line, "chi twist needs two matrices: Lambda then sigma");
      pf.twist = TwistChi{built(twist_matrices[0]), built(twist_matrices[1])};
    } else {
      fail_at(path, twist_line, "unknown twist kind '" + twist_kind + "'");
    }
    int family = 0;
    if (std::holds_alternative<TwistSigma>(pf.twist))
      family = std::get<TwistSigma>(pf.twist).sigma.rows();
    else if (std::holds_alternative<TwistChi>(pf.twist))
      family = std::get<TwistChi>(pf.twist).sigma.rows();
    else
      family = std::max<int>(1, static_cast<int>(pf.fields.size()));
    try {
      validate_twist(pf.ctx, pf.twist, family);
    } catch (const Error& e) {
      fail_at(path, twist_line, std::string("bad twist: ") + e.what());
    }
  }

  void finalize_equations() {
    if (!saw_equations) return;
    std::vector<Expr> rhs;
    for (int a = 0; a < pf.ctx.p(); ++a) {
      if (!eq_rhs[static_cast<std::size_t>(a)])
        fail_at(path, equations_line, "missing equation for '" + pf.ctx.dep_name(a) + "'");
      rhs.push_back(*eq_rhs[static_cast<std::size_t>(a)]);
    }
    try {
      pf.ode = make_ode_system(pf.ctx, std::move(rhs));
    } catch (const Error& e) {
      fail_at(path, equations_line, std::string("bad equations: ") + e.what());
    }
  }

  void finalize_gauges() {
    for (const auto& pm : gauge_pending) {
      for (const auto& g : pf.gauge_matrices)
        if (g.first == pm.name) fail_at(path, pm.line, "gauge '" + pm.name + "' declared twice");
      pf.gauge_matrices.emplace_back(pm.name, build_matrix(path, pm));
    }
    for (const auto& s : pf.gauge_scalars)
      for (const auto& g : pf.gauge_matrices)
        if (s.first == g.first)
          fail_at(path, 0, "gauge '" + s.first + "' declared both scalar and matrix");
  }
};

enum class Sect { None, Context, VectorFields, Twist, Equations, Gauge, Tasks, Oracle };

ProblemFile parse_problem_text(const std::string& text, const std::string& path) {
  ProblemParser pp(path);
  Sect sect = Sect::None;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail_at(path, line, "unterminated section header");
      std::string name = trim(s.substr(1, s.size() - 2));
      pp.matrix_sink = nullptr;
      if (name == "context")
        sect = Sect::Context;
      else if (name == "vectorfields")
        sect = Sect::VectorFields;
      else if (name == "twist")
        sect = Sect::Twist;
      else if (name == "equations")
        sect = Sect::Equations;
      else if (name == "gauge")
        sect = Sect::Gauge;
      else if (name == "tasks")
        sect = Sect::Tasks;
      else if (name == "oracle")
        sect = Sect::Oracle;
      else
        fail_at(path, line, "unknown section [" + name + "]");
      continue;
    }
    if (sect == Sect::Tasks) {
      pp.task_entry(line, s);
      continue;
    }
    std::size_t eq = s.find('=');
    bool keyed = false;
    std::string key, value;
    if (eq != std::string::npos) {
      key = trim(s.substr(0, eq));
      value = trim(s.substr(eq + 1));
      // a directive key is a bare identifier; anything else is matrix-row data
      keyed = valid_identifier(key);
    }
    switch (sect) {
      case Sect::None:
        fail_at(path, line, "content before any [section] header");
      case Sect::Context:
        if (!keyed) fail_at(path, line, "[context] entries are key = value");
        pp.context_line_entry(line, key, value);
        break;
      case Sect::VectorFields:
        if (!keyed) fail_at(path, line, "[vectorfields] entries are name = xi ; ... ; phi");
        pp.vectorfield_entry(line, key, value);
        break;
      case Sect::Twist:
        if (keyed && (key == "kind" || key == "lambda" || key == "matrix"))
          pp.twist_entry(line, key, value);
        else if (pp.matrix_sink)
          pp.matrix_row(line, s);
        else
          fail_at(path, line, "unknown [twist] entry");
        break;
      case Sect::Equations:
        if (!keyed) fail_at(path, line, "[equations] entries are dep = rhs");
        pp.equation_entry(line, key, value);
        break;
      case Sect::Gauge:
        if (keyed)
          pp.gauge_entry(line, key, value);
        else if (pp.matrix_sink)
          pp.matrix_row(line, s);
        else
          fail_at(path, line, "unknown [gauge] entry");
        break;
      case Sect::Oracle:
        if (!keyed) fail_at(path, line, "[oracle] entries are key = value");
        pp.oracle_entry(line, key, value);
        break;
      case Sect::Tasks:
        break;
    }
  }
  pp.ensure_ctx(line, "the end of the file");
  pp.finalize_twist();
  pp.finalize_equations();
  pp.finalize_gauges();
  pp.pf.source_path = path;
  return std::move(pp.pf);
}

/* ---------------- task execution ---------------- */

struct Args {
  const ProblemTask& task;
  std::vector<bool> used;

  explicit Args(const ProblemTask& t) : task(t), used(t.args.size(), false) {}

  std::optional<std::string> get(const std::string& key) {
    std::optional<std::string> out;
    for (std::size_t i = 0; i < task.args.size(); ++i) {
      if (task.args[i].first != key) continue;
      if (out) throw InputError("task '" + task.verb + "': argument '" + key + "' given twice");
      out = task.args[i].second;
      used[i] = true;
    }
    return out;
  }

  std::vector<std::string> all(const std::string& key) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < task.args.size(); ++i) {
      if (task.args[i].first != key) continue;
      out.push_back(task.args[i].second);
      used[i] = true;
    }
    return out;
  }

  int get_int(const std::string& key, int def) {
    auto v = get(key);
    if (!v) return def;
    try {
      std::size_t used_chars = 0;
      int r = std::stoi(*v, &used_chars);
      if (used_chars != v->size()) throw std::invalid_argument(*v);
      return r;
    } catch (const std::exception&) {
      throw InputError("task '" + task.verb + "': argument '" + key + "' expects an integer");
    }
  }

  void finish() {
    for (std::size_t i = 0; i < task.args.size(); ++i)
      if (!used[i])
        throw InputError("task '" + task.verb + "': unknown argument '" + task.args[i].first +
                         "'");
  }
};

struct Report {
  std::string text;
  void line(const std::string& s) {
    text += s;
    text += '\n';
  }
};

Expr arg_expr(const ProblemFile& pf, const std::string& verb, const std::string& key,
              const std::string& text) {
  ParseResult r = parse_expression(text, pf.ctx, pf.params);
  if (!r.ok())
    throw InputError("task '" + verb + "': " + key + ": " + r.diagnostic->message);
  return *r.expr;
}

std::vector<std::pair<std::string, VectorField>> resolve_fields(const ProblemFile& pf,
                                                                Args& args) {
  std::vector<std::string> names;
  for (const std::string& v : args.all("fields"))
    for (const std::string& n : split(v, ','))
      if (!n.empty()) names.push_back(n);
  std::vector<std::pair<std::string, VectorField>> out;
  if (names.empty()) {
    out = pf.fields;
  } else {
    for (const std::string& n : names) {
      bool found = false;
      for (const auto& f : pf.fields)
        if (f.first == n) {
          out.push_back(f);
          found = true;
          break;
        }
      if (!found) throw InputError("unknown vector field '" + n + "'");
    }
  }
  if (out.empty()) throw InputError("no vector fields declared");
  return out;
}

std::vector<VectorField> bare_fields(const std::vector<std::pair<std::string, VectorField>>& f) {
  std::vector<VectorField> out;
  for (const auto& kv : f) out.push_back(kv.second);
  return out;
}

TwistSpec task_twist(const ProblemFile& pf, Args& args) {
  auto lam = args.get("lambda");
  auto tw = args.get("twist");
  if (lam && tw) throw InputError("task '" + args.task.verb + "': give twist or lambda, not both");
  if (lam) return TwistLambda{arg_expr(pf, args.task.verb, "lambda", *lam)};
  if (tw) {
    if (*tw == "standard") return TwistStandard{};
    if (*tw == "file") return pf.twist;
    throw InputError("task '" + args.task.verb + "': twist = " + *tw +
                     " (only 'standard' or 'file' select inline)");
  }
  return pf.twist;
}

const OdeSystem& need_ode(const ProblemFile& pf, const std::string& verb) {
  if (!pf.ode) throw InputError("task '" + verb + "' needs an [equations] block");
  return *pf.ode;
}

int index_order(const MultiIndex& J) {
  int s = 0;
  for (int i = 0; i < J.size(); ++i) s += J[i];
  return s;
}

void render_table(const std::string& name, const ProlongedField& F, Report& rep,
                  ordered_json& out) {
  const JetVectorField& f = F.field;
  rep.line("  field " + name + ": " + twist_name(F.twist) + " prolongation to order " +
           std::to_string(f.order));
  ordered_json coeffs = ordered_json::object();
  for (int i = 0; i < f.ctx.q(); ++i) {
    std::string s = f.xi[static_cast<std::size_t>(i)].str();
    rep.line("    xi[" + f.ctx.indep_name(i) + "] = " + s);
    coeffs[f.ctx.indep_name(i)] = s;
  }
  for (int a = 0; a < f.ctx.p(); ++a) {
    for (const MultiIndex& J : f.ctx.indices()) {
      if (index_order(J) > f.order) continue;
      std::string key = f.ctx.coord_name(a, J);
      std::string s = f.coeff(a, J).str();
      rep.line("    psi[" + key + "] = " + s);
      coeffs[key] = s;
    }
  }
  ordered_json j;
  j["name"] = name;
  j["twist"] = twist_name(F.twist);
  j["order"] = f.order;
  j["path_consistent"] = F.path_consistent;
  j["coefficients"] = std::move(coeffs);
  out.push_back(std::move(j));
}

int do_prolong(const ProblemFile& pf, const EqualityConfig& cfg, Args& args, Report& rep,
               ordered_json& tj) {
  auto fields = resolve_fields(pf, args);
  TwistSpec twist = task_twist(pf, args);
  int order = args.get_int("order", pf.ctx.n());
  args.finish();
  std::vector<ProlongedField> pro = prolong_twisted(bare_fields(fields), twist, order, false, cfg);
  tj["fields"] = ordered_json::array();
  bool ok = true;
  for (std::size_t i = 0; i < pro.size(); ++i) {
    render_table(fields[i].first, pro[i], rep, tj["fields"]);
    if (!pro[i].path_consistent) {
      rep.line("    recursion paths disagree (worst " + sci(pro[i].path_residual) + ")");
      ok = false;
    }
  }
  return ok ? 0 : 1;
}

int do_check_symmetry(const ProblemFile& pf, const EqualityConfig& cfg, Args& args, Report& rep,
                      ordered_json& tj, bool strong) {
  const OdeSystem& ode = need_ode(pf, args.task.verb);
  auto fields = resolve_fields(pf, args);
  TwistSpec twist = task_twist(pf, args);
  args.finish();
  std::vector<ProlongedField> pro =
      prolong_twisted(bare_fields(fields), twist, ode.order(), false, cfg);
  SymmetryVerdict v = strong ? check_strong_symmetry(ode, pro, cfg) : check_symmetry(ode, pro, cfg);
  tj["residuals"] = ordered_json::object();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    ordered_json per = ordered_json::object();
    for (int a = 0; a < pf.ctx.p(); ++a) {
      std::string s = v.residuals[i][static_cast<std::size_t>(a)].str();
      rep.line("  residual[" + fields[i].first + "][" + pf.ctx.dep_name(a) + "] = " + s);
      per[pf.ctx.dep_name(a)] = s;
    }
    tj["residuals"][fields[i].first] = std::move(per);
  }
  const char* what = strong ? "strong symmetry" : "symmetry";
  rep.line(std::string("  ") + what + (v.ok ? " holds" : " fails") + " (worst " + sci(v.worst) +
           ")");
  tj["ok"] = v.ok;
  tj["worst"] = v.worst;
  return v.ok ? 0 : 1;
}

int do_check_mc(const ProblemFile& pf, const EqualityConfig& cfg, Args& args, Report& rep,
                ordered_json& tj) {
  args.finish();
  if (!std::holds_alternative<TwistMu>(pf.twist))
    throw InputError("check-mc needs a mu twist");
  const auto& Lambda = std::get<TwistMu>(pf.twist).Lambda;
  MaurerCartanReport mc = check_maurer_cartan(pf.ctx, Lambda, cfg);
  tj["pairs"] = ordered_json::array();
  if (mc.pairs.empty())
    rep.line("  single independent variable: compatibility holds trivially");
  for (std::size_t k = 0; k < mc.pairs.size(); ++k) {
    auto [i, j] = mc.pairs[k];
    std::string label = "(" + pf.ctx.indep_name(i) + ", " + pf.ctx.indep_name(j) + ")";
    bool bad = false;
    for (std::size_t f : mc.failing) bad = bad || f == k;
    rep.line("  pair " + label + ": " + (bad ? "residual nonzero" : "compatible"));
    ordered_json pj;
    pj["pair"] = {pf.ctx.indep_name(i), pf.ctx.indep_name(j)};
    pj["ok"] = !bad;
    ordered_json rows = ordered_json::array();
    const MatrixExpr& R = mc.residuals[k];
    for (int r = 0; r < R.rows(); ++r) {
      ordered_json row = ordered_json::array();
      std::string txt = "    residual row " + std::to_string(r) + ":";
      for (int c = 0; c < R.cols(); ++c) {
        row.push_back(R.at(r, c).str());
        txt += " " + R.at(r, c).str();
        if (c + 1 < R.cols()) txt += " ;";
      }
      if (bad) rep.line(txt);
      rows.push_back(std::move(row));
    }
    pj["residual"] = std::move(rows);
    tj["pairs"].push_back(std::move(pj));
  }
  rep.line(std::string("  compatibility ") + (mc.ok ? "holds" : "fails") + " (worst " +
           sci(mc.worst) + ")");
  tj["ok"] = mc.ok;
  tj["worst"] = mc.worst;
  return mc.ok ? 0 : 1;
}

GaugeDirection parse_direction(const std::string& verb, Args& args) {
  auto d = args.get("direction");
  if (!d || *d == "forward") return GaugeDirection::Forward;
  if (*d == "inverse") return GaugeDirection::Inverse;
  throw InputError("task '" + verb + "': direction must be forward or inverse");
}

int do_gauge_verify(const ProblemFile& pf, const EqualityConfig& cfg, Args& args, Report& rep,
                    ordered_json& tj) {
  auto fields = resolve_fields(pf, args);
  std::vector<std::string> gnames;
  for (const std::string& v : args.all("gauge"))
    for (const std::string& n : split(v, ','))
      if (!n.empty()) gnames.push_back(n);
  if (gnames.empty()) throw InputError("gauge-verify needs a gauge argument");
  GaugeDirection dir = parse_direction(args.task.verb, args);
  int order = args.get_int("order", pf.ctx.n());
  auto role = args.get("role");
  args.finish();

  const Expr* scalar0 = nullptr;
  const MatrixExpr* matrix0 = nullptr;
  const MatrixExpr* matrix1 = nullptr;
  auto find_gauge = [&](const std::string& n, const Expr*& s, const MatrixExpr*& m) {
    for (const auto& g : pf.gauge_scalars)
      if (g.first == n) {
        s = &g.second;
        return;
      }
    for (const auto& g : pf.gauge_matrices)
      if (g.first == n) {
        m = &g.second;
        return;
      }
    throw InputError("unknown gauge '" + n + "'");
  };
  find_gauge(gnames[0], scalar0, matrix0);
  if (gnames.size() == 2) {
    const Expr* s1 = nullptr;
    find_gauge(gnames[1], s1, matrix1);
    if (s1 || scalar0) throw InputError("two-gauge verification needs two matrices");
  } else if (gnames.size() > 2) {
    throw InputError("gauge-verify takes at most two gauges");
  }

  tj["checks"] = ordered_json::array();
  bool ok = true;
  const char* dname = dir == GaugeDirection::Forward ? "forward" : "inverse";
  auto record = [&](const std::string& kind, const std::string& subject, const GaugeCheck& c) {
    rep.line("  " + kind + " diagram, " + subject + ", " + dname + ": " +
             (c.ok ? "ok" : "fails") + " (worst " + sci(c.worst) + ")" +
             (c.detail.empty() || c.ok ? "" : " " + c.detail));
    ordered_json j;
    j["kind"] = kind;
    j["subject"] = subject;
    j["direction"] = dname;
    j["ok"] = c.ok;
    j["worst"] = c.worst;
    if (!c.detail.empty()) j["detail"] = c.detail;
    tj["checks"].push_back(std::move(j));
    ok = ok && c.ok;
  };

  if (matrix1) {
    if (dir != GaugeDirection::Forward)
      throw InputError("the two-gauge diagram is checked forward only");
    GaugeMatrix A = make_gauge_matrix(pf.ctx, *matrix0, GaugeRole::VectorIndex, cfg);
    GaugeMatrix B = make_gauge_matrix(pf.ctx, *matrix1, GaugeRole::ModuleIndex, cfg);
    ChiGaugeCheck c = verify_gauge_chi(bare_fields(fields), A, B, order, cfg);
    record("chi mu-edge", "family", c.mu_edge);
    record("chi sigma-edge", "family", c.sigma_edge);
    record("chi composite", "family", c.composite);
  } else if (scalar0) {
    if (role) throw InputError("role applies to matrix gauges only");
    GaugeScalar beta = make_gauge_scalar(pf.ctx, *scalar0, cfg);
    for (const auto& f : fields)
      record("lambda", "field " + f.first, verify_gauge_lambda(f.second, beta, order, dir, cfg));
  } else {
    std::string r = role ? *role : "vector";
    if (r == "vector") {
      GaugeMatrix A = make_gauge_matrix(pf.ctx, *matrix0, GaugeRole::VectorIndex, cfg);
      for (const auto& f : fields)
        record("mu", "field " + f.first, verify_gauge_mu(f.second, A, order, dir, cfg));
    } else if (r == "module") {
      GaugeMatrix G = make_gauge_matrix(pf.ctx, *matrix0, GaugeRole::ModuleIndex, cfg);
      record("sigma", "family", verify_gauge_sigma(bare_fields(fields), G, order, dir, cfg));
    } else {
      throw InputError("role must be vector or module");
    }
  }
  tj["ok"] = ok;
  return ok ? 0 : 1;
}

int do_invariants(const ProblemFile& pf, const EqualityConfig& cfg, Args& args, Report& rep,
                  ordered_json& tj) {
  auto fields = resolve_fields(pf, args);
  TwistSpec twist = task_twist(pf, args);
  int order = args.get_int("order", pf.ctx.n());
  int degree = args.get_int("degree", 2);
  args.finish();
  std::vector<ProlongedField> pro = prolong_twisted(bare_fields(fields), twist, order, false, cfg);
  InvariantSearch s = find_first_invariants(pro, degree, cfg);
  tj["invariants"] = ordered_json::array();
  for (const Expr& e : s.invariants) {
    rep.line("  invariant: " + e.str());
    tj["invariants"].push_back(e.str());
  }
  if (!s.note.empty()) {
    rep.line("  note: " + s.note);
    tj["note"] = s.note;
  }
  return 0;
}

int do_ibdp(const ProblemFile& pf, const EqualityConfig& cfg, Args& args, Report& rep,
            ordered_json& tj) {
  auto fields = resolve_fields(pf, args);
  TwistSpec twist = task_twist(pf, args);
  auto eta_t = args.get("eta");
  auto zeta_t = args.get("zeta");
  if (!eta_t || !zeta_t) throw InputError("ibdp-extend needs eta and zeta");
  int count = args.get_int("count", 1);
  int direction = args.get_int("direction", 0);
  int order = args.get_int("order", pf.ctx.n());
  args.finish();
  if (count < 1) throw InputError("count must be positive");
  Expr eta = arg_expr(pf, args.task.verb, "eta", *eta_t);
  Expr zeta = arg_expr(pf, args.task.verb, "zeta", *zeta_t);
  std::vector<ProlongedField> pro = prolong_twisted(bare_fields(fields), twist, order, false, cfg);
  rep.line("  eta = " + eta.str());
  rep.line("  zeta = " + zeta.str());
  tj["eta"] = eta.str();
  tj["zeta"] = zeta.str();
  tj["produced"] = ordered_json::array();
  for (int k = 0; k < count; ++k) {
    zeta = ibdp_next(pro, eta, zeta, cfg, direction);
    rep.line("  produced: " + zeta.str());
    tj["produced"].push_back(zeta.str());
  }
  return 0;
}

int do_reduce(const ProblemFile& pf, const EqualityConfig& cfg, Args& args, Report& rep,
              ordered_json& tj) {
  const OdeSystem& ode = need_ode(pf, args.task.verb);
  auto v = args.get("v");
  auto eta_t = args.get("eta");
  if (v && eta_t) throw InputError("reduce takes v (adapted) or eta (chain), not both");
  if (v) {
    args.all("first");
    args.finish();
    std::optional<Expr> coord = pf.ctx.resolve(*v);
    std::optional<JetContext::Coord> c;
    if (coord && coord->is_symbol()) c = pf.ctx.classify(coord->symbol_id());
    if (!c || c->indep || index_order(c->J) != 0)
      throw InputError("'" + *v + "' is not a dependent variable");
    AdaptedReduction red = reduce_adapted(ode, c->a, cfg);
    tj["mode"] = "adapted";
    tj["orders"] = ordered_json::array();
    tj["equations"] = ordered_json::array();
    for (int a = 0; a < red.ctx.p(); ++a) {
      std::string lhs =
          red.ctx.coord_name(a, MultiIndex(std::vector<int>{red.orders[static_cast<std::size_t>(a)]}));
      std::string s = red.rhs[static_cast<std::size_t>(a)].str();
      rep.line("  reduced: " + lhs + " = " + s);
      tj["orders"].push_back(red.orders[static_cast<std::size_t>(a)]);
      tj["equations"].push_back(lhs + " = " + s);
    }
    rep.line("  reconstruction: " + red.reconstruction);
    tj["reconstruction"] = red.reconstruction;
    return 0;
  }
  if (!eta_t) throw InputError("reduce needs v (adapted) or eta plus first (chain)");
  auto fields = resolve_fields(pf, args);
  TwistSpec twist = task_twist(pf, args);
  std::vector<std::string> first_t = args.all("first");
  if (first_t.empty()) throw InputError("chain reduction needs at least one first invariant");
  int degree = args.get_int("degree", 3);
  args.finish();
  Expr eta = arg_expr(pf, args.task.verb, "eta", *eta_t);
  std::vector<Expr> first;
  for (const std::string& t : first_t)
    first.push_back(arg_expr(pf, args.task.verb, "first", t));
  std::vector<ProlongedField> pro =
      prolong_twisted(bare_fields(fields), twist, ode.order(), false, cfg);
  InvariantChain chain = make_invariant_chain(pro, eta, first, cfg);
  InvariantReduction red = reduce_by_invariants(ode, chain, degree, cfg);
  tj["mode"] = "chain";
  tj["dictionary"] = ordered_json::object();
  for (const auto& d : red.dictionary) {
    rep.line("  " + d.first + " = " + d.second.str());
    tj["dictionary"][d.first] = d.second.str();
  }
  tj["relations"] = ordered_json::array();
  tj["notes"] = ordered_json::array();
  for (std::size_t i = 0; i < red.relations.size(); ++i) {
    rep.line("  relation: " + red.relations[i].str() + " = 0");
    tj["relations"].push_back(red.relations[i].str());
    tj["notes"].push_back(red.notes[i]);
    if (!red.notes[i].empty()) rep.line("    note: " + red.notes[i]);
  }
  if (red.solved) {
    tj["solved"] = ordered_json::array();
    for (int a = 0; a < red.solved->ctx.p(); ++a) {
      std::string lhs =
          red.solved->ctx.coord_name(a, MultiIndex(std::vector<int>{red.solved->order()}));
      std::string s = red.solved->rhs[static_cast<std::size_t>(a)].str();
      rep.line("  solved: " + lhs + " = " + s);
      tj["solved"].push_back(lhs + " = " + s);
    }
  }
  tj["ok"] = red.ok;
  rep.line(std::string("  reduction ") + (red.ok ? "expressed every equation" : "incomplete"));
  return red.ok ? 0 : 1;
}

int do_involution(const ProblemFile& pf, const EqualityConfig& cfg, Args& args, Report& rep,
                  ordered_json& tj) {
  auto fields = resolve_fields(pf, args);
  int degree = args.get_int("degree", 2);
  args.finish();
  InvolutionSystem sys = check_involution(bare_fields(fields), cfg, degree);
  std::size_t r = fields.size();
  tj["structure"] = ordered_json::array();
  bool any = false;
  for (std::size_t a = 0; a < r; ++a) {
    ordered_json ja = ordered_json::array();
    for (std::size_t b = 0; b < r; ++b) {
      ordered_json jb = ordered_json::array();
      for (std::size_t c = 0; c < r; ++c) {
        const Expr& f = sys.f[a][b][c];
        jb.push_back(f.str());
        if (!f.is_zero()) {
          rep.line("  f[" + fields[a].first + "," + fields[b].first + " -> " + fields[c].first +
                   "] = " + f.str());
          any = true;
        }
      }
      ja.push_back(std::move(jb));
    }
    tj["structure"].push_back(std::move(ja));
  }
  if (!any) rep.line("  all structure functions vanish (abelian family)");
  if (sys.numeric_only) rep.line("  structure functions held numerically only");
  tj["numeric_only"] = sys.numeric_only;
  int severity = 0;
  if (std::holds_alternative<TwistSigma>(pf.twist)) {
    const MatrixExpr& sigma = std::get<TwistSigma>(pf.twist).sigma;
    SigmaInvolutionReport c = sigma_involution_condition(sys, sigma, pf.ctx.n(), cfg);
    rep.line(std::string("  sigma sufficient condition: ") + (c.sufficient_ok ? "holds" : "fails") +
             " (worst " + sci(c.sufficient_worst) + ")");
    rep.line(std::string("  sigma contracted condition: ") + (c.contracted_ok ? "holds" : "fails") +
             " (worst " + sci(c.contracted_worst) + ")");
    tj["sigma_sufficient_ok"] = c.sufficient_ok;
    tj["sigma_contracted_ok"] = c.contracted_ok;
    if (!c.contracted_ok) severity = 1;
  }
  return severity;
}

int do_commutator(const ProblemFile& pf, const EqualityConfig& cfg, Args& args, Report& rep,
                  ordered_json& tj) {
  auto fields = resolve_fields(pf, args);
  TwistSpec twist = task_twist(pf, args);
  int order = args.get_int("order", pf.ctx.n());
  int funcs = args.get_int("functions", 10);
  args.finish();
  std::vector<ProlongedField> pro = prolong_twisted(bare_fields(fields), twist, order, false, cfg);
  std::vector<IdentityCheck> checks = commutator_identity_report(pro, cfg, funcs);
  tj["checks"] = ordered_json::array();
  bool ok = true;
  for (const IdentityCheck& c : checks) {
    const std::string& name = fields[static_cast<std::size_t>(c.field)].first;
    rep.line("  field " + name + ": " + c.identity + " " + (c.ok ? "holds" : "fails") +
             " (worst " + sci(c.worst) + ")");
    ordered_json j;
    j["field"] = name;
    j["identity"] = c.identity;
    j["ok"] = c.ok;
    j["worst"] = c.worst;
    tj["checks"].push_back(std::move(j));
    ok = ok && c.ok;
  }
  tj["ok"] = ok;
  return ok ? 0 : 1;
}

int dispatch(const ProblemFile& pf, const EqualityConfig& cfg, const ProblemTask& task,
             Report& rep, ordered_json& tj) {
  Args args(task);
  if (task.verb == "prolong") return do_prolong(pf, cfg, args, rep, tj);
  if (task.verb == "check-symmetry") return do_check_symmetry(pf, cfg, args, rep, tj, false);
  if (task.verb == "check-strong") return do_check_symmetry(pf, cfg, args, rep, tj, true);
  if (task.verb == "check-mc") return do_check_mc(pf, cfg, args, rep, tj);
  if (task.verb == "gauge-verify") return do_gauge_verify(pf, cfg, args, rep, tj);
  if (task.verb == "invariants") return do_invariants(pf, cfg, args, rep, tj);
  if (task.verb == "ibdp-extend") return do_ibdp(pf, cfg, args, rep, tj);
  if (task.verb == "reduce") return do_reduce(pf, cfg, args, rep, tj);
  if (task.verb == "involution") return do_involution(pf, cfg, args, rep, tj);
  if (task.verb == "commutator-identity") return do_commutator(pf, cfg, args, rep, tj);
  throw InputError("unknown task verb '" + task.verb + "'");
}

}  // namespace

ProblemFile parse_problem(const std::string& text, const std::string& path) {
  return parse_problem_text(text, path);
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open problem file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_text(buf.str(), path);
}

RunResult run_problem(const ProblemFile& pf, const RunOptions& opt) {
  EqualityConfig cfg = pf.oracle;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.samples) cfg.samples = *opt.samples;
  if (opt.rtol) cfg.rtol = *opt.rtol;

  std::vector<ProblemTask> tasks;
  if (opt.verb.empty() || opt.verb == "run") {
    tasks = pf.tasks;
  } else {
    if (!known_verb(opt.verb)) throw InputError("unknown verb '" + opt.verb + "'");
    for (const ProblemTask& t : pf.tasks)
      if (t.verb == opt.verb) tasks.push_back(t);
    if (tasks.empty()) tasks.push_back(ProblemTask{opt.verb, {}, 0});
  }

  RunResult res;
  ordered_json doc;
  Report rep;
  rep.line("problem: " + pf.source_path);
  rep.line("seed: " + std::to_string(cfg.seed));
  rep.line("samples: " + std::to_string(cfg.samples));
  rep.line("rtol: " + gen(cfg.rtol));

  doc["problem"] = pf.source_path;
  doc["seed"] = cfg.seed;
  doc["samples"] = cfg.samples;
  doc["rtol"] = cfg.rtol;
  doc["tasks"] = ordered_json::array();

  int n_ok = 0, n_failed = 0, n_error = 0;
  int worst = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const ProblemTask& t = tasks[i];
    std::string header = "task " + std::to_string(i + 1) + ": " + t.verb;
    if (!t.args.empty()) {
      header += " (";
      for (std::size_t k = 0; k < t.args.size(); ++k) {
        if (k) header += "; ";
        header += t.args[k].first + " = " + t.args[k].second;
      }
      header += ")";
    }
    rep.line("");
    rep.line(header);
    ordered_json tj;
    tj["verb"] = t.verb;
    tj["args"] = ordered_json::array();
    for (const auto& kv : t.args) tj["args"].push_back({kv.first, kv.second});
    int severity;
    std::string message;
    try {
      severity = dispatch(pf, cfg, t, rep, tj);
    } catch (const InternalError& e) {
      severity = 3;
      message = e.what();
    } catch (const InputError& e) {
      severity = 2;
      message = e.what();
    } catch (const std::exception& e) {
      severity = 3;
      message = e.what();
    }
    switch (severity) {
      case 0:
        rep.line("  status: ok");
        tj["status"] = "ok";
        ++n_ok;
        break;
      case 1:
        rep.line("  status: failed");
        tj["status"] = "failed";
        ++n_failed;
        break;
      case 2:
        rep.line("  status: input error: " + message);
        tj["status"] = "input error";
        tj["message"] = message;
        ++n_error;
        break;
      default:
        rep.line("  status: internal error: " + message);
        tj["status"] = "internal error";
        tj["message"] = message;
        ++n_error;
        break;
    }
    worst = std::max(worst, severity);
    doc["tasks"].push_back(std::move(tj));
  }

  rep.line("");
  rep.line("summary: " + std::to_string(tasks.size()) + " tasks, " + std::to_string(n_ok) +
           " ok, " + std::to_string(n_failed) + " failed, " + std::to_string(n_error) +
           " errors");
  rep.line("exit: " + std::to_string(worst));
  doc["summary"] = {{"tasks", tasks.size()},
                        {"ok", n_ok},
                        {"failed", n_failed},
                        {"errors", n_error}};
  doc["exit"] = worst;
  res.text = rep.text;
  res.exit_code = worst;
  res.json_text = doc.dump(2) + "\n";
  return res;
}

}  // namespace tsym
