// Acceptance gate: every shipped guarantee checked end to end, one line per
// criterion.  Usage: tsym_acceptance [path-to-tsym-binary [problems-dir]].
// Exits 0 iff every criterion passes.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gen.hpp"
#include "tsym/errors.hpp"
#include "tsym/gauge.hpp"
#include "tsym/oracle.hpp"
#include "tsym/parse.hpp"
#include "tsym/prolong.hpp"
#include "tsym/reduction.hpp"

using namespace tsym;
using tsymgen::Gen;

namespace {

const EqualityConfig cfg;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error(what);
}

bool eq(const Expr& a, const Expr& b) { return equal_numeric(a, b, cfg).equal; }

std::string tool_path;
std::string problems_dir;

/* ---- criterion 1: degeneration lattice ---- */

std::string degeneration_lattice() {
  int fields = 0;
  for (int round = 0; round < 15; ++round) {
    Gen g(1000 + static_cast<std::uint64_t>(round));
    int p = 1 + round % 3;
    int n = 1 + (round + 1) % 3;
    JetContext c1(1, p, n + 1);

    VectorField X = g.liepoint(c1);
    ++fields;
    require(compare_fields(prolong_lambda(X, Expr::number(0), n).field, prolong(X, n).field,
                           cfg).equal,
            "Lambda(0) != Standard");

    VectorField Xm = g.liepoint(c1);
    ++fields;
    require(compare_fields(prolong_mu(Xm, {MatrixExpr(p, p)}, n).field, prolong(Xm, n).field,
                           cfg).equal,
            "Mu(0) != Standard");

    Expr lam = g.lambda_expr(c1, 1);
    VectorField Xl = g.liepoint(c1);
    ++fields;
    require(compare_fields(prolong_mu(Xl, {MatrixExpr::identity(p).scaled(lam)}, n).field,
                           prolong_lambda(Xl, lam, n).field, cfg).equal,
            "Mu(lambda I) != Lambda");

    JetContext c2(1, 2, n + 1);
    VectorField S1 = g.liepoint(c2), S2 = g.liepoint(c2);
    fields += 2;
    auto Ps = prolong_sigma(std::vector<VectorField>{S1, S2}, MatrixExpr(2, 2), n);
    require(compare_fields(Ps[0].field, prolong(S1, n).field, cfg).equal &&
                compare_fields(Ps[1].field, prolong(S2, n).field, cfg).equal,
            "Sigma(0) != Standard");

    VectorField R = g.liepoint(c2);
    ++fields;
    Expr lr = g.lambda_expr(c2, 1);
    auto P1 = prolong_sigma(std::vector<VectorField>{R}, MatrixExpr::identity(1).scaled(lr), n);
    require(compare_fields(P1[0].field, prolong_lambda(R, lr, n).field, cfg).equal,
            "r=1 Sigma != Lambda");

    VectorField Q1 = g.vertical(c2), Q2 = g.vertical(c2);
    fields += 2;
    MatrixExpr L = g.matrix(c2, 2, 1);
    auto Pc = prolong_chi({Q1, Q2}, L, MatrixExpr(2, 2), n);
    require(compare_fields(Pc[0].field, prolong_mu(Q1, {L}, n).field, cfg).equal &&
                compare_fields(Pc[1].field, prolong_mu(Q2, {L}, n).field, cfg).equal,
            "Chi(Lambda, 0) != Mu(Lambda)");

    VectorField V1 = g.vertical(c2), V2 = g.vertical(c2);
    fields += 2;
    Expr lc = g.lambda_expr(c2, 1);
    MatrixExpr Sg = g.matrix(c2, 2, 1);
    auto Pchi = prolong_chi({V1, V2}, MatrixExpr::identity(2).scaled(lc), Sg, n);
    auto Psig = prolong_sigma(std::vector<VectorField>{V1, V2},
                              Sg + MatrixExpr::identity(2).scaled(lc), n);
    require(compare_fields(Pchi[0].field, Psig[0].field, cfg).equal &&
                compare_fields(Pchi[1].field, Psig[1].field, cfg).equal,
            "Chi(lambda I, sigma) != Sigma(lambda I + sigma)");
  }
  return std::to_string(fields) + " fuzzed fields across 7 lattice rows";
}

/* ---- criterion 2: prolongation respects the bracket ---- */

std::string bracket_pairs() {
  int pairs = 0;
  for (int i = 0; i < 100; ++i) {
    Gen g(2000 + static_cast<std::uint64_t>(i));
    JetContext c(1, 1 + i % 3, 3);
    VectorField X = g.liepoint(c);
    VectorField Y = g.liepoint(c);
    BracketCheck bc = verify_prolong_commutator(X, Y, 2, cfg);
    require(bc.ok, "pair " + std::to_string(i) + ": " + bc.detail);
    ++pairs;
  }
  return std::to_string(pairs) + " lie-point pairs";
}

/* ---- criterion 3: gauge diagrams, forward and inverse ---- */

std::string gauge_diagrams() {
  int checks = 0;
  for (int i = 0; i < 50; ++i) {
    Gen g(3000 + static_cast<std::uint64_t>(i));
    JetContext c1(1, 1, 3);
    GaugeScalar beta = make_gauge_scalar(c1, g.nowhere_zero(c1), cfg);
    VectorField X = g.liepoint(c1);
    require(verify_gauge_lambda(X, beta, 2, GaugeDirection::Forward, cfg).ok,
            "lambda diagram forward, round " + std::to_string(i));
    require(verify_gauge_lambda(X, beta, 2, GaugeDirection::Inverse, cfg).ok,
            "lambda diagram inverse, round " + std::to_string(i));

    JetContext c2(1, 2, 3);
    GaugeMatrix A = make_gauge_matrix(c2, g.invertible_matrix(c2, 2), GaugeRole::VectorIndex, cfg);
    VectorField Q = g.vertical(c2);
    require(verify_gauge_mu(Q, A, 2, GaugeDirection::Forward, cfg).ok,
            "mu diagram forward, round " + std::to_string(i));
    require(verify_gauge_mu(Q, A, 2, GaugeDirection::Inverse, cfg).ok,
            "mu diagram inverse, round " + std::to_string(i));

    GaugeMatrix Ga = make_gauge_matrix(c2, g.invertible_matrix(c2, 2), GaugeRole::ModuleIndex, cfg);
    std::vector<VectorField> fam = {g.liepoint(c2), g.liepoint(c2)};
    require(verify_gauge_sigma(fam, Ga, 2, GaugeDirection::Forward, cfg).ok,
            "sigma diagram forward, round " + std::to_string(i));
    require(verify_gauge_sigma(fam, Ga, 2, GaugeDirection::Inverse, cfg).ok,
            "sigma diagram inverse, round " + std::to_string(i));
    checks += 6;
  }
  return std::to_string(checks) + " diagram checks (lambda/mu/sigma, both directions)";
}

/* ---- criterion 4: pure-gauge flatness and the non-flat example ---- */

std::string maurer_cartan() {
  JetContext cp(2, 2, 2);
  for (int i = 0; i < 50; ++i) {
    Gen g(4000 + static_cast<std::uint64_t>(i));
    GaugeMatrix A = make_gauge_matrix(cp, g.invertible_matrix(cp, 2), GaugeRole::VectorIndex, cfg);
    auto L = mu_from_A(cp, A, GaugeDirection::Forward, cfg);
    require(check_maurer_cartan(cp, L, cfg).ok, "pure gauge not flat, round " + std::to_string(i));
  }
  MatrixExpr Z(2, 2);
  MatrixExpr XI = MatrixExpr::identity(2).scaled(cp.x(0));
  MaurerCartanReport rep = check_maurer_cartan(cp, {Z, XI}, cfg);
  require(!rep.ok, "hand-built non-flat twist passed");
  require(!rep.residuals.empty(), "no residual reported");
  const MatrixExpr& R = rep.residuals[0];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      require(eq(R.at(a, b), a == b ? Expr::number(1) : Expr::number(0)),
              "residual not the identity");
  return "50 pure-gauge twists flat; non-flat example leaves residual I";
}

/* ---- criterion 5: mu difference decomposition ---- */

std::string mu_decomposition() {
  for (int i = 0; i < 50; ++i) {
    Gen g(5000 + static_cast<std::uint64_t>(i));
    JetContext c(1, 2, 3);
    VectorField Q = g.vertical(c);
    MatrixExpr L = g.matrix(c, 2, 1);
    MuDifference d = mu_difference(Q, {L}, 2, cfg);
    require(d.verified, "decomposition unverified, round " + std::to_string(i));

    VectorField zero = make_vector_field(c, {Expr::number(0)},
                                         {Expr::number(0), Expr::number(0)});
    MuDifference dz = mu_difference(zero, {L}, 2, cfg);
    for (const MultiIndex& J : dz.F.ctx.indices()) {
      if (J.order() > dz.F.order) continue;
      for (int a = 0; a < 2; ++a)
        require(numerically_zero(dz.F.coeff(a, J), cfg), "F != 0 for vanishing characteristic");
    }
  }
  return "50 fuzzed decompositions verified; F vanishes with the characteristic";
}

/* ---- criterion 6: invariants by differentiation ---- */

std::string ibdp() {
  JetContext oc(1, 1, 2);
  MultiIndex J1 = MultiIndex::zero(1).plus(0), J2 = J1.plus(0);
  Expr c = Expr::symbol("c");
  VectorField du = make_vector_field(oc, {Expr::number(0)}, {Expr::number(1)});
  std::vector<ProlongedField> Yl = {prolong_lambda(du, c, 2)};
  Expr zeta = oc.u(0, J1) - c * oc.u(0);
  Expr ext = ibdp_next(Yl, oc.x(0), zeta, cfg);
  require(eq(ext, oc.u(0, J2) - c * oc.u(0, J1)), "lambda chain extension wrong");
  ProlongedField Y3 = prolong_lambda(du, c, 3);
  require(numerically_zero(simplify(Y3.field.apply(ext)), cfg),
          "extension not annihilated by the prolonged field");

  JetContext c2(1, 2, 4);
  VectorField W1 = make_vector_field(c2, {Expr::number(0)}, {Expr::number(1), Expr::number(0)});
  VectorField W2 = make_vector_field(c2, {Expr::number(0)}, {c2.x(0), Expr::number(1)});
  for (int i = 0; i < 20; ++i) {
    Gen g(6000 + static_cast<std::uint64_t>(i));
    MatrixExpr G = g.unimodular_x(c2, 2);
    MatrixExpr Sg = (G.total_derivative(c2, 0) * G.inverse()).scaled(Expr::number(-1));
    std::vector<VectorField> fam;
    for (int al = 0; al < 2; ++al) {
      std::vector<Expr> phi(2, Expr::number(0));
      for (int a = 0; a < 2; ++a)
        phi[a] = simplify(G.at(al, 0) * W1.phi[a] + G.at(al, 1) * W2.phi[a]);
      fam.push_back(make_vector_field(c2, {Expr::number(0)}, std::move(phi)));
    }
    auto Ps = prolong_sigma(fam, Sg, 2);
    InvariantSearch s = find_first_invariants(Ps, 1, cfg);
    require(s.invariants.size() == 3,
            "sigma system " + std::to_string(i) + ": expected 3 first invariants, got " +
                std::to_string(s.invariants.size()));
    Expr z1;
    bool found = false;
    for (const Expr& inv : s.invariants) {
      for (const ProlongedField& f : Ps)
        require(numerically_zero(simplify(f.field.apply(inv)), cfg),
                "reported invariant not annihilated");
      if (!found && c2.jet_order(inv) >= 1) {
        z1 = inv;
        found = true;
      }
    }
    require(found, "no order-1 invariant reported");
    Expr next = ibdp_next(Ps, c2.x(0), z1, cfg);
    auto P3 = prolong_sigma(fam, Sg, 3);
    for (const ProlongedField& f : P3)
      require(numerically_zero(simplify(f.field.apply(next)), cfg),
              "extended invariant not annihilated");
  }

  JetContext v2(1, 2, 2);
  MatrixExpr L(2, 2);
  L.at(0, 1) = v2.x(0);
  VectorField Q = make_vector_field(v2, {Expr::number(0)}, {v2.u(0), v2.u(1)});
  ProlongedField Ym = prolong_mu(Q, {L}, 2, false, cfg);
  bool refused = false;
  try {
    ibdp_next({Ym}, v2.x(0), v2.u(0, MultiIndex::zero(1).plus(0)), cfg);
  } catch (const EligibilityError& e) {
    refused = std::string(e.what()).find("twist not IBDP-eligible") != std::string::npos;
  }
  require(refused, "general mu twist not refused");
  return "lambda chain extends to u_[2] - c*u_[1]; 20 sigma systems; general mu refused";
}

/* ---- criterion 7: commutator identities on random test functions ---- */

std::string commutator_identities() {
  for (int i = 0; i < 20; ++i) {
    Gen g(7000 + static_cast<std::uint64_t>(i));
    JetContext c1(1, 1 + i % 2, 3);
    VectorField X = g.liepoint(c1);
    auto rl = commutator_identity_report({prolong_lambda(X, g.lambda_expr(c1, 1), 2)}, cfg);
    require(rl[0].ok, "lambda identity, round " + std::to_string(i));

    JetContext c2(1, 2, 3);
    std::vector<VectorField> fam = {g.liepoint(c2), g.liepoint(c2)};
    auto rs = commutator_identity_report(prolong_sigma(fam, g.matrix(c2, 2, 1), 2), cfg);
    require(rs[0].ok && rs[1].ok, "sigma identity, round " + std::to_string(i));

    std::vector<VectorField> vfam = {g.vertical(c2), g.vertical(c2)};
    Expr lam = g.lambda_expr(c2, 1);
    auto rc = commutator_identity_report(
        prolong_chi(vfam, MatrixExpr::identity(2).scaled(lam), g.matrix(c2, 2, 1), 2), cfg);
    require(rc[0].ok && rc[1].ok, "chi identity, round " + std::to_string(i));
  }
  return "20 fuzzed instances each for the lambda, sigma and chi identities";
}

/* ---- criterion 8: end-to-end lambda reduction ---- */

std::string end_to_end_reduction() {
  JetContext oc(1, 1, 2);
  MultiIndex J1 = MultiIndex::zero(1).plus(0), J2 = J1.plus(0);
  Expr c = Expr::symbol("c");
  VectorField du = make_vector_field(oc, {Expr::number(0)}, {Expr::number(1)});
  Expr zeta = oc.u(0, J1) - c * oc.u(0);
  OdeSystem delta = make_ode_system(oc, {c * oc.u(0, J1) + zeta * zeta});

  ProlongedField Y = prolong_lambda(du, c, 2);
  require(check_symmetry(delta, Y, cfg).ok, "lambda symmetry not certified");

  InvariantChain chain = make_invariant_chain({Y}, oc.x(0), {zeta}, cfg);
  InvariantReduction red = reduce_by_invariants(delta, chain, 3, cfg);
  require(red.ok && red.solved.has_value(), "reduction did not solve");
  const JetContext& rc = red.solved->ctx;
  require(eq(red.solved->rhs[0], rc.u(0) * rc.u(0)), "reduced equation is not z_x = z^2");

  // z_x = z^2 integrates to z = 1/(K - x); pull the family back through
  // z = u_x - c u and substitute into the original equation
  Expr K = Expr::symbol("K");
  Expr w = Expr::number(1) / (K - oc.x(0));
  Expr ux = c * oc.u(0) + w;
  Expr uxx = c * ux + w * w;
  Subst fam;
  fam[oc.u(0, J1).symbol_id()] = ux;
  fam[oc.u(0, J2).symbol_id()] = uxx;
  // compare the two sides of the equation on the family; a raw residual-vs-0
  // check would hold ulp noise near the K = x pole to an absolute tolerance
  Expr lhs = substitute(oc.u(0, J2), fam);
  Expr rhs = substitute(c * oc.u(0, J1) + zeta * zeta, fam);
  require(equal_numeric(lhs, rhs, cfg).equal, "family does not satisfy the equation");
  return "symmetry certified, z_[1] = z^2 reduced, one-parameter family checks out";
}

/* ---- criterion 9: symmetry verdicts are gauge-stable ---- */

std::string verdict_stability() {
  for (int i = 0; i < 20; ++i) {
    Gen g(9000 + static_cast<std::uint64_t>(i));
    JetContext oc(1, 1, 2);
    MultiIndex J1 = MultiIndex::zero(1).plus(0);
    VectorField du = make_vector_field(oc, {Expr::number(0)}, {Expr::number(1)});
    VectorField dx = make_vector_field(oc, {Expr::number(1)}, {Expr::number(0)});
    Expr c = Expr::symbol("c");

    struct Scenario {
      OdeSystem good;
      OdeSystem spoiled;
      ProlongedField Y;
    };
    Scenario sc = [&]() -> Scenario {
      switch (i % 3) {
        case 0: {
          Expr F = g.poly({oc.x(0), oc.u(0, J1)}, 2, 2);
          return {make_ode_system(oc, {F}), make_ode_system(oc, {F + oc.u(0)}),
                  prolong(du, 2)};
        }
        case 1: {
          Expr F = g.poly({oc.u(0), oc.u(0, J1)}, 2, 2);
          return {make_ode_system(oc, {F}), make_ode_system(oc, {F + oc.x(0)}),
                  prolong(dx, 2)};
        }
        default: {
          Expr zeta = oc.u(0, J1) - c * oc.u(0);
          Expr G = g.poly({oc.x(0), zeta}, 2, 2);
          return {make_ode_system(oc, {c * oc.u(0, J1) + G}),
                  make_ode_system(oc, {c * oc.u(0, J1) + G + oc.u(0)}),
                  prolong_lambda(du, c, 2)};
        }
      }
    }();
    const OdeSystem& good = sc.good;
    const OdeSystem& spoiled = sc.spoiled;
    const ProlongedField& Y = sc.Y;
    Expr gamma = g.nowhere_zero(oc);
    require(check_symmetry(good, Y, cfg).ok, "base verdict not ok, round " + std::to_string(i));
    require(check_symmetry(good, Y.field.scaled(gamma), cfg).ok,
            "rescaling flipped an ok verdict, round " + std::to_string(i));
    require(!check_symmetry(spoiled, Y, cfg).ok,
            "spoiled equation passed, round " + std::to_string(i));
    require(!check_symmetry(spoiled, Y.field.scaled(gamma), cfg).ok,
            "rescaling flipped a failure verdict, round " + std::to_string(i));
  }
  return "20 fuzzed equations, verdicts stable under nowhere-zero rescaling";
}

/* ---- criterion 10: parser round trips and CLI reproducibility ---- */

std::string run_tool(const std::string& prob, int& exit_code) {
  std::string cmd = "'" + tool_path + "' run --problem '" + prob + "' 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  require(pipe != nullptr, "cannot launch " + tool_path);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  int status = pclose(pipe);
  exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

std::string parser_and_cli() {
  JetContext oc(1, 1, 3);
  int trips = 0;
  for (int i = 0; i < 1000; ++i) {
    Gen g(10000 + static_cast<std::uint64_t>(i));
    Expr e = g.expr_tree(oc, 1 + i % 4);
    ParseResult r = parse_expression(e.str(), oc, {"c"});
    require(r.ok(), "round trip " + std::to_string(i) + " failed to parse: " + e.str());
    require(r.expr->same(e), "round trip " + std::to_string(i) + " changed the tree: " + e.str());
    ++trips;
  }

  MultiIndex J1 = MultiIndex::zero(1).plus(0);
  ParseResult a = parse_expression("u_[1] - 3/2*u", oc);
  require(a.ok() && a.expr->same(oc.u(0, J1) - Expr::number(Rational(3) / 2) * oc.u(0)),
          "grammar example 1");
  ParseResult b = parse_expression("exp(x)^2", oc);
  require(b.ok() && b.expr->same(Expr::pow(Expr::call(Func::Exp, oc.x(0)), Expr::number(2))),
          "grammar example 2");
  ParseResult d = parse_expression("2x", oc);
  require(!d.ok() && d.diagnostic->message == "expected operator" && d.diagnostic->offset == 1,
          "grammar example 3");

  int probs = 0;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(problems_dir))
    if (entry.path().extension() == ".prob") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  require(!files.empty(), "no .prob files under " + problems_dir);
  for (const auto& f : files) {
    int code1 = 0, code2 = 0;
    std::string run1 = run_tool(f.string(), code1);
    std::string run2 = run_tool(f.string(), code2);
    require(!run1.empty(), f.filename().string() + ": empty report");
    require(run1 == run2, f.filename().string() + ": reports differ between runs");
    require(code1 == code2, f.filename().string() + ": exit codes differ between runs");
    ++probs;
  }
  return std::to_string(trips) + " round trips, 3 grammar examples, " + std::to_string(probs) +
         " problem files byte-reproducible";
}

int failures = 0;

void criterion(int number, const std::function<std::string()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  try {
    std::string detail = body();
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    std::printf("criterion %d: PASS (%s; %lld ms)\n", number, detail.c_str(),
                static_cast<long long>(ms));
  } catch (const std::exception& e) {
    std::printf("criterion %d: FAIL (%s)\n", number, e.what());
    ++failures;
  }
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  tool_path = argc > 1 ? argv[1] : "build/tools/tsym";
  problems_dir = argc > 2 ? argv[2] : "problems";

  criterion(1, degeneration_lattice);
  criterion(2, bracket_pairs);
  criterion(3, gauge_diagrams);
  criterion(4, maurer_cartan);
  criterion(5, mu_decomposition);
  criterion(6, ibdp);
  criterion(7, commutator_identities);
  criterion(8, end_to_end_reduction);
  criterion(9, verdict_stability);
  criterion(10, parser_and_cli);

  if (failures) {
    std::printf("%d criteria failed\n", failures);
    return 1;
  }
  std::printf("all criteria pass\n");
  return 0;
}
