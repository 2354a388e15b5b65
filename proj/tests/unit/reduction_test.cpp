#include "doctest.h"
#include "tsym/errors.hpp"
#include "tsym/oracle.hpp"
#include "tsym/prolong.hpp"
#include "tsym/reduction.hpp"

using namespace tsym;

namespace {
const EqualityConfig cfg;
bool eq(const Expr& a, const Expr& b) { return equal_numeric(a, b, cfg).equal; }
}  // namespace

TEST_CASE("symmetry verdicts") {
  JetContext oc(1, 1, 2);
  MultiIndex J1 = MultiIndex::zero(1).plus(0);
  Expr c = Expr::symbol("c");
  VectorField du = make_vector_field(oc, {Expr::number(0)}, {Expr::number(1)});

  OdeSystem flat = make_ode_system(oc, {Expr::number(0)});
  CHECK(check_symmetry(flat, prolong(du, 2), cfg).ok);

  Expr zeta = oc.u(0, J1) - c * oc.u(0);
  OdeSystem twisted = make_ode_system(oc, {c * oc.u(0, J1) + zeta * zeta});
  CHECK(check_symmetry(twisted, prolong_lambda(du, c, 2), cfg).ok);

  OdeSystem expu = make_ode_system(oc, {oc.u(0)});
  CHECK_FALSE(check_symmetry(expu, prolong_lambda(du, Expr::number(0), 2), cfg).ok);

  VectorField dx = make_vector_field(oc, {Expr::number(1)}, {Expr::number(0)});
  OdeSystem auton = make_ode_system(oc, {oc.u(0, J1)});
  CHECK(check_strong_symmetry(auton, prolong(dx, 2), cfg).ok);
  OdeSystem forced = make_ode_system(oc, {oc.x(0)});
  SymmetryVerdict sv = check_strong_symmetry(forced, prolong(dx, 2), cfg);
  CHECK_FALSE(sv.ok);
  CHECK(sv.strong);

  // rescaling the prolonged field never changes the verdict
  ProlongedField Yl = prolong_lambda(du, c, 2);
  Expr gamma = Expr::number(1) + oc.u(0) * oc.u(0);
  CHECK(check_symmetry(twisted, Yl.field.scaled(gamma), cfg).ok);
  ProlongedField Y0 = prolong_lambda(du, Expr::number(0), 2);
  CHECK_FALSE(check_symmetry(expu, Y0.field.scaled(gamma), cfg).ok);
}

TEST_CASE("invariant-by-differentiation steps") {
  JetContext oc(1, 1, 2);
  MultiIndex J1 = MultiIndex::zero(1).plus(0), J2 = J1.plus(0);
  Expr c = Expr::symbol("c");
  VectorField du = make_vector_field(oc, {Expr::number(0)}, {Expr::number(1)});

  std::vector<ProlongedField> Ys = {prolong(du, 2)};
  CHECK(eq(ibdp_next(Ys, oc.x(0), oc.u(0, J1), cfg), oc.u(0, J2)));

  std::vector<ProlongedField> Yl = {prolong_lambda(du, c, 2)};
  Expr zeta = oc.u(0, J1) - c * oc.u(0);
  CHECK(eq(ibdp_next(Yl, oc.x(0), zeta, cfg), oc.u(0, J2) - c * oc.u(0, J1)));

  JetContext v2(1, 2, 2);
  MatrixExpr L(2, 2);
  L.at(0, 1) = v2.x(0);
  VectorField Q = make_vector_field(v2, {Expr::number(0)}, {v2.u(0), v2.u(1)});
  ProlongedField Ym = prolong_mu(Q, {L}, 2, false, cfg);
  MultiIndex K1 = MultiIndex::zero(1).plus(0);
  CHECK_THROWS_WITH_AS(ibdp_next({Ym}, v2.x(0), v2.u(0, K1), cfg),
                       doctest::Contains("twist not IBDP-eligible"), EligibilityError);

  CHECK_THROWS_WITH_AS(ibdp_next(Ys, Expr::number(3), oc.u(0, J1), cfg),
                       doctest::Contains("degenerate invariant pair"), InputError);

  // non-invariant inputs are rejected
  CHECK_THROWS_WITH_AS(ibdp_next(Ys, oc.x(0), oc.u(0), cfg),
                       doctest::Contains("inputs not invariant"), InputError);
}

TEST_CASE("first invariants search") {
  JetContext oc(1, 1, 2);
  MultiIndex J1 = MultiIndex::zero(1).plus(0);
  Expr c = Expr::symbol("c");
  VectorField du = make_vector_field(oc, {Expr::number(0)}, {Expr::number(1)});

  InvariantSearch s1 = find_first_invariants({prolong(du, 2)}, 1, cfg);
  bool has_x = false, has_ux = false;
  for (const Expr& e : s1.invariants) {
    if (eq(e, oc.x(0))) has_x = true;
    if (eq(e, oc.u(0, J1))) has_ux = true;
  }
  CHECK(has_x);
  CHECK(has_ux);

  InvariantSearch s2 = find_first_invariants({prolong_lambda(du, c, 2)}, 2, cfg);
  Expr zeta = oc.u(0, J1) - c * oc.u(0);
  bool has_zeta = false;
  for (const Expr& e : s2.invariants)
    if (eq(e, zeta)) has_zeta = true;
  CHECK(has_zeta);

  VectorField dx = make_vector_field(oc, {Expr::number(1)}, {Expr::number(0)});
  VectorField xdu = make_vector_field(oc, {Expr::number(0)}, {oc.x(0)});
  InvariantSearch s3 =
      find_first_invariants({prolong(du, 2), prolong(dx, 2), prolong(xdu, 2)}, 1, cfg);
  CHECK(s3.invariants.empty());
  CHECK(s3.note == "no invariants in ansatz");
}

TEST_CASE("adapted coordinate reduction") {
  JetContext oc(1, 1, 2);
  MultiIndex J1 = MultiIndex::zero(1).plus(0);
  OdeSystem sq = make_ode_system(oc, {oc.u(0, J1) * oc.u(0, J1)});
  AdaptedReduction r1 = reduce_adapted(sq, 0, cfg);
  REQUIRE(r1.uniform.has_value());
  CHECK(eq(r1.rhs[0], r1.ctx.u(0) * r1.ctx.u(0)));

  JetContext o3(1, 1, 3);
  AdaptedReduction r2 = reduce_adapted(make_ode_system(o3, {Expr::number(0)}), 0, cfg);
  REQUIRE(r2.uniform.has_value());
  CHECK(r2.uniform->order() == 2);
  CHECK(r2.rhs[0].is_zero());

  CHECK_THROWS_WITH_AS(reduce_adapted(make_ode_system(oc, {oc.u(0)}), 0, cfg),
                       doctest::Contains("coordinates not adapted"), InputError);
}

TEST_CASE("reduction through an invariant chain") {
  JetContext oc(1, 1, 2);
  MultiIndex J1 = MultiIndex::zero(1).plus(0);
  Expr c = Expr::symbol("c");
  VectorField du = make_vector_field(oc, {Expr::number(0)}, {Expr::number(1)});
  Expr zeta = oc.u(0, J1) - c * oc.u(0);
  OdeSystem twisted = make_ode_system(oc, {c * oc.u(0, J1) + zeta * zeta});

  InvariantChain chain = make_invariant_chain({prolong_lambda(du, c, 2)}, oc.x(0), {zeta}, cfg);
  InvariantReduction red = reduce_by_invariants(twisted, chain, 3, cfg);
  CHECK(red.ok);
  CHECK(red.dependent[0]);
  REQUIRE(red.solved.has_value());
  CHECK(eq(red.solved->rhs[0], red.solved->ctx.u(0) * red.solved->ctx.u(0)));

  OdeSystem expu = make_ode_system(oc, {oc.u(0)});
  InvariantChain plain = make_invariant_chain({prolong(du, 2)}, oc.x(0), {oc.u(0, J1)}, cfg);
  CHECK_THROWS_WITH_AS(reduce_by_invariants(expu, plain, 3, cfg),
                       doctest::Contains("symmetry check failed"), InputError);

  OdeSystem flat = make_ode_system(oc, {Expr::number(0)});
  InvariantReduction red2 = reduce_by_invariants(flat, plain, 2, cfg);
  CHECK(red2.ok);
  REQUIRE(red2.solved.has_value());
  CHECK(red2.solved->rhs[0].is_zero());
}

TEST_CASE("invariant solutions") {
  JetContext oc(1, 1, 2);
  VectorField dx = make_vector_field(oc, {Expr::number(1)}, {Expr::number(0)});
  OdeSystem flat = make_ode_system(oc, {Expr::number(0)});
  Expr k = Expr::symbol("k");
  InvariantSolutionReport r1 = invariant_solution_check(flat, {dx}, {k}, cfg);
  CHECK(r1.ok);
  InvariantSolutionReport r2 = invariant_solution_check(flat, {dx}, {oc.x(0)}, cfg);
  CHECK(r2.solution);
  CHECK_FALSE(r2.invariant);
  OdeSystem expu = make_ode_system(oc, {oc.u(0)});
  InvariantSolutionReport r3 = invariant_solution_check(expu, {dx}, {Expr::number(0)}, cfg);
  CHECK(r3.ok);
}
