#include "doctest.h"
#include "tsym/errors.hpp"
#include "tsym/oracle.hpp"
#include "tsym/prolong.hpp"

using namespace tsym;

namespace {
const EqualityConfig cfg;
bool eq(const Expr& a, const Expr& b) { return equal_numeric(a, b, cfg).equal; }
}  // namespace

TEST_CASE("standard prolongation desk tables") {
  JetContext c1(1, 1, 3);
  MultiIndex J0 = MultiIndex::zero(1);
  MultiIndex J1 = J0.plus(0), J2 = J1.plus(0);

  VectorField du = make_vector_field(c1, {Expr::number(0)}, {Expr::number(1)});
  ProlongedField P = prolong(du, 2);
  CHECK(eq(P.field.coeff(0, J1), Expr::number(0)));
  CHECK(eq(P.field.coeff(0, J2), Expr::number(0)));

  VectorField scale = make_vector_field(c1, {c1.x(0)}, {c1.u(0)});
  ProlongedField Ps = prolong(scale, 2);
  CHECK(eq(Ps.field.coeff(0, J1), Expr::number(0)));
  CHECK(eq(Ps.field.coeff(0, J2), -c1.u(0, J2)));

  // the textbook projective field x^2 d_x + x u d_u
  VectorField proj =
      make_vector_field(c1, {c1.x(0) * c1.x(0)}, {c1.x(0) * c1.u(0)});
  ProlongedField Pp = prolong(proj, 2);
  CHECK(eq(Pp.field.coeff(0, J1), c1.u(0) - c1.x(0) * c1.u(0, J1)));
  CHECK(eq(Pp.field.coeff(0, J2), Expr::number(-3) * c1.x(0) * c1.u(0, J2)));
}

TEST_CASE("lambda prolongation desk tables") {
  JetContext c1(1, 1, 3);
  MultiIndex J1 = MultiIndex::zero(1).plus(0), J2 = J1.plus(0);
  Expr c = Expr::symbol("c");
  VectorField du = make_vector_field(c1, {Expr::number(0)}, {Expr::number(1)});

  ProlongedField P = prolong_lambda(du, c, 2);
  CHECK(eq(P.field.coeff(0, J1), c));
  CHECK(eq(P.field.coeff(0, J2), c * c));

  ProlongedField Q = prolong_lambda(du, c1.u(0, J1), 1);
  CHECK(eq(Q.field.coeff(0, J1), c1.u(0, J1)));

  // q > 1 is refused
  JetContext pde(2, 1, 2);
  VectorField W = make_vector_field(pde, {Expr::number(0), Expr::number(0)}, {Expr::number(1)});
  CHECK_THROWS_AS(prolong_lambda(W, pde.x(0), 2), InputError);
}

TEST_CASE("mu prolongation and compatibility") {
  JetContext c2(1, 2, 3);
  MultiIndex J1 = MultiIndex::zero(1).plus(0);

  MatrixExpr L(2, 2);
  L.at(0, 0) = Expr::number(0);
  L.at(0, 1) = Expr::number(1);
  L.at(1, 0) = Expr::number(0);
  L.at(1, 1) = Expr::number(0);
  VectorField X = make_vector_field(c2, {Expr::number(0)}, {Expr::number(0), Expr::number(1)});
  ProlongedField P = prolong_mu(X, {L}, 2);
  CHECK(eq(P.field.coeff(0, J1), Expr::number(1)));
  CHECK(eq(P.field.coeff(1, J1), Expr::number(0)));

  JetContext cp(2, 2, 2);
  MatrixExpr Z(2, 2);
  MatrixExpr XI = MatrixExpr::identity(2).scaled(cp.x(0));
  MaurerCartanReport rep = check_maurer_cartan(cp, {Z, XI}, cfg);
  REQUIRE_FALSE(rep.ok);
  CHECK(eq(rep.residuals[0].at(0, 0), Expr::number(1)));
  CHECK(eq(rep.residuals[0].at(0, 1), Expr::number(0)));
  CHECK(eq(rep.residuals[0].at(1, 1), Expr::number(1)));
  VectorField Q = make_vector_field(cp, {Expr::number(0), Expr::number(0)}, {cp.u(0), cp.u(1)});
  CHECK_THROWS_AS(prolong_mu(Q, {Z, XI}, 2), InputError);

  // a pure gauge twist is flat and keeps the recursion path-consistent
  MatrixExpr A = MatrixExpr::identity(2);
  A.at(0, 1) = cp.x(0) + cp.u(0);
  MatrixExpr Ainv = A.inverse();
  std::vector<MatrixExpr> Lg;
  for (int i = 0; i < 2; ++i) Lg.push_back(Ainv * A.total_derivative(cp, i));
  CHECK(check_maurer_cartan(cp, Lg, cfg).ok);
  VectorField V = make_vector_field(cp, {Expr::number(0), Expr::number(0)}, {cp.u(1), cp.u(0)});
  ProlongedField Pg = prolong_mu(V, Lg, 2);
  CHECK(Pg.path_consistent);
  CHECK(Pg.path_residual < 1e-9);
}

TEST_CASE("sigma and chi prolongation") {
  JetContext c2(1, 2, 3);
  MultiIndex J1 = MultiIndex::zero(1).plus(0);
  MatrixExpr S(2, 2);
  S.at(0, 0) = Expr::number(0);
  S.at(0, 1) = Expr::number(1);
  S.at(1, 0) = Expr::number(0);
  S.at(1, 1) = Expr::number(0);
  VectorField X1 = make_vector_field(c2, {Expr::number(0)}, {Expr::number(1), Expr::number(0)});
  VectorField X2 = make_vector_field(c2, {Expr::number(0)}, {Expr::number(0), Expr::number(1)});
  auto Ps = prolong_sigma(std::vector<VectorField>{X1, X2}, S, 1);
  CHECK(eq(Ps[0].field.coeff(0, J1), Expr::number(0)));
  CHECK(eq(Ps[0].field.coeff(1, J1), Expr::number(1)));
  CHECK(eq(Ps[1].field.coeff(0, J1), Expr::number(0)));
  CHECK(eq(Ps[1].field.coeff(1, J1), Expr::number(0)));

  // family size must match the payload
  CHECK_THROWS_AS(prolong_sigma(std::vector<VectorField>{X1}, S, 1), InputError);
  // chi requires vertical fields
  VectorField H = make_vector_field(c2, {c2.x(0)}, {Expr::number(1), Expr::number(0)});
  CHECK_THROWS_AS(prolong_chi({H, X2}, MatrixExpr::identity(2), S, 1), InputError);
}

TEST_CASE("degeneration lattice desk checks") {
  JetContext c2(1, 2, 3);
  Expr lam = c2.x(0) * c2.u(0);
  MatrixExpr L = MatrixExpr::identity(2).scaled(lam);
  VectorField X = make_vector_field(c2, {c2.u(0)}, {c2.u(1), c2.x(0)});

  ProlongedField Pm = prolong_mu(X, {L}, 3);
  ProlongedField Pl = prolong_lambda(X, lam, 3);
  CHECK(compare_fields(Pm.field, Pl.field, cfg).equal);

  CHECK(compare_fields(prolong_lambda(X, Expr::number(0), 3).field, prolong(X, 3).field, cfg)
            .equal);
  CHECK(compare_fields(prolong_mu(X, {MatrixExpr(2, 2)}, 3).field, prolong(X, 3).field, cfg)
            .equal);

  MatrixExpr S(2, 2);
  S.at(0, 0) = c2.x(0);
  S.at(0, 1) = Expr::number(1);
  S.at(1, 0) = c2.u(1);
  S.at(1, 1) = Expr::number(0);
  VectorField W1 = make_vector_field(c2, {Expr::number(0)}, {c2.u(0), c2.x(0) * c2.u(1)});
  VectorField W2 = make_vector_field(c2, {Expr::number(0)}, {Expr::number(1), c2.u(0)});
  auto Pc = prolong_chi({W1, W2}, L, S, 3);
  MatrixExpr Ssum = S + MatrixExpr::identity(2).scaled(lam);
  auto Psig = prolong_sigma(std::vector<VectorField>{W1, W2}, Ssum, 3);
  for (int al = 0; al < 2; ++al) CHECK(compare_fields(Pc[al].field, Psig[al].field, cfg).equal);

  // single-member sigma family degenerates to lambda
  auto P1 = prolong_sigma(std::vector<VectorField>{W1}, MatrixExpr::identity(1).scaled(lam), 3);
  CHECK(compare_fields(P1[0].field, prolong_lambda(W1, lam, 3).field, cfg).equal);
}

TEST_CASE("twisted dispatch") {
  JetContext c1(1, 1, 2);
  VectorField X = make_vector_field(c1, {c1.x(0)}, {c1.u(0)});
  auto Pstd = prolong_twisted({X}, TwistStandard{}, 2, false, cfg);
  CHECK(compare_fields(Pstd[0].field, prolong(X, 2).field, cfg).equal);
  auto Plam = prolong_twisted({X}, TwistLambda{c1.u(0)}, 2, false, cfg);
  CHECK(compare_fields(Plam[0].field, prolong_lambda(X, c1.u(0), 2).field, cfg).equal);
  CHECK(std::string(twist_name(TwistLambda{c1.u(0)})) == "lambda");
  // payload entries above order 1 are rejected
  MultiIndex J2 = MultiIndex::zero(1).plus(0).plus(0);
  CHECK_THROWS_AS(validate_twist(c1, TwistLambda{c1.u(0, J2)}, 1), InputError);
}

TEST_CASE("mu difference tables") {
  JetContext c1(1, 1, 3);
  MultiIndex J0 = MultiIndex::zero(1), J1 = J0.plus(0);
  Expr lam = Expr::symbol("k") * c1.u(0);
  MatrixExpr L(1, 1);
  L.at(0, 0) = lam;
  Expr Q = c1.x(0) * c1.u(0);
  VectorField Xq = make_vector_field(c1, {Expr::number(0)}, {Q});
  MuDifference d = mu_difference(Xq, {L}, 2);
  CHECK(d.verified);
  CHECK(eq(d.F.coeff(0, J0), Expr::number(0)));
  CHECK(eq(d.F.coeff(0, J1), lam * Q));

  // the difference vanishes identically for a vanishing characteristic
  VectorField zero = make_vector_field(c1, {Expr::number(0)}, {Expr::number(0)});
  MuDifference dz = mu_difference(zero, {L}, 2);
  CHECK(dz.verified);
  for (const MultiIndex& J : dz.F.ctx.indices()) {
    if (J.order() > dz.F.order) continue;
    CHECK(numerically_zero(dz.F.coeff(0, J), cfg));
  }
}

TEST_CASE("commutator identities") {
  JetContext c1(1, 1, 3);
  JetContext c2(1, 2, 3);
  Expr c = Expr::symbol("c");
  MultiIndex J1 = MultiIndex::zero(1).plus(0);

  VectorField X = make_vector_field(c1, {c1.x(0)}, {c1.u(0) * c1.x(0)});
  CHECK(commutator_identity_report({prolong_lambda(X, c + c1.u(0, J1), 2)}, cfg)[0].ok);
  CHECK(commutator_identity_report({prolong(X, 2)}, cfg)[0].ok);

  MatrixExpr S(2, 2);
  S.at(0, 0) = c2.x(0);
  S.at(0, 1) = Expr::number(1);
  S.at(1, 0) = c2.u(1);
  S.at(1, 1) = Expr::number(0);
  VectorField W1 = make_vector_field(c2, {c2.x(0)}, {c2.u(0), c2.x(0) * c2.u(1)});
  VectorField W2 = make_vector_field(c2, {c2.u(1)}, {Expr::number(1), c2.u(0)});
  auto rep = commutator_identity_report(prolong_sigma(std::vector<VectorField>{W1, W2}, S, 2),
                                        cfg);
  CHECK(rep[0].ok);
  CHECK(rep[1].ok);

  Expr lam = c2.u(0);
  MatrixExpr LI = MatrixExpr::identity(2).scaled(lam);
  VectorField V1 = make_vector_field(c2, {Expr::number(0)}, {c2.u(0), c2.x(0)});
  VectorField V2 = make_vector_field(c2, {Expr::number(0)}, {Expr::number(1), c2.u(1)});
  auto repchi = commutator_identity_report(prolong_chi({V1, V2}, LI, S, 2), cfg);
  CHECK(repchi[0].ok);
  CHECK(repchi[1].ok);

  MatrixExpr NS(2, 2);
  NS.at(0, 1) = Expr::number(1);
  VectorField V = make_vector_field(c2, {Expr::number(0)}, {c2.u(0), c2.u(1)});
  ProlongedField Pmu = prolong_mu(V, {NS}, 2);
  CHECK_THROWS_AS(commutator_identity_report({Pmu}, cfg), EligibilityError);
}

TEST_CASE("prolongation respects the bracket") {
  JetContext c1(1, 1, 3);
  VectorField X = make_vector_field(c1, {c1.x(0)}, {c1.u(0)});
  VectorField Y = make_vector_field(c1, {Expr::number(1)}, {c1.x(0) * c1.u(0)});
  CHECK(verify_prolong_commutator(X, Y, 3, cfg).ok);
  VectorField C = commutator(X, Y);
  // [x d_x + u d_u, d_x + xu d_u] has xi = -1
  CHECK(eq(C.xi[0], Expr::number(-1)));
}

TEST_CASE("involution systems") {
  JetContext c1(1, 1, 3);
  JetContext c2(1, 2, 3);
  VectorField E1 = make_vector_field(c1, {Expr::number(1)}, {Expr::number(0)});
  VectorField E2 = make_vector_field(c1, {c1.x(0)}, {c1.u(0)});
  InvolutionSystem sys = check_involution({E1, E2}, cfg);
  CHECK_FALSE(sys.numeric_only);
  CHECK(eq(sys.f[0][1][0], Expr::number(1)));
  CHECK(eq(sys.f[0][1][1], Expr::number(0)));

  VectorField A = make_vector_field(c1, {Expr::number(0)}, {Expr::number(1)});
  VectorField B = make_vector_field(c1, {c1.u(0)}, {c1.x(0)});
  CHECK_THROWS_AS(check_involution({A, B}, cfg), InputError);

  VectorField D1 = make_vector_field(c2, {Expr::number(0)}, {Expr::number(1), Expr::number(0)});
  VectorField D2 = make_vector_field(c2, {Expr::number(0)}, {Expr::number(0), Expr::number(1)});
  InvolutionSystem com = check_involution({D1, D2}, cfg);
  MatrixExpr S(2, 2);
  S.at(0, 0) = c2.x(0);
  S.at(0, 1) = Expr::number(0);
  S.at(1, 0) = c2.x(0) * c2.x(0);
  S.at(1, 1) = Expr::number(0);
  SigmaInvolutionReport sr = sigma_involution_condition(com, S, 2, cfg);
  CHECK(sr.sufficient_ok);
  CHECK(sr.contracted_ok);

  MatrixExpr S2(2, 2);
  S2.at(1, 0) = c2.u(0);
  CHECK_FALSE(sigma_involution_condition(com, S2, 2, cfg).sufficient_ok);
}

TEST_CASE("evolutionary representative round trip") {
  JetContext c1(1, 1, 3);
  VectorField X = make_vector_field(c1, {c1.x(0) * c1.u(0)}, {Expr::symbol("c") * c1.u(0)});
  VectorField Q = evolutionary_rep(X);
  CHECK(Q.is_vertical());
  VectorField back = reconstruct_liepoint(c1, Q.phi, cfg);
  CHECK(eq(back.xi[0], X.xi[0]));
  CHECK(eq(back.phi[0], X.phi[0]));
  // a characteristic quadratic in u_x has no lie-point source
  MultiIndex J1 = MultiIndex::zero(1).plus(0);
  CHECK_THROWS_AS(reconstruct_liepoint(c1, {c1.u(0, J1) * c1.u(0, J1)}, cfg), InputError);
}
