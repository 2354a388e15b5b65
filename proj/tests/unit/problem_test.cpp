#include <string>

#include "doctest.h"
#include "json.hpp"
#include "tsym/errors.hpp"
#include "tsym/problem.hpp"

using namespace tsym;

TEST_CASE("lambda reduction problem end to end") {
  std::string text =
      "# lambda reduction of u_xx = c u_x + (u_x - c u)^2\n"
      "[context]\n"
      "q = 1\n"
      "p = 1\n"
      "n = 2\n"
      "params = c\n"
      "[vectorfields]\n"
      "X = 0 ; 1\n"
      "[twist]\n"
      "kind = lambda\n"
      "lambda = c\n"
      "[equations]\n"
      "u = c*u_[1] + (u_[1] - c*u)^2\n"
      "[tasks]\n"
      "prolong\n"
      "check-symmetry\n"
      "reduce; eta = x; first = u_[1] - c*u\n"
      "[oracle]\n"
      "seed = 7\n";
  ProblemFile pf = parse_problem(text, "lambda.prob");
  CHECK(pf.ctx.q() == 1);
  CHECK(pf.ctx.p() == 1);
  CHECK(pf.ctx.n() == 2);
  REQUIRE(pf.params.size() == 1);
  CHECK(pf.params[0] == "c");
  REQUIRE(pf.fields.size() == 1);
  CHECK(pf.fields[0].first == "X");
  CHECK(std::holds_alternative<TwistLambda>(pf.twist));
  CHECK(pf.ode.has_value());
  CHECK(pf.tasks.size() == 3);
  CHECK(pf.oracle.seed == 7);

  RunResult r = run_problem(pf);
  CHECK(r.exit_code == 0);
  CHECK(r.text.find("status: ok") != std::string::npos);
  CHECK(r.text.find("solved: z_[1] = z^2") != std::string::npos);

  RunResult r2 = run_problem(pf);
  CHECK(r.text == r2.text);
  CHECK(r.json_text == r2.json_text);

  // verb filter runs a single synthesized task
  RunOptions opt;
  opt.verb = "check-symmetry";
  RunResult rv = run_problem(pf, opt);
  CHECK(rv.exit_code == 0);
  CHECK(rv.text.find("task 1: check-symmetry") != std::string::npos);
}

TEST_CASE("incompatible mu twist exits 1") {
  std::string text =
      "[context]\n"
      "q = 2\n"
      "p = 2\n"
      "n = 2\n"
      "[vectorfields]\n"
      "Q = 0 ; 0 ; u2 ; u1\n"
      "[twist]\n"
      "kind = mu\n"
      "matrix = L1\n"
      "0 ; 0\n"
      "0 ; 0\n"
      "matrix = L2\n"
      "x1 ; 0\n"
      "0 ; x1\n"
      "[tasks]\n"
      "check-mc\n";
  ProblemFile pf = parse_problem(text, "mc.prob");
  RunResult r = run_problem(pf);
  CHECK(r.exit_code == 1);
  CHECK(r.text.find("compatibility fails") != std::string::npos);
  CHECK(r.text.find("residual row 0: 1 ; 0") != std::string::npos);
}

TEST_CASE("task twist overrides and empty task list") {
  std::string text =
      "[context]\n"
      "q = 1\n"
      "p = 1\n"
      "n = 2\n"
      "[vectorfields]\n"
      "X = 0 ; u\n"
      "[tasks]\n"
      "prolong lambda=0\n"
      "prolong; twist = standard\n";
  ProblemFile pf = parse_problem(text, "zero.prob");
  RunResult r = run_problem(pf);
  CHECK(r.exit_code == 0);
  nlohmann::ordered_json doc = nlohmann::ordered_json::parse(r.json_text);
  std::string a = doc["tasks"][0]["fields"][0]["coefficients"].dump();
  std::string b = doc["tasks"][1]["fields"][0]["coefficients"].dump();
  CHECK(a == b);

  ProblemFile empty = parse_problem("[context]\nq = 1\np = 1\nn = 1\n", "empty.prob");
  RunResult re = run_problem(empty);
  CHECK(re.exit_code == 0);
}

TEST_CASE("diagnostics carry file and line") {
  CHECK_THROWS_WITH_AS(
      parse_problem("[context]\nq = 1\np = 1\nn = 1\n[vectorfields]\nX = 1\n", "bad.prob"),
      doctest::Contains("bad.prob:6"), InputError);
  CHECK_THROWS_AS(parse_problem("[context]\nq = 1\n[vectorfields]\nX = 1 ; 1\n", "inc.prob"),
                  InputError);
  CHECK_THROWS_WITH_AS(
      parse_problem("[context]\nq = 1\np = 1\nn = 1\n[bogus]\n", "sec.prob"),
      doctest::Contains("sec.prob:5"), InputError);
  CHECK_THROWS_WITH_AS(parse_problem("q = 1\n", "pre.prob"),
                       doctest::Contains("content before any [section] header"), InputError);
  CHECK_THROWS_WITH_AS(
      parse_problem("[context]\nq = 1\np = 1\nn = 1\n[tasks]\nfrobnicate\n", "verb.prob"),
      doctest::Contains("unknown task verb"), InputError);
}

TEST_CASE("report header and summary lines") {
  std::string text =
      "[context]\n"
      "q = 1\n"
      "p = 1\n"
      "n = 2\n"
      "[vectorfields]\n"
      "X = 0 ; 1\n"
      "[tasks]\n"
      "commutator-identity\n"
      "[oracle]\n"
      "samples = 13\n";
  ProblemFile pf = parse_problem(text, "hdr.prob");
  RunResult r = run_problem(pf);
  CHECK(r.exit_code == 0);
  CHECK(r.text.find("problem: hdr.prob") != std::string::npos);
  CHECK(r.text.find("seed: 0") != std::string::npos);
  CHECK(r.text.find("samples: 13") != std::string::npos);
  CHECK(r.text.find("summary: 1 tasks, 1 ok, 0 failed, 0 errors") != std::string::npos);
  CHECK(r.text.find("exit: 0") != std::string::npos);

  // unknown argument in a task is an input error, not a crash
  std::string bad =
      "[context]\nq = 1\np = 1\nn = 2\n[vectorfields]\nX = 0 ; 1\n"
      "[tasks]\nprolong; bogus = 1\n";
  ProblemFile pb = parse_problem(bad, "arg.prob");
  RunResult rb = run_problem(pb);
  CHECK(rb.exit_code == 2);
  CHECK(rb.text.find("input error") != std::string::npos);
  CHECK(rb.text.find("unknown argument") != std::string::npos);
}
