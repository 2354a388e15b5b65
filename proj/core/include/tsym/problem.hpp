#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsym/gauge.hpp"
#include "tsym/parse.hpp"
#include "tsym/reduction.hpp"

namespace tsym {

/* One line of the [tasks] block: a verb plus key = value arguments in file
 * order.  Repeated keys accumulate into list-valued arguments. */
struct ProblemTask {
  std::string verb;
  std::vector<std::pair<std::string, std::string>> args;
  int line = 0;
};

/* A problem file: line-oriented blocks under [section] headers.
 *
 *   [context]       q = 1 / p = 1 / n = 2, optional indep/dep name lists,
 *                   optional `params = c k` declaring free parameter symbols
 *   [vectorfields]  name = xi1 ; ... ; xiq ; phi1 ; ... ; phip
 *   [twist]         kind = standard|lambda|mu|sigma|chi, `lambda = expr`,
 *                   matrix blocks introduced by `matrix = name` with one
 *                   row per line, entries separated by `;`
 *   [equations]     dep = rhs, one solved-form equation per dependent
 *   [gauge]         scalar factors `name = expr` and matrix blocks as above
 *   [tasks]         verb lines, arguments separated by `;`
 *   [oracle]        samples / rtol / seed overrides
 *
 * `#` starts a comment anywhere on a line. */
struct ProblemFile {
  JetContext ctx{1, 1, 1};
  std::vector<std::string> params;
  std::vector<std::pair<std::string, VectorField>> fields;
  TwistSpec twist = TwistStandard{};
  bool has_twist = false;
  std::optional<OdeSystem> ode;
  std::vector<std::pair<std::string, Expr>> gauge_scalars;
  std::vector<std::pair<std::string, MatrixExpr>> gauge_matrices;
  std::vector<ProblemTask> tasks;
  EqualityConfig oracle;
  std::string source_path;
};

/* Parses and validates the text; throws InputError with "path:line:"
 * positions on any defect. */
ProblemFile parse_problem(const std::string& text, const std::string& path = "<input>");
ProblemFile load_problem(const std::string& path);

struct RunOptions {
  std::string verb;  // empty or "run" executes the whole [tasks] block
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<double> rtol;
};

/* Outcome of a run: the plain-text report, the machine-readable document
 * (serialized JSON, one result object per task), and the aggregated exit
 * code (0 ok, 1 verification failure, 2 input error, 3 internal error; the
 * worst over all tasks wins). */
struct RunResult {
  std::string text;
  std::string json_text;
  int exit_code = 0;
};

/* Executes the selected tasks in order.  A task error is recorded in the
 * report and the run continues with the next task.  Reports are
 * byte-identical across runs given the same file and options. */
RunResult run_problem(const ProblemFile& pf, const RunOptions& opt = {});

}  // namespace tsym
