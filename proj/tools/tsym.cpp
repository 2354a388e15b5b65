#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tsym/errors.hpp"
#include "tsym/problem.hpp"

namespace {

struct CommonOpts {
  std::string problem;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<double> rtol;
  std::string report_path;
  std::string json_path;
};

void add_common(CLI::App* sub, CommonOpts& o, std::uint64_t& seed_raw, int& samples_raw,
                double& rtol_raw) {
  sub->add_option("--problem", o.problem, "problem file to load")->required();
  sub->add_option("--seed", seed_raw, "oracle sampling seed");
  sub->add_option("--samples", samples_raw, "oracle sample count");
  sub->add_option("--rtol", rtol_raw, "oracle relative tolerance");
  sub->add_option("--report", o.report_path, "write the plain-text report to this path");
  sub->add_option("--json", o.json_path, "write the JSON result document to this path");
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"twisted prolongations of vector fields on jet spaces"};
  app.require_subcommand(1);

  struct Verb {
    const char* name;
    const char* help;
  };
  const Verb verbs[] = {
      {"run", "execute every task in the problem file"},
      {"prolong", "print twisted prolongation coefficient tables"},
      {"check-symmetry", "verify twisted symmetries of the declared equations"},
      {"check-strong", "verify symmetries without restricting to the solution manifold"},
      {"check-mc", "check zero-curvature compatibility of a mu twist"},
      {"gauge-verify", "verify gauge equivalence diagrams"},
      {"invariants", "search a polynomial ansatz for joint invariants"},
      {"ibdp-extend", "derive the next invariant by implicit differentiation"},
      {"reduce", "reduce the order of the declared equations"},
      {"involution", "fit and verify structure functions of a family"},
      {"commutator-identity", "check twisted commutator identities"},
  };

  CommonOpts opts;
  std::uint64_t seed_raw = 0;
  int samples_raw = 0;
  double rtol_raw = 0;
  std::string chosen;
  for (const Verb& v : verbs) {
    CLI::App* sub = app.add_subcommand(v.name, v.help);
    add_common(sub, opts, seed_raw, samples_raw, rtol_raw);
    sub->callback([&chosen, name = std::string(v.name), sub, &opts, &seed_raw, &samples_raw,
                   &rtol_raw]() {
      chosen = name;
      if (sub->count("--seed")) opts.seed = seed_raw;
      if (sub->count("--samples")) opts.samples = samples_raw;
      if (sub->count("--rtol")) opts.rtol = rtol_raw;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    tsym::ProblemFile pf = tsym::load_problem(opts.problem);
    tsym::RunOptions ro;
    ro.verb = chosen == "run" ? "" : chosen;
    ro.seed = opts.seed;
    ro.samples = opts.samples;
    ro.rtol = opts.rtol;
    tsym::RunResult res = tsym::run_problem(pf, ro);
    std::fputs(res.text.c_str(), stdout);
    if (!opts.report_path.empty() && !write_file(opts.report_path, res.text)) {
      std::fprintf(stderr, "cannot write report to '%s'\n", opts.report_path.c_str());
      return 2;
    }
    if (!opts.json_path.empty() && !write_file(opts.json_path, res.json_text)) {
      std::fprintf(stderr, "cannot write JSON document to '%s'\n", opts.json_path.c_str());
      return 2;
    }
    return res.exit_code;
  } catch (const tsym::InternalError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  } catch (const tsym::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
}
