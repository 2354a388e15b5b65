#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tsym/expr.hpp"

namespace tsym {

/* Settings for randomized numeric equality testing.  The seed is part of the
 * configuration on purpose: every run of a check is reproducible, and reports
 * echo the seed they used. */
struct EqualityConfig {
  int samples = 25;
  double box = 2.0;  // sample points are drawn uniformly from [-box, box]
  double rtol = 1e-9;
  double atol = 1e-12;
  std::uint64_t seed = 0;
  int max_resamples = 10;  // singular-point retries per sample
};

/* Deterministic uniform double generator.  std::uniform_real_distribution is
 * implementation-defined, so we map raw mt19937_64 output to [0,1) ourselves
 * to keep sample sequences identical everywhere. */
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }
  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

struct EqualityReport {
  bool equal = true;
  int samples_used = 0;
  int resamples_used = 0;
  double worst_abs = 0.0;        // largest |lhs - rhs| seen
  double worst_margin = -1.0;    // largest |lhs-rhs| - (atol + rtol*max(|lhs|,|rhs|))
  double worst_lhs = 0.0;
  double worst_rhs = 0.0;
  std::vector<std::pair<std::string, double>> worst_point;  // symbol name -> value
};

/* Compares two expressions numerically at randomized sample points over the
 * union of their free symbols.  Singular points are redrawn up to
 * max_resamples times per sample; running out throws SingularRegionError
 * ("expression singular on box"). */
EqualityReport equal_numeric(const Expr& a, const Expr& b, const EqualityConfig& cfg);

inline bool numerically_zero(const Expr& e, const EqualityConfig& cfg) {
  return equal_numeric(e, Expr::number(0), cfg).equal;
}

/* Draws one non-singular sample point for the given expressions (all free
 * symbols of all of them).  Used by rank tests and fitting code that needs
 * consistent sampling semantics.  Throws SingularRegionError when no regular
 * point is found. */
Valuation sample_point(const std::vector<Expr>& exprs, SampleRng& rng, const EqualityConfig& cfg);

/* Sorted union of the free symbols of a set of expressions. */
std::vector<std::uint32_t> collect_symbols(const std::vector<Expr>& exprs);

/* Snap a floating value to a nearby small rational (continued fractions).
 * Returns nullopt if nothing within tol has denominator <= max_den. */
std::optional<Rational> snap_rational(double v, long max_den = 1000000, double tol = 1e-7);

}  // namespace tsym
