#include "tsym/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace tsym {

std::vector<std::uint32_t> collect_symbols(const std::vector<Expr>& exprs) {
  std::vector<std::uint32_t> ids;
  for (const Expr& e : exprs) {
    const auto& f = e.free_symbols();
    std::vector<std::uint32_t> merged;
    std::set_union(ids.begin(), ids.end(), f.begin(), f.end(), std::back_inserter(merged));
    ids = std::move(merged);
  }
  // order by name, not by intern id, so sampling does not depend on the order
  // in which symbols happened to be created
  std::sort(ids.begin(), ids.end(), [](std::uint32_t a, std::uint32_t b) {
    return symbol_name(a) < symbol_name(b);
  });
  return ids;
}

Valuation sample_point(const std::vector<Expr>& exprs, SampleRng& rng, const EqualityConfig& cfg) {
  auto ids = collect_symbols(exprs);
  for (int attempt = 0; attempt <= cfg.max_resamples; ++attempt) {
    Valuation pt;
    for (std::uint32_t id : ids) pt[id] = rng.uniform(-cfg.box, cfg.box);
    bool ok = true;
    for (const Expr& e : exprs) {
      if (!eval_numeric(e, pt)) {
        ok = false;
        break;
      }
    }
    if (ok) return pt;
  }
  throw SingularRegionError("expression singular on box");
}

EqualityReport equal_numeric(const Expr& a, const Expr& b, const EqualityConfig& cfg) {
  if (cfg.samples < 1) throw InputError("equal_numeric: sample count must be >= 1");
  if (cfg.rtol <= 0 || cfg.atol <= 0) throw InputError("equal_numeric: tolerances must be > 0");

  std::vector<std::uint32_t> ids = collect_symbols({a, b});
  SampleRng rng(cfg.seed);
  EqualityReport rep;

  for (int s = 0; s < cfg.samples; ++s) {
    double va = 0, vb = 0;
    bool have = false;
    for (int attempt = 0; attempt <= cfg.max_resamples; ++attempt) {
      Valuation pt;
      for (std::uint32_t id : ids) pt[id] = rng.uniform(-cfg.box, cfg.box);
      auto ra = eval_numeric(a, pt);
      auto rb = eval_numeric(b, pt);
      if (!ra || !rb) {
        ++rep.resamples_used;
        if (attempt == cfg.max_resamples)
          throw SingularRegionError("expression singular on box");
        continue;
      }
      va = *ra;
      vb = *rb;
      have = true;
      double diff = std::fabs(va - vb);
      double thr = cfg.atol + cfg.rtol * std::max(std::fabs(va), std::fabs(vb));
      double margin = diff - thr;
      if (margin > rep.worst_margin) {
        rep.worst_margin = margin;
        rep.worst_abs = diff;
        rep.worst_lhs = va;
        rep.worst_rhs = vb;
        rep.worst_point.clear();
        for (std::uint32_t id : ids) rep.worst_point.emplace_back(symbol_name(id), pt[id]);
      }
      if (diff > thr) rep.equal = false;
      break;
    }
    if (!have) throw SingularRegionError("expression singular on box");
    ++rep.samples_used;
  }
  return rep;
}

std::optional<Rational> snap_rational(double v, long max_den, double tol) {
  if (!std::isfinite(v)) return std::nullopt;
  double scale = std::max(1.0, std::fabs(v));
  // continued-fraction convergents
  double x = v;
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int i = 0; i < 64; ++i) {
    double fl = std::floor(x);
    if (fl > 9e17 || fl < -9e17) break;
    long long ai = static_cast<long long>(fl);
    long long p2 = ai * p1 + p0;
    long long q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    double approx = static_cast<double>(p1) / static_cast<double>(q1);
    if (std::fabs(approx - v) <= tol * scale) return Rational(p1, q1);
    double frac = x - fl;
    if (frac < 1e-15) break;
    x = 1.0 / frac;
  }
  if (q1 != 0) {
    double approx = static_cast<double>(p1) / static_cast<double>(q1);
    if (std::fabs(approx - v) <= tol * scale) return Rational(p1, q1);
  }
  return std::nullopt;
}

}  // namespace tsym
