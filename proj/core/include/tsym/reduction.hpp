#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsym/prolong.hpp"

namespace tsym {

/* Result of testing whether a (possibly twisted-prolonged) field is tangent
 * to the solution manifold of a solved-form system.  `residuals[k][a]` is the
 * action of field k on equation a, restricted to the solution manifold unless
 * `strong` is set, and simplified.  `ok` means every residual is numerically
 * zero. */
struct SymmetryVerdict {
  bool ok = false;
  bool strong = false;
  std::vector<std::vector<Expr>> residuals;  // [field][equation]
  double worst = 0.0;
};

/* Tangency test with restriction: the field is applied to each equation
 * u^a_lead - F^a, every coordinate covered by a lead is replaced by the
 * corresponding total-derivative consequence of the system (computed on
 * demand and memoized), and the remainder is oracle-tested against zero.
 * Fields must be prolonged to exactly the equation order.  A consequence
 * chain that never closes raises InputError("system not normal: restriction
 * incomplete"), as does a nonzero residual that still depends on derivatives
 * the system does not determine. */
SymmetryVerdict check_symmetry(const SolvedSystem& system, const std::vector<JetVectorField>& Y,
                               const EqualityConfig& cfg = {});
SymmetryVerdict check_symmetry(const SolvedSystem& system, const std::vector<ProlongedField>& Y,
                               const EqualityConfig& cfg = {});
SymmetryVerdict check_symmetry(const OdeSystem& system, const std::vector<ProlongedField>& Y,
                               const EqualityConfig& cfg = {});
SymmetryVerdict check_symmetry(const OdeSystem& system, const ProlongedField& Y,
                               const EqualityConfig& cfg = {});
SymmetryVerdict check_symmetry(const OdeSystem& system, const JetVectorField& Y,
                               const EqualityConfig& cfg = {});

/* Same residuals without any restriction: the field must annihilate the
 * equations identically on the full jet space. */
SymmetryVerdict check_strong_symmetry(const SolvedSystem& system,
                                      const std::vector<JetVectorField>& Y,
                                      const EqualityConfig& cfg = {});
SymmetryVerdict check_strong_symmetry(const SolvedSystem& system,
                                      const std::vector<ProlongedField>& Y,
                                      const EqualityConfig& cfg = {});
SymmetryVerdict check_strong_symmetry(const OdeSystem& system, const std::vector<ProlongedField>& Y,
                                      const EqualityConfig& cfg = {});
SymmetryVerdict check_strong_symmetry(const OdeSystem& system, const ProlongedField& Y,
                                      const EqualityConfig& cfg = {});

/* Invariants-by-differentiation is available for the standard prolongation,
 * lambda, mu with every matrix a scalar multiple of the identity, sigma, and
 * chi with scalar-multiple Lambda.  General mu twists do not preserve
 * invariance under this step. */
bool ibdp_eligible(const TwistSpec& twist, const EqualityConfig& cfg = {});

/* Next invariant D_i(zeta) / D_i(eta) along `direction`.  Re-prolongs the
 * sources of Y high enough to verify that the inputs and the output are
 * annihilated by every field.  Throws EligibilityError("twist not
 * IBDP-eligible"), InputError("inputs not invariant"), or
 * InputError("degenerate invariant pair") when D_i(eta) vanishes. */
Expr ibdp_next(const std::vector<ProlongedField>& Y, const Expr& eta, const Expr& zeta,
               const EqualityConfig& cfg = {}, int direction = 0);

/* A base invariant eta plus successive derived invariants.  levels[k] holds
 * the k-th derivation stage, one expression per member of levels[0]; the jet
 * order strictly increases with k. */
struct InvariantChain {
  std::vector<ProlongedField> fields;
  Expr eta;
  std::vector<std::vector<Expr>> levels;
};

/* Verifies that every field annihilates eta and every first-stage invariant
 * before assembling the chain. */
InvariantChain make_invariant_chain(std::vector<ProlongedField> fields, Expr eta,
                                    std::vector<Expr> first, const EqualityConfig& cfg = {});

/* Appends the next derivation stage via ibdp_next, componentwise. */
void extend_chain(InvariantChain& chain, const EqualityConfig& cfg = {}, int direction = 0);

struct InvariantSearch {
  std::vector<Expr> invariants;
  std::string note;  // "no invariants in ansatz" when the search came up empty
};

/* Searches a polynomial ansatz of bounded degree over the jet coordinates of
 * order <= 1 (plus any parameter symbols appearing in the fields) for joint
 * invariants of the given prolonged fields: kernel of the sampled action,
 * echelon-normalized, snapped to rational coefficients, and confirmed
 * symbolically.  Heuristic: may return fewer invariants than exist. */
InvariantSearch find_first_invariants(const std::vector<ProlongedField>& Y, int ansatz_degree,
                                      const EqualityConfig& cfg = {});

/* Order reduction in adapted coordinates, where the symmetry is translation
 * in the dependent variable `v`: substitutes w_(k) = v_(k+1).  Only the
 * v-equation drops an order, so for systems the result carries per-dependent
 * orders; `uniform` is filled in the single-dependent case. */
struct AdaptedReduction {
  JetContext ctx;                    // reduced coordinates (v replaced by w)
  std::vector<int> orders;           // per dependent
  std::vector<Expr> rhs;             // per dependent, in reduced coordinates
  std::string reconstruction;        // quadrature recovering v from w
  std::optional<OdeSystem> uniform;  // p == 1 only
};

AdaptedReduction reduce_adapted(const OdeSystem& ode, int v_index, const EqualityConfig& cfg = {});

/* Order reduction through an invariant chain.  `relations[a] = 0` is the
 * reduced equation in the coordinates of `ctx` (independent variable = eta,
 * dependents = first-stage invariants); `dictionary` maps each reduced
 * coordinate back to the invariant it stands for.  `solved` is present when
 * every relation is linear in its top derivative with a constant
 * coefficient. */
struct InvariantReduction {
  JetContext ctx;
  std::vector<Expr> relations;
  std::vector<bool> dependent;      // sampled Jacobian rank certificate
  std::vector<std::string> notes;   // per equation, empty when expressed
  bool ok = false;
  std::optional<OdeSystem> solved;
  std::vector<std::pair<std::string, Expr>> dictionary;
};

/* Verifies the chain's fields are symmetries of the system (throws
 * InputError("symmetry check failed") otherwise), extends the chain to the
 * equation order, certifies functional dependence of each equation on the
 * invariants at sample points, and fits a bounded-degree polynomial
 * expressing the equation through them.  An equation whose fit fails keeps
 * its dependency certificate and the note "not expressible in chain at
 * ansatz degree". */
InvariantReduction reduce_by_invariants(const OdeSystem& ode, const InvariantChain& chain,
                                        int ansatz_degree = 3, const EqualityConfig& cfg = {});

struct InvariantSolutionReport {
  bool invariant = false;  // every field is tangent to the section's graph
  bool solution = false;   // the section satisfies the system
  bool ok = false;         // both
  double worst_invariance = 0.0;
  double worst_solution = 0.0;
};

/* Substitutes the section u^a = f^a(x) into the characteristics of each
 * field and into the equations, and oracle-tests both. */
InvariantSolutionReport invariant_solution_check(const SolvedSystem& system,
                                                 const std::vector<VectorField>& fields,
                                                 const std::vector<Expr>& sections,
                                                 const EqualityConfig& cfg = {});
InvariantSolutionReport invariant_solution_check(const OdeSystem& system,
                                                 const std::vector<VectorField>& fields,
                                                 const std::vector<Expr>& sections,
                                                 const EqualityConfig& cfg = {});

}  // namespace tsym
