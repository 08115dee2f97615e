#ifndef MARQ_AUDIT_HPP
#define MARQ_AUDIT_HPP

#include <string>
#include <vector>

#include "marq/bench.hpp"

namespace marq {

struct AuditCheck {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // observed worst value of the checked quantity
  double bound = 0.0;   // what it must stay below (0 when not a bound test)
  std::string note;
};

struct AuditOptions {
  int q = 2;
  bool corrupt_transfer = false;  // fault injection: breaks P = 4 R^T
};

/// Executes the library invariant suite on small instances; every check is
/// deterministic. Fails loudly rather than throwing.
std::vector<AuditCheck> run_audit_checks(const AuditOptions& opts);

/// Random cubic subproblem instance used by the oracle-agreement checks:
/// entries of g and B uniform in [-2,2], B symmetrized, lambda in
/// [0.05, 5], filtered so an a-priori step bound fits inside the grid box.
struct RandomCubicInstance {
  Vector g;
  SymMat B;
  double lambda = 1.0;
};

RandomCubicInstance sample_cubic_instance(std::uint64_t seed, int dim,
                                          double max_step_bound);

/// Two-level recursion with identity transfers on a convex quartic must
/// reproduce a one-level run on the corrected model. Returns the largest
/// per-iterate trajectory difference (NaN when the lengths differ).
double identity_collapse_margin(int dim, std::uint64_t seed,
                                const SolverConfig& cfg, int q);

}  // namespace marq

#endif  // MARQ_AUDIT_HPP
