#ifndef MARQ_DRIVER_HPP
#define MARQ_DRIVER_HPP

#include <functional>
#include <optional>

#include "marq/metrics.hpp"
#include "marq/multilevel.hpp"
#include "marq/subproblem.hpp"

namespace marq {

enum class RecursionForm { free_form, fixed_form };
enum class DescendPolicy { always_when_allowed, alternate };

struct SolverConfig {
  double eta1 = 0.1;
  double eta2 = 0.75;
  double gamma1 = 0.85;
  double gamma2 = 0.5;
  double gamma3 = 2.0;
  double lambda_min = 1e-8;
  double lambda0 = 0.05;
  double theta = 0.5;
  double kappa_H = 0.1;
  // Gradient tolerances indexed coarsest level first; a single entry is
  // broadcast to every level.
  std::vector<double> eps_per_level = {1e-7};
  int max_outer_iters = 1000;
  int max_coarse_iters = 50;
  // Fixed-form (V-cycle-like) recursion: a coarse visit ends after
  // max_successful_coarse successful iterations, keeping every recursive
  // step damped by the lambda handed down from the finer level. Free-form
  // instead minimizes the corrected model to its gradient tolerance.
  RecursionForm recursion = RecursionForm::fixed_form;
  int max_successful_coarse = 1;
  DescendPolicy descend = DescendPolicy::always_when_allowed;
  double pred_floor_coef = 1e-16;
  int max_secular_iters = 100;
  double wall_budget_sec = 600.0;  // 0 = unlimited
  double flop_budget = 0.0;        // factorization flops; 0 = unlimited
  bool audit_mode = false;  // verify coherence at every recursion entry

  /// Throws std::invalid_argument when any ordering constraint is violated
  /// or eps_per_level does not match the hierarchy depth.
  void validate(int levels = 1) const;

  double eps_at(int level, int depth) const;
};

/// Per-iteration observer payload; references are valid only for the call.
struct IterationEvent {
  int level = 0;
  int iterate_index = 0;
  ModelKind model_kind = ModelKind::taylor;
  const Vector& x;     // iterate before the step
  const Vector& step;  // step at this level (prolongated for coarse models)
  double coarse_step_norm = 0.0;  // |s_H| before prolongation; 0 for Taylor
  double rho = 0.0;
  double lambda = 0.0;
  bool successful = false;
  double f_before = 0.0;
  double f_after = 0.0;
  double grad_norm_before = 0.0;
};

using Observer = std::function<void(const IterationEvent&)>;

/// ared/pred, or nothing when pred is below the floor
/// pred_floor_coef * (1 + |f_ref|); such iterations are classified
/// unsuccessful without performing the division.
std::optional<double> compute_rho(double ared, double pred, double f_ref,
                                  double pred_floor_coef = 1e-16);

/// Regularization parameter update rule.
double update_lambda(double rho, double lambda, const SolverConfig& cfg);

/// Adaptive regularization of order q on a single level.
RunReport arq_minimize(const ObjectiveOracle& oracle, const Vector& x0,
                       const SolverConfig& cfg, int q,
                       const Observer& observer = {});

/// Recursive multilevel variant; with a depth-1 hierarchy it reproduces
/// arq_minimize trace for trace.
RunReport marq_minimize(const LevelHierarchy& hierarchy, const Vector& x0,
                        const SolverConfig& cfg, int q,
                        const Observer& observer = {});

/// Checks the regularization-parameter ceiling lambda_max = K/(1 - eta1)
/// with K = (q+1)/q * L_estimate, allowing one overshoot factor gamma3 and
/// an optional slack for the sampling error in L_estimate. The start value
/// lambda0 is always admissible.
bool lambda_ceiling_check(const RunReport& report, double L_estimate,
                          const SolverConfig& cfg, double slack = 1.0);

std::string solver_config_to_json(const SolverConfig& cfg, int indent = -1);

}  // namespace marq

#endif  // MARQ_DRIVER_HPP
