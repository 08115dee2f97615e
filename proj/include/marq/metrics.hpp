#ifndef MARQ_METRICS_HPP
#define MARQ_METRICS_HPP

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "marq/linalg.hpp"

namespace marq {

enum class ModelKind { taylor, coarse };

enum class Termination { gradient_tol, max_iters, wall_budget, flop_budget };

const char* to_string(ModelKind k);
const char* to_string(Termination t);

struct IterationRecord {
  int level = 0;
  int iterate_index = 0;
  ModelKind model_kind = ModelKind::taylor;
  double rho = std::numeric_limits<double>::quiet_NaN();  // NaN: not computed
  double lambda = 0.0;     // regularization weight used at this iteration
  double step_norm = 0.0;  // fine-level step norm (prolongated for coarse)
  double f_value = 0.0;    // objective after the acceptance decision
  double grad_norm = 0.0;  // gradient norm at the iterate before the step
  bool successful = false;
  double flops_this_iter = 0.0;  // factorization flops spent at this level
};

/// Margins recorded by the in-run coherence checks (audit mode).
struct AuditSummary {
  int recursion_entries = 0;
  double max_first_order = 0.0;   // |grad m(0) - R g| / (1 + |g|)
  double max_second_order = 0.0;  // |s^T (hess m(0) - R B P) s| / |s|^2
};

struct RunReport {
  bool converged = false;
  Termination termination = Termination::max_iters;
  int it_T = 0;  // total top-level iterations
  int it_f = 0;  // top-level iterations that used the Taylor model
  std::vector<double> per_level_flops;        // index 0 = coarsest level
  std::vector<double> per_level_flops_dense;  // same, billed as dense
  std::vector<int> per_level_iterations;
  double rmse_final = std::numeric_limits<double>::quiet_NaN();
  std::vector<IterationRecord> trace;  // top level only; length it_T
  double wall_time_sec = 0.0;
  Vector x_final;
  double f_final = 0.0;
  double grad_norm_final = 0.0;
  double lambda_final = 0.0;
  double lambda_max_seen = 0.0;  // max lambda over the top-level trace
  std::uint64_t seed = 0;
  int q = 2;
  AuditSummary audit;

  double total_flops() const;
  double total_flops_dense() const;
};

/// Factorization-flop ratio of the one-level run over the multilevel run,
/// all levels included. Throws if the multilevel run performed no
/// factorization work (cannot happen for a converged run).
double save_ratio(const RunReport& one_level, const RunReport& multilevel);

struct MethodStats {
  int runs = 0;
  int converged_runs = 0;
  double mean_it_T = 0.0;   // over converged runs
  double mean_it_f = 0.0;
  double mean_rmse = 0.0;
  double mean_flops = 0.0;
};

/// One repetition: both methods started from the same initial guess.
struct RepPair {
  std::uint64_t seed = 0;
  RunReport one_level;
  RunReport multilevel;
};

struct ComparisonSummary {
  MethodStats one_level;
  MethodStats multilevel;
  double save_min = std::numeric_limits<double>::quiet_NaN();
  double save_avg = std::numeric_limits<double>::quiet_NaN();
  double save_max = std::numeric_limits<double>::quiet_NaN();
  int pairs_in_save = 0;  // repetitions where both methods converged
};

/// Arithmetic means over the converged runs of one method.
MethodStats method_stats(const std::vector<RunReport>& reports);

/// Summary over paired repetitions; failed runs are excluded from the save
/// statistics and reported through the per-method convergence counts.
ComparisonSummary aggregate(const std::vector<RepPair>& reps);

/// CSV trace writer, one row per top-level iteration. Columns:
/// iter,level,model,successful,rho,lambda,step_norm,f,grad_norm,flops
void write_trace_csv(std::ostream& os, const RunReport& report);

/// JSON object for a report (solution vector omitted).
std::string report_to_json(const RunReport& report, int indent = -1);

std::string summary_to_json(const ComparisonSummary& s, int indent = -1);

}  // namespace marq

#endif  // MARQ_METRICS_HPP
