#ifndef MARQ_BENCH_HPP
#define MARQ_BENCH_HPP

#include "marq/driver.hpp"
#include "marq/problems.hpp"

namespace marq {

/// Number of worker threads: explicit request, else MARQ_THREADS, else the
/// hardware concurrency.
int resolve_threads(int requested);

/// One minimization of the benchmark problem. The report gets seed and RMSE
/// filled in. multilevel = false runs the one-level method on the top grid.
RunReport run_grid_method(const GridHierarchy& gh, const ProblemDescriptor& d,
                          const SolverConfig& cfg, int q, bool multilevel,
                          const Observer& observer = {});

/// Runs both methods on `reps` repetitions with seeds base.seed + r, the
/// same random initial guess feeding both methods of a repetition.
/// Repetitions execute on a worker pool.
std::vector<RepPair> run_comparison(const ProblemDescriptor& base, int reps,
                                    const SolverConfig& cfg, int q,
                                    int threads = 0);

}  // namespace marq

#endif  // MARQ_BENCH_HPP
