#include "marq/bench.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace marq {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MARQ_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

RunReport run_grid_method(const GridHierarchy& gh, const ProblemDescriptor& d,
                          const SolverConfig& cfg, int q, bool multilevel,
                          const Observer& observer) {
  const Vector x0 = random_init(gh.top().dim(), d.a, d.seed);
  RunReport r;
  if (multilevel) {
    r = marq_minimize(gh.hierarchy, x0, cfg, q, observer);
  } else {
    r = arq_minimize(gh.hierarchy.top().oracle, x0, cfg, q, observer);
  }
  r.seed = d.seed;
  r.rmse_final = rmse(r.x_final, gh.top());
  return r;
}

std::vector<RepPair> run_comparison(const ProblemDescriptor& base, int reps,
                                    const SolverConfig& cfg, int q,
                                    int threads) {
  if (reps < 1) throw std::invalid_argument("run_comparison: reps < 1");
  const GridHierarchy gh = build_hierarchy(base.n1d, base.levels, base.rhs);
  std::vector<RepPair> out(reps);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= reps) return;
      ProblemDescriptor d = base;
      d.seed = base.seed + static_cast<std::uint64_t>(r);
      RepPair pair;
      pair.seed = d.seed;
      pair.one_level = run_grid_method(gh, d, cfg, q, /*multilevel=*/false);
      pair.multilevel = run_grid_method(gh, d, cfg, q, /*multilevel=*/true);
      out[r] = std::move(pair);
    }
  };

  const int nthreads = std::min(resolve_threads(threads), reps);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return out;
}

}  // namespace marq
