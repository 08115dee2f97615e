#ifndef MARQ_SUBPROBLEM_HPP
#define MARQ_SUBPROBLEM_HPP

#include "marq/linalg.hpp"

namespace marq {

enum class SubproblemStatus { ok, iteration_cap };

struct SubproblemResult {
  Vector step;
  double model_decrease = 0.0;  // taylor(0) - taylor(step)
  double residual_norm = 0.0;   // |g + B s + lambda |s| s| at the step
  double sigma = 0.0;           // lambda * |step| at exit
  int factorizations = 0;
  double flops = 0.0;              // executed factorization flops
  double flops_dense_model = 0.0;  // same work billed as dense n^3/3 + 2n^2
  SubproblemStatus status = SubproblemStatus::ok;

  bool ok() const { return status == SubproblemStatus::ok; }
};

/// Order-1 regularized subproblem min g^T s + lambda/2 |s|^2; closed form.
SubproblemResult solve_q1(const Vector& g, double lambda);

/// Order-2 (cubic regularization) subproblem
///   min g^T s + 1/2 s^T B s + lambda/3 |s|^3
/// via Cholesky factorizations of B + sigma I and a safeguarded Newton
/// iteration on the secular equation |s(sigma)| = sigma/lambda. Handles
/// indefinite B, locating the positive-definiteness boundary with
/// factorization probes and escaping along a negative-curvature direction
/// in the hard case. theta = 0 means "solve to floating-point accuracy".
SubproblemResult solve_q2(const Vector& g, const SymMat& B, double lambda,
                          double theta = 0.5, int max_iters = 100);

/// Exhaustive grid search of the q=2 regularized model over
/// [-radius, radius]^dim with the given spacing. Test oracle; dim <= 3.
Vector grid_search_oracle(const Vector& g, const SymMat& B, double lambda,
                          double radius, double grid_step);

}  // namespace marq

#endif  // MARQ_SUBPROBLEM_HPP
