#ifndef MARQ_PROBLEMS_HPP
#define MARQ_PROBLEMS_HPP

#include <cstdint>
#include <memory>
#include <string>

#include "marq/multilevel.hpp"

namespace marq {

enum class RhsMode { discrete, analytic };

/// Finite-difference discretization of  -lap u + e^u = g  on the unit square
/// with zero Dirichlet boundary; interior points only, column-stacked
/// (x index fastest), 5-point Laplacian.
struct GridProblem {
  int n1d = 0;     // interior points per dimension
  double h = 0.0;  // mesh width 1/(n1d+1)
  SkylineMatrix A;
  Vector g_vec;
  Vector u_star;  // reference solution samples
  RhsMode rhs_mode = RhsMode::discrete;

  int dim() const { return n1d * n1d; }
};

/// Closed-form reference solution and its negative Laplacian.
double u_star_at(double x, double y);
double neg_laplacian_u_star_at(double x, double y);

/// In discrete mode the right-hand side is A u* + e^{u*}, making the sampled
/// u* the exact minimizer; in analytic mode it is sampled from the
/// continuous problem and u* is matched only up to discretization error.
GridProblem assemble_grid_problem(int n1d, RhsMode mode = RhsMode::discrete);

/// f(u) = 1/2 u^T A u + sum_i e^{u_i} - g^T u. Entries above 700 raise
/// ObjectiveOverflow.
ObjectiveOracle objective_oracle(std::shared_ptr<const GridProblem> p);

struct GridHierarchy {
  LevelHierarchy hierarchy;
  std::vector<std::shared_ptr<const GridProblem>> problems;  // coarsest first

  const GridProblem& top() const { return *problems.back(); }
};

/// Level l has n1d_top / 2^(levels-1-l) interior points per dimension, its
/// own discretization of the problem, and a grid transfer to level l-1.
GridHierarchy build_hierarchy(int n1d_top, int levels,
                              RhsMode mode = RhsMode::discrete);

double rmse(const Vector& u, const GridProblem& p);

/// Entries i.i.d. uniform on [0, a]; bit-reproducible for a given seed.
Vector random_init(int n, double a, std::uint64_t seed);

struct ProblemDescriptor {
  int n1d = 64;
  int levels = 4;
  std::uint64_t seed = 0;
  double a = 1.0;
  RhsMode rhs = RhsMode::discrete;
};

std::string descriptor_to_json(const ProblemDescriptor& d, int indent = -1);
ProblemDescriptor descriptor_from_json(const std::string& text);

}  // namespace marq

#endif  // MARQ_PROBLEMS_HPP
