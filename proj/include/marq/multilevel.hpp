#ifndef MARQ_MULTILEVEL_HPP
#define MARQ_MULTILEVEL_HPP

#include <optional>
#include <vector>

#include "marq/model.hpp"

namespace marq {

/// Prolongation/restriction pair between two adjacent levels, P = alpha R^T.
struct TransferPair {
  SparseMatrix P;  // n_fine x n_coarse
  SparseMatrix R;  // n_coarse x n_fine
  double alpha = 1.0;
  double norm_P = 0.0;  // 2-norm estimates, recorded at construction
  double norm_R = 0.0;

  int n_fine() const { return static_cast<int>(P.rows()); }
  int n_coarse() const { return static_cast<int>(P.cols()); }
};

/// Nine-point interpolation between nested square grids with zero Dirichlet
/// boundary; fine side has 2*n1d_coarse interior points per dimension and the
/// restriction is R = P^T / 4 (alpha = 4). Stencil rows falling on the
/// boundary are truncated without renormalization.
TransferPair build_grid_transfer(int n1d_coarse);

TransferPair identity_transfer(int n);

/// Coarse objective plus the correction terms that make its derivatives at
/// s = 0 match the restricted fine derivatives up to order q.
struct CoarseModel {
  ObjectiveOracle coarse_oracle;
  Vector x0H;  // R x_fine
  Vector v;    // R g_fine - grad f_H(x0H)
  SymMat M;    // R B_fine P - hess f_H(x0H); empty when q = 1
  int q = 2;
};

CoarseModel build_coarse_model(const Vector& fine_g, const SymMat& fine_B,
                               const Vector& x_fine, const TransferPair& pair,
                               const ObjectiveOracle& coarse_oracle, int q);

double coarse_value(const CoarseModel& cm, const Vector& s);
Vector coarse_grad(const CoarseModel& cm, const Vector& s);
SymMat coarse_hess(const CoarseModel& cm, const Vector& s);

/// Wraps the corrected model as a plain objective in absolute coarse
/// coordinates (evaluated at y = x0H + s), so it can be minimized from x0H by
/// the same machinery as any other level. Copies the model into the closures.
ObjectiveOracle as_oracle(CoarseModel cm);

/// Eq.-style descend test: the restricted gradient must carry a fraction
/// kappa_H of the fine gradient and exceed the coarse tolerance eps_H.
bool should_descend(const Vector& fine_g, const SparseMatrix& R,
                    double kappa_H, double eps_H);

/// One level of a hierarchy: the objective at that resolution and, except at
/// the coarsest level, the transfer pair down to the next one.
struct Level {
  ObjectiveOracle oracle;
  std::optional<TransferPair> down;  // between this level and the coarser one
  int n1d = 0;                       // grid metadata; 0 for non-grid levels
};

/// Levels ordered coarsest first; back() is the top (finest) level.
struct LevelHierarchy {
  std::vector<Level> levels;

  int depth() const { return static_cast<int>(levels.size()); }
  const Level& top() const { return levels.back(); }
};

}  // namespace marq

#endif  // MARQ_MULTILEVEL_HPP
