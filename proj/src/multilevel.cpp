#include "marq/multilevel.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace marq {

TransferPair build_grid_transfer(int n1d_coarse) {
  if (n1d_coarse < 1)
    throw std::invalid_argument("build_grid_transfer: n1d_coarse < 1");
  const int nc = n1d_coarse;
  const int nf = 2 * nc;
  const int n_coarse = nc * nc;
  const int n_fine = nf * nf;

  // Coarse interior vertex (I, J) (0-based) sits on fine vertex
  // (2I + 1, 2J + 1); the stencil spreads weight 1, 1/2, 1/4 over the
  // surrounding 3x3 fine patch. Weights landing on the Dirichlet boundary
  // are dropped.
  const double w1[3] = {0.5, 1.0, 0.5};
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n_coarse) * 9);
  for (int J = 0; J < nc; ++J) {
    for (int I = 0; I < nc; ++I) {
      const int col = I + J * nc;
      const int ci = 2 * I + 1;
      const int cj = 2 * J + 1;
      for (int dj = -1; dj <= 1; ++dj) {
        const int fj = cj + dj;
        if (fj < 0 || fj >= nf) continue;
        for (int di = -1; di <= 1; ++di) {
          const int fi = ci + di;
          if (fi < 0 || fi >= nf) continue;
          trip.emplace_back(fi + fj * nf, col, w1[di + 1] * w1[dj + 1]);
        }
      }
    }
  }
  TransferPair t;
  t.P.resize(n_fine, n_coarse);
  t.P.setFromTriplets(trip.begin(), trip.end());
  t.R = 0.25 * SparseMatrix(t.P.transpose());
  t.alpha = 4.0;
  t.norm_P = two_norm_estimate(t.P);
  t.norm_R = two_norm_estimate(t.R);
  return t;
}

TransferPair identity_transfer(int n) {
  TransferPair t;
  t.P = sparse_identity(n);
  t.R = sparse_identity(n);
  t.alpha = 1.0;
  t.norm_P = 1.0;
  t.norm_R = 1.0;
  return t;
}

CoarseModel build_coarse_model(const Vector& fine_g, const SymMat& fine_B,
                               const Vector& x_fine, const TransferPair& pair,
                               const ObjectiveOracle& coarse_oracle, int q) {
  if (q != 1 && q != 2)
    throw std::invalid_argument("build_coarse_model: q must be 1 or 2");
  if (pair.R.cols() != fine_g.size() || x_fine.size() != fine_g.size())
    throw std::invalid_argument("build_coarse_model: fine dims disagree");
  if (pair.R.rows() != coarse_oracle.dim)
    throw std::invalid_argument("build_coarse_model: coarse dims disagree");
  CoarseModel cm;
  cm.q = q;
  cm.coarse_oracle = coarse_oracle;
  cm.x0H = pair.R * x_fine;
  cm.v = pair.R * fine_g - coarse_oracle.gradient(cm.x0H);
  if (q == 2) {
    if (fine_B.dim() != fine_g.size())
      throw std::invalid_argument("build_coarse_model: fine_B dim");
    cm.M = galerkin_product(pair.R, fine_B, pair.P);
    cm.M.add_scaled(coarse_oracle.hessian(cm.x0H), -1.0);
  }
  return cm;
}

static void check_dim(const CoarseModel& cm, const Vector& s) {
  if (s.size() != cm.x0H.size())
    throw std::invalid_argument("coarse model: dimension mismatch");
}

double coarse_value(const CoarseModel& cm, const Vector& s) {
  check_dim(cm, s);
  double val = cm.coarse_oracle.value(cm.x0H + s) + cm.v.dot(s);
  if (cm.q == 2) val += 0.5 * cm.M.quad(s);
  return val;
}

Vector coarse_grad(const CoarseModel& cm, const Vector& s) {
  check_dim(cm, s);
  Vector grad = cm.coarse_oracle.gradient(cm.x0H + s) + cm.v;
  if (cm.q == 2) grad += cm.M.apply(s);
  return grad;
}

SymMat coarse_hess(const CoarseModel& cm, const Vector& s) {
  check_dim(cm, s);
  SymMat h = cm.coarse_oracle.hessian(cm.x0H + s);
  h.add_scaled(cm.M, 1.0);
  return h;
}

ObjectiveOracle as_oracle(CoarseModel cm) {
  auto shared = std::make_shared<const CoarseModel>(std::move(cm));
  ObjectiveOracle o;
  o.dim = static_cast<int>(shared->x0H.size());
  o.value = [shared](const Vector& y) {
    return coarse_value(*shared, y - shared->x0H);
  };
  o.gradient = [shared](const Vector& y) {
    return coarse_grad(*shared, y - shared->x0H);
  };
  if (shared->q == 2 && shared->coarse_oracle.has_hessian())
    o.hessian = [shared](const Vector& y) {
      return coarse_hess(*shared, y - shared->x0H);
    };
  return o;
}

bool should_descend(const Vector& fine_g, const SparseMatrix& R,
                    double kappa_H, double eps_H) {
  const double rg = (R * fine_g).norm();
  return rg >= kappa_H * fine_g.norm() && rg > eps_H;
}

}  // namespace marq
