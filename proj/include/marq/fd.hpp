#ifndef MARQ_FD_HPP
#define MARQ_FD_HPP

#include <functional>

#include "marq/linalg.hpp"

namespace marq {

/// Central-difference gradient of a scalar function.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f,
                          const Vector& x, double step = 1e-6) {
  const int n = static_cast<int>(x.size());
  Vector g(n);
  Vector xp = x;
  for (int i = 0; i < n; ++i) {
    const double xi = x[i];
    xp[i] = xi + step;
    const double fp = f(xp);
    xp[i] = xi - step;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

/// Central-difference Jacobian of a vector function (column i = d/dx_i).
inline DenseMatrix fd_jacobian(const std::function<Vector(const Vector&)>& g,
                               const Vector& x, double step = 1e-6) {
  const int n = static_cast<int>(x.size());
  DenseMatrix j;
  Vector xp = x;
  for (int i = 0; i < n; ++i) {
    const double xi = x[i];
    xp[i] = xi + step;
    const Vector gp = g(xp);
    xp[i] = xi - step;
    const Vector gm = g(xp);
    xp[i] = xi;
    if (j.size() == 0) j.resize(gp.size(), n);
    j.col(i) = (gp - gm) / (2.0 * step);
  }
  return j;
}

}  // namespace marq

#endif  // MARQ_FD_HPP
