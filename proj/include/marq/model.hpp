#ifndef MARQ_MODEL_HPP
#define MARQ_MODEL_HPP

#include <functional>
#include <stdexcept>

#include "marq/linalg.hpp"

namespace marq {

/// Thrown by an objective evaluation whose result would overflow; the
/// minimization loop treats the offending trial point as unsuccessful.
class ObjectiveOverflow : public std::runtime_error {
 public:
  explicit ObjectiveOverflow(const std::string& what)
      : std::runtime_error(what) {}
};

/// Callable bundle giving f, grad f and (for order-2 models) hess f at one
/// level. Immutable after construction and safe to share across threads.
struct ObjectiveOracle {
  int dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<SymMat(const Vector&)> hessian;  // empty when only q=1 is used

  bool has_hessian() const { return static_cast<bool>(hessian); }
};

/// Order-q Taylor data at one expansion point together with the (q+1)-power
/// regularization weight. q is restricted to {1, 2}.
struct RegularizedModel {
  double base_f = 0.0;
  Vector g;
  SymMat B;  // empty when q == 1
  double lambda = 0.0;
  int q = 2;
};

RegularizedModel make_model(double base_f, Vector g, SymMat B, double lambda,
                            int q);

/// base_f + g^T s (+ 1/2 s^T B s when q = 2); no regularization term.
double taylor_value(const RegularizedModel& m, const Vector& s);

/// taylor_value + lambda/(q+1) * |s|^(q+1).
double regularized_value(const RegularizedModel& m, const Vector& s);

/// g (+ B s when q = 2) + lambda * |s|^(q-1) * s.
Vector regularized_grad(const RegularizedModel& m, const Vector& s);

}  // namespace marq

#endif  // MARQ_MODEL_HPP
