#include "marq/model.hpp"

#include <cmath>

namespace marq {

RegularizedModel make_model(double base_f, Vector g, SymMat B, double lambda,
                            int q) {
  if (q != 1 && q != 2)
    throw std::invalid_argument("RegularizedModel: q must be 1 or 2");
  if (!(lambda > 0.0))
    throw std::invalid_argument("RegularizedModel: lambda must be positive");
  if (q == 2) {
    if (B.empty())
      throw std::invalid_argument("RegularizedModel: q=2 needs a Hessian");
    if (B.dim() != g.size())
      throw std::invalid_argument("RegularizedModel: g and B dims disagree");
  }
  RegularizedModel m;
  m.base_f = base_f;
  m.g = std::move(g);
  m.B = std::move(B);
  m.lambda = lambda;
  m.q = q;
  return m;
}

static void check_dim(const RegularizedModel& m, const Vector& s) {
  if (s.size() != m.g.size())
    throw std::invalid_argument("model: step dimension mismatch");
}

double taylor_value(const RegularizedModel& m, const Vector& s) {
  check_dim(m, s);
  double v = m.base_f + m.g.dot(s);
  if (m.q == 2) v += 0.5 * m.B.quad(s);
  return v;
}

double regularized_value(const RegularizedModel& m, const Vector& s) {
  check_dim(m, s);
  const double ns = s.norm();
  return taylor_value(m, s) +
         m.lambda / (m.q + 1.0) * std::pow(ns, m.q + 1.0);
}

Vector regularized_grad(const RegularizedModel& m, const Vector& s) {
  check_dim(m, s);
  Vector grad = m.g;
  if (m.q == 2) grad += m.B.apply(s);
  const double ns = s.norm();
  if (ns > 0.0) grad += m.lambda * std::pow(ns, m.q - 1.0) * s;
  return grad;
}

}  // namespace marq
