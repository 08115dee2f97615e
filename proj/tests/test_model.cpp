#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "marq/fd.hpp"
#include "marq/model.hpp"

using namespace marq;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

SymMat dense(std::initializer_list<double> diag) {
  const int n = static_cast<int>(diag.size());
  DenseMatrix m = DenseMatrix::Zero(n, n);
  int i = 0;
  for (double e : diag) m(i, i) = e, ++i;
  return SymMat(std::move(m));
}

RegularizedModel random_model(std::mt19937_64& rng, int n, int q) {
  auto u = [&](double lo, double hi) {
    return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
  };
  Vector g(n);
  for (int i = 0; i < n; ++i) g[i] = u(-2, 2);
  SymMat b;
  if (q == 2) {
    DenseMatrix m(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) m(i, j) = u(-2, 2);
    b = SymMat(DenseMatrix(0.5 * (m + m.transpose())));
  }
  return make_model(u(-1, 1), g, b, u(0.1, 4.0), q);
}

}  // namespace

TEST_CASE("taylor_value matches hand arithmetic") {
  // zero-gradient case: pure quadratic form
  {
    RegularizedModel m =
        make_model(0.0, vec({0, 0}), dense({2, 3}), 1.0, 2);
    const Vector s = vec({1, -2});
    CHECK(taylor_value(m, s) == doctest::Approx(0.5 * (2 + 12)));
  }
  // scalar f(x)=x^2/2 at x=1 is its own order-2 model
  {
    RegularizedModel m = make_model(0.5, vec({1}), dense({1}), 1.0, 2);
    CHECK(taylor_value(m, vec({-0.95445})) ==
          doctest::Approx(0.0010376).epsilon(1e-3));
  }
  // order 1: 1 + 2 - 4
  {
    RegularizedModel m = make_model(1.0, vec({2, -4}), SymMat{}, 1.0, 1);
    CHECK(taylor_value(m, vec({1, 1})) == doctest::Approx(-1.0));
  }
}

TEST_CASE("regularized_value adds the (q+1)-power term") {
  {
    RegularizedModel m =
        make_model(0.0, vec({0, 0}), dense({0, 0}), 3.0, 2);
    CHECK(regularized_value(m, vec({1, 0})) == doctest::Approx(1.0));
  }
  {
    RegularizedModel m = make_model(0.0, vec({0, 0}), SymMat{}, 2.0, 1);
    CHECK(regularized_value(m, vec({3, 4})) == doctest::Approx(25.0));
  }
  // scalar secular root |s|(1+|s|)=1: the minimum value of the regularized
  // model, frozen from direct scalar evaluation at the root
  {
    RegularizedModel m = make_model(0.0, vec({1}), dense({1}), 1.0, 2);
    const double t = 0.5 * (std::sqrt(5.0) - 1.0);
    const double expected = -t + 0.5 * t * t + t * t * t / 3.0;
    CHECK(expected == doctest::Approx(-0.3483616).epsilon(1e-6));
    CHECK(regularized_value(m, vec({-t})) == doctest::Approx(expected));
  }
}

TEST_CASE("regularized_grad") {
  RegularizedModel m = make_model(0.2, vec({3, -1}), dense({1, 2}), 2.5, 2);
  // regularizer gradient vanishes at the origin
  CHECK((regularized_grad(m, vec({0, 0})) - m.g).norm() == 0.0);

  // near-zero residual at the secular root
  RegularizedModel scalar = make_model(0.0, vec({1}), dense({1}), 1.0, 2);
  CHECK(regularized_grad(scalar, vec({-0.6180}))[0] ==
        doctest::Approx(0.0).epsilon(1e-3));
  CHECK(std::abs(regularized_grad(scalar, vec({-0.6180}))[0]) < 2e-4);
}

TEST_CASE("regularized_grad agrees with finite differences of the value") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const int q = trial % 2 == 0 ? 2 : 1;
    const int n = 2 + static_cast<int>(rng() % 4);
    RegularizedModel m = random_model(rng, n, q);
    Vector s(n);
    for (int i = 0; i < n; ++i)
      s[i] = 0.2 + (rng() >> 11) * 0x1.0p-53;  // keep away from s = 0
    const Vector grad = regularized_grad(m, s);
    const Vector fd = fd_gradient(
        [&](const Vector& y) { return regularized_value(m, y); }, s, 1e-7);
    CHECK((grad - fd).norm() <= 1e-6 * (1.0 + grad.norm()));
  }
}

TEST_CASE("regularized_value >= taylor_value, equality only at s = 0") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    RegularizedModel m = random_model(rng, 3, 2);
    Vector s(3);
    for (int i = 0; i < 3; ++i) s[i] = -1.0 + (rng() >> 11) * 0x1.0p-52;
    if (s.norm() == 0.0) continue;
    CHECK(regularized_value(m, s) > taylor_value(m, s));
    CHECK(regularized_value(m, Vector::Zero(3)) ==
          taylor_value(m, Vector::Zero(3)));
  }
}

TEST_CASE("quadratic objectives make the order-2 model exact") {
  std::mt19937_64 rng(3);
  DenseMatrix m(4, 4);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) m(i, j) = -1.0 + (rng() >> 11) * 0x1.0p-52;
  const DenseMatrix q = m.transpose() * m + DenseMatrix::Identity(4, 4);
  Vector x0(4), s(4);
  for (int i = 0; i < 4; ++i) {
    x0[i] = (rng() >> 11) * 0x1.0p-53;
    s[i] = (rng() >> 11) * 0x1.0p-53 - 0.5;
  }
  auto f = [&](const Vector& x) { return 0.5 * x.dot(q * x); };
  RegularizedModel model =
      make_model(f(x0), Vector(q * x0), SymMat(DenseMatrix(q)), 1.0, 2);
  CHECK(taylor_value(model, s) == doctest::Approx(f(x0 + s)).epsilon(1e-12));
}

TEST_CASE("model construction rejects bad arguments") {
  CHECK_THROWS_AS(make_model(0, vec({1}), dense({1}), 0.0, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_model(0, vec({1}), dense({1}), 1.0, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_model(0, vec({1, 2}), dense({1}), 1.0, 2),
                  std::invalid_argument);
  RegularizedModel m = make_model(0, vec({1, 2}), dense({1, 1}), 1.0, 2);
  CHECK_THROWS_AS(taylor_value(m, vec({1})), std::invalid_argument);
  CHECK_THROWS_AS(regularized_grad(m, vec({1, 2, 3})), std::invalid_argument);
}
