#include "marq/subproblem.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace marq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

struct FactorTally {
  int count = 0;
  double flops = 0.0;
  double flops_dense = 0.0;

  ShiftedFactor factorize(const SymMat& b, double sigma) {
    ShiftedFactor f(b, sigma);
    ++count;
    flops += f.flops();
    flops_dense += f.flops_dense_model();
    return f;
  }
};

double cubic_model(const Vector& g, const SymMat& b, double lambda,
                   const Vector& s) {
  return g.dot(s) + 0.5 * b.quad(s) + lambda / 3.0 * std::pow(s.norm(), 3.0);
}

Vector cubic_residual(const Vector& g, const SymMat& b, double lambda,
                      const Vector& s) {
  return g + b.apply(s) + lambda * s.norm() * s;
}

/// Direction of the smallest eigenvalue of B + sigma I by inverse iteration
/// with an already computed factorization.
Vector min_eig_direction(const ShiftedFactor& f, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = std::sin(static_cast<double>(i) + 1.0);
  v.normalize();
  for (int it = 0; it < 20; ++it) {
    Vector w = f.solve(v);
    const double nw = w.norm();
    if (!(nw > 0.0) || !std::isfinite(nw)) break;
    v = w / nw;
  }
  return v;
}

SubproblemResult finish(const Vector& g, const SymMat& b, double lambda,
                        Vector s, double sigma_shift, const FactorTally& tally,
                        SubproblemStatus status) {
  SubproblemResult r;
  r.model_decrease = -(g.dot(s) + 0.5 * b.quad(s));
  r.residual_norm = cubic_residual(g, b, lambda, s).norm();
  r.sigma = sigma_shift;  // shift actually used in (B + sigma I) s = -g
  r.step = std::move(s);
  r.factorizations = tally.count;
  r.flops = tally.flops;
  r.flops_dense_model = tally.flops_dense;
  r.status = status;
  return r;
}

/// Completes the step at the positive-definiteness boundary: moves along the
/// near-null direction of B + sigma_hat I until |s| = sigma_hat / lambda.
SubproblemResult hard_case_step(const Vector& g, const SymMat& b,
                                double lambda, double sigma_hat,
                                const ShiftedFactor& f, const Vector& s_base,
                                FactorTally& tally) {
  const int n = static_cast<int>(g.size());
  const Vector v = min_eig_direction(f, n);
  const double target = sigma_hat / lambda;
  const double sv = s_base.dot(v);
  const double disc = sv * sv + target * target - s_base.squaredNorm();
  const double root = std::sqrt(std::max(disc, 0.0));
  Vector cand1 = s_base + (-sv + root) * v;
  Vector cand2 = s_base + (-sv - root) * v;
  const bool first = cubic_model(g, b, lambda, cand1) <=
                     cubic_model(g, b, lambda, cand2);
  return finish(g, b, lambda, first ? std::move(cand1) : std::move(cand2),
                sigma_hat, tally, SubproblemStatus::ok);
}

}  // namespace

SubproblemResult solve_q1(const Vector& g, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("solve_q1: lambda <= 0");
  SubproblemResult r;
  r.step = -g / lambda;
  r.model_decrease = g.squaredNorm() / lambda;  // -g^T s with s = -g/lambda
  r.residual_norm = 0.0;
  r.sigma = lambda * r.step.norm();
  return r;
}

SubproblemResult solve_q2(const Vector& g, const SymMat& B, double lambda,
                          double theta, int max_iters) {
  if (!(lambda > 0.0)) throw std::invalid_argument("solve_q2: lambda <= 0");
  if (!(theta >= 0.0)) throw std::invalid_argument("solve_q2: theta < 0");
  if (B.dim() != g.size())
    throw std::invalid_argument("solve_q2: g and B dims disagree");

  const int n = static_cast<int>(g.size());
  const double gnorm = g.norm();
  const double binf = B.inf_norm();
  FactorTally tally;

  // Zero gradient: the origin is optimal unless B has negative curvature.
  if (gnorm == 0.0) {
    ShiftedFactor f0 = tally.factorize(B, 0.0);
    if (f0.ok())
      return finish(g, B, lambda, Vector::Zero(n), 0.0, tally,
                    SubproblemStatus::ok);
    double lo = 0.0;
    double hi = B.gershgorin_shift() + 1e-8 * (1.0 + binf);
    ShiftedFactor fhi = tally.factorize(B, hi);
    for (int it = 0; it < 64 && hi - lo > 1e-12 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      ShiftedFactor fm = tally.factorize(B, mid);
      if (fm.ok()) {
        hi = mid;
        fhi = std::move(fm);
      } else {
        lo = mid;
      }
    }
    return hard_case_step(g, B, lambda, hi, fhi, Vector::Zero(n), tally);
  }

  const double sigma0 = lambda * gnorm / (1.0 + binf);
  double sigma = sigma0;
  ShiftedFactor factor(B, sigma);
  ++tally.count;
  tally.flops += factor.flops();
  tally.flops_dense += factor.flops_dense_model();

  // fail_floor: below here factorization fails (or sigma <= 0);
  // flo/fhi: tightest shifts with phi > 0 / phi < 0 seen so far.
  double fail_floor = 0.0;
  if (!factor.ok()) {
    fail_floor = sigma;
    double hi = B.gershgorin_shift() + 1e-8 * (1.0 + binf);
    ShiftedFactor fhi = tally.factorize(B, hi);
    for (int it = 0; it < 64 && hi - fail_floor > 1e-12 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (fail_floor + hi);
      ShiftedFactor fm = tally.factorize(B, mid);
      if (fm.ok()) {
        hi = mid;
        fhi = std::move(fm);
      } else {
        fail_floor = mid;
      }
    }
    sigma = hi;
    factor = std::move(fhi);
  }

  double flo = -kInf;
  double fhi_at = kInf;

  for (int it = 0; it < max_iters; ++it) {
    const Vector s = -factor.solve(g);
    const double ns = s.norm();
    const double phi = ns - sigma / lambda;

    // Acceptance: secular equation solved to tight relative accuracy and the
    // theta-rule satisfied (theta = 0 means the attainable fp floor).
    if (lambda * std::abs(phi) <= 1e-10 * (1.0 + sigma)) {
      const double res = cubic_residual(g, B, lambda, s).norm();
      const double fp_floor = 64.0 * kEps * (gnorm + (binf + sigma) * ns);
      if (res <= std::max(theta * ns * ns, fp_floor))
        return finish(g, B, lambda, s, sigma, tally, SubproblemStatus::ok);
    }

    if (phi > 0.0)
      flo = std::max(flo, sigma);
    else
      fhi_at = std::min(fhi_at, sigma);

    // Hard case: no root above the definiteness boundary.
    if (phi < 0.0 && sigma - fail_floor <= 1e-11 * (1.0 + sigma) &&
        flo == -kInf)
      return hard_case_step(g, B, lambda, sigma, factor, s, tally);

    // phi'(sigma) = -s^T (B + sigma I)^{-1} s / |s| - 1/lambda
    const double sts = s.dot(factor.solve(s));
    const double dphi = -sts / std::max(ns, 1e-300) - 1.0 / lambda;
    double next = sigma - phi / dphi;

    const double left = std::max(flo, fail_floor);
    if (!std::isfinite(next) || next <= left || next >= fhi_at) {
      if (phi > 0.0)
        next = std::isfinite(fhi_at) ? 0.5 * (sigma + fhi_at) : 2.0 * sigma +
                                                                    1.0;
      else
        next = 0.5 * (sigma + left);
    }

    ShiftedFactor fn(B, next);
    ++tally.count;
    tally.flops += fn.flops();
    tally.flops_dense += fn.flops_dense_model();
    while (!fn.ok()) {
      fail_floor = std::max(fail_floor, next);
      next = 0.5 * (next + sigma);
      if (sigma - next <= 1e-13 * (1.0 + sigma)) {
        // Collapsed onto the boundary from the phi < 0 side.
        const Vector sb = -factor.solve(g);
        return hard_case_step(g, B, lambda, sigma, factor, sb, tally);
      }
      fn = tally.factorize(B, next);
    }
    sigma = next;
    factor = std::move(fn);
  }

  const Vector s = -factor.solve(g);
  return finish(g, B, lambda, s, sigma, tally,
                SubproblemStatus::iteration_cap);
}

Vector grid_search_oracle(const Vector& g, const SymMat& B, double lambda,
                          double radius, double grid_step) {
  const int dim = static_cast<int>(g.size());
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("grid_search_oracle: dim must be 1..3");
  if (B.dim() != dim)
    throw std::invalid_argument("grid_search_oracle: g and B dims disagree");
  if (!(radius > 0.0) || !(grid_step > 0.0))
    throw std::invalid_argument("grid_search_oracle: bad grid");

  const int m = static_cast<int>(std::floor(2.0 * radius / grid_step)) + 1;
  const auto coord = [&](int k) { return -radius + k * grid_step; };
  const double third = lambda / 3.0;

  Vector best = Vector::Zero(dim);
  double best_val = kInf;
  const DenseMatrix bd = B.to_dense();

  if (dim == 1) {
    for (int i = 0; i < m; ++i) {
      const double x = coord(i);
      const double val =
          g[0] * x + 0.5 * bd(0, 0) * x * x + third * std::abs(x * x * x);
      if (val < best_val) {
        best_val = val;
        best[0] = x;
      }
    }
    return best;
  }
  if (dim == 2) {
    for (int j = 0; j < m; ++j) {
      const double y = coord(j);
      const double cy = g[1] * y + 0.5 * bd(1, 1) * y * y;
      const double by = bd(0, 1) * y;
      const double y2 = y * y;
      for (int i = 0; i < m; ++i) {
        const double x = coord(i);
        const double r2 = x * x + y2;
        const double val = cy + (g[0] + by) * x + 0.5 * bd(0, 0) * x * x +
                           third * r2 * std::sqrt(r2);
        if (val < best_val) {
          best_val = val;
          best[0] = x;
          best[1] = y;
        }
      }
    }
    return best;
  }
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i) {
        Vector s(3);
        s << coord(i), coord(j), coord(k);
        const double r = s.norm();
        const double val = g.dot(s) + 0.5 * s.dot(bd * s) + third * r * r * r;
        if (val < best_val) {
          best_val = val;
          best = s;
        }
      }
    }
  }
  return best;
}

}  // namespace marq
