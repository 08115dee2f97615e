#include "marq/problems.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace marq {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kExpGuard = 700.0;  // e^700 nears the double overflow edge

double sine_part(double t) { return std::sin(2.0 * kPi * t * (1.0 - t)); }

double sine_part_dd(double t) {
  const double arg = 2.0 * kPi * t * (1.0 - t);
  const double d1 = 2.0 * kPi * (1.0 - 2.0 * t);
  return -d1 * d1 * std::sin(arg) - 4.0 * kPi * std::cos(arg);
}

Vector guarded_exp(const Vector& u) {
  if ((u.array() > kExpGuard).any())
    throw ObjectiveOverflow("objective: e^u overflows");
  return u.array().exp();
}

}  // namespace

double u_star_at(double x, double y) { return sine_part(x) * sine_part(y); }

double neg_laplacian_u_star_at(double x, double y) {
  return -(sine_part_dd(x) * sine_part(y) + sine_part(x) * sine_part_dd(y));
}

GridProblem assemble_grid_problem(int n1d, RhsMode mode) {
  if (n1d < 2) throw std::invalid_argument("assemble_grid_problem: n1d < 2");
  GridProblem p;
  p.n1d = n1d;
  p.h = 1.0 / (n1d + 1);
  p.rhs_mode = mode;
  const int n = n1d * n1d;

  // Unscaled 5-point stencil: A approximates -h^2 * lap. This keeps the
  // exponential term commensurate with the quadratic part, which is what
  // drives the benchmark's sensitivity to the initial-guess scale.
  std::vector<int> start(n);
  for (int j = 0; j < n1d; ++j) {
    for (int i = 0; i < n1d; ++i) {
      const int idx = i + j * n1d;
      start[idx] = j > 0 ? idx - n1d : (i > 0 ? idx - 1 : idx);
    }
  }
  SkylineMatrix a(std::move(start));
  for (int j = 0; j < n1d; ++j) {
    for (int i = 0; i < n1d; ++i) {
      const int idx = i + j * n1d;
      a.at(idx, idx) = 4.0;
      if (i > 0) a.at(idx, idx - 1) = -1.0;
      if (j > 0) a.at(idx, idx - n1d) = -1.0;
    }
  }
  p.A = std::move(a);

  p.u_star.resize(n);
  for (int j = 0; j < n1d; ++j)
    for (int i = 0; i < n1d; ++i)
      p.u_star[i + j * n1d] = u_star_at((i + 1) * p.h, (j + 1) * p.h);

  if (mode == RhsMode::discrete) {
    p.g_vec = p.A.apply(p.u_star) + guarded_exp(p.u_star);
  } else {
    // A u approximates -h^2 lap u, so the sampled right-hand side carries
    // the same h^2 factor on the differential term.
    p.g_vec.resize(n);
    for (int j = 0; j < n1d; ++j)
      for (int i = 0; i < n1d; ++i) {
        const double x = (i + 1) * p.h;
        const double y = (j + 1) * p.h;
        p.g_vec[i + j * n1d] = p.h * p.h * neg_laplacian_u_star_at(x, y) +
                               std::exp(u_star_at(x, y));
      }
  }
  return p;
}

ObjectiveOracle objective_oracle(std::shared_ptr<const GridProblem> p) {
  if (!p) throw std::invalid_argument("objective_oracle: null problem");
  ObjectiveOracle o;
  o.dim = p->dim();
  o.value = [p](const Vector& u) {
    const Vector eu = guarded_exp(u);
    return 0.5 * p->A.quad(u) + eu.sum() - p->g_vec.dot(u);
  };
  o.gradient = [p](const Vector& u) {
    return Vector(p->A.apply(u) + guarded_exp(u) - p->g_vec);
  };
  o.hessian = [p](const Vector& u) {
    SkylineMatrix h = p->A;
    h.add_to_diagonal(guarded_exp(u));
    return SymMat(std::move(h));
  };
  return o;
}

GridHierarchy build_hierarchy(int n1d_top, int levels, RhsMode mode) {
  if (levels < 1) throw std::invalid_argument("build_hierarchy: levels < 1");
  const int factor = 1 << (levels - 1);
  if (n1d_top % factor != 0)
    throw std::invalid_argument(
        "build_hierarchy: n1d_top not divisible by 2^(levels-1)");
  GridHierarchy gh;
  for (int l = 0; l < levels; ++l) {
    const int n1d = n1d_top >> (levels - 1 - l);
    auto prob =
        std::make_shared<const GridProblem>(assemble_grid_problem(n1d, mode));
    Level lev;
    lev.oracle = objective_oracle(prob);
    lev.n1d = n1d;
    if (l > 0) lev.down = build_grid_transfer(gh.problems.back()->n1d);
    gh.problems.push_back(std::move(prob));
    gh.hierarchy.levels.push_back(std::move(lev));
  }
  return gh;
}

double rmse(const Vector& u, const GridProblem& p) {
  if (u.size() != p.dim()) throw std::invalid_argument("rmse: dim mismatch");
  return std::sqrt((u - p.u_star).squaredNorm() / p.dim());
}

Vector random_init(int n, double a, std::uint64_t seed) {
  if (!(a > 0.0)) throw std::invalid_argument("random_init: a must be > 0");
  std::mt19937_64 rng(seed);
  Vector u(n);
  for (int i = 0; i < n; ++i) u[i] = a * ((rng() >> 11) * 0x1.0p-53);
  return u;
}

std::string descriptor_to_json(const ProblemDescriptor& d, int indent) {
  nlohmann::json j{{"n1d", d.n1d},
                   {"levels", d.levels},
                   {"seed", d.seed},
                   {"a", d.a},
                   {"rhs", d.rhs == RhsMode::discrete ? "discrete"
                                                      : "analytic"}};
  return j.dump(indent);
}

ProblemDescriptor descriptor_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ProblemDescriptor d;
  d.n1d = j.at("n1d").get<int>();
  d.levels = j.at("levels").get<int>();
  d.seed = j.at("seed").get<std::uint64_t>();
  d.a = j.at("a").get<double>();
  const std::string rhs = j.value("rhs", "discrete");
  if (rhs == "discrete")
    d.rhs = RhsMode::discrete;
  else if (rhs == "analytic")
    d.rhs = RhsMode::analytic;
  else
    throw std::invalid_argument("descriptor: unknown rhs mode");
  return d;
}

}  // namespace marq
