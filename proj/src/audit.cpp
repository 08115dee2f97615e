#include "marq/audit.hpp"

#include <cmath>
#include <random>

#include "marq/fd.hpp"

namespace marq {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
}

Vector uniform_vector(std::mt19937_64& rng, int n, double lo, double hi) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

/// Convex quartic f(x) = 1/2 x^T Q x + beta |x|^4 with a random SPD Q.
ObjectiveOracle quartic_oracle(int dim, std::uint64_t seed, double beta) {
  std::mt19937_64 rng(seed);
  DenseMatrix m(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) m(i, j) = uniform(rng, -1.0, 1.0);
  auto q = std::make_shared<DenseMatrix>(
      (m.transpose() * m + DenseMatrix::Identity(dim, dim)).eval());
  ObjectiveOracle o;
  o.dim = dim;
  o.value = [q, beta](const Vector& x) {
    const double n2 = x.squaredNorm();
    return 0.5 * x.dot(*q * x) + beta * n2 * n2;
  };
  o.gradient = [q, beta](const Vector& x) {
    return Vector(*q * x + 4.0 * beta * x.squaredNorm() * x);
  };
  o.hessian = [q, beta, dim](const Vector& x) {
    DenseMatrix h = *q;
    h += 4.0 * beta * (x.squaredNorm() * DenseMatrix::Identity(dim, dim) +
                       2.0 * x * x.transpose());
    return SymMat(std::move(h));
  };
  return o;
}

AuditCheck bound_check(std::string name, double margin, double bound,
                       std::string note = {}) {
  AuditCheck c;
  c.name = std::move(name);
  c.margin = margin;
  c.bound = bound;
  c.pass = margin <= bound;
  c.note = std::move(note);
  return c;
}

AuditCheck check_transfer_adjointness(bool corrupt) {
  TransferPair t = build_grid_transfer(8);
  if (corrupt) t.R.coeffRef(0, 0) += 1e-3;
  const DenseMatrix diff =
      DenseMatrix(t.P) - t.alpha * DenseMatrix(t.R).transpose();
  return bound_check("transfer_adjointness",
                     diff.cwiseAbs().maxCoeff(), 0.0);
}

AuditCheck check_prolongation_stencil() {
  const int nc = 6;
  const int nf = 2 * nc;
  const TransferPair t = build_grid_transfer(nc);
  const Vector ones = Vector::Ones(nc * nc);
  const Vector fine = t.P * ones;
  double margin = 0.0;
  for (int fj = 1; fj < nf; ++fj)
    for (int fi = 1; fi < nf; ++fi)
      margin = std::max(margin, std::abs(fine[fi + fj * nf] - 1.0));
  // interior coarse columns carry total stencil weight 4
  const Vector colsum = t.P.transpose() * Vector::Ones(nf * nf);
  for (int cj = 0; cj + 1 < nc; ++cj)
    for (int ci = 0; ci + 1 < nc; ++ci)
      margin = std::max(margin, std::abs(colsum[ci + cj * nc] - 4.0));
  return bound_check("prolongation_stencil", margin, 0.0);
}

AuditCheck check_spd_factorization() {
  const GridProblem p = assemble_grid_problem(8);
  SkylineCholesky chol(p.A, 0.0);
  AuditCheck c;
  c.name = "grid_matrix_spd";
  c.pass = chol.ok() && chol.min_pivot() > 0.0;
  c.margin = chol.min_pivot();
  c.note = "min pivot";
  return c;
}

AuditCheck check_discretization_order() {
  double err[2];
  const int sizes[2] = {15, 31};
  for (int t = 0; t < 2; ++t) {
    const GridProblem p = assemble_grid_problem(sizes[t]);
    const Vector au = p.A.apply(p.u_star) / (p.h * p.h);
    double e = 0.0;
    for (int j = 0; j < p.n1d; ++j)
      for (int i = 0; i < p.n1d; ++i)
        e = std::max(e, std::abs(au[i + j * p.n1d] -
                                 neg_laplacian_u_star_at((i + 1) * p.h,
                                                         (j + 1) * p.h)));
    err[t] = e;
  }
  const double ratio = err[0] / err[1];
  AuditCheck c;
  c.name = "discretization_order";
  c.margin = ratio;
  c.pass = ratio >= 3.0 && ratio <= 5.0;
  c.note = "truncation error ratio h -> h/2, expected ~4";
  return c;
}

AuditCheck check_oracle_derivatives() {
  const auto prob = std::make_shared<const GridProblem>(assemble_grid_problem(8));
  const ObjectiveOracle o = objective_oracle(prob);
  std::mt19937_64 rng(11);
  double margin = 0.0;
  for (int t = 0; t < 3; ++t) {
    const Vector u = uniform_vector(rng, o.dim, 0.0, 0.5);
    const Vector g = o.gradient(u);
    const Vector gfd = fd_gradient(o.value, u, 1e-6);
    margin = std::max(margin, (g - gfd).norm() / g.norm());
  }
  return bound_check("oracle_gradient_fd", margin, 1e-5);
}

AuditCheck check_oracle_hessian() {
  const auto prob = std::make_shared<const GridProblem>(assemble_grid_problem(6));
  const ObjectiveOracle o = objective_oracle(prob);
  std::mt19937_64 rng(12);
  const Vector u = uniform_vector(rng, o.dim, 0.0, 0.5);
  const DenseMatrix h = o.hessian(u).to_dense();
  const DenseMatrix hfd = fd_jacobian(o.gradient, u, 1e-5);
  const double margin = (h - hfd).norm() / h.norm();
  return bound_check("oracle_hessian_fd", margin, 1e-4);
}

AuditCheck check_subproblem_oracle(int instances) {
  double margin = 0.0;
  for (int t = 0; t < instances; ++t) {
    const RandomCubicInstance in = sample_cubic_instance(1000 + t, 2, 1.9);
    const SubproblemResult sp = solve_q2(in.g, in.B, in.lambda, 0.0);
    const Vector ref = grid_search_oracle(in.g, in.B, in.lambda, 2.0, 1e-3);
    margin = std::max(margin, (sp.step - ref).cwiseAbs().maxCoeff());
  }
  return bound_check("subproblem_grid_oracle", margin, 2e-3);
}

AuditCheck check_secular_consistency() {
  std::mt19937_64 rng(21);
  double margin = 0.0;
  double decrease_margin = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < 50; ++t) {
    const int dim = 1 + static_cast<int>(rng() % 6);
    DenseMatrix m(dim, dim);
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i < dim; ++i) m(i, j) = uniform(rng, -2.0, 2.0);
    const SymMat b(DenseMatrix(0.5 * (m + m.transpose())));
    const Vector g = uniform_vector(rng, dim, -2.0, 2.0);
    const double lambda = uniform(rng, 0.05, 5.0);
    const SubproblemResult sp = solve_q2(g, b, lambda, 0.5);
    if (!sp.ok()) return bound_check("secular_consistency", 1.0, 1e-8,
                                     "subsolver hit the iteration cap");
    const double sec =
        std::abs(sp.sigma - lambda * sp.step.norm()) / (1.0 + sp.sigma);
    margin = std::max(margin, sec);
    RegularizedModel mod = make_model(0.0, g, b, lambda, 2);
    decrease_margin =
        std::max(decrease_margin, regularized_value(mod, sp.step));
  }
  if (decrease_margin >= 0.0)
    return bound_check("secular_consistency", 1.0, 1e-8,
                       "no strict model decrease");
  return bound_check("secular_consistency", margin, 1e-8);
}

AuditCheck check_hard_case() {
  DenseMatrix b(2, 2);
  b << -1.0, 0.0, 0.0, 2.0;
  Vector g(2);
  g << 0.0, 1.0;
  const SubproblemResult sp = solve_q2(g, SymMat(b), 1.0, 0.0);
  RegularizedModel mod = make_model(0.0, g, SymMat(b), 1.0, 2);
  const double value = regularized_value(mod, sp.step);
  AuditCheck c;
  c.name = "hard_case_escape";
  c.margin = value;
  c.pass = value < 0.0;
  c.note = "model value at the returned step; must be negative";
  return c;
}

AuditCheck check_quadratic_rho(int q) {
  const int dim = 20;
  ObjectiveOracle o = quartic_oracle(dim, 31, 0.0);  // beta=0: pure quadratic
  std::mt19937_64 rng(32);
  const Vector x0 = uniform_vector(rng, dim, -1.0, 1.0);
  SolverConfig cfg;
  cfg.eps_per_level = {1e-9};
  cfg.wall_budget_sec = 0.0;
  double rho_margin = 0.0;
  const RunReport r = arq_minimize(o, x0, cfg, q);
  if (q == 2) {
    for (const IterationRecord& rec : r.trace)
      rho_margin = std::max(rho_margin, std::abs(rec.rho - 1.0));
    if (!r.converged || r.lambda_max_seen > cfg.lambda0)
      return bound_check("quadratic_rho_one", 1.0, 1e-10, "run misbehaved");
    return bound_check("quadratic_rho_one", rho_margin, 1e-10,
                       "order-2 model is exact on quadratics");
  }
  AuditCheck c;
  c.name = "quadratic_descent_q1";
  c.pass = r.converged;
  for (std::size_t i = 1; i < r.trace.size(); ++i)
    c.pass = c.pass && r.trace[i].f_value <= r.trace[i - 1].f_value;
  c.margin = r.grad_norm_final;
  c.note = "monotone descent and convergence";
  return c;
}

AuditCheck check_lambda_growth(int q) {
  // Oracle whose value never changes: every step is rejected and the
  // regularization parameter must grow by exactly gamma3 per iteration.
  ObjectiveOracle o;
  o.dim = 2;
  o.value = [](const Vector&) { return 1.0; };
  o.gradient = [](const Vector&) {
    Vector g(2);
    g << 1.0, -0.5;
    return g;
  };
  o.hessian = [](const Vector&) {
    return SymMat(DenseMatrix(DenseMatrix::Identity(2, 2)));
  };
  SolverConfig cfg;
  cfg.max_outer_iters = 8;
  cfg.wall_budget_sec = 0.0;
  const RunReport r = arq_minimize(o, Vector::Zero(2), cfg, q);
  double margin = 0.0;
  double expected = cfg.lambda0;
  for (const IterationRecord& rec : r.trace) {
    margin = std::max(margin, std::abs(rec.lambda - expected));
    expected *= cfg.gamma3;
  }
  if (r.converged || r.trace.size() != 8)
    return bound_check("lambda_growth_on_failure", 1.0, 0.0, "run misbehaved");
  return bound_check("lambda_growth_on_failure", margin, 0.0,
                     "lambda_k = lambda0 * gamma3^k, bit exact");
}

AuditCheck check_coherence_run(int q) {
  SolverConfig cfg;
  cfg.audit_mode = true;
  cfg.wall_budget_sec = 0.0;
  if (q == 1) {
    cfg.eps_per_level = {1e-3};
    cfg.max_outer_iters = 5000;
    cfg.max_coarse_iters = 200;
  }
  const int n1d = q == 1 ? 4 : 16;
  const int levels = q == 1 ? 2 : 3;
  const GridHierarchy gh = build_hierarchy(n1d, levels);
  ProblemDescriptor d;
  d.n1d = n1d;
  d.levels = levels;
  d.seed = 5;
  d.a = 1.0;
  const RunReport r = run_grid_method(gh, d, cfg, q, /*multilevel=*/true);
  AuditCheck c;
  c.name = "coherence_identities";
  if (r.audit.recursion_entries == 0) {
    c.pass = false;
    c.note = "no recursion entered";
    return c;
  }
  const double second = q == 2 ? r.audit.max_second_order : 0.0;
  c.margin = std::max(r.audit.max_first_order, second);
  c.bound = 1e-10;
  c.pass = r.audit.max_first_order <= 1e-12 && second <= 1e-10 && r.converged;
  c.note = "first order <= 1e-12, second order <= 1e-10, run converged";
  return c;
}

}  // namespace

RandomCubicInstance sample_cubic_instance(std::uint64_t seed, int dim,
                                          double max_step_bound) {
  std::mt19937_64 rng(seed);
  for (;;) {
    const Vector g = uniform_vector(rng, dim, -2.0, 2.0);
    DenseMatrix m(dim, dim);
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i < dim; ++i) m(i, j) = uniform(rng, -2.0, 2.0);
    DenseMatrix b = 0.5 * (m + m.transpose());
    const double lambda = uniform(rng, 0.05, 5.0);
    // a-priori step bound: lambda |s|^2 <= |g| + |B| |s|
    const double bn = b.cwiseAbs().rowwise().sum().maxCoeff();
    const double bound =
        (bn + std::sqrt(bn * bn + 4.0 * lambda * g.norm())) / (2.0 * lambda);
    if (bound <= max_step_bound)
      return RandomCubicInstance{g, SymMat(std::move(b)), lambda};
  }
}

double identity_collapse_margin(int dim, std::uint64_t seed,
                                const SolverConfig& cfg, int q) {
  ObjectiveOracle oracle = quartic_oracle(dim, seed, 0.25);
  std::mt19937_64 rng(seed ^ 0xabcdef);
  const Vector x0 = uniform_vector(rng, dim, -1.0, 1.0);

  LevelHierarchy h;
  h.levels.push_back(Level{oracle, std::nullopt, 0});
  h.levels.push_back(Level{oracle, identity_transfer(dim), 0});

  std::vector<Vector> coarse_traj;
  bool first_recursion_done = false;
  Observer collect = [&](const IterationEvent& ev) {
    if (ev.level == 0 && !first_recursion_done) coarse_traj.push_back(ev.x);
    if (ev.level == 1) first_recursion_done = true;
  };
  marq_minimize(h, x0, cfg, q, collect);

  const Vector g0 = oracle.gradient(x0);
  const SymMat b0 = q == 2 ? oracle.hessian(x0) : SymMat{};
  CoarseModel cm =
      build_coarse_model(g0, b0, x0, identity_transfer(dim), oracle, q);
  const ObjectiveOracle ref_obj = as_oracle(std::move(cm));
  SolverConfig ref_cfg = cfg;
  ref_cfg.max_outer_iters = cfg.max_coarse_iters;
  ref_cfg.eps_per_level = {cfg.eps_at(0, 2)};
  std::vector<Vector> ref_traj;
  arq_minimize(ref_obj, x0, ref_cfg, q,
               [&](const IterationEvent& ev) { ref_traj.push_back(ev.x); });

  if (coarse_traj.empty() || coarse_traj.size() != ref_traj.size())
    return std::numeric_limits<double>::quiet_NaN();
  double margin = 0.0;
  for (std::size_t i = 0; i < ref_traj.size(); ++i)
    margin = std::max(margin, (coarse_traj[i] - ref_traj[i]).norm());
  return margin;
}

std::vector<AuditCheck> run_audit_checks(const AuditOptions& opts) {
  std::vector<AuditCheck> checks;
  checks.push_back(check_transfer_adjointness(opts.corrupt_transfer));
  checks.push_back(check_prolongation_stencil());
  checks.push_back(check_spd_factorization());
  checks.push_back(check_discretization_order());
  checks.push_back(check_oracle_derivatives());
  checks.push_back(check_oracle_hessian());
  if (opts.q == 2) {
    checks.push_back(check_subproblem_oracle(10));
    checks.push_back(check_secular_consistency());
    checks.push_back(check_hard_case());
  }
  checks.push_back(check_quadratic_rho(opts.q));
  checks.push_back(check_lambda_growth(opts.q));
  checks.push_back(check_coherence_run(opts.q));
  {
    SolverConfig cfg;
    cfg.wall_budget_sec = 0.0;
    const double margin = identity_collapse_margin(20, 7, cfg, opts.q);
    AuditCheck c = bound_check("identity_collapse",
                               std::isnan(margin) ? 1.0 : margin, 1e-8);
    c.pass = !std::isnan(margin) && c.pass;
    checks.push_back(c);
  }
  return checks;
}

}  // namespace marq
