#include "marq/driver.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace marq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

struct RunContext {
  RunContext(const SolverConfig& c, const LevelHierarchy& h, int q_in,
             const Observer& o)
      : cfg(c), hierarchy(h), q(q_in), observer(o) {}

  const SolverConfig& cfg;
  const LevelHierarchy& hierarchy;
  int q;
  const Observer& observer;
  std::vector<double> level_flops;
  std::vector<double> level_flops_dense;
  std::vector<int> level_iters;
  std::vector<IterationRecord> top_trace;
  bool aborted = false;
  Termination abort_reason = Termination::max_iters;
  Clock::time_point start = Clock::now();
  AuditSummary audit;
  std::uint64_t audit_seed = 0;

  double total_flops() const {
    double t = 0.0;
    for (double f : level_flops) t += f;
    return t;
  }

  bool out_of_budget() {
    if (aborted) return true;
    if (cfg.flop_budget > 0.0 && total_flops() > cfg.flop_budget) {
      aborted = true;
      abort_reason = Termination::flop_budget;
      return true;
    }
    if (cfg.wall_budget_sec > 0.0) {
      const double elapsed =
          std::chrono::duration<double>(Clock::now() - start).count();
      if (elapsed > cfg.wall_budget_sec) {
        aborted = true;
        abort_reason = Termination::wall_budget;
        return true;
      }
    }
    return false;
  }
};

struct LevelOutcome {
  Vector x;
  double f_final = 0.0;
  double total_decrease = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
  int successes = 0;
  bool grad_converged = false;
};

Vector random_unit_direction(std::mt19937_64& rng, int n) {
  Vector s(n);
  for (int i = 0; i < n; ++i)
    s[i] = 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
  const double ns = s.norm();
  return ns > 0.0 ? Vector(s / ns) : Vector::Unit(n, 0);
}

/// Coherence of the corrected model at the recursion entry point.
void audit_recursion_entry(RunContext& ctx, const CoarseModel& cm,
                           const Vector& fine_g, const SymMat& fine_B,
                           const TransferPair& pair) {
  const int n = static_cast<int>(cm.x0H.size());
  const Vector zero = Vector::Zero(n);
  const Vector rg = pair.R * fine_g;
  const double first =
      (coarse_grad(cm, zero) - rg).norm() / (1.0 + fine_g.norm());
  ctx.audit.max_first_order = std::max(ctx.audit.max_first_order, first);
  if (cm.q == 2) {
    SymMat e = coarse_hess(cm, zero);
    e.add_scaled(galerkin_product(pair.R, fine_B, pair.P), -1.0);
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull ^ ctx.audit_seed++);
    for (int t = 0; t < 20; ++t) {
      const Vector s = random_unit_direction(rng, n);
      const double second = std::abs(e.quad(s)) / s.squaredNorm();
      ctx.audit.max_second_order =
          std::max(ctx.audit.max_second_order, second);
    }
  }
  ++ctx.audit.recursion_entries;
}

LevelOutcome run_level(RunContext& ctx, int level, const ObjectiveOracle& obj,
                       Vector x, double lambda, double eps, int max_iters,
                       bool top) {
  const SolverConfig& cfg = ctx.cfg;
  const int q = ctx.q;
  const int depth = ctx.hierarchy.depth();

  LevelOutcome out;
  double f = obj.value(x);
  Vector g = obj.gradient(x);
  const double f_entry = f;

  std::optional<SymMat> hess;  // Hessian at the current iterate, on demand
  auto current_hessian = [&]() -> const SymMat& {
    if (!hess) hess = obj.hessian(x);
    return *hess;
  };

  bool last_was_descend = false;

  for (int k = 0;; ++k) {
    const double gnorm = g.norm();
    if (gnorm <= eps) {
      out.grad_converged = true;
      break;
    }
    if (k >= max_iters) break;
    if (!top && cfg.recursion == RecursionForm::fixed_form &&
        out.successes >= cfg.max_successful_coarse)
      break;
    if (ctx.out_of_budget()) break;

    // Model choice: descend when the transfer keeps enough of the gradient.
    bool descend = false;
    const TransferPair* pair = nullptr;
    if (level > 0) {
      pair = &*ctx.hierarchy.levels[level].down;
      descend = should_descend(g, pair->R, cfg.kappa_H,
                               cfg.eps_at(level - 1, depth));
      if (cfg.descend == DescendPolicy::alternate && last_was_descend)
        descend = false;
    }

    IterationRecord rec;
    rec.level = level;
    rec.iterate_index = k;
    rec.lambda = lambda;
    rec.grad_norm = gnorm;
    rec.model_kind = descend ? ModelKind::coarse : ModelKind::taylor;

    Vector s;
    double pred = 0.0;
    double coarse_step_norm = 0.0;
    bool sub_ok = false;

    if (descend) {
      bool entry_ok = true;
      Vector x0H;
      LevelOutcome lo;
      try {
        CoarseModel cm = build_coarse_model(
            g, q == 2 ? current_hessian() : SymMat{}, x, *pair,
            ctx.hierarchy.levels[level - 1].oracle, q);
        if (cfg.audit_mode && q == 2)
          audit_recursion_entry(ctx, cm, g, current_hessian(), *pair);
        else if (cfg.audit_mode)
          audit_recursion_entry(ctx, cm, g, SymMat{}, *pair);
        x0H = cm.x0H;
        const ObjectiveOracle sub = as_oracle(std::move(cm));
        lo = run_level(ctx, level - 1, sub, x0H, lambda,
                       cfg.eps_at(level - 1, depth), cfg.max_coarse_iters,
                       /*top=*/false);
      } catch (const ObjectiveOverflow&) {
        entry_ok = false;
      }
      if (entry_ok) {
        Vector s_H = lo.x - x0H;
        coarse_step_norm = s_H.norm();
        pred = lo.total_decrease;
        s = pair->P * s_H;
        sub_ok = pred > 0.0 && coarse_step_norm > 0.0;
      }
    } else {
      SubproblemResult sp =
          q == 1 ? solve_q1(g, lambda)
                 : solve_q2(g, current_hessian(), lambda, cfg.theta,
                            cfg.max_secular_iters);
      ctx.level_flops[level] += sp.flops;
      ctx.level_flops_dense[level] += sp.flops_dense_model;
      rec.flops_this_iter = sp.flops;
      sub_ok = sp.ok();
      s = std::move(sp.step);
      pred = sp.model_decrease;
    }

    // Acceptance of the trial point.
    double rho = kNaN;
    bool success = false;
    const double f_before = f;
    Vector x_before;
    if (ctx.observer) x_before = x;
    if (sub_ok) {
      double f_trial = f;
      bool eval_ok = true;
      Vector trial = x + s;
      try {
        f_trial = obj.value(trial);
      } catch (const ObjectiveOverflow&) {
        eval_ok = false;
      }
      if (eval_ok && std::isfinite(f_trial)) {
        const double ared = f - f_trial;
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                             (1.0 + std::abs(f));
        const auto r = compute_rho(ared, pred, f, cfg.pred_floor_coef);
        if (pred > noise && r) {
          rho = *r;
          success = rho >= cfg.eta1;
        } else if (pred > 0.0 && ared >= 0.0 && (!top || ared > 0.0)) {
          // The predicted reduction is below the rounding resolution of f
          // and the measured change does not contradict it: the model and
          // the objective agree to attainable precision, so the step is
          // taken. Rejecting would loop forever, since lambda growth only
          // shrinks the next prediction further. The top level additionally
          // insists on a measured strict decrease so that the recorded
          // trace stays strictly monotone at successful iterations.
          rho = 1.0;
          success = true;
        }
      }
      if (success) {
        x = std::move(trial);
        f = f_trial;
        g = obj.gradient(x);
        hess.reset();
        ++out.successes;
      }
    }

    const double lambda_used = lambda;
    lambda = update_lambda(std::isnan(rho) ? -1.0 : rho, lambda, cfg);

    rec.rho = rho;
    rec.step_norm = sub_ok ? s.norm() : 0.0;
    rec.successful = success;
    rec.f_value = f;
    ++ctx.level_iters[level];
    if (top) ctx.top_trace.push_back(rec);
    if (ctx.observer) {
      ctx.observer(IterationEvent{.level = level,
                                  .iterate_index = k,
                                  .model_kind = rec.model_kind,
                                  .x = x_before,
                                  .step = s,
                                  .coarse_step_norm = coarse_step_norm,
                                  .rho = rho,
                                  .lambda = lambda_used,
                                  .successful = success,
                                  .f_before = f_before,
                                  .f_after = f,
                                  .grad_norm_before = gnorm});
    }
    last_was_descend = descend;
    ++out.iters;
  }

  out.x = std::move(x);
  out.f_final = f;
  out.grad_norm = g.norm();
  out.total_decrease = f_entry - f;
  return out;
}

RunReport assemble_report(RunContext& ctx, const LevelOutcome& out,
                          const SolverConfig& cfg, int q) {
  RunReport r;
  r.converged = out.grad_converged;
  if (out.grad_converged)
    r.termination = Termination::gradient_tol;
  else if (ctx.aborted)
    r.termination = ctx.abort_reason;
  else
    r.termination = Termination::max_iters;
  r.trace = std::move(ctx.top_trace);
  r.it_T = static_cast<int>(r.trace.size());
  for (const IterationRecord& rec : r.trace)
    if (rec.model_kind == ModelKind::taylor) ++r.it_f;
  r.per_level_flops = std::move(ctx.level_flops);
  r.per_level_flops_dense = std::move(ctx.level_flops_dense);
  r.per_level_iterations = std::move(ctx.level_iters);
  r.x_final = out.x;
  r.f_final = out.f_final;
  r.grad_norm_final = out.grad_norm;
  r.q = q;
  r.lambda_max_seen = cfg.lambda0;
  for (const IterationRecord& rec : r.trace)
    r.lambda_max_seen = std::max(r.lambda_max_seen, rec.lambda);
  r.lambda_final = r.trace.empty() ? cfg.lambda0 : r.trace.back().lambda;
  r.audit = ctx.audit;
  r.wall_time_sec =
      std::chrono::duration<double>(Clock::now() - ctx.start).count();
  return r;
}

}  // namespace

void SolverConfig::validate(int levels) const {
  auto fail = [](const char* msg) { throw std::invalid_argument(msg); };
  if (!(0.0 < eta1 && eta1 <= eta2 && eta2 < 1.0))
    fail("SolverConfig: need 0 < eta1 <= eta2 < 1");
  if (!(0.0 < gamma2 && gamma2 <= gamma1 && gamma1 < 1.0 && 1.0 < gamma3))
    fail("SolverConfig: need 0 < gamma2 <= gamma1 < 1 < gamma3");
  if (!(lambda_min > 0.0)) fail("SolverConfig: lambda_min must be positive");
  if (!(lambda0 > lambda_min)) fail("SolverConfig: need lambda0 > lambda_min");
  if (!(theta > 0.0)) fail("SolverConfig: theta must be positive");
  if (!(kappa_H > 0.0 && kappa_H < 1.0))
    fail("SolverConfig: kappa_H must lie in (0,1)");
  if (eps_per_level.empty()) fail("SolverConfig: eps_per_level empty");
  for (double e : eps_per_level)
    if (!(e > 0.0)) fail("SolverConfig: tolerances must be positive");
  if (eps_per_level.size() != 1 &&
      static_cast<int>(eps_per_level.size()) != levels)
    fail("SolverConfig: eps_per_level size does not match the hierarchy");
  if (max_outer_iters < 1 || max_coarse_iters < 1 || max_successful_coarse < 1)
    fail("SolverConfig: iteration limits must be >= 1");
  if (!(pred_floor_coef >= 0.0)) fail("SolverConfig: pred_floor_coef < 0");
}

double SolverConfig::eps_at(int level, int depth) const {
  (void)depth;
  if (eps_per_level.size() == 1) return eps_per_level[0];
  return eps_per_level.at(level);
}

std::optional<double> compute_rho(double ared, double pred, double f_ref,
                                  double pred_floor_coef) {
  const double floor = pred_floor_coef * (1.0 + std::abs(f_ref));
  if (!(pred > floor)) return std::nullopt;
  return ared / pred;
}

double update_lambda(double rho, double lambda, const SolverConfig& cfg) {
  if (rho >= cfg.eta1) {
    const double gamma = rho >= cfg.eta2 ? cfg.gamma2 : cfg.gamma1;
    return std::max(cfg.lambda_min, gamma * lambda);
  }
  return cfg.gamma3 * lambda;
}

RunReport arq_minimize(const ObjectiveOracle& oracle, const Vector& x0,
                       const SolverConfig& cfg, int q,
                       const Observer& observer) {
  LevelHierarchy h;
  h.levels.push_back(Level{oracle, std::nullopt, 0});
  return marq_minimize(h, x0, cfg, q, observer);
}

RunReport marq_minimize(const LevelHierarchy& hierarchy, const Vector& x0,
                        const SolverConfig& cfg, int q,
                        const Observer& observer) {
  if (q != 1 && q != 2)
    throw std::invalid_argument("marq_minimize: q must be 1 or 2");
  if (hierarchy.depth() < 1)
    throw std::invalid_argument("marq_minimize: empty hierarchy");
  if (hierarchy.top().oracle.dim != x0.size())
    throw std::invalid_argument("marq_minimize: x0 dimension mismatch");
  if (q == 2)
    for (const Level& l : hierarchy.levels)
      if (!l.oracle.has_hessian())
        throw std::invalid_argument("marq_minimize: q=2 needs Hessians");
  cfg.validate(hierarchy.depth());

  RunContext ctx(cfg, hierarchy, q, observer);
  const int depth = hierarchy.depth();
  ctx.level_flops.assign(depth, 0.0);
  ctx.level_flops_dense.assign(depth, 0.0);
  ctx.level_iters.assign(depth, 0);

  const int top = depth - 1;
  LevelOutcome out =
      run_level(ctx, top, hierarchy.top().oracle, x0, cfg.lambda0,
                cfg.eps_at(top, depth), cfg.max_outer_iters, /*top=*/true);
  return assemble_report(ctx, out, cfg, q);
}

bool lambda_ceiling_check(const RunReport& report, double L_estimate,
                          const SolverConfig& cfg, double slack) {
  const double q = report.q;
  const double K = (q + 1.0) / q * L_estimate;
  const double ceiling = std::max(cfg.lambda0 * (1.0 + 1e-12),
                                  slack * cfg.gamma3 * K / (1.0 - cfg.eta1));
  return report.lambda_max_seen <= ceiling;
}

std::string solver_config_to_json(const SolverConfig& cfg, int indent) {
  nlohmann::json j{
      {"eta1", cfg.eta1},
      {"eta2", cfg.eta2},
      {"gamma1", cfg.gamma1},
      {"gamma2", cfg.gamma2},
      {"gamma3", cfg.gamma3},
      {"lambda_min", cfg.lambda_min},
      {"lambda0", cfg.lambda0},
      {"theta", cfg.theta},
      {"kappa_H", cfg.kappa_H},
      {"eps_per_level", cfg.eps_per_level},
      {"max_outer_iters", cfg.max_outer_iters},
      {"max_coarse_iters", cfg.max_coarse_iters},
      {"recursion",
       cfg.recursion == RecursionForm::free_form ? "free_form" : "fixed_form"},
      {"max_successful_coarse", cfg.max_successful_coarse},
      {"descend", cfg.descend == DescendPolicy::always_when_allowed
                      ? "always_when_allowed"
                      : "alternate"},
      {"pred_floor_coef", cfg.pred_floor_coef},
      {"max_secular_iters", cfg.max_secular_iters},
      {"wall_budget_sec", cfg.wall_budget_sec},
      {"flop_budget", cfg.flop_budget},
      {"audit_mode", cfg.audit_mode}};
  return j.dump(indent);
}

}  // namespace marq
