// Command-line driver: single solves, paper-style ARC vs MARC comparisons,
// and the library invariant audit.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "marq/audit.hpp"
#include "marq/bench.hpp"

namespace {

using nlohmann::json;

struct CommonArgs {
  marq::ProblemDescriptor problem;
  marq::SolverConfig cfg;
  int q = 2;
  int threads = 0;
  std::string out = "run";
  std::string problem_file;
  std::string rhs = "discrete";
  std::string recursion = "fixed";
  std::string descend = "always";
};

void add_problem_flags(CLI::App* app, CommonArgs& a) {
  app->add_option("--n1d", a.problem.n1d,
                  "interior grid points per dimension (top level)");
  app->add_option("--levels", a.problem.levels, "number of levels");
  app->add_option("--a", a.problem.a, "initial guess scale: u0 = a*rand");
  app->add_option("--seed", a.problem.seed, "base RNG seed");
  app->add_option("--rhs", a.rhs, "right-hand side: discrete|analytic")
      ->check(CLI::IsMember({"discrete", "analytic"}));
  app->add_option("--problem", a.problem_file,
                  "JSON problem descriptor (overrides the flags above)");
  app->add_option("--q", a.q, "model order")->check(CLI::IsMember({1, 2}));
  app->add_option("--out", a.out, "output path prefix");
  app->add_option("--threads", a.threads,
                  "worker threads (0 = MARQ_THREADS or hardware)");
}

void add_solver_flags(CLI::App* app, CommonArgs& a) {
  marq::SolverConfig& c = a.cfg;
  app->add_option("--eta1", c.eta1, "acceptance threshold");
  app->add_option("--eta2", c.eta2, "very-successful threshold");
  app->add_option("--gamma1", c.gamma1, "lambda decrease (successful)");
  app->add_option("--gamma2", c.gamma2, "lambda decrease (very successful)");
  app->add_option("--gamma3", c.gamma3, "lambda increase (unsuccessful)");
  app->add_option("--lambda0", c.lambda0, "initial regularization weight");
  app->add_option("--lambda-min", c.lambda_min, "regularization floor");
  app->add_option("--theta", c.theta, "inner stopping multiplier");
  app->add_option("--kappa-h", c.kappa_H, "descend condition fraction");
  app->add_option("--eps", c.eps_per_level,
                  "gradient tolerance(s), coarsest level first");
  app->add_option("--max-outer", c.max_outer_iters, "top-level iteration cap");
  app->add_option("--max-coarse", c.max_coarse_iters,
                  "per-visit coarse iteration cap");
  app->add_option("--recursion", a.recursion, "free|fixed recursion form")
      ->check(CLI::IsMember({"free", "fixed"}));
  app->add_option("--max-successful", c.max_successful_coarse,
                  "successful coarse iterations per visit (fixed form)");
  app->add_option("--descend", a.descend, "always|alternate descend policy")
      ->check(CLI::IsMember({"always", "alternate"}));
  app->add_option("--max-secular", c.max_secular_iters,
                  "secular iteration cap");
  app->add_option("--pred-floor-coef", c.pred_floor_coef,
                  "predicted-reduction floor coefficient");
  app->add_option("--wall-budget", c.wall_budget_sec,
                  "wall-clock budget in seconds (0 = unlimited)");
  app->add_option("--flop-budget", c.flop_budget,
                  "factorization flop budget (0 = unlimited)");
  app->add_flag("--audit-mode", c.audit_mode,
                "verify coherence at every recursion entry");
}

void finalize_args(CommonArgs& a) {
  a.problem.rhs =
      a.rhs == "analytic" ? marq::RhsMode::analytic : marq::RhsMode::discrete;
  a.cfg.recursion = a.recursion == "fixed" ? marq::RecursionForm::fixed_form
                                           : marq::RecursionForm::free_form;
  a.cfg.descend = a.descend == "alternate"
                      ? marq::DescendPolicy::alternate
                      : marq::DescendPolicy::always_when_allowed;
  if (!a.problem_file.empty()) {
    std::ifstream in(a.problem_file);
    if (!in) throw CLI::ValidationError("--problem: cannot open file");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    a.problem = marq::descriptor_from_json(text);
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

json report_header(const CommonArgs& a) {
  return json{{"problem", json::parse(marq::descriptor_to_json(a.problem))},
              {"config", json::parse(marq::solver_config_to_json(a.cfg))},
              {"q", a.q}};
}

void write_report_files(const std::string& prefix, const CommonArgs& a,
                        const marq::RunReport& rep, const std::string& method) {
  json j = report_header(a);
  j["method"] = method;
  j["report"] = json::parse(marq::report_to_json(rep));
  write_file(prefix + ".json", j.dump(2) + "\n");

  std::ofstream csv(prefix + ".csv");
  marq::write_trace_csv(csv, rep);

  std::ofstream sol(prefix + "_solution.txt");
  sol.precision(17);
  for (Eigen::Index i = 0; i < rep.x_final.size(); ++i)
    sol << rep.x_final[i] << '\n';
}

int cmd_solve(CommonArgs& a, const std::string& method) {
  finalize_args(a);
  a.cfg.validate(a.problem.levels);
  const marq::GridHierarchy gh =
      marq::build_hierarchy(a.problem.n1d, a.problem.levels, a.problem.rhs);
  const bool multilevel = method == "marq";
  const marq::RunReport rep =
      marq::run_grid_method(gh, a.problem, a.cfg, a.q, multilevel);
  write_report_files(a.out, a, rep, method);
  std::printf(
      "%s n1d=%d levels=%d seed=%llu: %s it_T=%d it_f=%d |grad|=%.3e "
      "rmse=%.3e flops=%.3e\n",
      method.c_str(), a.problem.n1d, multilevel ? a.problem.levels : 1,
      static_cast<unsigned long long>(rep.seed),
      rep.converged ? "converged" : "FAIL", rep.it_T, rep.it_f,
      rep.grad_norm_final, rep.rmse_final, rep.total_flops());
  return rep.converged ? 0 : 2;
}

int cmd_reproduce(CommonArgs& a, int reps) {
  finalize_args(a);
  a.cfg.validate(a.problem.levels);
  const auto pairs =
      marq::run_comparison(a.problem, reps, a.cfg, a.q, a.threads);
  const marq::ComparisonSummary s = marq::aggregate(pairs);

  json j = report_header(a);
  j["reps"] = reps;
  j["summary"] = json::parse(marq::summary_to_json(s));
  json rows = json::array();
  for (const marq::RepPair& p : pairs) {
    json row{{"seed", p.seed}};
    for (const auto* side : {&p.one_level, &p.multilevel}) {
      json r{{"converged", side->converged},
             {"it_T", side->it_T},
             {"it_f", side->it_f},
             {"rmse", side->rmse_final},
             {"flops", side->total_flops()}};
      row[side == &p.one_level ? "one_level" : "multilevel"] = std::move(r);
    }
    if (p.one_level.converged && p.multilevel.converged)
      row["save"] = marq::save_ratio(p.one_level, p.multilevel);
    rows.push_back(std::move(row));
  }
  j["repetitions"] = std::move(rows);
  write_file(a.out + ".json", j.dump(2) + "\n");

  std::printf("n_h = %d, %d reps, a = %g\n", a.problem.n1d * a.problem.n1d,
              reps, a.problem.a);
  std::printf("  %-6s %8s %8s %10s %12s\n", "method", "it_T", "it_f", "RMSE",
              "conv");
  std::printf("  %-6s %8.1f %8.1f %10.1e %8d/%d\n", "arq", s.one_level.mean_it_T,
              s.one_level.mean_it_f, s.one_level.mean_rmse,
              s.one_level.converged_runs, s.one_level.runs);
  std::printf("  %-6s %8.1f %8.1f %10.1e %8d/%d\n", "marq",
              s.multilevel.mean_it_T, s.multilevel.mean_it_f,
              s.multilevel.mean_rmse, s.multilevel.converged_runs,
              s.multilevel.runs);
  if (s.pairs_in_save > 0)
    std::printf("  save (min-avg-max): %.2f-%.2f-%.2f over %d pairs\n",
                s.save_min, s.save_avg, s.save_max, s.pairs_in_save);
  return 0;
}

int cmd_audit(int q, const std::string& inject) {
  marq::AuditOptions opts;
  opts.q = q;
  opts.corrupt_transfer = inject == "transfer";
  const auto checks = marq::run_audit_checks(opts);
  int failures = 0;
  for (const marq::AuditCheck& c : checks) {
    std::printf("%-28s %s  margin=%.3e", c.name.c_str(),
                c.pass ? "PASS" : "FAIL", c.margin);
    if (c.bound > 0.0) std::printf(" (bound %.1e)", c.bound);
    if (!c.note.empty()) std::printf("  [%s]", c.note.c_str());
    std::printf("\n");
    if (!c.pass) ++failures;
  }
  if (failures > 0) std::printf("%d check(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive regularization solvers (order 1/2) with recursive "
               "multilevel acceleration, on a nonlinear PDE benchmark"};
  app.require_subcommand(1);

  CommonArgs a;
  std::string method = "arq";
  int reps = 10;
  std::string inject;

  CLI::App* solve = app.add_subcommand("solve", "run one minimization");
  solve->add_option("--method", method, "arq|marq")
      ->check(CLI::IsMember({"arq", "marq"}));
  add_problem_flags(solve, a);
  add_solver_flags(solve, a);

  CLI::App* repro = app.add_subcommand(
      "reproduce", "ARC vs MARC comparison over repeated random starts");
  repro->add_option("--reps", reps, "number of repetitions")
      ->check(CLI::PositiveNumber);
  add_problem_flags(repro, a);
  add_solver_flags(repro, a);

  CLI::App* audit =
      app.add_subcommand("audit", "run the library invariant checks");
  int audit_q = 2;
  audit->add_option("--q", audit_q, "model order")
      ->check(CLI::IsMember({1, 2}));
  audit->add_option("--inject-fault", inject,
                    "fault injection for self-test: transfer")
      ->check(CLI::IsMember({"transfer"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(a, method);
    if (repro->parsed()) return cmd_reproduce(a, reps);
    return cmd_audit(audit_q, inject);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
