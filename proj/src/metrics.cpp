#include "marq/metrics.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace marq {

using nlohmann::json;

const char* to_string(ModelKind k) {
  return k == ModelKind::taylor ? "taylor" : "coarse";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::gradient_tol: return "gradient_tol";
    case Termination::max_iters: return "max_iters";
    case Termination::wall_budget: return "wall_budget";
    case Termination::flop_budget: return "flop_budget";
  }
  return "unknown";
}

double RunReport::total_flops() const {
  return std::accumulate(per_level_flops.begin(), per_level_flops.end(), 0.0);
}

double RunReport::total_flops_dense() const {
  return std::accumulate(per_level_flops_dense.begin(),
                         per_level_flops_dense.end(), 0.0);
}

double save_ratio(const RunReport& one_level, const RunReport& multilevel) {
  const double denom = multilevel.total_flops();
  if (!(denom > 0.0))
    throw std::invalid_argument("save_ratio: multilevel run has zero flops");
  return one_level.total_flops() / denom;
}

MethodStats method_stats(const std::vector<RunReport>& reports) {
  if (reports.empty())
    throw std::invalid_argument("method_stats: empty report list");
  MethodStats s;
  s.runs = static_cast<int>(reports.size());
  double rmse_n = 0;
  for (const RunReport& r : reports) {
    if (!r.converged) continue;
    ++s.converged_runs;
    s.mean_it_T += r.it_T;
    s.mean_it_f += r.it_f;
    s.mean_flops += r.total_flops();
    if (std::isfinite(r.rmse_final)) {
      s.mean_rmse += r.rmse_final;
      rmse_n += 1;
    }
  }
  if (s.converged_runs > 0) {
    s.mean_it_T /= s.converged_runs;
    s.mean_it_f /= s.converged_runs;
    s.mean_flops /= s.converged_runs;
  }
  s.mean_rmse = rmse_n > 0 ? s.mean_rmse / rmse_n
                           : std::numeric_limits<double>::quiet_NaN();
  return s;
}

ComparisonSummary aggregate(const std::vector<RepPair>& reps) {
  if (reps.empty()) throw std::invalid_argument("aggregate: empty rep list");
  std::vector<RunReport> ones, multis;
  ones.reserve(reps.size());
  multis.reserve(reps.size());
  ComparisonSummary cs;
  double sum = 0.0;
  for (const RepPair& p : reps) {
    ones.push_back(p.one_level);
    multis.push_back(p.multilevel);
    if (p.one_level.converged && p.multilevel.converged) {
      const double s = save_ratio(p.one_level, p.multilevel);
      if (cs.pairs_in_save == 0) {
        cs.save_min = cs.save_max = s;
      } else {
        cs.save_min = std::min(cs.save_min, s);
        cs.save_max = std::max(cs.save_max, s);
      }
      sum += s;
      ++cs.pairs_in_save;
    }
  }
  if (cs.pairs_in_save > 0) cs.save_avg = sum / cs.pairs_in_save;
  cs.one_level = method_stats(ones);
  cs.multilevel = method_stats(multis);
  return cs;
}

void write_trace_csv(std::ostream& os, const RunReport& report) {
  os << "iter,level,model,successful,rho,lambda,step_norm,f,grad_norm,flops\n";
  os.precision(17);
  for (const IterationRecord& r : report.trace) {
    os << r.iterate_index << ',' << r.level << ',' << to_string(r.model_kind)
       << ',' << (r.successful ? 1 : 0) << ',' << r.rho << ',' << r.lambda
       << ',' << r.step_norm << ',' << r.f_value << ',' << r.grad_norm << ','
       << r.flops_this_iter << '\n';
  }
}

namespace {

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json record_to_json(const IterationRecord& r) {
  return json{{"iter", r.iterate_index},
              {"level", r.level},
              {"model", to_string(r.model_kind)},
              {"successful", r.successful},
              {"rho", finite_or_null(r.rho)},
              {"lambda", r.lambda},
              {"step_norm", r.step_norm},
              {"f", r.f_value},
              {"grad_norm", r.grad_norm},
              {"flops", r.flops_this_iter}};
}

json stats_to_json(const MethodStats& s) {
  return json{{"runs", s.runs},
              {"converged_runs", s.converged_runs},
              {"mean_it_T", s.mean_it_T},
              {"mean_it_f", s.mean_it_f},
              {"mean_rmse", finite_or_null(s.mean_rmse)},
              {"mean_flops", s.mean_flops}};
}

}  // namespace

std::string report_to_json(const RunReport& r, int indent) {
  json j{{"converged", r.converged},
         {"termination", to_string(r.termination)},
         {"it_T", r.it_T},
         {"it_f", r.it_f},
         {"per_level_flops", r.per_level_flops},
         {"per_level_flops_dense_model", r.per_level_flops_dense},
         {"per_level_iterations", r.per_level_iterations},
         {"total_flops", r.total_flops()},
         {"rmse", finite_or_null(r.rmse_final)},
         {"wall_time_sec", r.wall_time_sec},
         {"f_final", r.f_final},
         {"grad_norm_final", r.grad_norm_final},
         {"lambda_final", r.lambda_final},
         {"lambda_max_seen", r.lambda_max_seen},
         {"seed", r.seed},
         {"q", r.q}};
  if (r.audit.recursion_entries > 0) {
    j["audit"] = json{{"recursion_entries", r.audit.recursion_entries},
                      {"max_first_order", r.audit.max_first_order},
                      {"max_second_order", r.audit.max_second_order}};
  }
  json t = json::array();
  for (const IterationRecord& rec : r.trace) t.push_back(record_to_json(rec));
  j["trace"] = std::move(t);
  return j.dump(indent);
}

std::string summary_to_json(const ComparisonSummary& s, int indent) {
  json j{{"one_level", stats_to_json(s.one_level)},
         {"multilevel", stats_to_json(s.multilevel)},
         {"save_min", finite_or_null(s.save_min)},
         {"save_avg", finite_or_null(s.save_avg)},
         {"save_max", finite_or_null(s.save_max)},
         {"pairs_in_save", s.pairs_in_save}};
  return j.dump(indent);
}

}  // namespace marq
