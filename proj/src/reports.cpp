#include "airgraph/reports.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace airgraph {

namespace {

double finite_or(double v, double fallback) {
  return std::isfinite(v) ? v : fallback;
}

}  // namespace

nlohmann::json hierarchy_report(const Hierarchy& h) {
  nlohmann::json rep;
  rep["levels"] = nlohmann::json::array();
  for (std::size_t l = 0; l < h.levels.size(); ++l) {
    const Level& lvl = h.levels[l];
    nlohmann::json jl;
    jl["level"] = l;
    jl["n"] = lvl.a.nrows();
    jl["nnz"] = lvl.a.nnz();
    jl["n_f"] = lvl.map.n_f();
    jl["n_c"] = lvl.map.n_c();
    jl["max_theta_pre"] = lvl.theta_pre.max_theta;
    jl["max_theta_post"] = lvl.theta_post.max_theta;
    jl["ddc_alpha_diag"] = lvl.theta_pre.alpha_diag;
    jl["ddc_converted"] = lvl.ddc_converted.size();
    jl["aff_diagonal"] = lvl.a_ff.structurally_diagonal();
    jl["nnz_r"] = lvl.r.nnz();
    jl["nnz_p"] = lvl.p.nnz();
    jl["nnz_aff_inv"] = lvl.ff_inv.assembled ? lvl.ff_inv.assembled->nnz() : 0;
    jl["smoother_growth"] = lvl.smoother_growth;
    jl["poly_attempts"] = lvl.poly_attempts;
    rep["levels"].push_back(std::move(jl));
  }
  rep["coarse"] = {{"n", h.coarse_a.nrows()},
                   {"nnz", h.coarse_a.nnz()},
                   {"poly_order", h.coarse_inv.order},
                   {"iterations", h.coarse_iterations},
                   {"solver_growth", h.coarse_growth}};
  rep["level_count"] = h.level_count();
  rep["grid_complexity"] = h.metrics.grid_complexity;
  rep["operator_complexity"] = h.metrics.operator_complexity;
  rep["storage_complexity"] = h.metrics.storage_complexity;
  rep["max_theta"] = max_theta(h);
  return rep;
}

nlohmann::json solve_report(const SolveStats& stats) {
  nlohmann::json rep;
  rep["iterations"] = stats.iterations;
  rep["converged"] = stats.converged;
  rep["residual_history"] = stats.residual_history;
  rep["final_relative_residual"] = stats.final_relative_residual;
  rep["flops"] = stats.flops;
  rep["shadow_flops"] = stats.shadow_flops;
  rep["work_units"] = stats.work_units;
  rep["grid_complexity"] = stats.grid_complexity;
  rep["operator_complexity"] = stats.operator_complexity;
  rep["storage_complexity"] = stats.storage_complexity;
  // Wall-clock numbers vary run to run and live under their own key so the
  // deterministic part of the report can be compared directly.
  rep["timing"] = {{"solve_seconds", stats.solve_seconds},
                   {"wu_ratio", stats.wu_ratio},
                   {"c_grind_ns", stats.c_grind_ns},
                   {"d_grind_ns", stats.d_grind_ns}};
  return rep;
}

nlohmann::json partition_report(const PartitionState& state) {
  nlohmann::json rep;
  rep["initial_ranks"] = state.initial_ranks;
  rep["threshold"] = state.threshold;
  rep["levels"] = nlohmann::json::array();
  nlohmann::json triggers = nlohmann::json::array();
  for (std::size_t l = 0; l < state.levels.size(); ++l) {
    const LevelPartition& lp = state.levels[l];
    nlohmann::json jl;
    jl["level"] = l;
    jl["n"] = lp.n;
    jl["nnz"] = lp.nnz;
    jl["active_ranks"] = lp.active_ranks;
    jl["triggered"] = lp.triggered;
    // JSON has no infinity; all-local levels report a null ratio.
    jl["ratio"] = std::isfinite(lp.ratio_after)
                      ? nlohmann::json(lp.ratio_after)
                      : nlohmann::json(nullptr);
    jl["ratio_before_trigger"] = std::isfinite(lp.ratio_before)
                                     ? nlohmann::json(lp.ratio_before)
                                     : nlohmann::json(nullptr);
    jl["local_share"] = finite_or(lp.share_after, 1.0);
    rep["levels"].push_back(std::move(jl));
    if (lp.triggered) triggers.push_back(l);
  }
  rep["trigger_levels"] = std::move(triggers);
  return rep;
}

double max_theta(const Hierarchy& h) {
  double worst = 0.0;
  for (const Level& lvl : h.levels)
    worst = std::max(worst, lvl.theta_post.max_theta);
  return worst;
}

std::string csv_header() {
  return "alpha,cf,levels,grid_complexity,operator_complexity,"
         "storage_complexity,iterations,work_units,max_theta,n,nnz,"
         "converged,final_relres,seed";
}

std::string csv_row(const Hierarchy& h, const SolveStats& stats, double alpha,
                    const std::string& cf_name, std::uint64_t seed) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%.6g,%s,%lld,%.6g,%.6g,%.6g,%lld,%.6g,%.6g,%lld,%lld,%d,"
                "%.6g,%llu",
                alpha, cf_name.c_str(),
                static_cast<long long>(h.level_count()),
                h.metrics.grid_complexity, h.metrics.operator_complexity,
                h.metrics.storage_complexity,
                static_cast<long long>(stats.iterations), stats.work_units,
                max_theta(h), static_cast<long long>(h.top().nrows()),
                static_cast<long long>(h.top().nnz()),
                stats.converged ? 1 : 0, stats.final_relative_residual,
                static_cast<unsigned long long>(seed));
  return buf;
}

void append_csv(const std::filesystem::path& path, const std::string& row) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + path.string());
  if (fresh) out << csv_header() << "\n";
  out << row << "\n";
}

}  // namespace airgraph
