#pragma once

#include <cstdint>
#include <vector>

#include "airgraph/air.hpp"
#include "airgraph/sparse.hpp"

namespace airgraph {

struct SolveConfig {
  double rtol = 1e-10;
  index_t max_iterations = 200;
  index_t up_f_smooths = 2;
  index_t down_smooths = 0;
  index_t coarse_iterations = 3;
  bool collect_timing = true;
  index_t nddofs = 0;  // discontinuous DOF count for the d-grind metric
};

struct SolveStats {
  index_t iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // relative 2-norms, one per check
  double final_relative_residual = 0.0;  // from a fresh matvec

  std::uint64_t flops = 0;         // primary counter (inside the kernels)
  std::uint64_t shadow_flops = 0;  // model recomputation at the call sites
  double work_units = 0.0;         // flops / (2 * nnz of the top matrix)

  double grid_complexity = 0.0;
  double operator_complexity = 0.0;
  double storage_complexity = 0.0;

  double solve_seconds = 0.0;
  double wu_ratio = 0.0;    // (solve time / WUs) / top-grid matvec time
  double c_grind_ns = 0.0;  // solve ns / unknowns / iteration
  double d_grind_ns = 0.0;  // same against nddofs when provided
};

/// One F-point smooth: x_f += Aff_inv (b_f - A_ff x_f - A_fc x_c), with the
/// C components untouched.
void f_smooth(const Level& level, std::span<const double> b,
              std::vector<double>& x, FlopCounter* fc = nullptr,
              FlopCounter* shadow = nullptr);

/// One V-cycle: restrict residuals with no pre-smoothing (unless
/// down_smooths > 0), run the coarse Richardson iteration preconditioned by
/// the assembled coarse polynomial, then prolongate and apply
/// up_f_smooths F-point smooths per level on the way up.
std::vector<double> vcycle(const Hierarchy& h, std::span<const double> b,
                           std::span<const double> x, const SolveConfig& cfg,
                           FlopCounter* fc = nullptr,
                           FlopCounter* shadow = nullptr);

/// Undamped Richardson iteration x <- x + V(b - A x) from a zero initial
/// guess, stopping at ||b - A x|| / ||b|| <= rtol measured with a fresh
/// matvec every iteration. Non-convergence returns converged = false with
/// the stats still populated.
SolveStats richardson_solve(const Hierarchy& h, std::span<const double> b,
                            const SolveConfig& cfg, std::vector<double>* x_out = nullptr);

}  // namespace airgraph
