#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "airgraph/coarsening.hpp"
#include "airgraph/gmres_poly.hpp"
#include "airgraph/sparse.hpp"

namespace airgraph {

enum class CfSplitting { kPmisr, kPmis, kPmisSwap };
enum class ProlongationKind { kOnePoint, kIdeal };

struct SetupConfig {
  double strength_alpha = 0.5;
  CfSplitting cf = CfSplitting::kPmisr;
  bool ddc_enabled = true;
  double ddc_fraction = 0.10;
  index_t ddc_bins = 1000;
  index_t max_loops = 3;

  index_t poly_order = 6;          // polynomial degree on each level
  index_t sparsity_order = 1;
  double drop_coarse = 0.001;      // relative drop on coarse matrices
  double drop_restrict = 0.01;     // relative drop on the Z part of R

  index_t coarse_size_target = 3000;  // truncate once a grid is this small
  index_t coarse_poly_order = 12;
  index_t coarse_iterations = 3;   // coarse Richardson count (storage metric)
  index_t max_levels = 0;          // 0 = unlimited

  ProlongationKind prolongation = ProlongationKind::kOnePoint;
  WeightMode weight_mode = WeightMode::kSumCardinalities;

  // Test hooks: replace the polynomial approximate inverse with the dense
  // inverse of A_ff, and/or solve the coarsest grid with a dense LU.
  bool exact_ff_inverse = false;
  bool exact_coarse_solve = false;

  std::uint64_t seed = 0;
};

/// One multigrid level: the operator, its CF splitting, the extracted
/// blocks, the assembled approximate inverse of A_ff and the grid-transfer
/// operators R = [Z | I] (n_C x n) and P = [W ; I] (n x n_C), both stored
/// in the level's own (unpermuted) row/column ordering.
struct Level {
  SparseMatrix a;
  CfLabels labels;
  LabelMap map;
  SparseMatrix a_ff;
  SparseMatrix a_fc;
  SparseMatrix a_cf;
  GmresPolynomial ff_inv;  // assembled
  SparseMatrix r;
  SparseMatrix p;

  DominanceReport theta_pre;   // dominance of A_ff after the first CF pass
  DominanceReport theta_post;  // after DDC (same as theta_pre if disabled)
  std::vector<index_t> ddc_converted;  // global rows flipped by DDC

  double smoother_growth = 0.0;  // estimated rate of I - Aff_inv A_ff
  index_t poly_attempts = 1;     // polynomial seeds tried by the guard
};

struct HierarchyMetrics {
  double grid_complexity = 0.0;
  double operator_complexity = 0.0;
  double storage_complexity = 0.0;
};

class DenseCoarseSolver;  // test hook, defined in air.cpp

struct Hierarchy {
  std::vector<Level> levels;
  SparseMatrix coarse_a;
  GmresPolynomial coarse_inv;  // assembled polynomial coarse solver
  index_t coarse_iterations = 3;
  double coarse_growth = 0.0;
  HierarchyMetrics metrics;
  std::shared_ptr<const DenseCoarseSolver> coarse_exact;  // set by the hook

  const SparseMatrix& top() const {
    return levels.empty() ? coarse_a : levels.front().a;
  }
  index_t level_count() const {
    return static_cast<index_t>(levels.size()) + 1;
  }
};

/// Z = -A_cf * Aff_inv with the relative row-wise drop applied to Z only,
/// assembled into R = [Z | I] in global column ordering. The identity block
/// is exact and never dropped.
SparseMatrix build_restriction(const SparseMatrix& a_cf,
                               const SparseMatrix& aff_inv,
                               double drop_restrict, const LabelMap& map);

/// Classical one-point prolongator: C rows carry the identity; each F row
/// interpolates from the strong C neighbour with the largest |a_ij| (ties
/// to the lowest column), falling back to the largest C neighbour in the
/// whole row, or an empty row when the F point has no C neighbour at all.
SparseMatrix build_prolongation(const CfLabels& labels, const LabelMap& map,
                                const StrengthGraph& g, const SparseMatrix& a);

/// Ideal prolongator P = [W ; I] with W = -Aff_inv * A_fc (exactness tests).
SparseMatrix build_ideal_prolongation(const SparseMatrix& a_fc,
                                      const SparseMatrix& aff_inv,
                                      const LabelMap& map);

/// R (A P) followed by the relative drop at drop_coarse.
SparseMatrix coarse_matrix(const SparseMatrix& r, const SparseMatrix& a,
                           const SparseMatrix& p, double drop_coarse);

/// Builds the multilevel hierarchy: per level strength -> CF splitting ->
/// DDC -> block extraction -> polynomial approximate inverse -> R, P ->
/// RAP, until the coarse grid reaches coarse_size_target (truncation) or
/// poly_order + 1 unknowns (natural termination). Every assembled
/// approximate inverse passes a growth check (see Level::smoother_growth);
/// amplifying fits are retried with derived seeds, and truncation is only
/// taken once the coarse polynomial certifies a decisively contracting
/// application, otherwise coarsening continues. Throws on a coarsening
/// stall (< 1% reduction or no F points) and on zero diagonals where DDC
/// needs them.
Hierarchy setup(const SparseMatrix& a, const SetupConfig& cfg);

/// Recomputes the complexity metrics from the stored matrices. Storage
/// complexity counts only what the solve needs: per non-coarsest level
/// Aff_inv, A_ff, A_fc, R and P; on the coarsest the assembled inverse plus
/// the coarse matrix itself when more than one coarse iteration runs.
HierarchyMetrics recompute_metrics(const Hierarchy& h);

/// Applies the dense coarse LU test hook; only valid when cfg.exact_coarse_solve
/// was set during setup.
std::vector<double> solve_coarse_exact(const Hierarchy& h,
                                       std::span<const double> rhs);

}  // namespace airgraph
