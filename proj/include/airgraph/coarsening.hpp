#pragma once

#include <cstdint>
#include <vector>

#include "airgraph/sparse.hpp"

namespace airgraph {

/// Pattern-only strength-of-connection graph. Row i of `s` holds S_i, the
/// strong dependencies of i; `st` holds the transpose (strong influences)
/// and `sym` the union S ∪ Sᵀ. No self edges; S is a subset of the stored
/// nonzero off-diagonal pattern of the source matrix.
struct StrengthGraph {
  index_t n = 0;
  std::vector<index_t> s_offsets{0};
  std::vector<index_t> s_cols;
  std::vector<index_t> st_offsets{0};
  std::vector<index_t> st_cols;
  std::vector<index_t> sym_offsets{0};
  std::vector<index_t> sym_cols;
  double alpha = 0.0;

  std::span<const index_t> s_row(index_t i) const {
    return {s_cols.data() + s_offsets[i],
            static_cast<std::size_t>(s_offsets[i + 1] - s_offsets[i])};
  }
  std::span<const index_t> st_row(index_t i) const {
    return {st_cols.data() + st_offsets[i],
            static_cast<std::size_t>(st_offsets[i + 1] - st_offsets[i])};
  }
  std::span<const index_t> sym_row(index_t i) const {
    return {sym_cols.data() + sym_offsets[i],
            static_cast<std::size_t>(sym_offsets[i + 1] - sym_offsets[i])};
  }

  /// Builds a graph directly from directed adjacency rows (test helper and
  /// entry point for externally supplied patterns).
  static StrengthGraph from_pattern(index_t n,
                                    const std::vector<std::vector<index_t>>& s);
};

/// Classical strength of connection with absolute values:
/// j ∈ S_i iff j != i, a_ij stored with |a_ij| > 0, and
/// |a_ij| >= alpha * max_{k != i} |a_ik|.
/// With alpha = 0 this is exactly the stored-nonzero off-diagonal adjacency.
StrengthGraph strength(const SparseMatrix& a, double alpha);

/// How the deterministic part of a CF weight counts strong edges.
enum class WeightMode {
  kSumCardinalities,   // |S_i| + |S_i^T|
  kUnionCardinality,   // |S_i ∪ S_i^T|
};

/// CF splitting state: per-row label plus the random weights
/// w_i = (strong degree) + r_i with r_i ∈ [0,1) drawn from the
/// counter-based generator keyed by (seed, i).
struct CfLabels {
  std::vector<CfLabel> label;
  std::vector<double> weight;
  std::uint64_t seed = 0;

  index_t count(CfLabel l) const {
    index_t c = 0;
    for (CfLabel x : label) c += (x == l);
    return c;
  }
};

/// Randomized greedy independent set in S ∪ Sᵀ, selecting F points with
/// locally minimal weight. Each sweep turns the unassigned nodes whose
/// weight is below every strong neighbour's (assigned or not) into F and
/// their unassigned strong neighbours into C; after max_loops sweeps (or a
/// fixed point) the leftovers become C. Nodes with no strong edges become
/// F during initialization. The F set is always independent in sym (no F
/// point strongly depends on or influences another F point). Ties are
/// broken by lower node index.
CfLabels pmisr(const StrengthGraph& g, index_t max_loops, std::uint64_t seed,
               WeightMode mode = WeightMode::kSumCardinalities);

/// Same algorithm on caller-provided weights (exposed for enumeration
/// tests; the public entry point generates weights from the seed).
CfLabels pmisr_with_weights(const StrengthGraph& g, index_t max_loops,
                            std::vector<double> weights);

/// Comparison baseline. Sweeps assign locally weight-maximal nodes to C
/// and their unassigned strong neighbours to F, looping to exhaustion, so
/// isolated nodes become C. With swap = true the F and C roles are
/// exchanged on output (strength input should then be symmetrized, which
/// it is here by construction since comparisons run over sym).
CfLabels pmis(const StrengthGraph& g, bool swap, std::uint64_t seed);
CfLabels pmis_with_weights(const StrengthGraph& g, bool swap,
                           std::vector<double> weights);

/// Row-wise diagonal dominance of an F block:
/// theta_i = sum_{j != i} |a_ij| / |a_ii| over the rows of a_ff.
struct DominanceReport {
  std::vector<double> theta;       // one per row of a_ff
  double max_theta = 0.0;
  double alpha_diag = 0.0;         // selected conversion threshold (from ddc)
  std::vector<index_t> histogram;  // counts over uniform bins on [0, max]
};

/// theta values and a `bins`-bin histogram; throws on zero diagonal,
/// reporting the offending row.
DominanceReport dominance_report(const SparseMatrix& a_ff, index_t bins = 1000);

enum class DdcSelection {
  kHistogram,    // nearest bin boundary over [0, max theta] (default)
  kQuickSelect,  // exact order statistic
  kDirect,       // caller supplies alpha_diag
};

struct DdcOptions {
  double fraction = 0.10;
  index_t bins = 1000;
  DdcSelection selection = DdcSelection::kHistogram;
  double direct_alpha_diag = 0.0;
};

struct DdcResult {
  CfLabels labels;
  double alpha_diag = 0.0;
  std::vector<index_t> converted;  // global rows flipped F -> C
  DominanceReport report;          // theta over the input a_ff
};

/// Diagonal-dominance cleanup: measures theta over the current a_ff once,
/// picks alpha_diag so that about `fraction` of F rows exceed it, and
/// converts all such rows (theta_i > alpha_diag and theta_i != 0) to C in
/// one shot. Rows with theta_i = 0 are never converted, so a diagonal a_ff
/// is left untouched.
DdcResult ddc(const SparseMatrix& a_ff, const CfLabels& labels,
              const LabelMap& map, const DdcOptions& opt = {});

/// 2-norm condition number via dense singular values; n <= 5000 only.
double condition_number(const SparseMatrix& a);

}  // namespace airgraph
