#pragma once

#include <vector>

#include "airgraph/air.hpp"
#include "airgraph/sparse.hpp"

namespace airgraph {

/// Contiguous block row distribution: equal blocks with the remainder
/// spread over the leading ranks. nranks is clamped to level_size.
std::vector<int> partition_rows(index_t level_size, int nranks);

/// Mean over ranks of (on-rank nnz) / (off-rank-column nnz). Ranks with no
/// nonlocal entries contribute the +inf sentinel and are excluded from the
/// mean; if every rank is all-local the sentinel itself is returned.
double locality_ratio(const SparseMatrix& a, std::span<const int> assignment);

/// Global fraction of entries whose column lives on the owning rank.
/// Monotone under pairwise block merging, unlike the per-rank ratio mean.
double local_share(const SparseMatrix& a, std::span<const int> assignment);

struct LevelPartition {
  index_t n = 0;
  index_t nnz = 0;
  int active_ranks = 0;        // after any trigger on this level
  bool triggered = false;
  double ratio_before = 0.0;   // trigger metric under the incoming ranks
  double ratio_after = 0.0;    // equals ratio_before when not triggered
  double share_before = 0.0;
  double share_after = 0.0;
};

struct PartitionState {
  int initial_ranks = 0;
  double threshold = 0.0;
  std::vector<LevelPartition> levels;  // every hierarchy level + coarsest
};

/// Walks the hierarchy top-down under a simulated contiguous distribution.
/// When a level's local/nonlocal ratio drops below the threshold the
/// active rank count is halved; every second rank survives and adjacent
/// block pairs merge, which never creates new cut edges. No messages are
/// exchanged anywhere; this is an analysis model only.
PartitionState replay_triggers(const Hierarchy& h, int initial_ranks,
                               double threshold);

}  // namespace airgraph
