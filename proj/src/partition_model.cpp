#include "airgraph/partition_model.hpp"

#include <limits>
#include <stdexcept>

namespace airgraph {

std::vector<int> partition_rows(index_t level_size, int nranks) {
  if (level_size < 0 || nranks < 1)
    throw std::invalid_argument("partition_rows: bad arguments");
  const int ranks = static_cast<int>(
      std::min<index_t>(nranks, std::max<index_t>(level_size, 1)));
  std::vector<int> assignment(level_size);
  const index_t base = level_size / ranks;
  const index_t extra = level_size % ranks;
  index_t row = 0;
  for (int r = 0; r < ranks; ++r) {
    const index_t size = base + (r < extra ? 1 : 0);
    for (index_t k = 0; k < size; ++k) assignment[row++] = r;
  }
  return assignment;
}

namespace {

struct Counts {
  std::vector<index_t> local;
  std::vector<index_t> nonlocal;
};

Counts count_locality(const SparseMatrix& a, std::span<const int> assignment) {
  if (static_cast<index_t>(assignment.size()) != a.nrows())
    throw std::invalid_argument("locality: assignment length mismatch");
  int nranks = 0;
  for (int r : assignment) nranks = std::max(nranks, r + 1);
  Counts c;
  c.local.assign(std::max(nranks, 1), 0);
  c.nonlocal.assign(std::max(nranks, 1), 0);
  for (index_t i = 0; i < a.nrows(); ++i) {
    const int r = assignment[i];
    for (index_t col : a.row_cols(i)) {
      if (assignment[col] == r)
        ++c.local[r];
      else
        ++c.nonlocal[r];
    }
  }
  return c;
}

}  // namespace

double locality_ratio(const SparseMatrix& a, std::span<const int> assignment) {
  const Counts c = count_locality(a, assignment);
  double sum = 0.0;
  int contributing = 0;
  for (std::size_t r = 0; r < c.local.size(); ++r) {
    if (c.nonlocal[r] == 0) continue;  // all-local rank: sentinel, excluded
    sum += static_cast<double>(c.local[r]) / static_cast<double>(c.nonlocal[r]);
    ++contributing;
  }
  if (contributing == 0) return std::numeric_limits<double>::infinity();
  return sum / contributing;
}

double local_share(const SparseMatrix& a, std::span<const int> assignment) {
  const Counts c = count_locality(a, assignment);
  index_t local = 0, total = 0;
  for (std::size_t r = 0; r < c.local.size(); ++r) {
    local += c.local[r];
    total += c.local[r] + c.nonlocal[r];
  }
  if (total == 0) return 1.0;
  return static_cast<double>(local) / static_cast<double>(total);
}

PartitionState replay_triggers(const Hierarchy& h, int initial_ranks,
                               double threshold) {
  if (initial_ranks < 1)
    throw std::invalid_argument("replay_triggers: need at least one rank");
  PartitionState state;
  state.initial_ranks = initial_ranks;
  state.threshold = threshold;

  std::vector<const SparseMatrix*> mats;
  for (const Level& lvl : h.levels) mats.push_back(&lvl.a);
  mats.push_back(&h.coarse_a);

  int active = initial_ranks;
  for (const SparseMatrix* a : mats) {
    LevelPartition lp;
    lp.n = a->nrows();
    lp.nnz = a->nnz();
    std::vector<int> assignment = partition_rows(lp.n, active);
    lp.ratio_before = locality_ratio(*a, assignment);
    lp.share_before = local_share(*a, assignment);
    lp.ratio_after = lp.ratio_before;
    lp.share_after = lp.share_before;
    if (lp.ratio_before < threshold && active > 1) {
      // Halve the rank count: every second rank survives and adjacent
      // block pairs merge, so no cut edge is created.
      lp.triggered = true;
      active = (active + 1) / 2;
      for (int& r : assignment) r /= 2;
      lp.ratio_after = locality_ratio(*a, assignment);
      lp.share_after = local_share(*a, assignment);
    }
    lp.active_ranks = active;
    state.levels.push_back(lp);
  }
  return state;
}

}  // namespace airgraph
