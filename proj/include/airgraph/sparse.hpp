#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace airgraph {

using index_t = std::int64_t;

/// Accumulates floating-point operation counts across kernels.
///
/// Convention used throughout the library: a multiply-add pair counts as
/// 2 FLOPs, so a matvec costs 2*nnz, an axpy 2*n and a norm 2*n.
struct FlopCounter {
  std::uint64_t flops = 0;
  void add(std::uint64_t n) { flops += n; }
};

/// Per-row fine/coarse classification.
enum class CfLabel : std::uint8_t { F = 0, C = 1, Unassigned = 2 };

struct Triplet {
  index_t row = 0;
  index_t col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix with strictly increasing column indices per
/// row. Explicit zeros are legal stored entries: arithmetic kernels keep
/// them, so dropping remains a separate, explicit step (see drop_entries).
class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Takes ownership of validated CSR arrays. Throws std::invalid_argument
  /// if the offsets are not monotone, indices are out of range or unsorted,
  /// or any stored value is NaN.
  SparseMatrix(index_t nrows, index_t ncols, std::vector<index_t> row_offsets,
               std::vector<index_t> col_indices, std::vector<double> values);

  /// Builds from (possibly duplicated, unsorted) triplets; duplicates are
  /// summed in sorted order so the result is deterministic.
  static SparseMatrix from_triplets(index_t nrows, index_t ncols,
                                    std::vector<Triplet> entries);

  static SparseMatrix identity(index_t n);
  static SparseMatrix diagonal(std::span<const double> d);

  index_t nrows() const { return nrows_; }
  index_t ncols() const { return ncols_; }
  index_t nnz() const { return static_cast<index_t>(col_indices_.size()); }

  const std::vector<index_t>& row_offsets() const { return row_offsets_; }
  const std::vector<index_t>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  std::span<const index_t> row_cols(index_t i) const {
    return {col_indices_.data() + row_offsets_[i],
            static_cast<std::size_t>(row_offsets_[i + 1] - row_offsets_[i])};
  }
  std::span<const double> row_vals(index_t i) const {
    return {values_.data() + row_offsets_[i],
            static_cast<std::size_t>(row_offsets_[i + 1] - row_offsets_[i])};
  }

  /// Value at (i, j); 0 for entries that are not stored.
  double entry(index_t i, index_t j) const;
  bool has_entry(index_t i, index_t j) const;

  SparseMatrix transposed() const;

  /// Returns a copy with every (i, i) entry structurally present, inserting
  /// explicit zeros where missing. Operators built by this library carry a
  /// full diagonal so that dominance ratios and smoothers can read it.
  SparseMatrix with_full_diagonal() const;

  /// Returns a copy without stored off-diagonal entries whose value is
  /// exactly zero. Diagonal entries are always retained.
  SparseMatrix pruned() const;

  bool structurally_diagonal() const;

  /// Exact comparison: dimensions, pattern and bitwise-equal values.
  bool operator==(const SparseMatrix& other) const = default;

 private:
  index_t nrows_ = 0;
  index_t ncols_ = 0;
  std::vector<index_t> row_offsets_{0};
  std::vector<index_t> col_indices_;
  std::vector<double> values_;
};

/// y = A x. Throws on dimension mismatch. FLOPs: 2*nnz.
std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x,
                         FlopCounter* fc = nullptr);

/// Exact sparse product A*B. Cancellation zeros are retained.
SparseMatrix spgemm(const SparseMatrix& a, const SparseMatrix& b);

/// Removes entries small relative to the row-wise infinity norm:
/// (i, j) is dropped iff |a_ij| < tol * max_k |a_ik|. Diagonal entries of
/// square matrices and entries attaining the row maximum are always kept,
/// so tol > 1 keeps exactly the largest entry of each row. tol = 0 is the
/// identity. Idempotent at fixed tol. keep_diagonal = false disables the
/// diagonal rule for blocks whose row and column spaces are unrelated.
SparseMatrix drop_entries(const SparseMatrix& a, double tol,
                          bool keep_diagonal = true);

/// Two-way index translation between the global row space and the F/C
/// submatrix row spaces. Sub-indices preserve ascending global order.
struct LabelMap {
  std::vector<CfLabel> label;        // per global row
  std::vector<index_t> fine_to_sub;  // index within the row's own block
  std::vector<index_t> f_to_fine;    // F block row -> global row
  std::vector<index_t> c_to_fine;    // C block row -> global row

  index_t n_f() const { return static_cast<index_t>(f_to_fine.size()); }
  index_t n_c() const { return static_cast<index_t>(c_to_fine.size()); }
  index_t n() const { return static_cast<index_t>(label.size()); }
};

struct BlockSplit {
  SparseMatrix a_ff;
  SparseMatrix a_fc;
  SparseMatrix a_cf;
  SparseMatrix a_cc;
  LabelMap map;
};

LabelMap build_label_map(std::span<const CfLabel> labels);

/// Splits a square matrix into its four blocks under the F-then-C
/// permutation. Throws if any label is Unassigned. Reassembling the blocks
/// through the returned map reproduces A exactly.
BlockSplit extract_blocks(const SparseMatrix& a,
                          std::span<const CfLabel> labels);

}  // namespace airgraph
