#include "airgraph/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace airgraph {

namespace {

void check(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("SparseMatrix: " + msg);
}

}  // namespace

SparseMatrix::SparseMatrix(index_t nrows, index_t ncols,
                           std::vector<index_t> row_offsets,
                           std::vector<index_t> col_indices,
                           std::vector<double> values)
    : nrows_(nrows),
      ncols_(ncols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  check(nrows_ >= 0 && ncols_ >= 0, "negative dimension");
  check(static_cast<index_t>(row_offsets_.size()) == nrows_ + 1,
        "row_offsets length must be nrows+1");
  check(row_offsets_.front() == 0, "row_offsets[0] must be 0");
  check(row_offsets_.back() == static_cast<index_t>(col_indices_.size()),
        "row_offsets[nrows] must equal nnz");
  check(col_indices_.size() == values_.size(),
        "col_indices and values length mismatch");
  for (index_t i = 0; i < nrows_; ++i) {
    check(row_offsets_[i] <= row_offsets_[i + 1], "row_offsets not monotone");
    for (index_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      check(col_indices_[k] >= 0 && col_indices_[k] < ncols_,
            "column index out of range");
      if (k > row_offsets_[i])
        check(col_indices_[k - 1] < col_indices_[k],
              "column indices not strictly increasing within row");
    }
  }
  for (double v : values_) check(!std::isnan(v), "stored NaN value");
}

SparseMatrix SparseMatrix::from_triplets(index_t nrows, index_t ncols,
                                         std::vector<Triplet> entries) {
  for (const Triplet& t : entries) {
    check(t.row >= 0 && t.row < nrows && t.col >= 0 && t.col < ncols,
          "triplet index out of range");
  }
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  std::vector<index_t> offsets(nrows + 1, 0);
  std::vector<index_t> cols;
  std::vector<double> vals;
  cols.reserve(entries.size());
  vals.reserve(entries.size());
  std::size_t k = 0;
  for (index_t i = 0; i < nrows; ++i) {
    while (k < entries.size() && entries[k].row == i) {
      double v = entries[k].value;
      index_t c = entries[k].col;
      ++k;
      while (k < entries.size() && entries[k].row == i && entries[k].col == c) {
        v += entries[k].value;  // duplicates summed in sorted order
        ++k;
      }
      cols.push_back(c);
      vals.push_back(v);
    }
    offsets[i + 1] = static_cast<index_t>(cols.size());
  }
  return SparseMatrix(nrows, ncols, std::move(offsets), std::move(cols),
                      std::move(vals));
}

SparseMatrix SparseMatrix::identity(index_t n) {
  std::vector<index_t> offsets(n + 1);
  std::vector<index_t> cols(n);
  std::vector<double> vals(n, 1.0);
  for (index_t i = 0; i <= n; ++i) offsets[i] = i;
  for (index_t i = 0; i < n; ++i) cols[i] = i;
  return SparseMatrix(n, n, std::move(offsets), std::move(cols),
                      std::move(vals));
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> d) {
  index_t n = static_cast<index_t>(d.size());
  std::vector<index_t> offsets(n + 1);
  std::vector<index_t> cols(n);
  for (index_t i = 0; i <= n; ++i) offsets[i] = i;
  for (index_t i = 0; i < n; ++i) cols[i] = i;
  return SparseMatrix(n, n, std::move(offsets), std::move(cols),
                      std::vector<double>(d.begin(), d.end()));
}

double SparseMatrix::entry(index_t i, index_t j) const {
  auto cols = row_cols(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return values_[row_offsets_[i] + (it - cols.begin())];
}

bool SparseMatrix::has_entry(index_t i, index_t j) const {
  auto cols = row_cols(i);
  return std::binary_search(cols.begin(), cols.end(), j);
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<index_t> offsets(ncols_ + 1, 0);
  for (index_t c : col_indices_) ++offsets[c + 1];
  for (index_t j = 0; j < ncols_; ++j) offsets[j + 1] += offsets[j];
  std::vector<index_t> cols(col_indices_.size());
  std::vector<double> vals(values_.size());
  std::vector<index_t> cursor(offsets.begin(), offsets.end() - 1);
  for (index_t i = 0; i < nrows_; ++i) {
    for (index_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      index_t pos = cursor[col_indices_[k]]++;
      cols[pos] = i;
      vals[pos] = values_[k];
    }
  }
  return SparseMatrix(ncols_, nrows_, std::move(offsets), std::move(cols),
                      std::move(vals));
}

SparseMatrix SparseMatrix::with_full_diagonal() const {
  check(nrows_ == ncols_, "with_full_diagonal requires a square matrix");
  std::vector<index_t> offsets(nrows_ + 1, 0);
  std::vector<index_t> cols;
  std::vector<double> vals;
  cols.reserve(col_indices_.size() + nrows_);
  vals.reserve(col_indices_.size() + nrows_);
  for (index_t i = 0; i < nrows_; ++i) {
    bool seen = false;
    for (index_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      index_t c = col_indices_[k];
      if (!seen && c > i) {
        cols.push_back(i);
        vals.push_back(0.0);
        seen = true;
      }
      if (c == i) seen = true;
      cols.push_back(c);
      vals.push_back(values_[k]);
    }
    if (!seen) {
      cols.push_back(i);
      vals.push_back(0.0);
    }
    offsets[i + 1] = static_cast<index_t>(cols.size());
  }
  return SparseMatrix(nrows_, ncols_, std::move(offsets), std::move(cols),
                      std::move(vals));
}

SparseMatrix SparseMatrix::pruned() const {
  std::vector<index_t> offsets(nrows_ + 1, 0);
  std::vector<index_t> cols;
  std::vector<double> vals;
  for (index_t i = 0; i < nrows_; ++i) {
    for (index_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (values_[k] == 0.0 && col_indices_[k] != i) continue;
      cols.push_back(col_indices_[k]);
      vals.push_back(values_[k]);
    }
    offsets[i + 1] = static_cast<index_t>(cols.size());
  }
  return SparseMatrix(nrows_, ncols_, std::move(offsets), std::move(cols),
                      std::move(vals));
}

bool SparseMatrix::structurally_diagonal() const {
  for (index_t i = 0; i < nrows_; ++i)
    for (index_t c : row_cols(i))
      if (c != i) return false;
  return true;
}

std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x,
                         FlopCounter* fc) {
  if (static_cast<index_t>(x.size()) != a.ncols())
    throw std::invalid_argument("spmv: dimension mismatch");
  std::vector<double> y(a.nrows(), 0.0);
  const auto& offsets = a.row_offsets();
  const auto& cols = a.col_indices();
  const auto& vals = a.values();
  for (index_t i = 0; i < a.nrows(); ++i) {
    double acc = 0.0;
    for (index_t k = offsets[i]; k < offsets[i + 1]; ++k)
      acc += vals[k] * x[cols[k]];
    y[i] = acc;
  }
  if (fc) fc->add(2 * static_cast<std::uint64_t>(a.nnz()));
  return y;
}

SparseMatrix spgemm(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.ncols() != b.nrows())
    throw std::invalid_argument("spgemm: dimension mismatch");
  const index_t n = a.nrows();
  const index_t m = b.ncols();
  std::vector<index_t> offsets(n + 1, 0);
  std::vector<index_t> cols;
  std::vector<double> vals;
  std::vector<double> work(m, 0.0);
  std::vector<index_t> stamp(m, -1);
  std::vector<index_t> row_pattern;
  for (index_t i = 0; i < n; ++i) {
    row_pattern.clear();
    auto acols = a.row_cols(i);
    auto avals = a.row_vals(i);
    for (std::size_t ak = 0; ak < acols.size(); ++ak) {
      const double av = avals[ak];
      const index_t j = acols[ak];
      auto bcols = b.row_cols(j);
      auto bvals = b.row_vals(j);
      for (std::size_t bk = 0; bk < bcols.size(); ++bk) {
        const index_t c = bcols[bk];
        if (stamp[c] != i) {
          stamp[c] = i;
          work[c] = 0.0;
          row_pattern.push_back(c);
        }
        work[c] += av * bvals[bk];
      }
    }
    std::sort(row_pattern.begin(), row_pattern.end());
    for (index_t c : row_pattern) {
      cols.push_back(c);
      vals.push_back(work[c]);
    }
    offsets[i + 1] = static_cast<index_t>(cols.size());
  }
  return SparseMatrix(n, m, std::move(offsets), std::move(cols),
                      std::move(vals));
}

SparseMatrix drop_entries(const SparseMatrix& a, double tol,
                          bool keep_diagonal) {
  if (tol < 0.0) throw std::invalid_argument("drop_entries: tol must be >= 0");
  const bool square = keep_diagonal && a.nrows() == a.ncols();
  std::vector<index_t> offsets(a.nrows() + 1, 0);
  std::vector<index_t> cols;
  std::vector<double> vals;
  for (index_t i = 0; i < a.nrows(); ++i) {
    auto rc = a.row_cols(i);
    auto rv = a.row_vals(i);
    double row_max = 0.0;
    for (double v : rv) row_max = std::max(row_max, std::abs(v));
    const double threshold = tol * row_max;
    for (std::size_t k = 0; k < rc.size(); ++k) {
      const double mag = std::abs(rv[k]);
      const bool diag = square && rc[k] == i;
      if (!diag && mag < threshold && mag < row_max) continue;
      cols.push_back(rc[k]);
      vals.push_back(rv[k]);
    }
    offsets[i + 1] = static_cast<index_t>(cols.size());
  }
  return SparseMatrix(a.nrows(), a.ncols(), std::move(offsets),
                      std::move(cols), std::move(vals));
}

LabelMap build_label_map(std::span<const CfLabel> labels) {
  LabelMap map;
  map.label.assign(labels.begin(), labels.end());
  map.fine_to_sub.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    switch (labels[i]) {
      case CfLabel::F:
        map.fine_to_sub[i] = static_cast<index_t>(map.f_to_fine.size());
        map.f_to_fine.push_back(static_cast<index_t>(i));
        break;
      case CfLabel::C:
        map.fine_to_sub[i] = static_cast<index_t>(map.c_to_fine.size());
        map.c_to_fine.push_back(static_cast<index_t>(i));
        break;
      case CfLabel::Unassigned:
        throw std::invalid_argument(
            "build_label_map: unassigned label at row " + std::to_string(i));
    }
  }
  return map;
}

BlockSplit extract_blocks(const SparseMatrix& a,
                          std::span<const CfLabel> labels) {
  if (a.nrows() != a.ncols() ||
      static_cast<index_t>(labels.size()) != a.nrows())
    throw std::invalid_argument("extract_blocks: label length mismatch");
  BlockSplit split;
  split.map = build_label_map(labels);
  const LabelMap& map = split.map;

  struct Builder {
    std::vector<index_t> offsets{0};
    std::vector<index_t> cols;
    std::vector<double> vals;
    void push(index_t c, double v) {
      cols.push_back(c);
      vals.push_back(v);
    }
    void close_row() { offsets.push_back(static_cast<index_t>(cols.size())); }
  };
  Builder ff, fc, cf, cc;

  for (index_t i = 0; i < a.nrows(); ++i) {
    const bool row_f = map.label[i] == CfLabel::F;
    Builder& left = row_f ? ff : cf;
    Builder& right = row_f ? fc : cc;
    auto rc = a.row_cols(i);
    auto rv = a.row_vals(i);
    for (std::size_t k = 0; k < rc.size(); ++k) {
      const index_t j = rc[k];
      if (map.label[j] == CfLabel::F)
        left.push(map.fine_to_sub[j], rv[k]);
      else
        right.push(map.fine_to_sub[j], rv[k]);
    }
    left.close_row();
    right.close_row();
  }
  const index_t nf = map.n_f();
  const index_t nc = map.n_c();
  split.a_ff = SparseMatrix(nf, nf, std::move(ff.offsets), std::move(ff.cols),
                            std::move(ff.vals));
  split.a_fc = SparseMatrix(nf, nc, std::move(fc.offsets), std::move(fc.cols),
                            std::move(fc.vals));
  split.a_cf = SparseMatrix(nc, nf, std::move(cf.offsets), std::move(cf.cols),
                            std::move(cf.vals));
  split.a_cc = SparseMatrix(nc, nc, std::move(cc.offsets), std::move(cc.cols),
                            std::move(cc.vals));
  return split;
}

}  // namespace airgraph
