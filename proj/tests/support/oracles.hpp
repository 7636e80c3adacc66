#pragma once

// Test-only dense oracles. Everything here goes through Eigen dense
// arithmetic and stays independent of the sparse kernels it checks.

#include <Eigen/Dense>
#include <vector>

#include "airgraph/rng.hpp"
#include "airgraph/sparse.hpp"

namespace airgraph::test {

inline Eigen::MatrixXd to_dense(const SparseMatrix& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.nrows(), a.ncols());
  for (index_t i = 0; i < a.nrows(); ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) d(i, cols[k]) = vals[k];
  }
  return d;
}

/// Stores every entry of the dense matrix, including zeros, which is what
/// the oracle comparisons want.
inline SparseMatrix from_dense_full(const Eigen::MatrixXd& d) {
  std::vector<Triplet> trips;
  for (index_t i = 0; i < d.rows(); ++i)
    for (index_t j = 0; j < d.cols(); ++j)
      trips.push_back({i, j, d(i, j)});
  return SparseMatrix::from_triplets(d.rows(), d.cols(), std::move(trips));
}

/// Stores only entries beyond |v| > threshold, plus the diagonal.
inline SparseMatrix from_dense(const Eigen::MatrixXd& d,
                               double threshold = 0.0) {
  std::vector<Triplet> trips;
  for (index_t i = 0; i < d.rows(); ++i)
    for (index_t j = 0; j < d.cols(); ++j)
      if (i == j || std::abs(d(i, j)) > threshold)
        trips.push_back({i, j, d(i, j)});
  return SparseMatrix::from_triplets(d.rows(), d.cols(), std::move(trips));
}

inline double max_abs_diff(const SparseMatrix& a, const Eigen::MatrixXd& b) {
  return (to_dense(a) - b).cwiseAbs().maxCoeff();
}

/// Deterministic sparse test matrix: `fill` chance per off-diagonal entry,
/// values uniform in [-1, 1], diagonal shifted to keep it comfortably
/// nonsingular.
inline SparseMatrix random_sparse(index_t n, double fill, std::uint64_t seed,
                                  double diag_shift = 4.0) {
  std::vector<Triplet> trips;
  std::uint64_t ctr = 0;
  for (index_t i = 0; i < n; ++i) {
    for (index_t j = 0; j < n; ++j) {
      const double u = rng::uniform01(seed, ctr++);
      const double v = 2.0 * rng::uniform01(seed, ctr++) - 1.0;
      if (i == j) {
        trips.push_back({i, j, v + diag_shift});
      } else if (u < fill) {
        trips.push_back({i, j, v});
      }
    }
  }
  return SparseMatrix::from_triplets(n, n, std::move(trips));
}

inline std::vector<double> random_vector(index_t n, std::uint64_t seed) {
  std::vector<double> v(n);
  for (index_t i = 0; i < n; ++i) v[i] = 2.0 * rng::uniform01(seed, i) - 1.0;
  return v;
}

/// Dense restricted-power oracle: alpha_0 I + alpha_1 A + sum_k alpha_k M_k
/// where M_1 = A and M_{k+1} = mask(M_k * A), masking every accumulated
/// power to pattern(A^s) ∪ I before the next multiply.
inline Eigen::MatrixXd dense_fixed_sparsity_oracle(
    const SparseMatrix& a, const std::vector<double>& alpha, index_t degree,
    index_t sparsity_order) {
  const index_t n = a.nrows();
  const Eigen::MatrixXd ad = to_dense(a);

  // Structural pattern of A^s ∪ I from boolean dense powers.
  Eigen::MatrixXd pattern = Eigen::MatrixXd::Zero(n, n);
  for (index_t i = 0; i < n; ++i)
    for (index_t c : a.row_cols(i)) pattern(i, c) = 1.0;
  Eigen::MatrixXd mask = pattern;
  for (index_t k = 1; k < sparsity_order; ++k) {
    mask = (mask * pattern).unaryExpr(
        [](double v) { return v > 0.0 ? 1.0 : 0.0; });
  }
  for (index_t i = 0; i < n; ++i) mask(i, i) = 1.0;
  for (index_t i = 0; i < n; ++i)
    for (index_t c : a.row_cols(i)) mask(i, c) = 1.0;

  Eigen::MatrixXd result =
      alpha[0] * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd power = ad;
  if (degree >= 1) result += alpha[1] * power;
  for (index_t k = 2; k <= degree; ++k) {
    power = (power * ad).cwiseProduct(mask);
    result += alpha[k] * power;
  }
  return result;
}

}  // namespace airgraph::test
