#include "airgraph/gmres_poly.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "airgraph/rng.hpp"

namespace airgraph {

namespace {

constexpr double kRankTol = 1e-12;

// Pattern of A^s ∪ I ∪ pattern(A), as sorted per-row column lists.
// Structural product only; values are ignored.
std::vector<std::vector<index_t>> power_pattern(const SparseMatrix& a,
                                                index_t s) {
  const index_t n = a.nrows();
  std::vector<std::vector<index_t>> cur(n);
  for (index_t i = 0; i < n; ++i) {
    auto cols = a.row_cols(i);
    cur[i].assign(cols.begin(), cols.end());
  }
  std::vector<index_t> stamp(n, -1);
  std::vector<index_t> scratch;
  for (index_t k = 1; k < s; ++k) {
    std::vector<std::vector<index_t>> next(n);
    for (index_t i = 0; i < n; ++i) {
      scratch.clear();
      for (index_t j : cur[i]) {
        for (index_t c : a.row_cols(j)) {
          if (stamp[c] != i) {
            stamp[c] = i;
            scratch.push_back(c);
          }
        }
      }
      std::sort(scratch.begin(), scratch.end());
      next[i] = scratch;
    }
    cur = std::move(next);
    std::fill(stamp.begin(), stamp.end(), -1);
  }
  for (index_t i = 0; i < n; ++i) {
    auto& row = cur[i];
    auto it = std::lower_bound(row.begin(), row.end(), i);
    if (it == row.end() || *it != i) row.insert(it, i);
    // Union with pattern(A) keeps the unrestricted alpha_1 A term legal
    // even if A is missing diagonal entries somewhere.
    std::vector<index_t> merged;
    auto ac = a.row_cols(i);
    std::set_union(row.begin(), row.end(), ac.begin(), ac.end(),
                   std::back_inserter(merged));
    row = std::move(merged);
  }
  return cur;
}

}  // namespace

GmresPolynomial compute_coefficients(const SparseMatrix& a, index_t m,
                                     std::uint64_t seed) {
  if (a.nrows() != a.ncols())
    throw std::invalid_argument("compute_coefficients: matrix must be square");
  if (m < 1) throw std::invalid_argument("compute_coefficients: m must be >= 1");
  const index_t n = a.nrows();
  if (n == 0) throw std::invalid_argument("compute_coefficients: empty matrix");

  // The whole coefficient pipeline runs in extended precision: a monomial
  // power basis in double bottoms out near sqrt(eps), which is not enough
  // for the exactly-invertible cases.
  using Real = long double;
  using MatrixXld = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorXld = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

  const std::uint64_t rhs_seed = rng::mix(seed, rng::kStreamPolyRhs);
  VectorXld b(n);
  for (index_t i = 0; i < n; ++i) b(i) = rng::standard_normal(rhs_seed, i);

  // Power basis K_{m+1} = [b, Ab, ..., A^m b].
  MatrixXld basis(n, m + 1);
  basis.col(0) = b;
  {
    const auto& offsets = a.row_offsets();
    const auto& cols = a.col_indices();
    const auto& vals = a.values();
    for (index_t k = 1; k <= m; ++k) {
      for (index_t i = 0; i < n; ++i) {
        Real acc = 0;
        for (index_t t = offsets[i]; t < offsets[i + 1]; ++t)
          acc += static_cast<Real>(vals[t]) * basis(cols[t], k - 1);
        basis(i, k) = acc;
      }
    }
  }

  // Normalize columns before the QR so the R diagonal measures each
  // column's genuinely new direction relative to its own size.
  VectorXld scale(m + 1);
  for (index_t k = 0; k <= m; ++k) {
    scale(k) = basis.col(k).norm();
    if (scale(k) > 0) basis.col(k) /= scale(k);
  }
  if (scale(0) == 0)
    throw std::runtime_error("compute_coefficients: zero right-hand side");

  const index_t rrows = std::min<index_t>(n, m + 1);
  Eigen::HouseholderQR<MatrixXld> qr(basis);
  MatrixXld r_scaled =
      qr.matrixQR().topRows(rrows).triangularView<Eigen::Upper>();

  // Discovered Krylov dimension: leading prefix of numerically independent
  // columns.
  index_t dim = 0;
  for (index_t k = 0; k < rrows; ++k) {
    if (std::abs(static_cast<double>(r_scaled(k, k))) < kRankTol) break;
    ++dim;
  }
  if (dim == 0)
    throw std::runtime_error("compute_coefficients: singular projected system");

  // Undo the column scaling: R = R_scaled * diag(scale).
  MatrixXld r = r_scaled;
  for (index_t k = 0; k <= m; ++k) r.col(k) *= scale(k);

  // Candidate degrees live inside the discovered Krylov dimension. The
  // power basis can be numerically near-dependent well before the hard
  // rank cutoff, which makes the full least-squares solution useless in
  // floating point (huge cancelling coefficients), so each candidate is
  // scored by evaluating its residual against the stored basis vectors
  // and the best-measured prefix wins.
  const index_t lcols = std::min<index_t>(m, dim);
  const VectorXld b0 = basis.col(0) * scale(0);
  VectorXld best_y;
  index_t best_d = 0;
  Real best_resid = std::numeric_limits<Real>::infinity();
  for (index_t d = 1; d <= lcols; ++d) {
    const index_t lrows = std::min<index_t>(rrows, d + 1);
    MatrixXld rt = r.block(0, 1, lrows, d);
    VectorXld rhs = VectorXld::Zero(lrows);
    rhs(0) = r(0, 0);
    Eigen::CompleteOrthogonalDecomposition<MatrixXld> cod(rt);
    cod.setThreshold(static_cast<Real>(kRankTol));
    if (cod.rank() == 0) continue;
    VectorXld y = cod.solve(rhs);
    if (!y.allFinite()) continue;

    // A q(A) b = [Ab, ..., A^d b] y against the original column scaling.
    VectorXld aqb = VectorXld::Zero(n);
    for (index_t k = 0; k < d; ++k)
      aqb += y(k) * scale(k + 1) * basis.col(k + 1);
    const Real resid = (b0 - aqb).norm() / scale(0);
    if (resid < best_resid) {
      best_resid = resid;
      best_d = d;
      best_y = std::move(y);
    }
  }
  if (best_d == 0)
    throw std::runtime_error("compute_coefficients: singular projected system");

  GmresPolynomial p;
  p.order = m - 1;
  p.coefficients.assign(m, 0.0);
  for (index_t k = 0; k < best_d; ++k)
    p.coefficients[k] = static_cast<double>(best_y(k));
  p.effective_order = best_d - 1;
  return p;
}

std::vector<double> apply_polynomial(const SparseMatrix& a,
                                     const GmresPolynomial& p,
                                     std::span<const double> b,
                                     FlopCounter* fc) {
  if (static_cast<index_t>(b.size()) != a.ncols())
    throw std::invalid_argument("apply_polynomial: dimension mismatch");
  if (p.coefficients.empty())
    throw std::invalid_argument("apply_polynomial: empty polynomial");
  const index_t n = a.nrows();
  const index_t deg = p.effective_order;

  // Horner: q(A) b = alpha_0 b + A (alpha_1 b + A (... alpha_deg b)).
  std::vector<double> acc(n);
  for (index_t i = 0; i < n; ++i) acc[i] = p.coefficients[deg] * b[i];
  if (fc) fc->add(static_cast<std::uint64_t>(n));
  for (index_t k = deg; k-- > 0;) {
    acc = spmv(a, acc, fc);
    const double alpha = p.coefficients[k];
    for (index_t i = 0; i < n; ++i) acc[i] += alpha * b[i];
    if (fc) fc->add(2 * static_cast<std::uint64_t>(n));
  }
  return acc;
}

SparseMatrix assemble_fixed_sparsity(const SparseMatrix& a,
                                     const GmresPolynomial& p,
                                     index_t sparsity_order,
                                     FlopCounter* fc) {
  if (a.nrows() != a.ncols())
    throw std::invalid_argument("assemble_fixed_sparsity: square matrix only");
  if (sparsity_order < 1)
    throw std::invalid_argument("assemble_fixed_sparsity: sparsity_order >= 1");
  if (p.coefficients.empty())
    throw std::invalid_argument("assemble_fixed_sparsity: empty polynomial");

  const index_t n = a.nrows();
  const index_t deg = p.effective_order;
  const auto pattern = power_pattern(a, sparsity_order);

  std::vector<index_t> offsets(n + 1, 0);
  for (index_t i = 0; i < n; ++i)
    offsets[i + 1] = offsets[i] + static_cast<index_t>(pattern[i].size());
  std::vector<index_t> cols(offsets[n]);
  std::vector<double> vals(offsets[n], 0.0);

  // Row-local workspace: position of each allowed column inside the row
  // pattern, stamped per row. Products are only ever formed for allowed
  // output columns, so no work exceeds the fixed pattern.
  std::vector<index_t> pos(n, 0);
  std::vector<index_t> stamp(n, -1);
  std::vector<double> cur;   // current accumulated power, aligned to pattern
  std::vector<double> next;
  std::uint64_t flops = 0;

  for (index_t i = 0; i < n; ++i) {
    const auto& prow = pattern[i];
    const auto width = static_cast<index_t>(prow.size());
    for (index_t k = 0; k < width; ++k) {
      pos[prow[k]] = k;
      stamp[prow[k]] = i;
      cols[offsets[i] + k] = prow[k];
    }
    std::span<double> out(vals.data() + offsets[i],
                          static_cast<std::size_t>(width));

    // Power 0 and 1: alpha_0 I + alpha_1 A.
    for (index_t k = 0; k < width; ++k)
      out[k] = (prow[k] == i) ? p.coefficients[0] : 0.0;
    cur.assign(width, 0.0);
    {
      auto ac = a.row_cols(i);
      auto av = a.row_vals(i);
      for (std::size_t k = 0; k < ac.size(); ++k) {
        cur[pos[ac[k]]] = av[k];
        if (deg >= 1) {
          out[pos[ac[k]]] += p.coefficients[1] * av[k];
          flops += 2;
        }
      }
    }

    for (index_t power = 2; power <= deg; ++power) {
      next.assign(width, 0.0);
      for (index_t k = 0; k < width; ++k) {
        const double v = cur[k];
        if (v == 0.0) continue;
        const index_t j = prow[k];
        auto ac = a.row_cols(j);
        auto av = a.row_vals(j);
        for (std::size_t t = 0; t < ac.size(); ++t) {
          const index_t c = ac[t];
          if (stamp[c] != i) continue;  // outside the fixed pattern
          next[pos[c]] += v * av[t];
          flops += 2;
        }
      }
      const double alpha = p.coefficients[power];
      for (index_t k = 0; k < width; ++k) {
        out[k] += alpha * next[k];
        flops += 2;
      }
      std::swap(cur, next);
    }
  }
  if (fc) fc->add(flops);
  return SparseMatrix(n, n, std::move(offsets), std::move(cols),
                      std::move(vals));
}

double residual_reduction(const SparseMatrix& a, const GmresPolynomial& p,
                          index_t trials, std::uint64_t seed) {
  if (trials < 1)
    throw std::invalid_argument("residual_reduction: trials must be >= 1");
  const index_t n = a.nrows();
  const std::uint64_t base = rng::mix(seed, rng::kStreamTrials);
  double worst = 0.0;
  for (index_t t = 0; t < trials; ++t) {
    std::vector<double> b(n);
    const std::uint64_t trial_seed = rng::mix(base, static_cast<std::uint64_t>(t));
    for (index_t i = 0; i < n; ++i) b[i] = rng::standard_normal(trial_seed, i);
    const std::vector<double> x = apply_polynomial(a, p, b);
    const std::vector<double> ax = spmv(a, x);
    double rnorm = 0.0, bnorm = 0.0;
    for (index_t i = 0; i < n; ++i) {
      const double r = b[i] - ax[i];
      rnorm += r * r;
      bnorm += b[i] * b[i];
    }
    if (bnorm > 0.0) worst = std::max(worst, std::sqrt(rnorm / bnorm));
  }
  return worst;
}

}  // namespace airgraph
