#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "airgraph/sparse.hpp"

namespace airgraph {

/// Stationary GMRES polynomial q(A) = alpha_0 + alpha_1 A + ... acting as an
/// approximate inverse. `order` is the requested degree m-1;
/// `effective_order` is the degree actually used after rank truncation of
/// the power basis (trailing coefficients are zero beyond it).
/// `sparsity_order` is 0 while the polynomial is matrix-free and s > 0 once
/// assembled under the pattern of A^s ∪ I.
struct GmresPolynomial {
  index_t order = 0;
  std::vector<double> coefficients;
  index_t effective_order = 0;
  index_t sparsity_order = 0;
  std::optional<SparseMatrix> assembled;
};

/// Computes the degree m-1 stationary GMRES polynomial of A from a
/// normally distributed right-hand side (Box-Muller, counter-based seed).
/// Builds the power basis K_{m+1} = [b, Ab, ..., A^m b], QR-factorises it
/// (Householder, columns normalized for scale-free rank detection) and
/// solves argmin ||beta e_1 - R~ y|| with R~ = R(:, 2:end), beta = R(1,1).
/// Columns whose new orthogonal direction falls below 1e-12 of the first
/// truncate the discovered Krylov dimension; within that prefix the degree
/// whose measured residual on the fitting vector is smallest wins, so a
/// near-dependent basis degrades to a shorter, usable polynomial instead
/// of blowing up. Trailing coefficients are zero. Throws if the projected
/// system is singular (retry with another seed).
GmresPolynomial compute_coefficients(const SparseMatrix& a, index_t m,
                                     std::uint64_t seed);

/// Matrix-free Horner application q(A) b using effective_order matvecs.
std::vector<double> apply_polynomial(const SparseMatrix& a,
                                     const GmresPolynomial& p,
                                     std::span<const double> b,
                                     FlopCounter* fc = nullptr);

/// Assembles q(A) under fixed sparsity: every accumulated power beyond the
/// first is restricted to pattern(A^sparsity_order) ∪ I before the next
/// multiply, row by row, without ever forming an unrestricted power. With
/// sparsity_order >= degree the result equals the exact polynomial sum.
SparseMatrix assemble_fixed_sparsity(const SparseMatrix& a,
                                     const GmresPolynomial& p,
                                     index_t sparsity_order,
                                     FlopCounter* fc = nullptr);

/// Sampled estimate of the worst-case relative residual of one polynomial
/// application: max over `trials` random normal b of ||b - A q(A) b|| / ||b||.
/// A lower estimate of the true sup over all b.
double residual_reduction(const SparseMatrix& a, const GmresPolynomial& p,
                          index_t trials, std::uint64_t seed);

}  // namespace airgraph
