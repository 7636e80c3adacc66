#include "airgraph/solve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace airgraph {

namespace {

using Clock = std::chrono::steady_clock;

double norm2(std::span<const double> v, FlopCounter* fc) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  if (fc) fc->add(2 * static_cast<std::uint64_t>(v.size()));
  return std::sqrt(acc);
}

void axpy(double alpha, std::span<const double> x, std::vector<double>& y,
          FlopCounter* fc) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
  if (fc) fc->add(2 * static_cast<std::uint64_t>(y.size()));
}

std::vector<double> gather(std::span<const double> x,
                           const std::vector<index_t>& idx) {
  std::vector<double> out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = x[idx[k]];
  return out;
}

void coarse_solve(const Hierarchy& h, std::span<const double> rhs,
                  std::vector<double>& e, const SolveConfig& cfg,
                  FlopCounter* fc, FlopCounter* shadow) {
  const index_t n = h.coarse_a.nrows();
  e.assign(n, 0.0);
  if (h.coarse_exact) {
    e = solve_coarse_exact(h, rhs);
    return;
  }
  const SparseMatrix& ainv = *h.coarse_inv.assembled;
  std::vector<double> r(rhs.begin(), rhs.end());
  for (index_t it = 0; it < cfg.coarse_iterations; ++it) {
    if (it > 0) {
      // r = rhs - A_c e; the first iteration starts from e = 0.
      std::vector<double> ae = spmv(h.coarse_a, e, fc);
      if (shadow) shadow->add(2 * static_cast<std::uint64_t>(h.coarse_a.nnz()));
      for (index_t i = 0; i < n; ++i) r[i] = rhs[i] - ae[i];
      if (fc) fc->add(2 * static_cast<std::uint64_t>(n));
      if (shadow) shadow->add(2 * static_cast<std::uint64_t>(n));
    }
    std::vector<double> d = spmv(ainv, r, fc);
    if (shadow) shadow->add(2 * static_cast<std::uint64_t>(ainv.nnz()));
    axpy(1.0, d, e, fc);
    if (shadow) shadow->add(2 * static_cast<std::uint64_t>(n));
  }
}

}  // namespace

void f_smooth(const Level& level, std::span<const double> b,
              std::vector<double>& x, FlopCounter* fc, FlopCounter* shadow) {
  const LabelMap& map = level.map;
  const index_t nf = map.n_f();
  if (nf == 0) return;

  std::vector<double> xf = gather(x, map.f_to_fine);
  std::vector<double> xc = gather(x, map.c_to_fine);
  std::vector<double> rf = spmv(level.a_ff, xf, fc);
  std::vector<double> afc_xc = spmv(level.a_fc, xc, fc);
  if (shadow)
    shadow->add(2 * static_cast<std::uint64_t>(level.a_ff.nnz() +
                                               level.a_fc.nnz()));
  for (index_t k = 0; k < nf; ++k)
    rf[k] = b[map.f_to_fine[k]] - rf[k] - afc_xc[k];
  if (fc) fc->add(2 * static_cast<std::uint64_t>(nf));
  if (shadow) shadow->add(2 * static_cast<std::uint64_t>(nf));

  std::vector<double> d = spmv(*level.ff_inv.assembled, rf, fc);
  if (shadow)
    shadow->add(2 * static_cast<std::uint64_t>(level.ff_inv.assembled->nnz()));
  for (index_t k = 0; k < nf; ++k) x[map.f_to_fine[k]] += d[k];
  if (fc) fc->add(static_cast<std::uint64_t>(nf));
  if (shadow) shadow->add(static_cast<std::uint64_t>(nf));
}

namespace {

// Internal recursion with a known-zero flag so pure error-correction
// descents skip the initial residual matvec.
void vcycle_impl(const Hierarchy& h, index_t l, std::span<const double> b,
                 std::vector<double>& x, bool x_is_zero,
                 const SolveConfig& cfg, FlopCounter* fc,
                 FlopCounter* shadow) {
  if (l == static_cast<index_t>(h.levels.size())) {
    std::vector<double> e;
    if (x_is_zero) {
      coarse_solve(h, b, e, cfg, fc, shadow);
      x = std::move(e);
    } else {
      std::vector<double> r = spmv(h.coarse_a, x, fc);
      if (shadow) shadow->add(2 * static_cast<std::uint64_t>(h.coarse_a.nnz()));
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
      if (fc) fc->add(2 * static_cast<std::uint64_t>(r.size()));
      if (shadow) shadow->add(2 * static_cast<std::uint64_t>(r.size()));
      coarse_solve(h, r, e, cfg, fc, shadow);
      axpy(1.0, e, x, fc);
      if (shadow) shadow->add(2 * static_cast<std::uint64_t>(x.size()));
    }
    return;
  }
  const Level& lvl = h.levels[l];
  const index_t n = lvl.a.nrows();

  for (index_t s = 0; s < cfg.down_smooths; ++s) {
    f_smooth(lvl, b, x, fc, shadow);
    x_is_zero = false;
  }

  std::vector<double> r;
  if (x_is_zero) {
    r.assign(b.begin(), b.end());
  } else {
    r = spmv(lvl.a, x, fc);
    if (shadow) shadow->add(2 * static_cast<std::uint64_t>(lvl.a.nnz()));
    for (index_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    if (fc) fc->add(2 * static_cast<std::uint64_t>(n));
    if (shadow) shadow->add(2 * static_cast<std::uint64_t>(n));
  }

  std::vector<double> rc = spmv(lvl.r, r, fc);
  if (shadow) shadow->add(2 * static_cast<std::uint64_t>(lvl.r.nnz()));

  std::vector<double> ec(lvl.map.n_c(), 0.0);
  vcycle_impl(h, l + 1, rc, ec, /*x_is_zero=*/true, cfg, fc, shadow);

  std::vector<double> pe = spmv(lvl.p, ec, fc);
  if (shadow) shadow->add(2 * static_cast<std::uint64_t>(lvl.p.nnz()));
  axpy(1.0, pe, x, fc);
  if (shadow) shadow->add(2 * static_cast<std::uint64_t>(n));

  for (index_t s = 0; s < cfg.up_f_smooths; ++s)
    f_smooth(lvl, b, x, fc, shadow);
}

}  // namespace

std::vector<double> vcycle(const Hierarchy& h, std::span<const double> b,
                           std::span<const double> x, const SolveConfig& cfg,
                           FlopCounter* fc, FlopCounter* shadow) {
  if (static_cast<index_t>(b.size()) != h.top().nrows())
    throw std::invalid_argument("vcycle: rhs length mismatch");
  std::vector<double> out(x.begin(), x.end());
  if (out.empty()) out.assign(b.size(), 0.0);
  bool zero = true;
  for (double v : out)
    if (v != 0.0) {
      zero = false;
      break;
    }
  vcycle_impl(h, 0, b, out, zero, cfg, fc, shadow);
  return out;
}

SolveStats richardson_solve(const Hierarchy& h, std::span<const double> b,
                            const SolveConfig& cfg,
                            std::vector<double>* x_out) {
  const SparseMatrix& a = h.top();
  if (static_cast<index_t>(b.size()) != a.nrows())
    throw std::invalid_argument("richardson_solve: rhs length mismatch");
  if (cfg.rtol <= 0.0)
    throw std::invalid_argument("richardson_solve: rtol must be positive");

  SolveStats stats;
  stats.grid_complexity = h.metrics.grid_complexity;
  stats.operator_complexity = h.metrics.operator_complexity;
  stats.storage_complexity = h.metrics.storage_complexity;

  FlopCounter fc;
  FlopCounter shadow;
  const index_t n = a.nrows();
  std::vector<double> x(n, 0.0);

  const auto t0 = Clock::now();
  const double bnorm = norm2(b, &fc);
  shadow.add(2 * static_cast<std::uint64_t>(n));

  if (bnorm == 0.0) {
    stats.converged = true;
    stats.residual_history = {0.0};
  } else {
    std::vector<double> r(n);
    for (index_t it = 0;; ++it) {
      double rel;
      if (it == 0) {
        r.assign(b.begin(), b.end());
        rel = 1.0;
        stats.residual_history.push_back(rel);
      } else {
        std::vector<double> ax = spmv(a, x, &fc);
        shadow.add(2 * static_cast<std::uint64_t>(a.nnz()));
        for (index_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
        fc.add(2 * static_cast<std::uint64_t>(n));
        shadow.add(2 * static_cast<std::uint64_t>(n));
        rel = norm2(r, &fc) / bnorm;
        shadow.add(2 * static_cast<std::uint64_t>(n));
        stats.residual_history.push_back(rel);
      }
      stats.final_relative_residual = rel;
      if (rel <= cfg.rtol) {
        stats.converged = true;
        stats.iterations = it;
        break;
      }
      if (it >= cfg.max_iterations) {
        stats.converged = false;
        stats.iterations = it;
        break;
      }
      std::vector<double> e(n, 0.0);
      vcycle_impl(h, 0, r, e, /*x_is_zero=*/true, cfg, &fc, &shadow);
      axpy(1.0, e, x, &fc);
      shadow.add(2 * static_cast<std::uint64_t>(n));
    }
  }
  const auto t1 = Clock::now();

  stats.flops = fc.flops;
  stats.shadow_flops = shadow.flops;
  stats.work_units =
      static_cast<double>(fc.flops) / (2.0 * static_cast<double>(a.nnz()));
  stats.solve_seconds = std::chrono::duration<double>(t1 - t0).count();

  if (cfg.collect_timing && stats.iterations > 0) {
    // Median of a few top-grid matvecs for the WU-to-walltime ratio.
    std::vector<double> samples;
    std::vector<double> y;
    for (int rep = 0; rep < 5; ++rep) {
      const auto m0 = Clock::now();
      y = spmv(a, x);
      const auto m1 = Clock::now();
      samples.push_back(std::chrono::duration<double>(m1 - m0).count());
    }
    std::sort(samples.begin(), samples.end());
    const double t_matvec = samples[samples.size() / 2];
    if (t_matvec > 0.0 && stats.work_units > 0.0)
      stats.wu_ratio = stats.solve_seconds / stats.work_units / t_matvec;
    const double ns = stats.solve_seconds * 1e9;
    stats.c_grind_ns =
        ns / static_cast<double>(n) / static_cast<double>(stats.iterations);
    if (cfg.nddofs > 0)
      stats.d_grind_ns = ns / static_cast<double>(cfg.nddofs) /
                         static_cast<double>(stats.iterations);
  }
  if (x_out) *x_out = std::move(x);
  return stats;
}

}  // namespace airgraph
