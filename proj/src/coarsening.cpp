#include "airgraph/coarsening.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "airgraph/rng.hpp"

namespace airgraph {

namespace {

void close_rows(std::vector<std::vector<index_t>>& rows,
                std::vector<index_t>& offsets, std::vector<index_t>& cols) {
  offsets.assign(1, 0);
  cols.clear();
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    cols.insert(cols.end(), r.begin(), r.end());
    offsets.push_back(static_cast<index_t>(cols.size()));
  }
}

void finish_graph(StrengthGraph& g, std::vector<std::vector<index_t>> s_rows) {
  const index_t n = g.n;
  std::vector<std::vector<index_t>> st_rows(n);
  std::vector<std::vector<index_t>> sym_rows(n);
  for (index_t i = 0; i < n; ++i) {
    for (index_t j : s_rows[i]) {
      st_rows[j].push_back(i);
      sym_rows[i].push_back(j);
      sym_rows[j].push_back(i);
    }
  }
  close_rows(s_rows, g.s_offsets, g.s_cols);
  close_rows(st_rows, g.st_offsets, g.st_cols);
  close_rows(sym_rows, g.sym_offsets, g.sym_cols);
}

// Strict total order on (weight, index); random weights make genuine ties
// measure-zero, the index breaks discrete test weights deterministically.
bool weight_less(const std::vector<double>& w, index_t i, index_t j) {
  return w[i] != w[j] ? w[i] < w[j] : i < j;
}

std::vector<double> make_weights(const StrengthGraph& g, std::uint64_t seed,
                                 WeightMode mode) {
  std::vector<double> w(g.n);
  for (index_t i = 0; i < g.n; ++i) {
    double deg;
    if (mode == WeightMode::kSumCardinalities) {
      deg = static_cast<double>(g.s_row(i).size() + g.st_row(i).size());
    } else {
      deg = static_cast<double>(g.sym_row(i).size());
    }
    w[i] = deg + rng::uniform01(rng::mix(seed, rng::kStreamWeights), i);
  }
  return w;
}

}  // namespace

StrengthGraph StrengthGraph::from_pattern(
    index_t n, const std::vector<std::vector<index_t>>& s) {
  StrengthGraph g;
  g.n = n;
  std::vector<std::vector<index_t>> rows(n);
  for (index_t i = 0; i < n; ++i) {
    for (index_t j : s[i]) {
      if (j == i || j < 0 || j >= n)
        throw std::invalid_argument("StrengthGraph: bad edge");
      rows[i].push_back(j);
    }
  }
  finish_graph(g, std::move(rows));
  return g;
}

StrengthGraph strength(const SparseMatrix& a, double alpha) {
  if (a.nrows() != a.ncols())
    throw std::invalid_argument("strength: matrix must be square");
  StrengthGraph g;
  g.n = a.nrows();
  g.alpha = alpha;
  std::vector<std::vector<index_t>> s_rows(g.n);
  for (index_t i = 0; i < g.n; ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_vals(i);
    double off_max = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k)
      if (cols[k] != i) off_max = std::max(off_max, std::abs(vals[k]));
    const double threshold = alpha * off_max;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double mag = std::abs(vals[k]);
      if (cols[k] != i && mag > 0.0 && mag >= threshold)
        s_rows[i].push_back(cols[k]);
    }
  }
  finish_graph(g, std::move(s_rows));
  return g;
}

CfLabels pmisr_with_weights(const StrengthGraph& g, index_t max_loops,
                            std::vector<double> weights) {
  if (max_loops < 1) throw std::invalid_argument("pmisr: max_loops must be >= 1");
  const index_t n = g.n;
  CfLabels out;
  out.weight = std::move(weights);
  out.label.assign(n, CfLabel::Unassigned);
  const std::vector<double>& w = out.weight;

  // Nodes with no strong edges have w < 1 and are F from the start.
  index_t unassigned = n;
  for (index_t i = 0; i < n; ++i) {
    if (w[i] < 1.0) {
      out.label[i] = CfLabel::F;
      --unassigned;
    }
  }

  std::vector<index_t> d_set;
  for (index_t loop = 0; loop < max_loops && unassigned > 0; ++loop) {
    d_set.clear();
    // Weight-minimal against the whole strong neighbourhood, settled or
    // not. A node next to a smaller-weight C point therefore never becomes
    // F; together with the sweep cap this deliberately under-fills the
    // independent set and keeps the coarsening slow.
    for (index_t i = 0; i < n; ++i) {
      if (out.label[i] != CfLabel::Unassigned) continue;
      bool minimal = true;
      for (index_t j : g.sym_row(i)) {
        if (!weight_less(w, i, j)) {
          minimal = false;
          break;
        }
      }
      if (minimal) d_set.push_back(i);
    }
    if (d_set.empty()) break;  // fixed point: only blocked nodes remain
    for (index_t i : d_set) {
      out.label[i] = CfLabel::F;
      --unassigned;
    }
    for (index_t i : d_set) {
      for (index_t j : g.sym_row(i)) {
        if (out.label[j] == CfLabel::Unassigned) {
          out.label[j] = CfLabel::C;
          --unassigned;
        }
      }
    }
  }
  for (index_t i = 0; i < n; ++i)
    if (out.label[i] == CfLabel::Unassigned) out.label[i] = CfLabel::C;
  return out;
}

CfLabels pmisr(const StrengthGraph& g, index_t max_loops, std::uint64_t seed,
               WeightMode mode) {
  CfLabels out = pmisr_with_weights(g, max_loops, make_weights(g, seed, mode));
  out.seed = seed;
  return out;
}

CfLabels pmis_with_weights(const StrengthGraph& g, bool swap,
                           std::vector<double> weights) {
  const index_t n = g.n;
  CfLabels out;
  out.weight = std::move(weights);
  out.label.assign(n, CfLabel::Unassigned);
  const std::vector<double>& w = out.weight;

  index_t unassigned = n;
  std::vector<index_t> d_set;
  while (unassigned > 0) {
    d_set.clear();
    for (index_t i = 0; i < n; ++i) {
      if (out.label[i] != CfLabel::Unassigned) continue;
      bool maximal = true;
      for (index_t j : g.sym_row(i)) {
        if (out.label[j] == CfLabel::Unassigned && weight_less(w, i, j)) {
          maximal = false;
          break;
        }
      }
      if (maximal) d_set.push_back(i);
    }
    for (index_t i : d_set) {
      out.label[i] = CfLabel::C;
      --unassigned;
    }
    for (index_t i : d_set) {
      for (index_t j : g.sym_row(i)) {
        if (out.label[j] == CfLabel::Unassigned) {
          out.label[j] = CfLabel::F;
          --unassigned;
        }
      }
    }
  }
  if (swap) {
    for (CfLabel& l : out.label)
      l = (l == CfLabel::C) ? CfLabel::F : CfLabel::C;
  }
  return out;
}

CfLabels pmis(const StrengthGraph& g, bool swap, std::uint64_t seed) {
  CfLabels out = pmis_with_weights(
      g, swap, make_weights(g, seed, WeightMode::kSumCardinalities));
  out.seed = seed;
  return out;
}

DominanceReport dominance_report(const SparseMatrix& a_ff, index_t bins) {
  if (bins < 1) throw std::invalid_argument("dominance_report: bins >= 1");
  DominanceReport rep;
  rep.theta.resize(a_ff.nrows());
  for (index_t i = 0; i < a_ff.nrows(); ++i) {
    auto cols = a_ff.row_cols(i);
    auto vals = a_ff.row_vals(i);
    double off = 0.0;
    double diag = 0.0;
    bool diag_seen = false;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] == i) {
        diag = std::abs(vals[k]);
        diag_seen = true;
      } else {
        off += std::abs(vals[k]);
      }
    }
    if (!diag_seen || diag == 0.0)
      throw std::runtime_error("dominance_report: zero diagonal in A_ff row " +
                               std::to_string(i));
    rep.theta[i] = off / diag;
    rep.max_theta = std::max(rep.max_theta, rep.theta[i]);
  }
  rep.histogram.assign(bins, 0);
  const double width = rep.max_theta > 0.0 ? rep.max_theta / bins : 1.0;
  for (double t : rep.theta) {
    auto b = static_cast<index_t>(t / width);
    ++rep.histogram[std::min(b, bins - 1)];
  }
  return rep;
}

DdcResult ddc(const SparseMatrix& a_ff, const CfLabels& labels,
              const LabelMap& map, const DdcOptions& opt) {
  if (a_ff.nrows() != map.n_f())
    throw std::invalid_argument("ddc: a_ff does not match label map");
  if (opt.fraction <= 0.0 || opt.fraction > 1.0)
    throw std::invalid_argument("ddc: fraction must be in (0, 1]");

  DdcResult res;
  res.labels = labels;
  res.report = dominance_report(a_ff, opt.bins);
  const std::vector<double>& theta = res.report.theta;
  const index_t nf = a_ff.nrows();

  double alpha_diag = 0.0;
  switch (opt.selection) {
    case DdcSelection::kDirect:
      alpha_diag = opt.direct_alpha_diag;
      break;
    case DdcSelection::kQuickSelect: {
      // Exact order statistic: alpha_diag is the value with
      // round(fraction * n_F) rows strictly above it.
      auto target = static_cast<index_t>(
          std::llround(opt.fraction * static_cast<double>(nf)));
      target = std::clamp<index_t>(target, 0, nf);
      if (target == 0 || res.report.max_theta == 0.0) {
        alpha_diag = res.report.max_theta;
      } else if (target == nf) {
        alpha_diag = -1.0;  // every row with theta != 0 converts
      } else {
        // (n_F - target)-th smallest theta leaves exactly `target` rows
        // strictly above it (up to ties).
        std::vector<double> sorted = theta;
        auto nth = sorted.begin() + (nf - target) - 1;
        std::nth_element(sorted.begin(), nth, sorted.end());
        alpha_diag = *nth;
      }
      break;
    }
    case DdcSelection::kHistogram: {
      const double max_theta = res.report.max_theta;
      if (max_theta == 0.0) {
        alpha_diag = 0.0;
        break;
      }
      // Cumulative counts from the top of the histogram give the number of
      // rows at or above each bin boundary; pick the boundary whose exceed
      // count is nearest to fraction * n_F.
      const index_t bins = static_cast<index_t>(res.report.histogram.size());
      const double target = opt.fraction * static_cast<double>(nf);
      index_t above = 0;
      index_t best_k = bins;
      double best_err = std::abs(static_cast<double>(above) - target);
      alpha_diag = max_theta;
      for (index_t k = bins; k-- > 0;) {
        above += res.report.histogram[k];
        const double err = std::abs(static_cast<double>(above) - target);
        if (err < best_err) {
          best_err = err;
          best_k = k;
        }
      }
      alpha_diag = best_k * (max_theta / bins);
      break;
    }
  }
  res.alpha_diag = alpha_diag;
  res.report.alpha_diag = alpha_diag;

  // All conversions happen at once against theta measured on the input
  // a_ff; diagonal rows (theta = 0) are never converted.
  for (index_t k = 0; k < nf; ++k) {
    if (theta[k] > alpha_diag && theta[k] != 0.0) {
      const index_t g = map.f_to_fine[k];
      res.labels.label[g] = CfLabel::C;
      res.converted.push_back(g);
    }
  }
  return res;
}

double condition_number(const SparseMatrix& a) {
  if (a.nrows() > 5000 || a.ncols() > 5000)
    throw std::invalid_argument(
        "condition_number: dimension too large for the dense path");
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(a.nrows(), a.ncols());
  for (index_t i = 0; i < a.nrows(); ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) dense(i, cols[k]) = vals[k];
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
  const auto& sigma = svd.singularValues();
  const double smin = sigma(sigma.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sigma(0) / smin;
}

}  // namespace airgraph
