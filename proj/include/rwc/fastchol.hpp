#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "rwc/apprwc.hpp"
#include "rwc/common.hpp"
#include "rwc/graph.hpp"
#include "rwc/linalg.hpp"
#include "rwc/result.hpp"

namespace rwc {

class FactorError : public Error {
 public:
  using Error::Error;
};

// Sparse lower-triangular Cholesky-style factor. The diagonal is kept apart
// from the strictly lower triangle, which is column-compressed with row
// indices ascending inside each column.
struct CholFactor {
  int64_t n = 0;
  std::vector<double> diag;
  std::vector<int64_t> col_ptr;  // size n + 1
  std::vector<NodeId> row_idx;
  std::vector<double> values;
  int64_t dropped_count = 0;  // ordered (i, j) input entries removed by the drop rule
  double shift = 0;           // diagonal shift applied after breakdown
  int shift_retries = 0;

  int64_t nnz() const { return n + (col_ptr.empty() ? 0 : col_ptr[static_cast<std::size_t>(n)]); }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
    for (int64_t j = 0; j < n; ++j) {
      R(j, j) = diag[static_cast<std::size_t>(j)];
      for (int64_t t = col_ptr[static_cast<std::size_t>(j)]; t < col_ptr[static_cast<std::size_t>(j) + 1]; ++t) {
        R(row_idx[static_cast<std::size_t>(t)], j) = values[static_cast<std::size_t>(t)];
      }
    }
    return R;
  }
};

namespace detail {

struct LowerInput {
  std::vector<double> diag;
  std::vector<int64_t> col_ptr;
  std::vector<NodeId> row_idx;
  std::vector<double> values;
  int64_t dropped = 0;
};

// Strictly-lower column-compressed copy of a symmetric matrix with the
// relative drop rule applied to off-diagonal entries on input:
// an entry is removed when |a_ij| < delta sqrt(a_ii a_jj). Each removed
// strictly-lower entry counts as two ordered drops.
inline LowerInput sparsified_lower(const SparseSymMatrix& A, double delta) {
  const int64_t n = A.n;
  LowerInput out;
  out.diag.assign(static_cast<std::size_t>(n), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      if (A.col_idx[static_cast<std::size_t>(k)] == i) {
        out.diag[static_cast<std::size_t>(i)] = A.values[static_cast<std::size_t>(k)];
      }
    }
  }
  for (int64_t i = 0; i < n; ++i) {
    if (!(out.diag[static_cast<std::size_t>(i)] > 0)) {
      throw FactorError("ichol: matrix diagonal must be strictly positive");
    }
  }
  out.col_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  auto keep = [&](int64_t i, NodeId j, double v) {
    return std::abs(v) >= delta * std::sqrt(out.diag[static_cast<std::size_t>(i)] *
                                            out.diag[static_cast<std::size_t>(j)]);
  };
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      const NodeId j = A.col_idx[static_cast<std::size_t>(k)];
      if (j >= i) continue;
      if (keep(i, j, A.values[static_cast<std::size_t>(k)])) {
        ++out.col_ptr[static_cast<std::size_t>(j) + 1];
      } else {
        out.dropped += 2;
      }
    }
  }
  for (std::size_t c = 1; c < out.col_ptr.size(); ++c) out.col_ptr[c] += out.col_ptr[c - 1];
  out.row_idx.resize(static_cast<std::size_t>(out.col_ptr[static_cast<std::size_t>(n)]));
  out.values.resize(out.row_idx.size());
  std::vector<int64_t> cursor(out.col_ptr.begin(), out.col_ptr.end() - 1);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      const NodeId j = A.col_idx[static_cast<std::size_t>(k)];
      if (j >= i) continue;
      const double v = A.values[static_cast<std::size_t>(k)];
      if (!keep(i, j, v)) continue;
      const auto slot = static_cast<std::size_t>(cursor[j]++);
      out.row_idx[slot] = static_cast<NodeId>(i);
      out.values[slot] = v;
    }
  }
  // CSR rows are sorted, so each strictly-lower column is filled in ascending
  // row order already.
  return out;
}

struct RowRef {
  NodeId col;
  int64_t slot;
};

// One factorization attempt; empty on pivot breakdown.
inline std::optional<CholFactor> try_factor(const LowerInput& in, double shift,
                                            double deadline_seconds) {
  const int64_t n = static_cast<int64_t>(in.diag.size());
  CholFactor R;
  R.n = n;
  R.diag.assign(static_cast<std::size_t>(n), 0.0);
  R.col_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  R.row_idx.reserve(in.row_idx.size() * 2);
  R.values.reserve(in.values.size() * 2);

  std::vector<std::vector<RowRef>> row_refs(static_cast<std::size_t>(n));
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  std::vector<char> mark(static_cast<std::size_t>(n), 0);
  std::vector<NodeId> touched;
  Stopwatch clock;

  for (int64_t j = 0; j < n; ++j) {
    if (deadline_seconds > 0 && (j & 255) == 0 && clock.seconds() > deadline_seconds) {
      throw DeadlineError("ichol: deadline exceeded");
    }
    touched.clear();
    double pivot = in.diag[static_cast<std::size_t>(j)] + shift;
    for (int64_t t = in.col_ptr[static_cast<std::size_t>(j)]; t < in.col_ptr[static_cast<std::size_t>(j) + 1]; ++t) {
      const NodeId i = in.row_idx[static_cast<std::size_t>(t)];
      w[i] = in.values[static_cast<std::size_t>(t)];
      mark[i] = 1;
      touched.push_back(i);
    }
    for (const RowRef& ref : row_refs[static_cast<std::size_t>(j)]) {
      const double r_jk = R.values[static_cast<std::size_t>(ref.slot)];
      pivot -= r_jk * r_jk;
      const int64_t col_end = R.col_ptr[static_cast<std::size_t>(ref.col) + 1];
      for (int64_t t = ref.slot + 1; t < col_end; ++t) {
        const NodeId i = R.row_idx[static_cast<std::size_t>(t)];
        if (!mark[i]) {
          mark[i] = 1;
          w[i] = 0.0;
          touched.push_back(i);
        }
        w[i] -= R.values[static_cast<std::size_t>(t)] * r_jk;
      }
    }
    if (!(pivot > 0)) {
      for (NodeId i : touched) {
        mark[i] = 0;
        w[i] = 0.0;
      }
      return std::nullopt;
    }
    const double r_jj = std::sqrt(pivot);
    R.diag[static_cast<std::size_t>(j)] = r_jj;
    std::sort(touched.begin(), touched.end());
    for (NodeId i : touched) {
      if (w[i] != 0.0) {
        const auto slot = static_cast<int64_t>(R.values.size());
        R.row_idx.push_back(i);
        R.values.push_back(w[i] / r_jj);
        row_refs[i].push_back({static_cast<NodeId>(j), slot});
      }
      mark[i] = 0;
      w[i] = 0.0;
    }
    R.col_ptr[static_cast<std::size_t>(j) + 1] = static_cast<int64_t>(R.values.size());
  }
  return R;
}

}  // namespace detail

// Incomplete Cholesky with drop-on-input: off-diagonal entries failing the
// relative threshold are removed first, then the sparsified matrix is
// factored exactly (all fill kept). This makes the reconstruction error
// exactly the Frobenius mass of the dropped entries, so
// ||A - R R^T||_F / ||A||_F <= sqrt(k) delta with k = dropped_count.
// A non-positive pivot triggers retries with a doubling diagonal shift.
inline CholFactor ichol(const SparseSymMatrix& A, double delta,
                        double deadline_seconds = 0) {
  if (!(delta >= 0) || !is_finite(delta)) throw InputError("ichol: delta must be >= 0");
  const detail::LowerInput lower = detail::sparsified_lower(A, delta);

  double shift = 0;
  for (int attempt = 0; attempt <= 5; ++attempt) {
    std::optional<CholFactor> R = detail::try_factor(lower, shift, deadline_seconds);
    if (R.has_value()) {
      R->dropped_count = lower.dropped;
      R->shift = shift;
      R->shift_retries = attempt;
      return std::move(*R);
    }
    shift = (attempt == 0) ? 1e-8 : shift * 2;
  }
  throw FactorError("ichol: non-positive pivot persists after 5 diagonal-shift retries");
}

// Sparse column with ascending indices; values are non-negative throughout
// this engine because factor off-diagonals are non-positive.
struct SparseColumn {
  NodeId owner = -1;
  std::vector<NodeId> idx;
  std::vector<double> val;

  int64_t nnz() const { return static_cast<int64_t>(idx.size()); }

  double norm2_sq() const {
    double acc = 0;
    for (double v : val) acc += v * v;
    return acc;
  }
};

// Holds every inverse column computed so far; the window rule decides which
// of them a later column is allowed to read.
class ColumnStore {
 public:
  explicit ColumnStore(int64_t n) : cols_(static_cast<std::size_t>(n)) {}

  bool has(NodeId i) const { return cols_[static_cast<std::size_t>(i)].owner == i; }

  const SparseColumn& get(NodeId i) const { return cols_[static_cast<std::size_t>(i)]; }

  void put(SparseColumn c) {
    auto at = static_cast<std::size_t>(c.owner);
    cols_[at] = std::move(c);
  }

 private:
  std::vector<SparseColumn> cols_;
};

struct InvertScratch {
  std::vector<double> w;
  std::vector<char> mark;
  std::vector<NodeId> touched;
};

// Column u of the inverse of R from the right-to-left recursion
//   S_{:,u} = (1/R_uu) e_u - (1/R_uu) sum_i R_iu S_{:,i}
// with the sum restricted to stored columns i in (u, u + window]. Rows of R
// below the window are skipped; that truncation is the approximation this
// engine trades for speed.
inline SparseColumn invert_column_step(const CholFactor& R, NodeId u, int64_t window,
                                       const ColumnStore& store, InvertScratch& scratch) {
  const auto n = static_cast<std::size_t>(R.n);
  if (scratch.w.size() != n) {
    scratch.w.assign(n, 0.0);
    scratch.mark.assign(n, 0);
  }
  auto& w = scratch.w;
  auto& mark = scratch.mark;
  auto& touched = scratch.touched;
  touched.clear();

  const double base = 1.0 / R.diag[static_cast<std::size_t>(u)];
  w[static_cast<std::size_t>(u)] = base;
  mark[static_cast<std::size_t>(u)] = 1;
  touched.push_back(u);

  for (int64_t t = R.col_ptr[static_cast<std::size_t>(u)]; t < R.col_ptr[static_cast<std::size_t>(u) + 1]; ++t) {
    const NodeId i = R.row_idx[static_cast<std::size_t>(t)];
    if (static_cast<int64_t>(i) - static_cast<int64_t>(u) > window) continue;
    if (!store.has(i)) {
      throw Error("invert_column_step: window column " + std::to_string(i) +
                  " has not been computed");
    }
    const double coeff = -base * R.values[static_cast<std::size_t>(t)];
    const SparseColumn& prior = store.get(i);
    for (std::size_t k = 0; k < prior.idx.size(); ++k) {
      const NodeId r = prior.idx[k];
      if (!mark[r]) {
        mark[r] = 1;
        w[r] = 0.0;
        touched.push_back(r);
      }
      w[r] += coeff * prior.val[k];
    }
  }

  std::sort(touched.begin(), touched.end());
  SparseColumn out;
  out.owner = u;
  out.idx.reserve(touched.size());
  out.val.reserve(touched.size());
  for (NodeId r : touched) {
    if (w[r] != 0.0) {
      out.idx.push_back(r);
      out.val.push_back(w[r]);
    }
    mark[r] = 0;
    w[r] = 0.0;
  }
  return out;
}

inline SparseColumn invert_column_step(const CholFactor& R, NodeId u, int64_t window,
                                       const ColumnStore& store) {
  InvertScratch scratch;
  return invert_column_step(R, u, window, store, scratch);
}

// Keeps the largest-magnitude entries of a column, discarding the longest
// tail whose 1-norm mass fraction stays within eps_p (inclusive; a small
// floating-point slack keeps boundary ties inclusive under summation error).
// Columns at or under the nnz trigger zeta pass through unchanged, as does
// eps_p = 0.
inline SparseColumn sparsify_column(const SparseColumn& col, double eps_p, int64_t zeta,
                                    double* discarded_fraction = nullptr) {
  if (discarded_fraction) *discarded_fraction = 0;
  if (col.nnz() <= zeta || eps_p == 0.0) return col;
  if (!(eps_p >= 0 && eps_p < 1)) throw InputError("sparsify_column: eps_p must be in [0, 1)");

  const std::size_t count = col.idx.size();
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(col.val[a]);
    const double mb = std::abs(col.val[b]);
    if (ma != mb) return ma > mb;
    return col.idx[a] < col.idx[b];
  });

  double total = 0;
  for (double v : col.val) total += std::abs(v);
  if (total == 0) return col;

  // Walk the tail from the smallest magnitude upward, extending the discard
  // set while its mass fraction stays within budget.
  const double budget = eps_p * total + 8.0 * std::numeric_limits<double>::epsilon() * total;
  double tail = 0;
  std::size_t discard = 0;
  for (std::size_t i = count; i-- > 0;) {
    const double candidate = tail + std::abs(col.val[order[i]]);
    if (candidate <= budget) {
      tail = candidate;
      discard = count - i;
    } else {
      break;
    }
  }
  if (discarded_fraction) *discarded_fraction = tail / total;
  if (discard == 0) return col;

  std::vector<char> keep(count, 1);
  for (std::size_t i = count - discard; i < count; ++i) keep[order[i]] = 0;
  SparseColumn out;
  out.owner = col.owner;
  out.idx.reserve(count - discard);
  out.val.reserve(count - discard);
  for (std::size_t i = 0; i < count; ++i) {
    if (keep[i]) {
      out.idx.push_back(col.idx[i]);
      out.val.push_back(col.val[i]);
    }
  }
  return out;
}

// Reverse Cuthill-McKee order over the symmetric pattern; perm maps new
// position to old index.
inline std::vector<NodeId> rcm_order(const SparseSymMatrix& A) {
  const int64_t n = A.n;
  std::vector<int64_t> degree(static_cast<std::size_t>(n), 0);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      if (A.col_idx[static_cast<std::size_t>(k)] != i) ++degree[static_cast<std::size_t>(i)];
    }
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<NodeId> order;
  order.reserve(static_cast<std::size_t>(n));
  std::vector<NodeId> frontier;
  while (static_cast<int64_t>(order.size()) < n) {
    NodeId start = -1;
    int64_t best_degree = 0;
    for (NodeId i = 0; i < n; ++i) {
      if (!seen[i] && (start == -1 || degree[i] < best_degree)) {
        start = i;
        best_degree = degree[i];
      }
    }
    seen[start] = 1;
    std::size_t head = order.size();
    order.push_back(start);
    while (head < order.size()) {
      const NodeId u = order[head++];
      frontier.clear();
      for (int64_t k = A.row_ptr[u]; k < A.row_ptr[u + 1]; ++k) {
        const NodeId wnode = A.col_idx[static_cast<std::size_t>(k)];
        if (wnode != u && !seen[wnode]) {
          seen[wnode] = 1;
          frontier.push_back(wnode);
        }
      }
      std::sort(frontier.begin(), frontier.end(), [&](NodeId a, NodeId b) {
        if (degree[a] != degree[b]) return degree[a] < degree[b];
        return a < b;
      });
      order.insert(order.end(), frontier.begin(), frontier.end());
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

inline SparseSymMatrix permute_sym(const SparseSymMatrix& A, const std::vector<NodeId>& perm) {
  const int64_t n = A.n;
  std::vector<NodeId> inverse(static_cast<std::size_t>(n));
  for (NodeId i = 0; i < n; ++i) inverse[perm[i]] = i;
  SparseSymMatrix out;
  out.n = n;
  out.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (NodeId i = 0; i < n; ++i) {
    const NodeId old = perm[i];
    out.row_ptr[static_cast<std::size_t>(i) + 1] =
        out.row_ptr[i] + (A.row_ptr[old + 1] - A.row_ptr[old]);
  }
  out.col_idx.resize(static_cast<std::size_t>(out.row_ptr[static_cast<std::size_t>(n)]));
  out.values.resize(out.col_idx.size());
  std::vector<std::pair<NodeId, double>> row;
  for (NodeId i = 0; i < n; ++i) {
    const NodeId old = perm[i];
    row.clear();
    for (int64_t k = A.row_ptr[old]; k < A.row_ptr[old + 1]; ++k) {
      row.emplace_back(inverse[A.col_idx[static_cast<std::size_t>(k)]],
                       A.values[static_cast<std::size_t>(k)]);
    }
    std::sort(row.begin(), row.end());
    int64_t k_out = out.row_ptr[i];
    for (const auto& [j, v] : row) {
      out.col_idx[static_cast<std::size_t>(k_out)] = j;
      out.values[static_cast<std::size_t>(k_out)] = v;
      ++k_out;
    }
  }
  return out;
}

struct FastCholParams {
  double delta = 1e-4;   // input drop tolerance
  double eps_p = 0.01;   // column 1-norm mass budget for sparsification
  int64_t window = 0;    // base window size; 0 selects ceil(log2(n - 1))
  int64_t zeta = 0;      // sparsification nnz trigger; 0 selects ceil(log2(n - 1))
  double theta = 0;      // solver error parameter for the assembly stage
  bool use_rcm = false;
  double deadline_seconds = 0;
};

namespace detail {
inline void validate(const FastCholParams& p, bool need_theta) {
  if (!(p.delta >= 0) || !is_finite(p.delta)) throw InputError("fastchol: delta must be >= 0");
  if (!(p.eps_p >= 0 && p.eps_p < 1)) throw InputError("fastchol: eps_p must be in [0, 1)");
  if (p.window < 0) throw InputError("fastchol: window must be >= 0");
  if (p.zeta < 0) throw InputError("fastchol: zeta must be >= 0");
  if (need_theta && !(p.theta > 0)) throw InputError("fastchol: theta must be positive");
}

inline int64_t auto_log2(int64_t n) {
  int64_t v = 1;
  int64_t bound = 2;
  while (bound < n) {
    bound *= 2;
    ++v;
  }
  return std::max<int64_t>(v, 1);
}
}  // namespace detail

// Observer over the per-column pipeline, in elimination order: receives the
// window-truncated column before and after sparsification. Intended for
// small-instance diagnostics; the full inverse needed to judge truncation
// error is only computable densely.
using ColumnObserver =
    std::function<void(NodeId column, const SparseColumn& full, const SparseColumn& kept)>;

struct FastCholDiagResult {
  DiagEstimates diag;          // submatrix order (dense node order, pivot skipped)
  CholFactor factor;           // in elimination order
  std::vector<NodeId> order;   // elimination position -> submatrix index
  int64_t resolved_window = 0;
  int64_t resolved_zeta = 0;
  int64_t sparsified_columns = 0;
  double max_discarded_fraction = 0;
};

// Estimates the diagonal of the inverse of the pivot-removed normalized
// Laplacian: factor once, then one right-to-left pass of windowed sparse
// column inversion with sparsification. The window grows with node degree,
// min(w (1 + d_u / d_max), n), compounding across the pass.
inline FastCholDiagResult fastchol_diag(const Graph& g, NodeId v, const FastCholParams& params,
                                        const ColumnObserver& observer = nullptr) {
  detail::validate(params, false);
  if (!is_connected(g)) throw Error("fastchol: graph must be connected");
  const SparseSymMatrix norm_lap = normalized_laplacian(g);
  SubmatrixResult sub = submatrix_remove(norm_lap, v);
  const int64_t ns = sub.matrix.n;

  FastCholDiagResult out;
  out.order.resize(static_cast<std::size_t>(ns));
  SparseSymMatrix working;
  if (params.use_rcm) {
    out.order = rcm_order(sub.matrix);
    working = permute_sym(sub.matrix, out.order);
  } else {
    for (int64_t i = 0; i < ns; ++i) out.order[static_cast<std::size_t>(i)] = static_cast<NodeId>(i);
    working = sub.matrix;
  }

  out.factor = ichol(working, params.delta, params.deadline_seconds);
  out.resolved_window = params.window > 0 ? params.window : detail::auto_log2(ns);
  out.resolved_zeta = params.zeta > 0 ? params.zeta : detail::auto_log2(ns);

  const double d_max = static_cast<double>(max_degree(g));
  std::vector<double> col_degree(static_cast<std::size_t>(ns));
  for (int64_t u = 0; u < ns; ++u) {
    const NodeId node = sub.index_map[out.order[static_cast<std::size_t>(u)]];
    col_degree[static_cast<std::size_t>(u)] = static_cast<double>(g.degree(node));
  }

  ColumnStore store(ns);
  InvertScratch scratch;
  std::vector<double> tau(static_cast<std::size_t>(ns), 0.0);
  double window = static_cast<double>(out.resolved_window);
  Stopwatch clock;
  for (int64_t u = ns - 1; u >= 0; --u) {
    if (params.deadline_seconds > 0 && (u & 127) == 0 && clock.seconds() > params.deadline_seconds) {
      throw DeadlineError("fastchol: deadline exceeded");
    }
    window = std::min(window * (1.0 + col_degree[static_cast<std::size_t>(u)] / d_max),
                      static_cast<double>(ns));
    SparseColumn full = invert_column_step(out.factor, static_cast<NodeId>(u),
                                           static_cast<int64_t>(window), store, scratch);
    SparseColumn kept;
    if (full.nnz() > out.resolved_zeta) {
      double fraction = 0;
      kept = sparsify_column(full, params.eps_p, out.resolved_zeta, &fraction);
      if (kept.nnz() != full.nnz()) {
        ++out.sparsified_columns;
        out.max_discarded_fraction = std::max(out.max_discarded_fraction, fraction);
      }
    } else {
      kept = full;
    }
    tau[static_cast<std::size_t>(u)] = kept.norm2_sq();
    if (observer) observer(static_cast<NodeId>(u), full, kept);
    store.put(std::move(kept));
  }

  out.diag.values.resize(static_cast<std::size_t>(ns));
  for (int64_t u = 0; u < ns; ++u) {
    out.diag.values[out.order[static_cast<std::size_t>(u)]] = tau[static_cast<std::size_t>(u)];
  }
  out.diag.pivot = v;
  out.diag.provenance = DiagProvenance::fastchol;
  return out;
}

// Full engine: diagonal estimates above, then assembly through the pivot
// column (one Laplacian solve).
inline CentralityResult fastchol(const Graph& g, NodeId v, const FastCholParams& params) {
  detail::validate(params, true);
  Stopwatch clock;
  FastCholDiagResult diag = fastchol_diag(g, v, params);
  AppRwcOptions opts;
  opts.solver.deadline_seconds = params.deadline_seconds;
  CentralityResult result = app_rwc(g, v, params.theta, diag.diag, opts);
  result.engine = "fastchol";
  result.params["delta"] = params.delta;
  result.params["eps_p"] = params.eps_p;
  result.params["window"] = diag.resolved_window;
  result.params["zeta"] = diag.resolved_zeta;
  result.params["use_rcm"] = params.use_rcm;
  result.params["dropped_count"] = diag.factor.dropped_count;
  result.params["factor_nnz"] = diag.factor.nnz();
  result.params["factor_shift"] = diag.factor.shift;
  result.params["factor_shift_retries"] = diag.factor.shift_retries;
  result.params["sparsified_columns"] = diag.sparsified_columns;
  result.elapsed_seconds = clock.seconds();
  return result;
}

}  // namespace rwc
