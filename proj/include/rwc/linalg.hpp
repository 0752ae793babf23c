#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "rwc/common.hpp"
#include "rwc/graph.hpp"

namespace rwc {

// Symmetric sparse matrix in CSR form; both triangles stored explicitly.
struct SparseSymMatrix {
  int64_t n = 0;
  std::vector<int64_t> row_ptr;  // size n + 1
  std::vector<NodeId> col_idx;
  std::vector<double> values;

  int64_t nnz() const { return row_ptr.empty() ? 0 : row_ptr[static_cast<std::size_t>(n)]; }

  void multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(static_cast<std::size_t>(n), 0.0);
    for (int64_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
        acc += values[static_cast<std::size_t>(k)] * x[col_idx[static_cast<std::size_t>(k)]];
      }
      y[static_cast<std::size_t>(i)] = acc;
    }
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(static_cast<std::size_t>(n), 0.0);
    for (int64_t i = 0; i < n; ++i) {
      for (int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
        if (col_idx[static_cast<std::size_t>(k)] == i) d[static_cast<std::size_t>(i)] = values[static_cast<std::size_t>(k)];
      }
    }
    return d;
  }

  double frobenius_norm() const {
    double acc = 0.0;
    for (double v : values) acc += v * v;
    return std::sqrt(acc);
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (int64_t i = 0; i < n; ++i) {
      for (int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
        dense(i, col_idx[static_cast<std::size_t>(k)]) = values[static_cast<std::size_t>(k)];
      }
    }
    return dense;
  }
};

// Combinatorial Laplacian: diag(d) - adjacency.
inline SparseSymMatrix laplacian(const Graph& g) {
  SparseSymMatrix M;
  M.n = g.n;
  M.row_ptr.assign(static_cast<std::size_t>(g.n) + 1, 0);
  for (NodeId u = 0; u < g.n; ++u) M.row_ptr[static_cast<std::size_t>(u) + 1] = M.row_ptr[u] + g.degree(u) + 1;
  M.col_idx.resize(static_cast<std::size_t>(M.row_ptr[static_cast<std::size_t>(g.n)]));
  M.values.resize(M.col_idx.size());
  for (NodeId u = 0; u < g.n; ++u) {
    int64_t k = M.row_ptr[u];
    bool diag_written = false;
    for (NodeId w : g.neighbors(u)) {
      if (!diag_written && w > u) {
        M.col_idx[static_cast<std::size_t>(k)] = u;
        M.values[static_cast<std::size_t>(k)] = static_cast<double>(g.degree(u));
        ++k;
        diag_written = true;
      }
      M.col_idx[static_cast<std::size_t>(k)] = w;
      M.values[static_cast<std::size_t>(k)] = -1.0;
      ++k;
    }
    if (!diag_written) {
      M.col_idx[static_cast<std::size_t>(k)] = u;
      M.values[static_cast<std::size_t>(k)] = static_cast<double>(g.degree(u));
    }
  }
  return M;
}

// Normalized Laplacian: unit diagonal, -1/sqrt(d_u d_w) on edges.
inline SparseSymMatrix normalized_laplacian(const Graph& g) {
  SparseSymMatrix M = laplacian(g);
  std::vector<double> inv_sqrt(static_cast<std::size_t>(g.n));
  for (NodeId u = 0; u < g.n; ++u) {
    if (g.degree(u) == 0) throw Error("normalized_laplacian: isolated node");
    inv_sqrt[u] = 1.0 / std::sqrt(static_cast<double>(g.degree(u)));
  }
  for (int64_t i = 0; i < M.n; ++i) {
    for (int64_t k = M.row_ptr[i]; k < M.row_ptr[i + 1]; ++k) {
      NodeId j = M.col_idx[static_cast<std::size_t>(k)];
      M.values[static_cast<std::size_t>(k)] *= inv_sqrt[static_cast<std::size_t>(i)] * inv_sqrt[j];
    }
  }
  return M;
}

struct SubmatrixResult {
  SparseSymMatrix matrix;
  std::vector<NodeId> index_map;  // submatrix index -> index in the parent matrix
};

// Principal submatrix with row and column v removed.
inline SubmatrixResult submatrix_remove(const SparseSymMatrix& M, NodeId v) {
  if (M.n < 2) throw Error("submatrix_remove: matrix must have dimension >= 2");
  SubmatrixResult out;
  out.index_map.reserve(static_cast<std::size_t>(M.n) - 1);
  std::vector<NodeId> to_new(static_cast<std::size_t>(M.n), -1);
  for (NodeId i = 0; i < M.n; ++i) {
    if (i == v) continue;
    to_new[i] = static_cast<NodeId>(out.index_map.size());
    out.index_map.push_back(i);
  }
  SparseSymMatrix& S = out.matrix;
  S.n = M.n - 1;
  S.row_ptr.assign(static_cast<std::size_t>(S.n) + 1, 0);
  for (int64_t i = 0; i < M.n; ++i) {
    if (i == v) continue;
    int64_t kept = 0;
    for (int64_t k = M.row_ptr[i]; k < M.row_ptr[i + 1]; ++k) {
      if (M.col_idx[static_cast<std::size_t>(k)] != v) ++kept;
    }
    S.row_ptr[static_cast<std::size_t>(to_new[i]) + 1] = kept;
  }
  for (std::size_t i = 1; i < S.row_ptr.size(); ++i) S.row_ptr[i] += S.row_ptr[i - 1];
  S.col_idx.resize(static_cast<std::size_t>(S.row_ptr[static_cast<std::size_t>(S.n)]));
  S.values.resize(S.col_idx.size());
  for (int64_t i = 0; i < M.n; ++i) {
    if (i == v) continue;
    int64_t k_out = S.row_ptr[to_new[i]];
    for (int64_t k = M.row_ptr[i]; k < M.row_ptr[i + 1]; ++k) {
      NodeId j = M.col_idx[static_cast<std::size_t>(k)];
      if (j == v) continue;
      S.col_idx[static_cast<std::size_t>(k_out)] = to_new[j];
      S.values[static_cast<std::size_t>(k_out)] = M.values[static_cast<std::size_t>(k)];
      ++k_out;
    }
  }
  return out;
}

struct SolverOptions {
  double kappa_guard = 10.0;   // residual proxy safety divisor
  double theta_floor = 1e-9;   // smallest enforceable error parameter in doubles
  int64_t max_iterations = 0;  // 0 selects ceil(20 sqrt(n)) + 1000
  double deadline_seconds = 0; // 0 disables the cooperative deadline
};

struct SolverReport {
  int64_t iterations = 0;
  double residual = 0;         // achieved ||L g - b||_2 / ||b||_2
  double theta_requested = 0;
  double theta_used = 0;
  bool converged = false;
  bool theta_clamped = false;
  bool b_projected = false;
};

struct SolveResult {
  std::vector<double> g;
  SolverReport report;
};

// Thrown when the iteration cap is reached; carries the best iterate found.
class SolverError : public Error {
 public:
  SolverError(const std::string& msg, SolveResult best_so_far)
      : Error(msg), best(std::move(best_so_far)) {}
  SolveResult best;
};

namespace detail {
// Instrumentation for verifying call-count contracts in tests.
inline std::atomic<int64_t> lap_solve_calls{0};

inline void remove_mean(std::vector<double>& x) {
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  for (double& v : x) v -= mean;
}
}  // namespace detail

// Approximate solve of L g = b for a connected-graph Laplacian (nullspace =
// span{1}). Preconditioned conjugate gradient with the Jacobi preconditioner
// on the mean-deflated system; iterates until the computable proxy
// ||L g - b||_2 / ||b||_2 <= theta / kappa_guard. theta below theta_floor is
// clamped (a tighter relative residual is not reliably attainable in double
// precision) and reported. Non-convergence within the iteration cap throws
// SolverError carrying the best iterate.
inline SolveResult lap_solve(const SparseSymMatrix& L, const std::vector<double>& b_in,
                             double theta, const SolverOptions& opts = {}) {
  if (static_cast<int64_t>(b_in.size()) != L.n) throw Error("lap_solve: size mismatch");
  if (!(theta > 0)) throw Error("lap_solve: theta must be positive");
  detail::lap_solve_calls.fetch_add(1, std::memory_order_relaxed);

  const auto n = static_cast<std::size_t>(L.n);
  SolveResult out;
  out.report.theta_requested = theta;
  out.report.theta_used = std::max(theta, opts.theta_floor);
  out.report.theta_clamped = out.report.theta_used != theta;

  std::vector<double> b = b_in;
  double sum = 0, norm_b = 0;
  for (double v : b) {
    sum += v;
    norm_b += v * v;
  }
  norm_b = std::sqrt(norm_b);
  if (norm_b == 0) {
    out.g.assign(n, 0.0);
    out.report.converged = true;
    return out;
  }
  if (std::abs(sum) > 1e-10 * std::max(1.0, norm_b)) out.report.b_projected = true;
  detail::remove_mean(b);
  norm_b = 0;
  for (double v : b) norm_b += v * v;
  norm_b = std::sqrt(norm_b);
  if (norm_b == 0) {
    out.g.assign(n, 0.0);
    out.report.converged = true;
    return out;
  }

  const double target = out.report.theta_used / opts.kappa_guard * norm_b;
  const int64_t cap = opts.max_iterations > 0
                          ? opts.max_iterations
                          : static_cast<int64_t>(std::ceil(20.0 * std::sqrt(static_cast<double>(L.n)))) + 1000;

  std::vector<double> inv_diag = L.diagonal();
  for (double& v : inv_diag) v = v > 0 ? 1.0 / v : 1.0;

  std::vector<double> x(n, 0.0), r = b, z(n), p(n), Ap(n);
  std::vector<double> best_x = x;
  double best_residual = norm_b;

  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  detail::remove_mean(z);
  p = z;
  double rz = 0;
  for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];

  Stopwatch clock;
  int64_t iter = 0;
  auto true_residual_norm = [&]() {
    L.multiply(x, Ap);
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = Ap[i] - b[i];
      acc += d * d;
    }
    return std::sqrt(acc);
  };

  double recurrence_norm = norm_b;
  while (iter < cap) {
    ++iter;
    L.multiply(p, Ap);
    double pAp = 0;
    for (std::size_t i = 0; i < n; ++i) pAp += p[i] * Ap[i];
    if (!(pAp > 0)) break;
    const double alpha = rz / pAp;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    if (iter % 50 == 0) {
      L.multiply(x, Ap);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
      detail::remove_mean(r);
    }
    double rr = 0;
    for (std::size_t i = 0; i < n; ++i) rr += r[i] * r[i];
    recurrence_norm = std::sqrt(rr);
    if (recurrence_norm < best_residual) {
      best_residual = recurrence_norm;
      best_x = x;
    }
    if (recurrence_norm <= target) {
      const double exact = true_residual_norm();
      if (exact <= target) {
        recurrence_norm = exact;
        break;
      }
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
      detail::remove_mean(r);
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    detail::remove_mean(z);
    double rz_next = 0;
    for (std::size_t i = 0; i < n; ++i) rz_next += r[i] * z[i];
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    if (opts.deadline_seconds > 0 && clock.seconds() > opts.deadline_seconds) {
      throw DeadlineError("lap_solve: deadline exceeded");
    }
  }

  detail::remove_mean(x);
  out.g = x;
  out.report.iterations = iter;
  const double final_norm = true_residual_norm();
  out.report.residual = final_norm / norm_b;
  out.report.converged = final_norm <= target * (1.0 + 1e-12);
  if (!out.report.converged) {
    SolveResult best;
    best.g = std::move(best_x);
    detail::remove_mean(best.g);
    best.report = out.report;
    best.report.residual = best_residual / norm_b;
    throw SolverError("lap_solve: no convergence within " + std::to_string(cap) +
                          " iterations (relative residual " +
                          format_double(best.report.residual) + ")",
                      std::move(best));
  }
  return out;
}

enum class PinvKind { laplacian, normalized };

// Dense Moore-Penrose pseudo-inverse of a connected-graph (normalized)
// Laplacian via rank-one deflation: (M + phi phi^T)^{-1} - phi phi^T scaled,
// where phi spans the nullspace. For the combinatorial Laplacian phi is
// 1/sqrt(n); for the normalized kind the caller must pass the unit vector
// proportional to sqrt(degrees).
inline Eigen::MatrixXd pinv_dense(const SparseSymMatrix& M, PinvKind kind,
                                  const std::vector<double>* null_vector = nullptr,
                                  int64_t cap = 5000) {
  if (M.n > cap) {
    throw CapExceededError("pinv_dense: dimension " + std::to_string(M.n) +
                           " exceeds the dense cap " + std::to_string(cap) +
                           "; use an approximate engine");
  }
  const int64_t n = M.n;
  Eigen::VectorXd phi(n);
  if (kind == PinvKind::laplacian) {
    phi.setConstant(1.0 / std::sqrt(static_cast<double>(n)));
  } else {
    if (null_vector == nullptr || static_cast<int64_t>(null_vector->size()) != n) {
      throw Error("pinv_dense: normalized kind requires the degree-based null vector");
    }
    for (int64_t i = 0; i < n; ++i) phi(i) = (*null_vector)[static_cast<std::size_t>(i)];
    const double norm = phi.norm();
    if (std::abs(norm - 1.0) > 1e-8) throw Error("pinv_dense: null vector must have unit norm");
  }
  Eigen::MatrixXd dense = M.to_dense();
  dense.noalias() += phi * phi.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(dense);
  if (llt.info() != Eigen::Success) throw Error("pinv_dense: factorization failed");
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  inv.noalias() -= phi * phi.transpose();
  return ((inv + inv.transpose()) * 0.5).eval();
}

// Unit-norm nullspace vector of the normalized Laplacian: sqrt(d)/sqrt(2m).
inline std::vector<double> normalized_null_vector(const Graph& g) {
  std::vector<double> phi(static_cast<std::size_t>(g.n));
  const double scale = 1.0 / std::sqrt(static_cast<double>(g.degree_sum()));
  for (NodeId u = 0; u < g.n; ++u) phi[u] = std::sqrt(static_cast<double>(g.degree(u))) * scale;
  return phi;
}

struct BridgeResult {
  std::vector<double> y;  // approximate pivot column of the normalized pseudo-inverse
  SolverReport report;
};

// Pivot column of the normalized Laplacian pseudo-inverse through a single
// combinatorial-Laplacian solve. The right-hand side is
// b = sqrt(d_v) (e_v - d/(2m)), which is orthogonal to the all-ones vector by
// construction; the projection I - phi phi^T is applied as scaled dot
// products, never materializing a dense matrix.
inline BridgeResult bridge_vector(const Graph& g, NodeId v, double theta,
                                  const SolverOptions& opts = {}) {
  if (!is_connected(g)) throw Error("bridge_vector: graph must be connected");
  const auto n = static_cast<std::size_t>(g.n);
  const double two_m = static_cast<double>(g.degree_sum());
  const double sqrt_dv = std::sqrt(static_cast<double>(g.degree(v)));

  std::vector<double> b(n);
  for (NodeId u = 0; u < g.n; ++u) {
    b[u] = sqrt_dv * ((u == v ? 1.0 : 0.0) - static_cast<double>(g.degree(u)) / two_m);
  }

  SparseSymMatrix L = laplacian(g);
  SolveResult solved = lap_solve(L, b, theta, opts);

  BridgeResult out;
  out.report = solved.report;
  out.y.resize(n);
  double dot = 0;
  for (NodeId u = 0; u < g.n; ++u) {
    out.y[u] = std::sqrt(static_cast<double>(g.degree(u))) * solved.g[u];
    dot += std::sqrt(static_cast<double>(g.degree(u))) * out.y[u];
  }
  const double scale = dot / two_m;
  for (NodeId u = 0; u < g.n; ++u) {
    out.y[u] -= std::sqrt(static_cast<double>(g.degree(u))) * scale;
  }
  return out;
}

}  // namespace rwc
