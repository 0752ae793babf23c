#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <vector>

#include "rwc/common.hpp"
#include "rwc/graph.hpp"
#include "rwc/linalg.hpp"
#include "rwc/result.hpp"

namespace rwc {

inline constexpr int64_t kDefaultDenseCap = 5000;

// Ground-truth random walk centrality for desk-scale graphs:
// H_u = (pseudo-inverse of the normalized Laplacian)_uu / pi_u.
inline CentralityResult exact_rwc(const Graph& g, int64_t cap = kDefaultDenseCap) {
  if (g.n > cap) {
    throw CapExceededError("exact_rwc: n = " + std::to_string(g.n) +
                           " exceeds the dense cap " + std::to_string(cap) +
                           "; use an approximate engine");
  }
  if (!is_connected(g)) throw Error("exact_rwc: graph must be connected");
  Stopwatch clock;
  const SparseSymMatrix norm_lap = normalized_laplacian(g);
  const std::vector<double> phi = normalized_null_vector(g);
  const Eigen::MatrixXd pinv = pinv_dense(norm_lap, PinvKind::normalized, &phi, cap);
  const std::vector<double> pi = stationary_distribution(g);

  CentralityResult out;
  out.engine = "exact";
  out.scores.resize(static_cast<std::size_t>(g.n));
  for (NodeId u = 0; u < g.n; ++u) out.scores[u] = pinv(u, u) / pi[u];
  out.params = {{"dense_cap", cap}};
  out.elapsed_seconds = clock.seconds();
  return out;
}

// Expected number of steps for a walk from i to first reach j, from the
// absorbing-chain system: (D - A) restricted to V \ {j} applied to h equals
// the degree vector.
inline double exact_hitting_time(const Graph& g, NodeId i, NodeId j,
                                 int64_t cap = kDefaultDenseCap) {
  if (g.n > cap) throw CapExceededError("exact_hitting_time: dense cap exceeded");
  if (i == j) throw Error("exact_hitting_time: endpoints must differ");
  if (!is_connected(g)) throw Error("exact_hitting_time: graph must be connected");

  const SparseSymMatrix L = laplacian(g);
  const SubmatrixResult sub = submatrix_remove(L, j);
  const int64_t ns = sub.matrix.n;
  Eigen::MatrixXd Lj = sub.matrix.to_dense();
  Eigen::VectorXd rhs(ns);
  for (int64_t k = 0; k < ns; ++k) {
    rhs(k) = static_cast<double>(g.degree(sub.index_map[static_cast<std::size_t>(k)]));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(Lj);
  if (llt.info() != Eigen::Success) throw Error("exact_hitting_time: factorization failed");
  const Eigen::VectorXd h = llt.solve(rhs);
  for (int64_t k = 0; k < ns; ++k) {
    if (sub.index_map[static_cast<std::size_t>(k)] == i) return h(k);
  }
  throw Error("exact_hitting_time: start node not found in the reduced system");
}

// Diagonal of the inverse of the normalized Laplacian with the pivot removed;
// equals the expected visit counts of walks trapped at v. Entries follow the
// submatrix index order (dense node order with v skipped).
inline std::vector<double> exact_diag_Lv_inv(const Graph& g, NodeId v,
                                             int64_t cap = kDefaultDenseCap) {
  if (g.n > cap) throw CapExceededError("exact_diag_Lv_inv: dense cap exceeded");
  if (!is_connected(g)) throw Error("exact_diag_Lv_inv: graph must be connected");
  const SparseSymMatrix norm_lap = normalized_laplacian(g);
  const SubmatrixResult sub = submatrix_remove(norm_lap, v);
  const int64_t ns = sub.matrix.n;
  Eigen::MatrixXd Lv = sub.matrix.to_dense();
  Eigen::LLT<Eigen::MatrixXd> llt(Lv);
  if (llt.info() != Eigen::Success) throw Error("exact_diag_Lv_inv: factorization failed");
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(ns, ns));
  std::vector<double> diag(static_cast<std::size_t>(ns));
  for (int64_t k = 0; k < ns; ++k) diag[static_cast<std::size_t>(k)] = inv(k, k);
  return diag;
}

}  // namespace rwc
