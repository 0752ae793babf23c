#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rwc/common.hpp"
#include "rwc/exact.hpp"
#include "rwc/graph.hpp"
#include "rwc/linalg.hpp"
#include "rwc/result.hpp"

namespace rwc {

enum class DiagProvenance { exact, fastchol, fastwalk };

inline const char* to_string(DiagProvenance p) {
  switch (p) {
    case DiagProvenance::exact: return "exact";
    case DiagProvenance::fastchol: return "fastchol";
    case DiagProvenance::fastwalk: return "fastwalk";
  }
  return "unknown";
}

// Estimated diagonal of the inverse of the pivot-removed normalized
// Laplacian, in submatrix order (dense node order with the pivot skipped).
struct DiagEstimates {
  std::vector<double> values;
  NodeId pivot = -1;
  DiagProvenance provenance = DiagProvenance::exact;
};

inline DiagEstimates exact_diag_estimates(const Graph& g, NodeId v,
                                          int64_t cap = kDefaultDenseCap) {
  DiagEstimates d;
  d.values = exact_diag_Lv_inv(g, v, cap);
  d.pivot = v;
  d.provenance = DiagProvenance::exact;
  return d;
}

// Centrality score from the pivot reformulation:
//   H_u = (1/pi_u) (diag_u - (d_u/d_v) y_v + 2 sqrt(d_u/d_v) y_u)
// where y is the pivot column of the normalized pseudo-inverse. Passing
// diag_u = 0 with u = v yields the pivot's own score y_v / pi_v.
inline double assemble_score(double pi_u, double d_u, double d_v, double diag_u,
                             double y_v, double y_u) {
  const double ratio = d_u / d_v;
  return (diag_u - ratio * y_v + 2.0 * std::sqrt(ratio) * y_u) / pi_u;
}

struct AppRwcOptions {
  double clamp_floor = 1.0;  // replacement value for negative assembled scores
  SolverOptions solver;
};

// Assembles centrality for every node from one pivot column (a single
// Laplacian solve) plus supplied diagonal estimates. Negative assembled
// scores, which can arise under loose approximations, are clamped to the
// floor and counted.
inline CentralityResult app_rwc(const Graph& g, NodeId v, double theta,
                                const DiagEstimates& diag,
                                const AppRwcOptions& opts = {}) {
  if (diag.pivot != v) {
    throw Error("app_rwc: diagonal estimates were built for pivot " +
                std::to_string(diag.pivot) + ", not " + std::to_string(v));
  }
  if (static_cast<int64_t>(diag.values.size()) != g.n - 1) {
    throw Error("app_rwc: diagonal estimate length must be n - 1");
  }
  Stopwatch clock;
  const BridgeResult bridge = bridge_vector(g, v, theta, opts.solver);
  const std::vector<double> pi = stationary_distribution(g);
  const double d_v = static_cast<double>(g.degree(v));
  const double y_v = bridge.y[static_cast<std::size_t>(v)];

  CentralityResult out;
  out.engine = "apprwc";
  out.scores.resize(static_cast<std::size_t>(g.n));
  std::size_t sub_index = 0;
  for (NodeId u = 0; u < g.n; ++u) {
    const double diag_u = (u == v) ? 0.0 : diag.values[sub_index++];
    double score = assemble_score(pi[u], static_cast<double>(g.degree(u)), d_v,
                                  diag_u, y_v, bridge.y[static_cast<std::size_t>(u)]);
    if (score < 0) {
      score = opts.clamp_floor;
      ++out.clamped_count;
    }
    out.scores[u] = score;
  }
  out.params = {{"pivot", v},
                {"pivot_label", g.labels[static_cast<std::size_t>(v)]},
                {"theta", theta},
                {"theta_used", bridge.report.theta_used},
                {"theta_clamped", bridge.report.theta_clamped},
                {"solver_iterations", bridge.report.iterations},
                {"solver_residual", bridge.report.residual},
                {"diag_provenance", to_string(diag.provenance)},
                {"clamp_floor", opts.clamp_floor}};
  out.elapsed_seconds = clock.seconds();
  return out;
}

}  // namespace rwc
