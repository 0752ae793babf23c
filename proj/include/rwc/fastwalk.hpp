#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

#include "rwc/apprwc.hpp"
#include "rwc/common.hpp"
#include "rwc/graph.hpp"
#include "rwc/linalg.hpp"
#include "rwc/result.hpp"
#include "rwc/rng.hpp"

namespace rwc {

// Symmetric similarity transform of the pivot-removed walk matrix: entry
// (i, j) is 1 / sqrt(d_i d_j) for every edge of G between non-pivot nodes,
// with degrees taken from the full graph. Its spectral radius equals that of
// the substochastic transition matrix restricted to the non-pivot nodes.
inline SparseSymMatrix pivot_removed_walk_matrix(const Graph& g, NodeId v) {
  const int64_t n = g.n;
  if (v < 0 || v >= n) throw InputError("pivot_removed_walk_matrix: pivot out of range");
  std::vector<NodeId> dense(static_cast<std::size_t>(n), -1);
  NodeId next_id = 0;
  for (NodeId u = 0; u < n; ++u) {
    if (u != v) dense[static_cast<std::size_t>(u)] = next_id++;
  }
  SparseSymMatrix M;
  M.n = n - 1;
  M.row_ptr.assign(static_cast<std::size_t>(n), 0);  // n - 1 rows + 1
  for (NodeId u = 0; u < n; ++u) {
    if (u == v) continue;
    int64_t count = 0;
    for (NodeId w : g.neighbors(u)) {
      if (w != v) ++count;
    }
    M.row_ptr[static_cast<std::size_t>(dense[static_cast<std::size_t>(u)]) + 1] = count;
  }
  for (std::size_t i = 1; i < M.row_ptr.size(); ++i) M.row_ptr[i] += M.row_ptr[i - 1];
  M.col_idx.resize(static_cast<std::size_t>(M.row_ptr.back()));
  M.values.resize(M.col_idx.size());
  for (NodeId u = 0; u < n; ++u) {
    if (u == v) continue;
    const double du = static_cast<double>(g.degree(u));
    int64_t k = M.row_ptr[static_cast<std::size_t>(dense[static_cast<std::size_t>(u)])];
    for (NodeId w : g.neighbors(u)) {
      if (w == v) continue;
      M.col_idx[static_cast<std::size_t>(k)] = dense[static_cast<std::size_t>(w)];
      M.values[static_cast<std::size_t>(k)] =
          1.0 / std::sqrt(du * static_cast<double>(g.degree(w)));
      ++k;
    }
  }
  return M;
}

struct SpectralResult {
  double value = 0;
  int64_t iterations = 0;
  bool converged = false;
};

// Power iteration on M^2 from the all-ones direction, reading the radius off
// the Rayleigh quotient. Iterates stay entrywise non-negative, so a vanishing
// quotient certifies a zero matrix rather than an unlucky start.
inline SpectralResult spectral_radius_pivot_removed(const Graph& g, NodeId v, double tol = 1e-8,
                                                    int64_t max_iterations = 0) {
  const SparseSymMatrix M = pivot_removed_walk_matrix(g, v);
  const int64_t ns = M.n;
  SpectralResult out;
  if (ns <= 0 || M.nnz() == 0) {
    out.converged = true;
    return out;
  }
  if (max_iterations <= 0) max_iterations = std::max<int64_t>(100000, 100 * ns);
  std::vector<double> x(static_cast<std::size_t>(ns), 1.0 / std::sqrt(static_cast<double>(ns)));
  std::vector<double> y(static_cast<std::size_t>(ns));
  std::vector<double> z(static_cast<std::size_t>(ns));
  double prev = -1;
  for (int64_t it = 1; it <= max_iterations; ++it) {
    M.multiply(x, y);
    double rq = 0;
    for (double value : y) rq += value * value;
    out.iterations = it;
    if (rq == 0) {
      out.value = 0;
      out.converged = true;
      return out;
    }
    if (prev >= 0 && std::abs(rq - prev) <= tol * std::max(rq, tol)) {
      out.value = std::sqrt(rq);
      out.converged = true;
      return out;
    }
    prev = rq;
    M.multiply(y, z);
    double zn = 0;
    for (double value : z) zn += value * value;
    zn = std::sqrt(zn);
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] / zn;
  }
  out.value = std::sqrt(std::max(prev, 0.0));
  out.converged = false;
  return out;
}

struct SampleSizeInfo {
  bool lambda_degenerate = false;  // radius <= 0: walk lengths are deterministic
  bool lambda_unit = false;        // radius reached 1 numerically
  bool arg_degenerate = false;     // log argument >= 1: tail bound vacuous
  double log_argument = 0;
  int64_t fallback = 0;            // distribution-free budget ceil(2 eps^-2 log(2n))
};

// Number of spanning-tree samples for accuracy eps. The spectral tail bound
// prices a sample count through log(arg)^2 / log(lambda)^2; whenever that
// bound degenerates (radius 0 or 1, or argument at least 1) the
// distribution-free budget 2 eps^-2 log(2n) takes over, and a radius of zero
// needs only a single deterministic sample.
inline int64_t sample_size(int64_t n, int64_t m, double degree_norm, double lambda, double eps,
                           SampleSizeInfo* info = nullptr) {
  if (n < 2) throw InputError("sample_size: need at least two nodes");
  if (!(eps > 0) || !is_finite(eps)) throw InputError("sample_size: eps must be positive");
  SampleSizeInfo local;
  const double base = 2.0 / (eps * eps) * std::log(2.0 * static_cast<double>(n));
  local.fallback = static_cast<int64_t>(std::ceil(base));
  int64_t l = 0;
  if (lambda <= 0) {
    local.lambda_degenerate = true;
    l = 1;
  } else if (lambda >= 1) {
    local.lambda_unit = true;
    l = local.fallback;
  } else {
    const double arg = static_cast<double>(m) /
                           (static_cast<double>(n) * std::sqrt(static_cast<double>(n - 1))) *
                       degree_norm;
    local.log_argument = arg;
    if (arg >= 1) {
      local.arg_degenerate = true;
      l = local.fallback;
    } else {
      const double ratio = std::log(arg) / std::log(lambda);
      l = std::max<int64_t>(1, static_cast<int64_t>(std::ceil(base * ratio * ratio)));
    }
  }
  if (info) *info = local;
  return l;
}

// Solver accuracy parameter matching the sampling accuracy eps, given a
// diameter bound, the maximum degree, and the graph size.
inline double theta_for(double eps, int64_t diameter, int64_t d_max, int64_t m, int64_t n) {
  if (!(eps > 0)) throw InputError("theta_for: eps must be positive");
  if (diameter < 1 || d_max < 1 || m < 1 || n < 2) {
    throw InputError("theta_for: degenerate graph quantities");
  }
  const double dd = static_cast<double>(diameter);
  const double dm = static_cast<double>(d_max);
  const double paren = 1.0 + dm * (1.0 + static_cast<double>(n)) / (2.0 * static_cast<double>(m));
  return eps / (2.0 * dd * dm * paren * paren *
                std::sqrt(static_cast<double>(m) * static_cast<double>(n) * dd));
}

namespace detail {

inline int64_t bfs_eccentricity(const Graph& g, NodeId s, std::vector<int32_t>& dist,
                                std::vector<NodeId>& queue, NodeId* farthest = nullptr) {
  dist.assign(static_cast<std::size_t>(g.n), -1);
  queue.clear();
  queue.push_back(s);
  dist[static_cast<std::size_t>(s)] = 0;
  int64_t ecc = 0;
  NodeId far = s;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId u = queue[head];
    const int32_t du = dist[static_cast<std::size_t>(u)];
    if (du > ecc) {
      ecc = du;
      far = u;
    }
    for (NodeId w : g.neighbors(u)) {
      if (dist[static_cast<std::size_t>(w)] < 0) {
        dist[static_cast<std::size_t>(w)] = du + 1;
        queue.push_back(w);
      }
    }
  }
  if (farthest) *farthest = far;
  return ecc;
}

}  // namespace detail

struct DiameterEstimate {
  int64_t value = 0;
  bool exact = true;
};

// Exact diameter by all-pairs BFS up to the size limit; beyond it, a
// double-sweep upper bound: twice the smallest eccentricity seen across four
// sweeps, each restarted from the farthest node of the previous one. An
// over-estimate only tightens the downstream solver tolerance.
inline DiameterEstimate diameter_estimate(const Graph& g, int64_t exact_limit = 10000) {
  if (!is_connected(g)) throw Error("diameter_estimate: graph must be connected");
  DiameterEstimate out;
  std::vector<int32_t> dist;
  std::vector<NodeId> queue;
  queue.reserve(static_cast<std::size_t>(g.n));
  if (g.n <= exact_limit) {
    int64_t best = 0;
    for (NodeId s = 0; s < g.n; ++s) {
      best = std::max(best, detail::bfs_eccentricity(g, s, dist, queue));
    }
    out.value = best;
    out.exact = true;
    return out;
  }
  NodeId start = 0;
  int64_t min_ecc = std::numeric_limits<int64_t>::max();
  for (int sweep = 0; sweep < 4; ++sweep) {
    NodeId far = start;
    const int64_t ecc = detail::bfs_eccentricity(g, start, dist, queue, &far);
    min_ecc = std::min(min_ecc, ecc);
    start = far;
  }
  out.value = 2 * min_ecc;
  out.exact = false;
  return out;
}

struct WilsonScratch {
  std::vector<int64_t> visits;
  std::vector<NodeId> next;
  std::vector<int64_t> stamp;
  int64_t epoch = 0;

  void reset(int64_t n) {
    visits.assign(static_cast<std::size_t>(n), 0);
    next.assign(static_cast<std::size_t>(n), -1);
    stamp.assign(static_cast<std::size_t>(n), -1);
    epoch = 0;
  }
};

// One rooted spanning tree by loop-erased random walks, counting visits as
// the walks go: one count when a segment starts at a fresh node, one per step
// destination, minus one when a segment hits the existing tree. The root
// therefore nets zero and every other node retains at least one visit.
// Returns the number of walk steps taken.
inline int64_t wilson_sample(const Graph& g, NodeId root, Xoshiro256& rng, WilsonScratch& s,
                             int64_t step_cap = 1'000'000'000) {
  const int64_t n = g.n;
  if (root < 0 || root >= n) throw InputError("wilson_sample: root out of range");
  if (static_cast<int64_t>(s.visits.size()) != n) s.reset(n);
  std::fill(s.visits.begin(), s.visits.end(), 0);
  ++s.epoch;
  s.stamp[static_cast<std::size_t>(root)] = s.epoch;
  const auto in_tree = [&](NodeId u) { return s.stamp[static_cast<std::size_t>(u)] == s.epoch; };
  int64_t steps = 0;
  for (NodeId u = 0; u < n; ++u) {
    if (in_tree(u)) continue;
    NodeId cur = u;
    ++s.visits[static_cast<std::size_t>(u)];
    while (!in_tree(cur)) {
      const NodeId nxt = random_neighbor(g, cur, rng);
      if (++steps > step_cap) {
        throw CapExceededError("wilson_sample: step cap exceeded; graph may mix too slowly");
      }
      s.next[static_cast<std::size_t>(cur)] = nxt;
      ++s.visits[static_cast<std::size_t>(nxt)];
      cur = nxt;
    }
    --s.visits[static_cast<std::size_t>(cur)];
    for (NodeId w = u; !in_tree(w); w = s.next[static_cast<std::size_t>(w)]) {
      s.stamp[static_cast<std::size_t>(w)] = s.epoch;
    }
  }
  return steps;
}

namespace detail {

// Every non-root node must reach the root along next pointers that follow
// graph edges, within n hops.
inline bool tree_is_valid(const Graph& g, NodeId root, const WilsonScratch& s) {
  for (NodeId u = 0; u < g.n; ++u) {
    if (s.stamp[static_cast<std::size_t>(u)] != s.epoch) return false;
    if (u == root) continue;
    NodeId cur = u;
    int64_t hops = 0;
    while (cur != root) {
      const NodeId nx = s.next[static_cast<std::size_t>(cur)];
      const auto nb = g.neighbors(cur);
      if (!std::binary_search(nb.begin(), nb.end(), nx)) return false;
      cur = nx;
      if (++hops >= g.n) return false;
    }
  }
  return true;
}

}  // namespace detail

struct SamplePlan {
  int64_t l = 0;
  double lambda = 0;
  double t_cap = 0;            // informational spectral tail horizon
  double theta = 0;
  int64_t delta_estimate = 0;  // diameter bound used by theta
  bool delta_exact = true;
  SampleSizeInfo info;
  int64_t spectral_iterations = 0;
  bool spectral_converged = true;
};

inline double degree_norm_excluding(const Graph& g, NodeId v) {
  double acc = 0;
  for (NodeId u = 0; u < g.n; ++u) {
    if (u == v) continue;
    const double d = static_cast<double>(g.degree(u));
    acc += d * d;
  }
  return std::sqrt(acc);
}

inline SamplePlan plan_samples(const Graph& g, NodeId v, double eps, double spectral_tol = 1e-8) {
  if (!(eps > 0) || !is_finite(eps)) throw InputError("plan_samples: eps must be positive");
  SamplePlan plan;
  const SpectralResult spectral = spectral_radius_pivot_removed(g, v, spectral_tol);
  plan.lambda = spectral.value;
  plan.spectral_iterations = spectral.iterations;
  plan.spectral_converged = spectral.converged;
  const double d_norm = degree_norm_excluding(g, v);
  plan.l = sample_size(g.n, g.m, d_norm, plan.lambda, eps, &plan.info);
  const DiameterEstimate diam = diameter_estimate(g);
  plan.delta_estimate = diam.value;
  plan.delta_exact = diam.exact;
  plan.theta = theta_for(eps, diam.value, max_degree(g), g.m, g.n);
  if (plan.lambda > 0 && plan.lambda < 1 && d_norm > 0) {
    const double tail_arg = static_cast<double>(g.m) /
                            (static_cast<double>(g.n) *
                             std::sqrt(static_cast<double>(g.n - 1)) * d_norm);
    plan.t_cap = std::log(tail_arg) / std::log(plan.lambda);
  } else {
    plan.t_cap = std::numeric_limits<double>::quiet_NaN();
  }
  return plan;
}

struct FastWalkOptions {
  std::uint64_t seed = 1;
  NodeId pivot = -1;  // negative selects the maximum-degree node
  int workers = 1;
  int64_t step_cap = 1'000'000'000;
  double deadline_seconds = 0;
  double spectral_tol = 1e-8;
  int64_t sample_cap = 0;  // hard sampling budget; 0 picks 64x the planned floor
};

namespace detail {

struct WorkerOutput {
  std::vector<int64_t> visits;
  std::vector<int64_t> visits_sq;
  int64_t steps = 0;
  std::exception_ptr error;
};

}  // namespace detail

// Sampling engine: visit counts from l rooted spanning trees estimate the
// inverse diagonal, then assembly runs through the pivot column. Sample i
// always draws from the generator stream (seed, i), so results are identical
// for any worker count.
inline CentralityResult fastwalk(const Graph& g, double eps, const FastWalkOptions& opts = {}) {
  if (!(eps > 0) || !is_finite(eps)) throw InputError("fastwalk: eps must be positive");
  if (!is_connected(g)) throw Error("fastwalk: graph must be connected");
  if (g.n < 2) throw InputError("fastwalk: need at least two nodes");
  Stopwatch clock;
  const NodeId v = opts.pivot >= 0 ? opts.pivot : max_degree_node(g);
  if (v >= g.n) throw InputError("fastwalk: pivot out of range");
  const SamplePlan plan = plan_samples(g, v, eps, opts.spectral_tol);
  const double plan_seconds = clock.seconds();

  // The planned count is a floor, not the final word. The spectral sizing
  // degenerates on most connected graphs (its log argument crosses 1), and
  // the distribution-free budget it falls back to ignores per-node variance
  // entirely, undersizing low-conductance instances. Sampling therefore
  // continues in doubling rounds until the accumulated variance certifies
  // every node's half of the accuracy budget (4.5 sigma_u / sqrt(l) <= eps/2;
  // the other half belongs to the solver), or the hard cap is reached. Round
  // targets depend only on merged integer sums, so the schedule and the
  // result are identical for any worker count.
  const std::size_t nn = static_cast<std::size_t>(g.n);
  const int64_t cap = std::max<int64_t>(
      plan.l,
      opts.sample_cap > 0 ? opts.sample_cap : 64 * std::max<int64_t>(1, plan.info.fallback));
  std::vector<int64_t> visits(nn, 0);
  std::vector<int64_t> visits_sq(nn, 0);
  int64_t steps_total = 0;
  int64_t l_done = 0;
  int64_t target = plan.l;
  int64_t rounds = 0;
  bool capped = false;
  Stopwatch sampling_clock;

  while (true) {
    const int64_t block = target - l_done;
    const int worker_count =
        static_cast<int>(std::max<int64_t>(1, std::min<int64_t>(opts.workers, block)));
    std::vector<detail::WorkerOutput> outputs(static_cast<std::size_t>(worker_count));
    const auto run_block = [&](int w, int64_t lo, int64_t hi) {
      detail::WorkerOutput& out = outputs[static_cast<std::size_t>(w)];
      try {
        out.visits.assign(nn, 0);
        out.visits_sq.assign(nn, 0);
        WilsonScratch scratch;
        scratch.reset(g.n);
        for (int64_t s = lo; s < hi; ++s) {
          if (opts.deadline_seconds > 0 && sampling_clock.seconds() > opts.deadline_seconds) {
            throw DeadlineError("fastwalk: deadline exceeded during sampling");
          }
          Xoshiro256 rng(opts.seed, static_cast<std::uint64_t>(s));
          out.steps += wilson_sample(g, v, rng, scratch, opts.step_cap);
          for (std::size_t u = 0; u < nn; ++u) {
            const int64_t x = scratch.visits[u];
            out.visits[u] += x;
            out.visits_sq[u] += x * x;
          }
        }
      } catch (...) {
        out.error = std::current_exception();
      }
    };

    if (worker_count == 1) {
      run_block(0, l_done, target);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(static_cast<std::size_t>(worker_count));
      for (int w = 0; w < worker_count; ++w) {
        const int64_t lo = l_done + block * w / worker_count;
        const int64_t hi = l_done + block * (w + 1) / worker_count;
        threads.emplace_back(run_block, w, lo, hi);
      }
      for (auto& t : threads) t.join();
    }
    for (const auto& out : outputs) {
      if (out.error) std::rethrow_exception(out.error);
    }
    for (const auto& out : outputs) {
      for (std::size_t u = 0; u < nn; ++u) {
        visits[u] += out.visits[u];
        visits_sq[u] += out.visits_sq[u];
      }
      steps_total += out.steps;
    }
    l_done = target;
    ++rounds;

    if (plan.info.lambda_degenerate) break;  // deterministic walk lengths, one round suffices
    int64_t needed = 2;
    if (l_done >= 2) {
      needed = 1;
      const double scale = 9.0 / eps;  // (2 * 4.5 / eps)^2 * variance, below
      const double dl = static_cast<double>(l_done);
      for (std::size_t u = 0; u < nn; ++u) {
        if (u == static_cast<std::size_t>(v)) continue;
        const double sum = static_cast<double>(visits[u]);
        const double sq = static_cast<double>(visits_sq[u]);
        const double var = std::max(0.0, (sq - sum * sum / dl) / (dl - 1.0));
        const double want = std::ceil(scale * scale * var);
        if (want > static_cast<double>(needed)) {
          needed = static_cast<int64_t>(std::min(want, 9.0e18));
        }
      }
    }
    if (needed <= l_done) break;
    if (l_done >= cap) {
      capped = true;
      break;
    }
    target = std::min(cap, std::max(needed, 2 * l_done));
  }

  DiagEstimates diag;
  diag.pivot = v;
  diag.provenance = DiagProvenance::fastwalk;
  diag.values.resize(static_cast<std::size_t>(g.n - 1));
  for (NodeId u = 0; u < g.n; ++u) {
    if (u == v) continue;
    const NodeId at = u < v ? u : u - 1;
    diag.values[static_cast<std::size_t>(at)] =
        static_cast<double>(visits[static_cast<std::size_t>(u)]) / static_cast<double>(l_done);
  }
  const double sampling_seconds = clock.seconds() - plan_seconds;

  AppRwcOptions app_opts;
  app_opts.solver.deadline_seconds = opts.deadline_seconds;
  CentralityResult result = app_rwc(g, v, plan.theta, diag, app_opts);
  result.engine = "fastwalk";
  result.params["l"] = plan.l;
  result.params["l_used"] = l_done;
  result.params["sample_cap"] = cap;
  result.params["sampling_capped"] = capped;
  result.params["adaptive_rounds"] = rounds;
  result.params["lambda"] = plan.lambda;
  result.params["theta"] = plan.theta;
  result.params["delta_estimate"] = plan.delta_estimate;
  result.params["seed"] = opts.seed;
  result.params["delta_exact"] = plan.delta_exact;
  result.params["t_cap"] = plan.t_cap;
  result.params["lambda_degenerate"] = plan.info.lambda_degenerate;
  result.params["lambda_unit"] = plan.info.lambda_unit;
  result.params["arg_degenerate"] = plan.info.arg_degenerate;
  result.params["sample_fallback"] = plan.info.fallback;
  result.params["spectral_converged"] = plan.spectral_converged;
  result.params["steps_total"] = steps_total;
  result.params["workers"] = opts.workers;
  result.params["plan_seconds"] = plan_seconds;
  result.params["sampling_seconds"] = sampling_seconds;
  result.elapsed_seconds = clock.seconds();
  return result;
}

}  // namespace rwc
