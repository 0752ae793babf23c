#pragma once

#include <algorithm>
#include <charconv>
#include <istream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rwc/common.hpp"
#include "rwc/rng.hpp"

namespace rwc {

// Immutable simple undirected graph in CSR form. Nodes are densely indexed;
// `labels` maps each dense index back to the label it carried in the input.
// Construction is single-threaded; afterwards the structure is safe for
// concurrent reads.
struct Graph {
  int64_t n = 0;
  int64_t m = 0;                  // undirected edge count
  std::vector<int64_t> offsets;   // size n + 1
  std::vector<NodeId> adj;        // size 2m, each row sorted ascending
  std::vector<int64_t> labels;    // dense index -> original label
  bool bipartite = false;

  int64_t degree(NodeId u) const { return offsets[u + 1] - offsets[u]; }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {adj.data() + offsets[u],
            static_cast<std::size_t>(offsets[u + 1] - offsets[u])};
  }

  int64_t degree_sum() const { return 2 * m; }
};

struct LoadStats {
  int64_t lines = 0;
  int64_t comment_lines = 0;
  int64_t self_loops_dropped = 0;
  int64_t duplicate_edges_dropped = 0;
};

struct LoadResult {
  Graph graph;
  LoadStats stats;
};

namespace detail {

inline bool two_color_bipartite(const Graph& g) {
  std::vector<signed char> color(static_cast<std::size_t>(g.n), -1);
  std::vector<NodeId> queue;
  for (NodeId s = 0; s < g.n; ++s) {
    if (color[s] != -1) continue;
    color[s] = 0;
    queue.assign(1, s);
    while (!queue.empty()) {
      NodeId u = queue.back();
      queue.pop_back();
      for (NodeId w : g.neighbors(u)) {
        if (color[w] == -1) {
          color[w] = static_cast<signed char>(1 - color[u]);
          queue.push_back(w);
        } else if (color[w] == color[u]) {
          return false;
        }
      }
    }
  }
  return true;
}

// Assembles CSR from a deduplicated list of undirected edges over dense ids.
inline Graph assemble(int64_t n, const std::vector<std::pair<NodeId, NodeId>>& edges,
                      std::vector<int64_t> labels) {
  Graph g;
  g.n = n;
  g.m = static_cast<int64_t>(edges.size());
  g.labels = std::move(labels);
  g.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& [a, b] : edges) {
    ++g.offsets[static_cast<std::size_t>(a) + 1];
    ++g.offsets[static_cast<std::size_t>(b) + 1];
  }
  for (std::size_t i = 1; i < g.offsets.size(); ++i) g.offsets[i] += g.offsets[i - 1];
  g.adj.resize(static_cast<std::size_t>(2) * g.m);
  std::vector<int64_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
  for (const auto& [a, b] : edges) {
    g.adj[static_cast<std::size_t>(cursor[a]++)] = b;
    g.adj[static_cast<std::size_t>(cursor[b]++)] = a;
  }
  for (NodeId u = 0; u < n; ++u) {
    std::sort(g.adj.begin() + g.offsets[u], g.adj.begin() + g.offsets[u + 1]);
  }
  g.bipartite = two_color_bipartite(g);
  return g;
}

}  // namespace detail

// Builds a graph from raw label pairs: symmetrizes, drops self-loops and
// duplicates, densely relabels by ascending label order. Stats are optional.
inline Graph build_graph(const std::vector<std::pair<int64_t, int64_t>>& raw_edges,
                         LoadStats* stats = nullptr) {
  std::vector<int64_t> labels;
  labels.reserve(raw_edges.size() * 2);
  for (const auto& [a, b] : raw_edges) {
    labels.push_back(a);
    labels.push_back(b);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  auto dense = [&labels](int64_t label) {
    return static_cast<NodeId>(std::lower_bound(labels.begin(), labels.end(), label) -
                               labels.begin());
  };

  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(raw_edges.size());
  int64_t self_loops = 0;
  for (const auto& [a, b] : raw_edges) {
    if (a == b) {
      ++self_loops;
      continue;
    }
    NodeId x = dense(a);
    NodeId y = dense(b);
    if (x > y) std::swap(x, y);
    edges.emplace_back(x, y);
  }
  std::sort(edges.begin(), edges.end());
  const auto unique_end = std::unique(edges.begin(), edges.end());
  const int64_t duplicates = static_cast<int64_t>(edges.end() - unique_end);
  edges.erase(unique_end, edges.end());
  if (stats) {
    stats->self_loops_dropped += self_loops;
    stats->duplicate_edges_dropped += duplicates;
  }
  const auto node_count = static_cast<int64_t>(labels.size());
  return detail::assemble(node_count, edges, std::move(labels));
}

// Parses whitespace-separated "u v" integer pairs, one edge per line.
// Lines whose first non-blank character is '#' are comments; blank lines are
// ignored. Labels must be non-negative integers. Malformed lines raise
// InputError naming the 1-based line number.
inline LoadResult load_edge_list(std::istream& in) {
  std::string text(std::istreambuf_iterator<char>(in), {});
  LoadResult out;
  std::vector<std::pair<int64_t, int64_t>> raw;

  const char* p = text.data();
  const char* end = p + text.size();
  int64_t line_no = 0;
  while (p < end) {
    ++line_no;
    const char* line_end = p;
    while (line_end < end && *line_end != '\n') ++line_end;
    const char* q = p;
    const char* qe = line_end;
    if (qe > q && qe[-1] == '\r') --qe;
    while (q < qe && (*q == ' ' || *q == '\t')) ++q;
    ++out.stats.lines;
    if (q == qe) {
      p = line_end + 1;
      continue;
    }
    if (*q == '#') {
      ++out.stats.comment_lines;
      p = line_end + 1;
      continue;
    }
    int64_t values[2];
    for (int t = 0; t < 2; ++t) {
      while (q < qe && (*q == ' ' || *q == '\t')) ++q;
      const char* tok = q;
      while (q < qe && *q != ' ' && *q != '\t') ++q;
      auto [ptr, ec] = std::from_chars(tok, q, values[t]);
      if (ec != std::errc{} || ptr != q || tok == q || values[t] < 0) {
        throw InputError("line " + std::to_string(line_no) +
                         ": expected two non-negative integers");
      }
    }
    while (q < qe && (*q == ' ' || *q == '\t')) ++q;
    if (q != qe) {
      throw InputError("line " + std::to_string(line_no) +
                       ": trailing characters after the node pair");
    }
    raw.emplace_back(values[0], values[1]);
    p = line_end + 1;
  }

  if (raw.empty()) throw InputError("edge list contains no edges");
  out.graph = build_graph(raw, &out.stats);
  return out;
}

struct LccResult {
  Graph graph;
  std::vector<NodeId> index_map;  // new dense index -> index in the input graph
};

// Induced subgraph on the largest connected component, densely relabeled with
// relative order preserved. Ties in component size go to the component that
// contains the smallest original label (labels are sorted ascending, so that
// is the component discovered first). Idempotent on connected graphs.
inline LccResult largest_connected_component(const Graph& g) {
  std::vector<NodeId> component(static_cast<std::size_t>(g.n), -1);
  std::vector<NodeId> stack;
  NodeId component_count = 0;
  NodeId best = 0;
  int64_t best_size = -1;
  for (NodeId s = 0; s < g.n; ++s) {
    if (component[s] != -1) continue;
    int64_t size = 0;
    stack.assign(1, s);
    component[s] = component_count;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      ++size;
      for (NodeId w : g.neighbors(u)) {
        if (component[w] == -1) {
          component[w] = component_count;
          stack.push_back(w);
        }
      }
    }
    if (size > best_size) {
      best_size = size;
      best = component_count;
    }
    ++component_count;
  }

  LccResult out;
  out.index_map.reserve(static_cast<std::size_t>(best_size));
  std::vector<NodeId> to_new(static_cast<std::size_t>(g.n), -1);
  for (NodeId u = 0; u < g.n; ++u) {
    if (component[u] == best) {
      to_new[u] = static_cast<NodeId>(out.index_map.size());
      out.index_map.push_back(u);
    }
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<int64_t> labels(out.index_map.size());
  for (std::size_t i = 0; i < out.index_map.size(); ++i) {
    NodeId old = out.index_map[i];
    labels[i] = g.labels.empty() ? old : g.labels[old];
    for (NodeId w : g.neighbors(old)) {
      if (old < w && component[w] == best) {
        edges.emplace_back(static_cast<NodeId>(i), to_new[w]);
      }
    }
  }
  out.graph = detail::assemble(best_size, edges, std::move(labels));
  return out;
}

inline bool is_connected(const Graph& g) {
  if (g.n == 0) return false;
  std::vector<char> seen(static_cast<std::size_t>(g.n), 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  int64_t count = 0;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    ++count;
    for (NodeId w : g.neighbors(u)) {
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return count == g.n;
}

// Stationary distribution of the standard random walk: pi_u = d_u / (2m).
inline std::vector<double> stationary_distribution(const Graph& g) {
  std::vector<double> pi(static_cast<std::size_t>(g.n));
  const double inv_2m = 1.0 / static_cast<double>(g.degree_sum());
  for (NodeId u = 0; u < g.n; ++u) {
    pi[u] = static_cast<double>(g.degree(u)) * inv_2m;
  }
  return pi;
}

// Highest-degree node, ties broken by smallest index.
inline NodeId max_degree_node(const Graph& g) {
  NodeId best = 0;
  int64_t best_degree = -1;
  for (NodeId u = 0; u < g.n; ++u) {
    if (g.degree(u) > best_degree) {
      best_degree = g.degree(u);
      best = u;
    }
  }
  return best;
}

inline int64_t max_degree(const Graph& g) { return g.degree(max_degree_node(g)); }

inline NodeId random_neighbor(const Graph& g, NodeId u, Xoshiro256& rng) {
  const int64_t d = g.degree(u);
  if (d == 0) throw Error("random_neighbor: node has no neighbors");
  return g.adj[static_cast<std::size_t>(g.offsets[u] +
                                        static_cast<int64_t>(rng.below(static_cast<uint64_t>(d))))];
}

}  // namespace rwc
