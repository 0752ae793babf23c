#pragma once

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rwc/apprwc.hpp"
#include "rwc/common.hpp"
#include "rwc/exact.hpp"
#include "rwc/fastchol.hpp"
#include "rwc/fastwalk.hpp"
#include "rwc/graph.hpp"
#include "rwc/metrics.hpp"
#include "rwc/result.hpp"

namespace rwc {

enum class EngineKind { exact, apprwc, fastchol, fastwalk };

inline const char* to_string(EngineKind e) {
  switch (e) {
    case EngineKind::exact: return "exact";
    case EngineKind::apprwc: return "apprwc";
    case EngineKind::fastchol: return "fastchol";
    case EngineKind::fastwalk: return "fastwalk";
  }
  return "unknown";
}

inline EngineKind engine_from_string(const std::string& s) {
  if (s == "exact") return EngineKind::exact;
  if (s == "apprwc") return EngineKind::apprwc;
  if (s == "fastchol") return EngineKind::fastchol;
  if (s == "fastwalk") return EngineKind::fastwalk;
  throw InputError("unknown engine '" + s + "' (expected exact, apprwc, fastchol, fastwalk)");
}

enum class OutputFormat { csv, json };

inline OutputFormat format_from_string(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw InputError("unknown format '" + s + "' (expected csv or json)");
}

struct RunConfig {
  std::string input_path;
  EngineKind engine = EngineKind::exact;
  double epsilon = 0.1;
  double delta = 1e-4;
  double eps_p = 0.01;
  int64_t window = 0;
  int64_t zeta = 0;
  bool use_rcm = false;
  int64_t pivot_label = -1;  // original label; negative selects max degree
  std::uint64_t seed = 1;
  int64_t dense_cap = kDefaultDenseCap;
  int workers = 1;
  double row_timeout_seconds = 3600;
  OutputFormat format = OutputFormat::csv;
  std::string output_path;  // empty writes to stdout
};

struct LoadedGraph {
  Graph graph;  // largest connected component
  LoadStats stats;
  int64_t nodes_dropped = 0;  // nodes outside the component kept
};

inline LoadedGraph prepare_graph(std::istream& in) {
  LoadResult loaded = load_edge_list(in);
  LoadedGraph out;
  out.stats = loaded.stats;
  const int64_t full_n = loaded.graph.n;
  LccResult lcc = largest_connected_component(loaded.graph);
  out.nodes_dropped = full_n - lcc.graph.n;
  out.graph = std::move(lcc.graph);
  return out;
}

inline LoadedGraph load_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file '" + path + "'");
  return prepare_graph(in);
}

// Maps an original node label to its dense id; negative labels select the
// maximum-degree node.
inline NodeId resolve_pivot(const Graph& g, int64_t pivot_label) {
  if (pivot_label < 0) return max_degree_node(g);
  const auto it = std::lower_bound(g.labels.begin(), g.labels.end(), pivot_label);
  if (it == g.labels.end() || *it != pivot_label) {
    throw InputError("pivot label " + std::to_string(pivot_label) +
                     " is not a node of the graph's largest component");
  }
  return static_cast<NodeId>(it - g.labels.begin());
}

inline double resolve_theta(const Graph& g, double epsilon) {
  const DiameterEstimate diam = diameter_estimate(g);
  return theta_for(epsilon, diam.value, max_degree(g), g.m, g.n);
}

inline CentralityResult run_engine(const Graph& g, const RunConfig& cfg) {
  switch (cfg.engine) {
    case EngineKind::exact:
      return exact_rwc(g, cfg.dense_cap);
    case EngineKind::apprwc: {
      const NodeId v = resolve_pivot(g, cfg.pivot_label);
      const double theta = resolve_theta(g, cfg.epsilon);
      AppRwcOptions opts;
      opts.solver.deadline_seconds = cfg.row_timeout_seconds;
      CentralityResult r = app_rwc(g, v, theta, exact_diag_estimates(g, v, cfg.dense_cap), opts);
      r.params["epsilon"] = cfg.epsilon;
      return r;
    }
    case EngineKind::fastchol: {
      const NodeId v = resolve_pivot(g, cfg.pivot_label);
      FastCholParams params;
      params.delta = cfg.delta;
      params.eps_p = cfg.eps_p;
      params.window = cfg.window;
      params.zeta = cfg.zeta;
      params.use_rcm = cfg.use_rcm;
      params.theta = resolve_theta(g, cfg.epsilon);
      params.deadline_seconds = cfg.row_timeout_seconds;
      CentralityResult r = fastchol(g, v, params);
      r.params["epsilon"] = cfg.epsilon;
      return r;
    }
    case EngineKind::fastwalk: {
      FastWalkOptions opts;
      opts.seed = cfg.seed;
      opts.pivot = cfg.pivot_label < 0 ? NodeId{-1} : resolve_pivot(g, cfg.pivot_label);
      opts.workers = cfg.workers;
      opts.deadline_seconds = cfg.row_timeout_seconds;
      return fastwalk(g, cfg.epsilon, opts);
    }
  }
  throw Error("run_engine: unreachable engine kind");
}

// Process peak resident set size from /proc/self/status in kilobytes; a
// coarse high-water estimate shared by everything the process has done so
// far, not a per-row measurement. Returns 0 when unavailable.
inline int64_t peak_rss_kb() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream fields(line.substr(6));
      int64_t kb = 0;
      fields >> kb;
      return kb;
    }
  }
  return 0;
}

struct BenchRow {
  std::string engine;
  double epsilon = 0;
  std::uint64_t seed = 0;
  double seconds = 0;
  double mean_relative_error = 0;
  double kendall_tau = 0;
  int64_t peak_rss_kb = 0;
  std::string status = "ok";
};

struct BenchReport {
  std::string reference_engine;
  std::vector<BenchRow> rows;
};

// Reference scores for error metrics: the dense oracle when it fits, else
// the sampling engine at a much tighter accuracy than anything under test.
// The reference run stops at its planned sample floor instead of letting the
// variance-driven rounds chase 1e-4 certification, which would dwarf every
// engine under test; the row timeout is the only other guard.
inline CentralityResult reference_result(const Graph& g, int64_t dense_cap,
                                         double deadline_seconds = 0) {
  if (g.n <= dense_cap) return exact_rwc(g, dense_cap);
  FastWalkOptions opts;
  opts.seed = 0;
  opts.deadline_seconds = deadline_seconds;
  opts.sample_cap = 1;  // clamps to the planned floor
  return fastwalk(g, 1e-4, opts);
}

struct CompareSpec {
  std::vector<EngineKind> engines = {EngineKind::apprwc, EngineKind::fastchol,
                                     EngineKind::fastwalk};
  std::vector<std::uint64_t> seeds = {1};
  double epsilon = 0.1;
  double delta = 1e-4;
  double eps_p = 0.01;
  int64_t window = 0;
  int64_t zeta = 0;
  bool use_rcm = false;
  int64_t pivot_label = -1;
  int workers = 1;
  int64_t dense_cap = kDefaultDenseCap;
  double row_timeout_seconds = 3600;
};

inline BenchReport run_compare(const Graph& g, const CompareSpec& spec,
                               const CentralityResult* reference = nullptr) {
  BenchReport report;
  CentralityResult local_reference;
  if (reference == nullptr) {
    local_reference = reference_result(g, spec.dense_cap, spec.row_timeout_seconds);
    reference = &local_reference;
  }
  report.reference_engine = reference->engine;
  for (const EngineKind engine : spec.engines) {
    for (const std::uint64_t seed : spec.seeds) {
      BenchRow row;
      row.engine = to_string(engine);
      row.epsilon = spec.epsilon;
      row.seed = seed;
      try {
        RunConfig cfg;
        cfg.engine = engine;
        cfg.epsilon = spec.epsilon;
        cfg.delta = spec.delta;
        cfg.eps_p = spec.eps_p;
        cfg.window = spec.window;
        cfg.zeta = spec.zeta;
        cfg.use_rcm = spec.use_rcm;
        cfg.pivot_label = spec.pivot_label;
        cfg.seed = seed;
        cfg.workers = spec.workers;
        cfg.dense_cap = spec.dense_cap;
        cfg.row_timeout_seconds = spec.row_timeout_seconds;
        Stopwatch clock;
        const CentralityResult result = run_engine(g, cfg);
        row.seconds = clock.seconds();
        const RankingComparison cmp = compare_results(*reference, result);
        row.mean_relative_error = cmp.mean_relative_error;
        row.kendall_tau = cmp.kendall_tau;
      } catch (const std::exception& e) {
        row.status = std::string("failed: ") + e.what();
      }
      row.peak_rss_kb = peak_rss_kb();
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

struct SweepSpec {
  std::vector<int64_t> windows = {0};
  std::vector<double> deltas = {1e-4};
  std::vector<double> eps_ps = {0.01};
  double epsilon = 0.1;
  bool use_rcm = false;
  int64_t pivot_label = -1;
  int64_t dense_cap = kDefaultDenseCap;
  double row_timeout_seconds = 3600;
};

struct SweepRow {
  int64_t window = 0;
  double delta = 0;
  double eps_p = 0;
  double seconds = 0;
  double mean_relative_error = 0;
  double kendall_tau = 0;
  int64_t factor_nnz = 0;
  int64_t dropped_count = 0;
  std::string status = "ok";
};

struct SweepReport {
  std::string reference_engine;
  std::vector<SweepRow> rows;
};

// One fastchol run per grid point (window x delta x eps_p), in that nesting
// order. An empty axis yields an empty report.
inline SweepReport run_sweep(const Graph& g, const SweepSpec& spec,
                             const CentralityResult* reference = nullptr) {
  SweepReport report;
  if (spec.windows.empty() || spec.deltas.empty() || spec.eps_ps.empty()) return report;
  CentralityResult local_reference;
  if (reference == nullptr) {
    local_reference = reference_result(g, spec.dense_cap, spec.row_timeout_seconds);
    reference = &local_reference;
  }
  report.reference_engine = reference->engine;
  const NodeId v = resolve_pivot(g, spec.pivot_label);
  const double theta = resolve_theta(g, spec.epsilon);
  for (const int64_t window : spec.windows) {
    for (const double delta : spec.deltas) {
      for (const double eps_p : spec.eps_ps) {
        SweepRow row;
        row.window = window;
        row.delta = delta;
        row.eps_p = eps_p;
        try {
          FastCholParams params;
          params.delta = delta;
          params.eps_p = eps_p;
          params.window = window;
          params.theta = theta;
          params.use_rcm = spec.use_rcm;
          params.deadline_seconds = spec.row_timeout_seconds;
          Stopwatch clock;
          const CentralityResult result = fastchol(g, v, params);
          row.seconds = clock.seconds();
          const RankingComparison cmp = compare_results(*reference, result);
          row.mean_relative_error = cmp.mean_relative_error;
          row.kendall_tau = cmp.kendall_tau;
          row.factor_nnz = result.params.value("factor_nnz", int64_t{0});
          row.dropped_count = result.params.value("dropped_count", int64_t{0});
        } catch (const std::exception& e) {
          row.status = std::string("failed: ") + e.what();
        }
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

inline void write_csv(std::ostream& os, const BenchReport& report) {
  os << "engine,epsilon,seed,seconds,mean_relative_error,kendall_tau,peak_rss_kb_estimate,status\n";
  for (const BenchRow& r : report.rows) {
    os << r.engine << ',' << format_double(r.epsilon) << ',' << r.seed << ','
       << format_double(r.seconds) << ',' << format_double(r.mean_relative_error) << ','
       << format_double(r.kendall_tau) << ',' << r.peak_rss_kb << ',' << '"' << r.status << '"'
       << '\n';
  }
}

inline nlohmann::ordered_json to_json(const BenchReport& report) {
  nlohmann::ordered_json j;
  j["schema"] = "rwc-bench/1";
  j["mode"] = "compare";
  j["reference_engine"] = report.reference_engine;
  auto rows = nlohmann::ordered_json::array();
  for (const BenchRow& r : report.rows) {
    rows.push_back({{"engine", r.engine},
                    {"epsilon", r.epsilon},
                    {"seed", r.seed},
                    {"seconds", r.seconds},
                    {"mean_relative_error", r.mean_relative_error},
                    {"kendall_tau", r.kendall_tau},
                    {"peak_rss_kb_estimate", r.peak_rss_kb},
                    {"status", r.status}});
  }
  j["rows"] = std::move(rows);
  return j;
}

inline void write_csv(std::ostream& os, const SweepReport& report) {
  os << "window,delta,eps_p,seconds,mean_relative_error,kendall_tau,factor_nnz,dropped_count,"
        "status\n";
  for (const SweepRow& r : report.rows) {
    os << r.window << ',' << format_double(r.delta) << ',' << format_double(r.eps_p) << ','
       << format_double(r.seconds) << ',' << format_double(r.mean_relative_error) << ','
       << format_double(r.kendall_tau) << ',' << r.factor_nnz << ',' << r.dropped_count << ','
       << '"' << r.status << '"' << '\n';
  }
}

inline nlohmann::ordered_json to_json(const SweepReport& report) {
  nlohmann::ordered_json j;
  j["schema"] = "rwc-bench/1";
  j["mode"] = "sweep";
  j["reference_engine"] = report.reference_engine;
  auto rows = nlohmann::ordered_json::array();
  for (const SweepRow& r : report.rows) {
    rows.push_back({{"window", r.window},
                    {"delta", r.delta},
                    {"eps_p", r.eps_p},
                    {"seconds", r.seconds},
                    {"mean_relative_error", r.mean_relative_error},
                    {"kendall_tau", r.kendall_tau},
                    {"factor_nnz", r.factor_nnz},
                    {"dropped_count", r.dropped_count},
                    {"status", r.status}});
  }
  j["rows"] = std::move(rows);
  return j;
}

}  // namespace rwc
