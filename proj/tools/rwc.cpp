// Command line front end: compute centrality scores with one engine, compare
// engines against a reference, or sweep fastchol parameters over a grid.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "rwc/cli.hpp"

namespace {

struct CommonArgs {
  std::string input;
  std::string output;
  std::string format = "csv";
  std::string labels_out;
  int64_t dense_cap = rwc::kDefaultDenseCap;
  double timeout = 3600;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--input", args.input, "edge list file (one 'u v' pair per line)")
      ->required();
  cmd->add_option("--output", args.output, "output file (default stdout)");
  cmd->add_option("--format", args.format, "output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--labels-out", args.labels_out,
                  "also write the dense-index to original-label map as CSV");
  cmd->add_option("--dense-cap", args.dense_cap, "node limit for dense reference computations");
  cmd->add_option("--timeout", args.timeout, "per-run time limit in seconds");
}

rwc::LoadedGraph load_and_report(const CommonArgs& args) {
  rwc::LoadedGraph lg = rwc::load_input(args.input);
  if (lg.nodes_dropped > 0) {
    std::cerr << "note: kept largest connected component, dropped " << lg.nodes_dropped
              << " nodes\n";
  }
  if (lg.stats.self_loops_dropped > 0 || lg.stats.duplicate_edges_dropped > 0) {
    std::cerr << "note: dropped " << lg.stats.self_loops_dropped << " self loops and "
              << lg.stats.duplicate_edges_dropped << " duplicate edges\n";
  }
  if (lg.graph.bipartite) {
    std::cerr << "warning: graph is bipartite; the random walk is periodic and hitting-time "
                 "scores should be interpreted with care\n";
  }
  if (!args.labels_out.empty()) {
    std::ofstream out(args.labels_out, std::ios::binary);
    if (!out) throw rwc::InputError("cannot open labels output file '" + args.labels_out + "'");
    out << "index,label\n";
    for (std::size_t i = 0; i < lg.graph.labels.size(); ++i) {
      out << i << ',' << lg.graph.labels[i] << '\n';
    }
  }
  return lg;
}

void write_text(const CommonArgs& args, const std::string& text) {
  if (args.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(args.output, std::ios::binary);
  if (!out) throw rwc::InputError("cannot open output file '" + args.output + "'");
  out << text;
}

std::string error_code(const std::exception& e) {
  if (dynamic_cast<const rwc::CapExceededError*>(&e)) return "cap_exceeded";
  if (dynamic_cast<const rwc::DeadlineError*>(&e)) return "deadline";
  if (dynamic_cast<const rwc::InputError*>(&e)) return "input";
  if (dynamic_cast<const rwc::SolverError*>(&e)) return "solver";
  if (dynamic_cast<const rwc::FactorError*>(&e)) return "factor";
  if (dynamic_cast<const rwc::Error*>(&e)) return "error";
  return "internal";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random walk centrality toolkit"};
  app.require_subcommand(1);

  // compute
  CommonArgs compute_args;
  rwc::RunConfig cfg;
  std::string engine_name = "exact";
  CLI::App* compute = app.add_subcommand("compute", "compute scores with one engine");
  add_common(compute, compute_args);
  compute->add_option("--engine", engine_name, "exact, apprwc, fastchol, or fastwalk")
      ->check(CLI::IsMember({"exact", "apprwc", "fastchol", "fastwalk"}));
  compute->add_option("--epsilon", cfg.epsilon, "target accuracy for approximate engines");
  compute->add_option("--pivot", cfg.pivot_label,
                      "pivot node label (default: a maximum-degree node)");
  compute->add_option("--seed", cfg.seed, "random seed (fastwalk)");
  compute->add_option("--delta", cfg.delta, "factor drop tolerance (fastchol)");
  compute->add_option("--eps-p", cfg.eps_p, "column mass budget for sparsification (fastchol)");
  compute->add_option("--window", cfg.window, "base window size, 0 = auto (fastchol)");
  compute->add_option("--zeta", cfg.zeta, "sparsification trigger, 0 = auto (fastchol)");
  compute->add_flag("--use-rcm", cfg.use_rcm, "reorder by reverse Cuthill-McKee (fastchol)");
  compute->add_option("--parallel-samples", cfg.workers, "sampling worker threads (fastwalk)");

  // compare
  CommonArgs compare_args;
  rwc::CompareSpec compare_spec;
  std::vector<std::string> engine_names = {"apprwc", "fastchol", "fastwalk"};
  CLI::App* compare = app.add_subcommand("compare", "benchmark engines against a reference");
  add_common(compare, compare_args);
  compare->add_option("--engines", engine_names, "engines to benchmark")->delimiter(',');
  compare->add_option("--seeds", compare_spec.seeds, "seeds, one benchmark row each")
      ->delimiter(',');
  compare->add_option("--epsilon", compare_spec.epsilon, "target accuracy");
  compare->add_option("--pivot", compare_spec.pivot_label, "pivot node label");
  compare->add_option("--delta", compare_spec.delta, "factor drop tolerance (fastchol)");
  compare->add_option("--eps-p", compare_spec.eps_p, "column mass budget (fastchol)");
  compare->add_option("--window", compare_spec.window, "base window size, 0 = auto (fastchol)");
  compare->add_option("--zeta", compare_spec.zeta, "sparsification trigger, 0 = auto (fastchol)");
  compare->add_flag("--use-rcm", compare_spec.use_rcm, "reorder by reverse Cuthill-McKee");
  compare->add_option("--parallel-samples", compare_spec.workers, "sampling worker threads");

  // sweep
  CommonArgs sweep_args;
  rwc::SweepSpec sweep_spec;
  CLI::App* sweep = app.add_subcommand("sweep", "sweep fastchol parameters over a grid");
  add_common(sweep, sweep_args);
  sweep->add_option("--window", sweep_spec.windows, "window sizes to sweep")->delimiter(',');
  sweep->add_option("--delta", sweep_spec.deltas, "drop tolerances to sweep")->delimiter(',');
  sweep->add_option("--eps-p", sweep_spec.eps_ps, "column mass budgets to sweep")->delimiter(',');
  sweep->add_option("--epsilon", sweep_spec.epsilon, "target accuracy for the solver parameter");
  sweep->add_option("--pivot", sweep_spec.pivot_label, "pivot node label");
  sweep->add_flag("--use-rcm", sweep_spec.use_rcm, "reorder by reverse Cuthill-McKee");

  CLI11_PARSE(app, argc, argv);

  try {
    if (compute->parsed()) {
      cfg.engine = rwc::engine_from_string(engine_name);
      cfg.dense_cap = compute_args.dense_cap;
      cfg.row_timeout_seconds = compute_args.timeout;
      cfg.format = rwc::format_from_string(compute_args.format);
      const rwc::LoadedGraph lg = load_and_report(compute_args);
      const rwc::CentralityResult result = rwc::run_engine(lg.graph, cfg);
      if (cfg.format == rwc::OutputFormat::json) {
        write_text(compute_args, rwc::to_json(result, lg.graph.labels).dump(2) + "\n");
      } else {
        std::ostringstream os;
        rwc::write_csv(os, result, lg.graph.labels);
        write_text(compute_args, os.str());
      }
    } else if (compare->parsed()) {
      compare_spec.engines.clear();
      for (const std::string& name : engine_names) {
        compare_spec.engines.push_back(rwc::engine_from_string(name));
      }
      compare_spec.dense_cap = compare_args.dense_cap;
      compare_spec.row_timeout_seconds = compare_args.timeout;
      const rwc::LoadedGraph lg = load_and_report(compare_args);
      const rwc::BenchReport report = rwc::run_compare(lg.graph, compare_spec);
      if (rwc::format_from_string(compare_args.format) == rwc::OutputFormat::json) {
        write_text(compare_args, rwc::to_json(report).dump(2) + "\n");
      } else {
        std::ostringstream os;
        rwc::write_csv(os, report);
        write_text(compare_args, os.str());
      }
    } else if (sweep->parsed()) {
      sweep_spec.dense_cap = sweep_args.dense_cap;
      sweep_spec.row_timeout_seconds = sweep_args.timeout;
      const rwc::LoadedGraph lg = load_and_report(sweep_args);
      const rwc::SweepReport report = rwc::run_sweep(lg.graph, sweep_spec);
      if (rwc::format_from_string(sweep_args.format) == rwc::OutputFormat::json) {
        write_text(sweep_args, rwc::to_json(report).dump(2) + "\n");
      } else {
        std::ostringstream os;
        rwc::write_csv(os, report);
        write_text(sweep_args, os.str());
      }
    }
  } catch (const std::exception& e) {
    nlohmann::ordered_json err;
    err["error"] = e.what();
    err["code"] = error_code(e);
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
