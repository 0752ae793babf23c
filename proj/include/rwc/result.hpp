#pragma once

#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "rwc/common.hpp"
#include "rwc/graph.hpp"

namespace rwc {

// Per-node centrality scores plus enough metadata to reproduce the run.
// Scores are expected hitting-step counts: smaller means more central.
struct CentralityResult {
  std::vector<double> scores;       // indexed by dense node id
  std::string engine;
  nlohmann::ordered_json params;    // engine parameters and run statistics
  double elapsed_seconds = 0;
  int64_t clamped_count = 0;        // nodes whose assembled score was clamped
};

// CSV with original node labels, deterministic formatting.
inline void write_csv(std::ostream& os, const CentralityResult& r,
                      const std::vector<int64_t>& labels) {
  os << "node,score\n";
  for (std::size_t u = 0; u < r.scores.size(); ++u) {
    const int64_t label = labels.empty() ? static_cast<int64_t>(u) : labels[u];
    os << label << ',' << format_double(r.scores[u]) << '\n';
  }
}

inline nlohmann::ordered_json to_json(const CentralityResult& r,
                                      const std::vector<int64_t>& labels) {
  nlohmann::ordered_json j;
  j["schema"] = "rwc-result/1";
  j["engine"] = r.engine;
  j["params"] = r.params;
  j["elapsed_seconds"] = r.elapsed_seconds;
  j["clamped_count"] = r.clamped_count;
  nlohmann::ordered_json scores = nlohmann::ordered_json::array();
  for (std::size_t u = 0; u < r.scores.size(); ++u) {
    const int64_t label = labels.empty() ? static_cast<int64_t>(u) : labels[u];
    scores.push_back({{"node", label}, {"score", r.scores[u]}});
  }
  j["scores"] = std::move(scores);
  return j;
}

}  // namespace rwc
