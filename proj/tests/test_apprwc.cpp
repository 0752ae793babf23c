#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rwc/apprwc.hpp"
#include "rwc/exact.hpp"
#include "rwc/graph.hpp"
#include "support/generators.hpp"

using Catch::Approx;

TEST_CASE("score assembly algebra") {
  // Constructed so each term is distinguishable: pi = 1/4, d_u = 2, d_v = 8,
  // diag = 3, y_v = 0.5, y_u = 0.25.
  const double got = rwc::assemble_score(0.25, 2.0, 8.0, 3.0, 0.5, 0.25);
  // ratio = 1/4: 3 - 0.125 + 2 * 0.5 * 0.25 = 3.125; over pi -> 12.5.
  CHECK(got == Approx(12.5).epsilon(1e-15));

  // Pivot form: diag 0, u = v collapses to y_v / pi_v.
  CHECK(rwc::assemble_score(0.5, 8.0, 8.0, 0.0, 0.3, 0.3) ==
        Approx(0.3 / 0.5 * (2.0 - 1.0)).epsilon(1e-15));
}

TEST_CASE("pivot reformulation reproduces the exact scores") {
  for (int idx = 0; idx < 30; ++idx) {
    const rwc::Graph g = testgen::assorted_graph(idx);
    CAPTURE(idx, g.n, g.m);
    const rwc::NodeId v = rwc::max_degree_node(g);
    const rwc::CentralityResult exact = rwc::exact_rwc(g);
    const rwc::CentralityResult approx =
        rwc::app_rwc(g, v, 1e-9, rwc::exact_diag_estimates(g, v));
    REQUIRE(approx.scores.size() == exact.scores.size());
    for (rwc::NodeId u = 0; u < g.n; ++u) {
      CHECK(approx.scores[static_cast<std::size_t>(u)] ==
            Approx(exact.scores[static_cast<std::size_t>(u)]).epsilon(5e-6));
    }
    CHECK(approx.clamped_count == 0);
    CHECK(approx.engine == "apprwc");
  }
}

TEST_CASE("pivot choice does not change the assembled scores") {
  const rwc::Graph g = testgen::make_graph(testgen::two_triangles_edges());
  const rwc::CentralityResult exact = rwc::exact_rwc(g);
  for (rwc::NodeId v = 0; v < g.n; ++v) {
    const rwc::CentralityResult approx =
        rwc::app_rwc(g, v, 1e-9, rwc::exact_diag_estimates(g, v));
    for (rwc::NodeId u = 0; u < g.n; ++u) {
      CHECK(approx.scores[static_cast<std::size_t>(u)] ==
            Approx(exact.scores[static_cast<std::size_t>(u)]).epsilon(1e-6));
    }
  }
}

TEST_CASE("assembly spends exactly one Laplacian solve") {
  const rwc::Graph g = testgen::make_graph(testgen::ba_edges(60, 3, 5));
  const rwc::NodeId v = rwc::max_degree_node(g);
  const rwc::DiagEstimates diag = rwc::exact_diag_estimates(g, v);
  const int64_t before = rwc::detail::lap_solve_calls.load();
  rwc::app_rwc(g, v, 1e-7, diag);
  CHECK(rwc::detail::lap_solve_calls.load() == before + 1);
}

TEST_CASE("the path center survives assembly with full accuracy") {
  // The center of the three-node path has the smallest score in the suite
  // (0.5); a sign or scale slip in the bridge term shows up here first.
  const rwc::Graph g = testgen::make_graph(testgen::path_edges(3));
  const rwc::CentralityResult res =
      rwc::app_rwc(g, 1, 1e-10, rwc::exact_diag_estimates(g, 1));
  CHECK(res.scores[1] == Approx(0.5).epsilon(1e-7));
  CHECK(res.scores[0] == Approx(2.5).epsilon(1e-7));
  CHECK(res.scores[2] == Approx(2.5).epsilon(1e-7));
  CHECK(res.clamped_count == 0);
}

TEST_CASE("assembly validates its inputs") {
  const rwc::Graph g = testgen::make_graph(testgen::complete_edges(4));
  rwc::DiagEstimates diag = rwc::exact_diag_estimates(g, 0);

  SECTION("pivot mismatch") {
    CHECK_THROWS_AS(rwc::app_rwc(g, 1, 1e-6, diag), rwc::Error);
  }

  SECTION("wrong diagonal length") {
    diag.values.push_back(1.0);
    CHECK_THROWS_AS(rwc::app_rwc(g, 0, 1e-6, diag), rwc::Error);
  }

  SECTION("invalid tolerance") {
    const rwc::DiagEstimates ok = rwc::exact_diag_estimates(g, 0);
    CHECK_THROWS_AS(rwc::app_rwc(g, 0, 0.0, ok), rwc::Error);
  }
}

TEST_CASE("negative assembled scores are clamped to the floor and counted") {
  const rwc::Graph g = testgen::make_graph(testgen::path_edges(3));
  // Corrupt the diagonal so one assembled score lands below zero.
  rwc::DiagEstimates diag = rwc::exact_diag_estimates(g, 1);
  diag.values[0] = -50.0;
  const rwc::CentralityResult res = rwc::app_rwc(g, 1, 1e-9, diag);
  CHECK(res.clamped_count == 1);
  CHECK(res.scores[0] == 1.0);
  CHECK(res.scores[1] == Approx(0.5).epsilon(1e-7));

  rwc::AppRwcOptions opts;
  opts.clamp_floor = 7.5;
  const rwc::CentralityResult custom = rwc::app_rwc(g, 1, 1e-9, diag, opts);
  CHECK(custom.scores[0] == 7.5);
  CHECK(custom.params["clamp_floor"] == 7.5);
}

TEST_CASE("assembly records its run parameters") {
  const rwc::Graph g = testgen::make_graph(testgen::complete_edges(5));
  const rwc::CentralityResult res =
      rwc::app_rwc(g, 2, 1e-8, rwc::exact_diag_estimates(g, 2));
  CHECK(res.params["pivot"] == 2);
  CHECK(res.params["pivot_label"] == g.labels[2]);
  CHECK(res.params["theta"] == 1e-8);
  CHECK(res.params["diag_provenance"] == "exact");
  CHECK(res.params["theta_clamped"] == false);
  CHECK(res.params.contains("solver_iterations"));
  CHECK(res.params.contains("solver_residual"));
}
