#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "rwc/graph.hpp"
#include "rwc/linalg.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using Catch::Approx;

namespace {

double max_abs(const Eigen::MatrixXd& M) { return M.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("combinatorial Laplacian of the triangle") {
  const rwc::Graph g = testgen::make_graph(testgen::complete_edges(3));
  const Eigen::MatrixXd L = rwc::laplacian(g).to_dense();
  Eigen::MatrixXd want(3, 3);
  want << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  CHECK(max_abs(L - want) == 0.0);
}

TEST_CASE("normalized Laplacian entries and nullspace") {
  const rwc::Graph g = testgen::make_graph(testgen::path_edges(3));
  const Eigen::MatrixXd N = rwc::normalized_laplacian(g).to_dense();
  for (int i = 0; i < 3; ++i) CHECK(N(i, i) == Approx(1.0).epsilon(1e-15));
  CHECK(N(0, 1) == Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(N(0, 2) == 0.0);

  const std::vector<double> phi = rwc::normalized_null_vector(g);
  Eigen::VectorXd pv(3);
  for (int i = 0; i < 3; ++i) pv(i) = phi[static_cast<std::size_t>(i)];
  CHECK(pv.norm() == Approx(1.0).epsilon(1e-14));
  CHECK((N * pv).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("sparse matrix multiply matches the dense product") {
  const rwc::Graph g = testgen::make_graph(testgen::er_edges(37, 0.2, 3));
  const rwc::SparseSymMatrix L = rwc::laplacian(g);
  const Eigen::MatrixXd D = L.to_dense();
  rwc::Xoshiro256 rng(5);
  std::vector<double> x(static_cast<std::size_t>(g.n)), y(x.size());
  Eigen::VectorXd xe(g.n);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.unit() - 0.5;
    xe(static_cast<Eigen::Index>(i)) = x[i];
  }
  L.multiply(x, y);
  const Eigen::VectorXd ye = D * xe;
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(y[i] == Approx(ye(static_cast<Eigen::Index>(i))).margin(1e-12));
  }
  CHECK(L.nnz() == g.n + 2 * g.m);
  CHECK(L.frobenius_norm() == Approx(D.norm()).epsilon(1e-12));
}

TEST_CASE("pivot-removed principal submatrix") {
  const rwc::Graph g = testgen::make_graph(testgen::path_edges(3));
  const rwc::SparseSymMatrix N = rwc::normalized_laplacian(g);

  SECTION("removing the center decouples the leaves") {
    const rwc::SubmatrixResult sub = rwc::submatrix_remove(N, 1);
    CHECK(sub.index_map == std::vector<rwc::NodeId>{0, 2});
    const Eigen::MatrixXd D = sub.matrix.to_dense();
    CHECK(D(0, 0) == Approx(1.0));
    CHECK(D(1, 1) == Approx(1.0));
    CHECK(D(0, 1) == 0.0);
  }

  SECTION("removing a leaf keeps the remaining coupling") {
    const rwc::SubmatrixResult sub = rwc::submatrix_remove(N, 0);
    CHECK(sub.index_map == std::vector<rwc::NodeId>{1, 2});
    const Eigen::MatrixXd D = sub.matrix.to_dense();
    CHECK(D(0, 1) == Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
  }

  SECTION("random graph: entries match the dense slice") {
    const rwc::Graph h = testgen::make_graph(testgen::er_edges(25, 0.3, 8));
    const rwc::SparseSymMatrix M = rwc::normalized_laplacian(h);
    const Eigen::MatrixXd full = M.to_dense();
    const rwc::NodeId v = 7;
    const rwc::SubmatrixResult sub = rwc::submatrix_remove(M, v);
    const Eigen::MatrixXd D = sub.matrix.to_dense();
    REQUIRE(D.rows() == h.n - 1);
    for (Eigen::Index i = 0; i < D.rows(); ++i) {
      for (Eigen::Index j = 0; j < D.cols(); ++j) {
        CHECK(D(i, j) == full(sub.index_map[static_cast<std::size_t>(i)],
                              sub.index_map[static_cast<std::size_t>(j)]));
      }
    }
  }

  SECTION("dimension below two is rejected") {
    rwc::SparseSymMatrix tiny;
    tiny.n = 1;
    tiny.row_ptr = {0, 0};
    CHECK_THROWS_AS(rwc::submatrix_remove(tiny, 0), rwc::Error);
  }
}

TEST_CASE("dense pseudo-inverse satisfies the defining identities") {
  const rwc::Graph g = testgen::make_graph(testgen::ba_edges(40, 3, 17));
  const rwc::SparseSymMatrix Ls = rwc::laplacian(g);
  const Eigen::MatrixXd L = Ls.to_dense();
  const Eigen::MatrixXd P = rwc::pinv_dense(Ls, rwc::PinvKind::laplacian);

  CHECK(max_abs(L * P * L - L) < 1e-9);
  CHECK(max_abs(P * L * P - P) < 1e-9);
  CHECK(max_abs(P - P.transpose()) < 1e-12);
  CHECK((P * Eigen::VectorXd::Ones(g.n)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(max_abs(P - oracle::laplacian_pinv(g)) < 1e-9);
}

TEST_CASE("dense pseudo-inverse of the normalized Laplacian") {
  const rwc::Graph g = testgen::make_graph(testgen::two_triangles_edges());
  const rwc::SparseSymMatrix Ns = rwc::normalized_laplacian(g);
  const std::vector<double> phi = rwc::normalized_null_vector(g);
  const Eigen::MatrixXd P = rwc::pinv_dense(Ns, rwc::PinvKind::normalized, &phi);
  const Eigen::MatrixXd N = Ns.to_dense();
  CHECK(max_abs(N * P * N - N) < 1e-10);
  Eigen::VectorXd pv(g.n);
  for (rwc::NodeId u = 0; u < g.n; ++u) pv(u) = phi[static_cast<std::size_t>(u)];
  CHECK((P * pv).cwiseAbs().maxCoeff() < 1e-12);

  SECTION("normalized kind demands the null vector") {
    CHECK_THROWS_AS(rwc::pinv_dense(Ns, rwc::PinvKind::normalized), rwc::Error);
  }
}

TEST_CASE("dense pseudo-inverse refuses dimensions above the cap") {
  const rwc::Graph g = testgen::make_graph(testgen::cycle_edges(20));
  CHECK_THROWS_AS(rwc::pinv_dense(rwc::laplacian(g), rwc::PinvKind::laplacian, nullptr, 10),
                  rwc::CapExceededError);
}

TEST_CASE("Laplacian solver meets its residual contract") {
  const rwc::Graph g = testgen::make_graph(testgen::er_edges(80, 0.1, 21));
  const rwc::SparseSymMatrix L = rwc::laplacian(g);
  rwc::Xoshiro256 rng(2);
  std::vector<double> b(static_cast<std::size_t>(g.n));
  for (double& v : b) v = rng.unit() - 0.5;
  // Project onto the range of L so the system is consistent.
  double mean = 0;
  for (double v : b) mean += v;
  mean /= static_cast<double>(b.size());
  for (double& v : b) v -= mean;

  const double theta = 1e-6;
  const int64_t before = rwc::detail::lap_solve_calls.load();
  const rwc::SolveResult res = rwc::lap_solve(L, b, theta);
  CHECK(rwc::detail::lap_solve_calls.load() == before + 1);
  CHECK(res.report.converged);
  CHECK_FALSE(res.report.theta_clamped);
  CHECK_FALSE(res.report.b_projected);
  CHECK(res.report.theta_used == theta);

  // Independent residual check.
  std::vector<double> Lg(b.size());
  L.multiply(res.g, Lg);
  double num = 0, den = 0, xsum = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double d = Lg[i] - b[i];
    num += d * d;
    den += b[i] * b[i];
    xsum += res.g[i];
  }
  CHECK(std::sqrt(num / den) <= theta);
  CHECK(std::abs(xsum) < 1e-8);  // solution is mean-free
  CHECK(res.report.residual <= theta / 10.0 * (1.0 + 1e-9));
}

TEST_CASE("Laplacian solver clamps unattainable tolerances and reports it") {
  const rwc::Graph g = testgen::make_graph(testgen::complete_edges(6));
  std::vector<double> b(6, 0.0);
  b[0] = 1.0;
  b[5] = -1.0;
  const rwc::SolveResult res = rwc::lap_solve(rwc::laplacian(g), b, 1e-15);
  CHECK(res.report.theta_clamped);
  CHECK(res.report.theta_used == Approx(1e-9));
  CHECK(res.report.theta_requested == 1e-15);
  CHECK(res.report.converged);
}

TEST_CASE("Laplacian solver flags right-hand sides outside the range") {
  const rwc::Graph g = testgen::make_graph(testgen::cycle_edges(5));
  std::vector<double> b(5, 0.0);
  b[0] = 1.0;  // component sum 1, not orthogonal to ones
  const rwc::SolveResult res = rwc::lap_solve(rwc::laplacian(g), b, 1e-8);
  CHECK(res.report.b_projected);
  CHECK(res.report.converged);
}

TEST_CASE("Laplacian solver handles the zero right-hand side") {
  const rwc::Graph g = testgen::make_graph(testgen::path_edges(4));
  const rwc::SolveResult res = rwc::lap_solve(rwc::laplacian(g), std::vector<double>(4, 0.0), 1e-6);
  CHECK(res.report.converged);
  CHECK(res.report.iterations == 0);
  for (double v : res.g) CHECK(v == 0.0);
}

TEST_CASE("Laplacian solver rejects invalid arguments") {
  const rwc::Graph g = testgen::make_graph(testgen::path_edges(4));
  const rwc::SparseSymMatrix L = rwc::laplacian(g);
  CHECK_THROWS_AS(rwc::lap_solve(L, std::vector<double>(3, 1.0), 1e-6), rwc::Error);
  CHECK_THROWS_AS(rwc::lap_solve(L, std::vector<double>(4, 1.0), 0.0), rwc::Error);
  CHECK_THROWS_AS(rwc::lap_solve(L, std::vector<double>(4, 1.0), -1.0), rwc::Error);
}

TEST_CASE("Laplacian solver surfaces the best iterate on iteration exhaustion") {
  const rwc::Graph g = testgen::make_graph(testgen::path_edges(400));
  const rwc::SparseSymMatrix L = rwc::laplacian(g);
  std::vector<double> b(static_cast<std::size_t>(g.n), 0.0);
  b[0] = 1.0;
  b[b.size() - 1] = -1.0;
  rwc::SolverOptions opts;
  opts.max_iterations = 3;  // far too few for a long path
  try {
    rwc::lap_solve(L, b, 1e-10, opts);
    FAIL("expected SolverError");
  } catch (const rwc::SolverError& e) {
    CHECK(e.best.report.iterations == 3);
    CHECK_FALSE(e.best.report.converged);
    CHECK(e.best.report.residual > 0);
    CHECK(e.best.report.residual <= 1.0);  // never worse than the zero start
    REQUIRE(e.best.g.size() == b.size());
  }
}

TEST_CASE("Laplacian solver honors the cooperative deadline") {
  const rwc::Graph g = testgen::make_graph(testgen::path_edges(3000));
  std::vector<double> b(static_cast<std::size_t>(g.n), 0.0);
  b[0] = 1.0;
  b[b.size() - 1] = -1.0;
  rwc::SolverOptions opts;
  opts.deadline_seconds = 1e-9;
  CHECK_THROWS_AS(rwc::lap_solve(rwc::laplacian(g), b, 1e-8, opts), rwc::DeadlineError);
}

TEST_CASE("bridge vector reproduces the pivot column of the pseudo-inverse") {
  for (const int idx : {0, 1, 3, 6}) {
    const rwc::Graph g = testgen::assorted_graph(idx);
    CAPTURE(idx, g.n);
    const rwc::NodeId v = rwc::max_degree_node(g);
    const rwc::BridgeResult br = rwc::bridge_vector(g, v, 1e-9);

    const rwc::SparseSymMatrix N = rwc::normalized_laplacian(g);
    const std::vector<double> phi = rwc::normalized_null_vector(g);
    const Eigen::MatrixXd P = rwc::pinv_dense(N, rwc::PinvKind::normalized, &phi);
    for (rwc::NodeId u = 0; u < g.n; ++u) {
      CHECK(br.y[static_cast<std::size_t>(u)] == Approx(P(u, v)).margin(5e-7));
    }
  }
}

TEST_CASE("bridge vector requires a connected graph") {
  const rwc::Graph g = rwc::build_graph({{0, 1}, {2, 3}});
  CHECK_THROWS_AS(rwc::bridge_vector(g, 0, 1e-6), rwc::Error);
}
