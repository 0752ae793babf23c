#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include "rwc/metrics.hpp"
#include "rwc/rng.hpp"
#include "support/oracles.hpp"

using Catch::Approx;

TEST_CASE("mean relative error") {
  SECTION("hand-computed value") {
    // Per-node errors are 0.1, 0.1, 0.1.
    const std::vector<double> truth{1.0, 2.0, 4.0};
    const std::vector<double> approx{1.1, 1.8, 4.4};
    CHECK(rwc::mean_relative_error(truth, approx) == Approx(0.1).epsilon(1e-12));
  }

  SECTION("exact scores give zero error") {
    const std::vector<double> v{3.0, 7.0, 0.5};
    CHECK(rwc::mean_relative_error(v, v) == 0.0);
  }

  SECTION("an all-zero estimate errs by exactly one") {
    CHECK(rwc::mean_relative_error({2.0, 5.0}, {0.0, 0.0}) == Approx(1.0).epsilon(1e-12));
  }

  SECTION("matches the brute-force oracle on random vectors") {
    rwc::Xoshiro256 rng(77);
    for (int rep = 0; rep < 50; ++rep) {
      const std::size_t n = 2 + rng.below(60);
      std::vector<double> truth(n), approx(n);
      for (std::size_t i = 0; i < n; ++i) {
        truth[i] = 0.5 + rng.unit() * 10.0;
        approx[i] = truth[i] * (0.5 + rng.unit());
      }
      CHECK(rwc::mean_relative_error(truth, approx) ==
            Approx(oracle::brute_mre(truth, approx)).epsilon(1e-13));
    }
  }

  SECTION("invalid input is rejected") {
    CHECK_THROWS_AS(rwc::mean_relative_error({1.0}, {1.0, 2.0}), rwc::InputError);
    CHECK_THROWS_AS(rwc::mean_relative_error({}, {}), rwc::InputError);
    CHECK_THROWS_AS(rwc::mean_relative_error({1.0, 0.0}, {1.0, 1.0}), rwc::InputError);
  }
}

TEST_CASE("Kendall rank correlation") {
  SECTION("hand-computed values") {
    CHECK(rwc::kendall_tau({1, 2, 3}, {1, 3, 2}) == Approx(1.0 / 3.0).epsilon(1e-15));
    // One pair tied in x counts toward neither term.
    CHECK(rwc::kendall_tau({1, 1, 2}, {1, 2, 3}) == Approx(2.0 / 3.0).epsilon(1e-15));
    // Everything tied: no informative pairs at all.
    CHECK(rwc::kendall_tau({5, 5, 5}, {1, 2, 3}) == 0.0);
  }

  SECTION("identical rankings score one, reversed score minus one") {
    rwc::Xoshiro256 rng(13);
    std::vector<double> x(40);
    for (auto& v : x) v = rng.unit();
    CHECK(rwc::kendall_tau(x, x) == 1.0);
    std::vector<double> neg(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) neg[i] = -x[i];
    CHECK(rwc::kendall_tau(x, neg) == -1.0);
  }

  SECTION("matches the O(n^2) oracle exactly, ties included") {
    rwc::Xoshiro256 rng(99);
    for (int rep = 0; rep < 100; ++rep) {
      const std::size_t n = 2 + rng.below(50);
      std::vector<double> x(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        // Small integer values force plenty of ties in both vectors.
        x[i] = static_cast<double>(rng.below(6));
        y[i] = static_cast<double>(rng.below(6));
      }
      CAPTURE(rep, n);
      CHECK(rwc::kendall_tau(x, y) == oracle::brute_kendall(x, y));
    }
  }

  SECTION("continuous scores also match the oracle") {
    rwc::Xoshiro256 rng(101);
    for (int rep = 0; rep < 30; ++rep) {
      const std::size_t n = 2 + rng.below(80);
      std::vector<double> x(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.unit();
        y[i] = rng.unit();
      }
      CHECK(rwc::kendall_tau(x, y) == oracle::brute_kendall(x, y));
    }
  }

  SECTION("invalid input is rejected") {
    CHECK_THROWS_AS(rwc::kendall_tau({1.0}, {1.0}), rwc::InputError);
    CHECK_THROWS_AS(rwc::kendall_tau({1.0, 2.0}, {1.0}), rwc::InputError);
  }
}

TEST_CASE("ranking comparison bundles both metrics") {
  const std::vector<double> truth{1.0, 2.0, 3.0, 4.0};
  const std::vector<double> approx{1.1, 2.2, 2.9, 4.8};
  const rwc::RankingComparison cmp = rwc::compare_scores(truth, approx);
  CHECK(cmp.nodes == 4);
  CHECK(cmp.mean_relative_error == Approx(rwc::mean_relative_error(truth, approx)));
  CHECK(cmp.kendall_tau == 1.0);

  rwc::CentralityResult a, b;
  a.scores = truth;
  b.scores = approx;
  const rwc::RankingComparison via_results = rwc::compare_results(a, b);
  CHECK(via_results.nodes == cmp.nodes);
  CHECK(via_results.mean_relative_error == cmp.mean_relative_error);
  CHECK(via_results.kendall_tau == cmp.kendall_tau);
}
