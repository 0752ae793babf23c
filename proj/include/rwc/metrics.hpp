#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rwc/common.hpp"
#include "rwc/result.hpp"

namespace rwc {

inline double mean_relative_error(const std::vector<double>& truth,
                                  const std::vector<double>& approx) {
  if (truth.size() != approx.size()) {
    throw InputError("mean_relative_error: score vectors differ in length");
  }
  if (truth.empty()) throw InputError("mean_relative_error: empty score vectors");
  double acc = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 0) throw InputError("mean_relative_error: zero reference score");
    acc += std::abs(truth[i] - approx[i]) / std::abs(truth[i]);
  }
  return acc / static_cast<double>(truth.size());
}

namespace detail {

// Strict inversions of y by bottom-up merge counting. Equal elements are not
// inversions: the merge takes from the left run while its head is <= the
// right head.
inline int64_t count_inversions(std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> buffer(n);
  int64_t inversions = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
      const std::size_t mid = lo + width;
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t a = lo, b = mid, out = lo;
      while (a < mid && b < hi) {
        if (y[a] <= y[b]) {
          buffer[out++] = y[a++];
        } else {
          buffer[out++] = y[b++];
          inversions += static_cast<int64_t>(mid - a);
        }
      }
      while (a < mid) buffer[out++] = y[a++];
      while (b < hi) buffer[out++] = y[b++];
      std::copy(buffer.begin() + static_cast<std::ptrdiff_t>(lo),
                buffer.begin() + static_cast<std::ptrdiff_t>(hi),
                y.begin() + static_cast<std::ptrdiff_t>(lo));
    }
  }
  return inversions;
}

inline int64_t tied_pairs(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  int64_t ties = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= values.size(); ++i) {
    if (i < values.size() && values[i] == values[i - 1]) {
      ++run;
    } else {
      ties += static_cast<int64_t>(run) * static_cast<int64_t>(run - 1) / 2;
      run = 1;
    }
  }
  return ties;
}

}  // namespace detail

// Kendall rank correlation over all node pairs,
//   tau = 2 (concordant - discordant) / (n (n - 1)),
// so pairs tied in either ranking count toward neither term. Runs in
// O(n log n): sort by x (then y), count strict y-inversions by merge, and
// correct for ties by run counting.
inline double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InputError("kendall_tau: score vectors differ in length");
  const auto n = static_cast<int64_t>(x.size());
  if (n < 2) throw InputError("kendall_tau: need at least two nodes");

  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  std::vector<double> y_sorted(y.size());
  for (std::size_t i = 0; i < order.size(); ++i) y_sorted[i] = y[order[i]];

  // Pairs tied in x, in y, and in both, via run counting.
  int64_t ties_x = 0, ties_xy = 0;
  {
    std::size_t run_x = 1, run_xy = 1;
    for (std::size_t i = 1; i <= order.size(); ++i) {
      const bool same_x = i < order.size() && x[order[i]] == x[order[i - 1]];
      const bool same_xy = same_x && y[order[i]] == y[order[i - 1]];
      if (same_x) {
        ++run_x;
      } else {
        ties_x += static_cast<int64_t>(run_x) * static_cast<int64_t>(run_x - 1) / 2;
        run_x = 1;
      }
      if (same_xy) {
        ++run_xy;
      } else {
        ties_xy += static_cast<int64_t>(run_xy) * static_cast<int64_t>(run_xy - 1) / 2;
        run_xy = 1;
      }
    }
  }
  const int64_t ties_y = detail::tied_pairs(y);

  const int64_t discordant = detail::count_inversions(y_sorted);
  const int64_t total = n * (n - 1) / 2;
  const int64_t tied = ties_x + ties_y - ties_xy;
  const int64_t concordant = total - discordant - tied;
  return static_cast<double>(concordant - discordant) / static_cast<double>(total);
}

struct RankingComparison {
  double mean_relative_error = 0;
  double kendall_tau = 0;
  int64_t nodes = 0;
};

inline RankingComparison compare_scores(const std::vector<double>& truth,
                                        const std::vector<double>& approx) {
  RankingComparison out;
  out.mean_relative_error = mean_relative_error(truth, approx);
  out.kendall_tau = kendall_tau(truth, approx);
  out.nodes = static_cast<int64_t>(truth.size());
  return out;
}

inline RankingComparison compare_results(const CentralityResult& truth,
                                         const CentralityResult& approx) {
  return compare_scores(truth.scores, approx.scores);
}

}  // namespace rwc
