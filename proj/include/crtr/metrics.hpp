#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "crtr/dataset.hpp"
#include "crtr/errors.hpp"
#include "crtr/search.hpp"

namespace crtr {

namespace detail {

// Average ranks for ties, 1-based.
inline std::vector<double> average_ranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

/// Spearman rank correlation with average-rank tie handling, computed as the
/// Pearson correlation of the rank vectors.
inline double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("spearman_rho: need two sequences of equal length >= 2");
  const auto rx = detail::average_ranks(xs);
  const auto ry = detail::average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw UndefinedCorrelationError("spearman_rho: zero rank variance");
  return sxy / std::sqrt(sxx * syy);
}

/// Mean per-trajectory rank correlation between steps-to-final-state and the
/// scorer's distance (negated score) to the final state. Degenerate
/// trajectories (constant ranks) are skipped; throws if every trajectory is
/// degenerate.
inline double trajectory_correlation(const Scorer& scorer,
                                     const std::vector<Trajectory>& trajectories,
                                     int max_trajectories = 100, int* skipped_out = nullptr) {
  if (trajectories.empty())
    throw std::invalid_argument("trajectory_correlation: no trajectories");
  double total = 0.0;
  int used = 0, skipped = 0;
  const int limit = std::min<int>(max_trajectories, static_cast<int>(trajectories.size()));
  std::vector<float> scores;
  for (int t = 0; t < limit; ++t) {
    const Trajectory& traj = trajectories[t];
    const int T = traj.length();
    if (T < 3) {
      ++skipped;
      continue;
    }
    const State& final_state = traj.states.back();
    scores.resize(T);
    scorer.score_batch(traj.states, final_state, scores.data());
    std::vector<double> xs(T), ys(T);
    for (int i = 0; i < T; ++i) {
      xs[i] = static_cast<double>(T - 1 - i);
      ys[i] = -static_cast<double>(scores[i]);
    }
    try {
      total += spearman_rho(xs, ys);
      ++used;
    } catch (const UndefinedCorrelationError&) {
      ++skipped;
    }
  }
  if (skipped_out) *skipped_out = skipped;
  if (used == 0)
    throw UndefinedCorrelationError("trajectory_correlation: all trajectories degenerate");
  return total / used;
}

/// Mean and standard error (sample stddev / sqrt(n)) across seeds.
inline std::pair<double, double> mean_and_stderr(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean_and_stderr: empty input");
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double v : xs) mean += v;
  mean /= n;
  if (xs.size() == 1) return {mean, 0.0};
  double var = 0.0;
  for (double v : xs) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / (n - 1.0)) / std::sqrt(n)};
}

/// Success fraction per budget, ascending by budget. All budgets must cover
/// the same instance set.
inline std::vector<std::pair<long, double>> success_curve(
    const std::map<long, std::vector<SearchResult>>& results_by_budget) {
  if (results_by_budget.empty())
    throw std::invalid_argument("success_curve: no results");
  std::size_t n = results_by_budget.begin()->second.size();
  if (n == 0) throw std::invalid_argument("success_curve: empty instance set");
  std::vector<std::pair<long, double>> curve;
  for (const auto& [budget, results] : results_by_budget) {
    if (results.size() != n)
      throw std::invalid_argument("success_curve: inconsistent instance sets across budgets");
    long solved = 0;
    for (const auto& r : results) solved += r.solved ? 1 : 0;
    curve.emplace_back(budget, static_cast<double>(solved) / static_cast<double>(n));
  }
  return curve;
}

/// Fraction of all instances solved with solution length <= x, for each
/// observed solved length x. Unsolved instances never enter the numerator.
inline std::vector<std::pair<int, double>> length_cdf(const std::vector<SearchResult>& results) {
  if (results.empty()) throw std::invalid_argument("length_cdf: no results");
  std::map<int, long> counts;
  for (const auto& r : results)
    if (r.solved) counts[r.length()] += 1;
  std::vector<std::pair<int, double>> curve;
  long cum = 0;
  for (const auto& [len, c] : counts) {
    cum += c;
    curve.emplace_back(len, static_cast<double>(cum) / static_cast<double>(results.size()));
  }
  return curve;
}

}  // namespace crtr
