#pragma once

#include <algorithm>
#include <chrono>
#include <queue>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "crtr/env/env.hpp"
#include "crtr/errors.hpp"

namespace crtr {

struct StateHash {
  std::size_t operator()(const State& s) const { return fnv1a64(s.data(), s.size()); }
};

/// Goal-conditioned state scorer; HIGHER score means closer to the goal.
/// Implementations must be deterministic per (state, goal), finite, and
/// thread-safe for concurrent searches over immutable data.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual void score_batch(const std::vector<State>& states, const State& goal,
                           float* out) const = 0;

  float score(const State& s, const State& goal) const {
    float v = 0.0f;
    const std::vector<State> one{s};
    score_batch(one, goal, &v);
    return v;
  }
};

struct SearchBudget {
  long max_nodes_created = 1;
};

struct SearchOptions {
  double alpha = 0.0;      // weighted A* path-cost weight
  int top_k = 0;           // 0 = expand all children
  bool allow_revisit = false;  // greedy only
  std::vector<State>* expansion_trace = nullptr;  // test instrumentation
};

struct SearchResult {
  bool solved = false;
  std::vector<Action> solution;
  long nodes_created = 0;
  long expansions = 0;
  double wall_ms = 0.0;

  int length() const { return static_cast<int>(solution.size()); }
};

/// Keeps the k highest-scoring children, ties broken by action index; output
/// is score-sorted.
struct ScoredChild {
  Action action;
  State state;
  float score;
};

inline std::vector<ScoredChild> top_k_filter(std::vector<ScoredChild> children, int k) {
  if (k < 1) throw std::invalid_argument("top_k_filter: k must be >= 1");
  std::stable_sort(children.begin(), children.end(), [](const ScoredChild& a, const ScoredChild& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.action < b.action;
  });
  if (static_cast<int>(children.size()) > k) children.resize(k);
  return children;
}

namespace detail {

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Greedy no-search rollout: repeatedly move to the best-scoring unvisited
/// neighbor. Fails when the budget is exhausted or every neighbor was already
/// visited (unless revisits are allowed). Every visited state counts toward
/// nodes_created.
inline SearchResult greedy_solve(const Environment& env, const Scorer& scorer,
                                 const State& start, const State& goal,
                                 const SearchBudget& budget,
                                 const SearchOptions& options = {}) {
  detail::WallTimer timer;
  SearchResult res;
  res.nodes_created = 1;
  if (env.is_goal(start, goal)) {
    res.solved = true;
    res.wall_ms = timer.ms();
    return res;
  }
  std::unordered_set<State, StateHash> visited{start};
  State cur = start;
  std::vector<State> child_states;
  std::vector<float> child_scores;
  while (res.nodes_created < budget.max_nodes_created) {
    auto children = env.neighbors(cur);
    child_states.clear();
    std::vector<Action> child_actions;
    for (auto& [a, s] : children) {
      if (!options.allow_revisit && visited.count(s)) continue;
      child_actions.push_back(a);
      child_states.push_back(std::move(s));
    }
    if (child_states.empty()) break;  // stuck
    child_scores.resize(child_states.size());
    scorer.score_batch(child_states, goal, child_scores.data());
    std::size_t best = 0;
    for (std::size_t i = 1; i < child_states.size(); ++i)
      if (child_scores[i] > child_scores[best]) best = i;
    cur = std::move(child_states[best]);
    res.solution.push_back(child_actions[best]);
    res.nodes_created += 1;
    if (!options.allow_revisit) visited.insert(cur);
    if (env.is_goal(cur, goal)) {
      res.solved = true;
      break;
    }
  }
  if (!res.solved) res.solution.clear();
  res.wall_ms = timer.ms();
  return res;
}

namespace detail {

// Shared frontier-search engine. Priority is max-first on `priority`, ties
// FIFO by insertion sequence. A state enters the visited set when first
// materialized and is never re-enqueued.
inline SearchResult frontier_search(const Environment& env, const Scorer& scorer,
                                    const State& start, const State& goal,
                                    const SearchBudget& budget, const SearchOptions& options,
                                    bool weighted) {
  WallTimer timer;
  SearchResult res;
  res.nodes_created = 1;
  if (env.is_goal(start, goal)) {
    res.solved = true;
    res.wall_ms = timer.ms();
    return res;
  }

  struct Node {
    State state;
    int parent;
    Action action;
    long depth;
  };
  std::vector<Node> arena;
  arena.push_back({start, -1, -1, 0});

  struct Entry {
    double priority;
    long seq;
    int node;
    bool operator<(const Entry& o) const {
      if (priority != o.priority) return priority < o.priority;
      return seq > o.seq;  // FIFO at equal priority
    }
  };
  std::priority_queue<Entry> frontier;
  long seq = 0;

  auto priority_of = [&](float score, long depth) {
    return weighted ? -(static_cast<double>(-score) + options.alpha * static_cast<double>(depth))
                    : static_cast<double>(score);
  };

  frontier.push({priority_of(scorer.score(start, goal), 0), seq++, 0});
  std::unordered_set<State, StateHash> visited{start};

  auto emit_solution = [&](int node_index, Action last_action) {
    std::vector<Action> rev{last_action};
    for (int n = node_index; arena[n].parent >= 0; n = arena[n].parent)
      rev.push_back(arena[n].action);
    res.solution.assign(rev.rbegin(), rev.rend());
    res.solved = true;
  };

  std::vector<ScoredChild> children;
  std::vector<State> child_states;
  std::vector<float> child_scores;
  while (!frontier.empty()) {
    const Entry top = frontier.top();
    frontier.pop();
    const int node_index = top.node;
    res.expansions += 1;
    if (options.expansion_trace) options.expansion_trace->push_back(arena[node_index].state);

    auto raw = env.neighbors(arena[node_index].state);
    children.clear();
    child_states.clear();
    for (auto& [a, s] : raw) {
      if (visited.count(s)) continue;
      children.push_back({a, std::move(s), 0.0f});
    }
    if (children.empty()) continue;
    child_states.reserve(children.size());
    for (auto& c : children) child_states.push_back(c.state);
    child_scores.resize(children.size());
    scorer.score_batch(child_states, goal, child_scores.data());
    for (std::size_t i = 0; i < children.size(); ++i) children[i].score = child_scores[i];
    if (options.top_k > 0) children = top_k_filter(std::move(children), options.top_k);

    const long child_depth = arena[node_index].depth + 1;
    for (auto& c : children) {
      if (res.nodes_created >= budget.max_nodes_created) {
        res.wall_ms = timer.ms();
        return res;  // budget exhausted
      }
      res.nodes_created += 1;
      if (env.is_goal(c.state, goal)) {
        emit_solution(node_index, c.action);
        res.wall_ms = timer.ms();
        return res;
      }
      visited.insert(c.state);
      arena.push_back({std::move(c.state), node_index, c.action, child_depth});
      frontier.push({priority_of(c.score, child_depth), seq++, static_cast<int>(arena.size() - 1)});
    }
  }
  res.wall_ms = timer.ms();
  return res;  // frontier exhausted
}

}  // namespace detail

/// Best-First Search: expand the highest-scored frontier node; the visited
/// set prevents re-enqueueing already-processed states.
inline SearchResult best_first_search(const Environment& env, const Scorer& scorer,
                                      const State& start, const State& goal,
                                      const SearchBudget& budget,
                                      const SearchOptions& options = {}) {
  return detail::frontier_search(env, scorer, start, goal, budget, options, false);
}

/// Weighted A*: priority (-score) + alpha * path_cost, expanded min-first.
/// alpha = 0 reproduces best_first_search's expansion order.
inline SearchResult a_star(const Environment& env, const Scorer& scorer, double alpha,
                           const State& start, const State& goal, const SearchBudget& budget,
                           SearchOptions options = {}) {
  if (alpha < 0.0) throw std::invalid_argument("a_star: alpha must be >= 0");
  options.alpha = alpha;
  return detail::frontier_search(env, scorer, start, goal, budget, options, true);
}

/// Exact BFS distances from `goal` out to `radius` moves, for oracle scorers
/// and tests. Valid for the reversible environments (every move has an
/// inverse, so distance to the goal equals distance from it).
inline std::unordered_map<State, int, StateHash> oracle_distances(const Environment& env,
                                                                  const State& goal,
                                                                  int radius,
                                                                  std::size_t max_states = 4000000) {
  std::unordered_map<State, int, StateHash> dist{{goal, 0}};
  std::vector<State> frontier{goal};
  for (int d = 1; d <= radius && !frontier.empty(); ++d) {
    std::vector<State> next;
    for (const auto& s : frontier)
      for (auto& [a, child] : env.neighbors(s)) {
        if (dist.size() >= max_states)
          throw ResourceError("oracle_distances: state capacity exceeded");
        if (dist.emplace(child, d).second) next.push_back(std::move(child));
      }
    frontier = std::move(next);
  }
  return dist;
}

}  // namespace crtr
