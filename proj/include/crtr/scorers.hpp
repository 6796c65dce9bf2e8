#pragma once

#include <memory>
#include <mutex>

#include "crtr/contrastive.hpp"
#include "crtr/search.hpp"
#include "crtr/supervised.hpp"

namespace crtr {

/// Contrastive critic: similarity between the encoder embeddings of each
/// state and the goal. The goal is encoded in the same forward pass as the
/// children, one batched pass per call.
class CriticScorer final : public Scorer {
 public:
  CriticScorer(const Environment& env, EncoderParams params, SimilarityMetric metric)
      : env_(env), params_(std::move(params)), metric_(metric) {}

  void score_batch(const std::vector<State>& states, const State& goal,
                   float* out) const override {
    const int dim = env_.encoding_dim();
    const int n = static_cast<int>(states.size());
    Matrix input(dim, n + 1);
    std::vector<float> col(dim);
    for (int j = 0; j <= n; ++j) {
      std::fill(col.begin(), col.end(), 0.0f);
      env_.encode_into(j < n ? states[j] : goal, col.data());
      for (int i = 0; i < dim; ++i) input.at(i, j) = col[i];
    }
    const Matrix emb = encode_forward(params_, input);
    std::vector<float> goal_emb(emb.rows);
    for (int i = 0; i < emb.rows; ++i) goal_emb[i] = emb.at(i, n);
    std::vector<float> state_emb(emb.rows);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < emb.rows; ++i) state_emb[i] = emb.at(i, j);
      out[j] = similarity(state_emb, goal_emb, metric_);
    }
  }

 private:
  const Environment& env_;
  EncoderParams params_;
  SimilarityMetric metric_;
};

/// Supervised baseline: negated expected distance bin.
class SupervisedScorer final : public Scorer {
 public:
  SupervisedScorer(const Environment& env, EncoderParams params)
      : env_(env), params_(std::move(params)) {}

  void score_batch(const std::vector<State>& states, const State& goal,
                   float* out) const override {
    const int dim = env_.encoding_dim();
    const int n = static_cast<int>(states.size());
    Matrix input(2 * dim, n);
    std::vector<float> col(2 * dim);
    std::vector<float> goal_col(dim, 0.0f);
    env_.encode_into(goal, goal_col.data());
    for (int j = 0; j < n; ++j) {
      std::fill(col.begin(), col.end(), 0.0f);
      env_.encode_into(states[j], col.data());
      std::copy(goal_col.begin(), goal_col.end(), col.begin() + dim);
      for (int i = 0; i < 2 * dim; ++i) input.at(i, j) = col[i];
    }
    const Matrix logits = encode_forward(params_, input);
    std::vector<float> column(logits.rows);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < logits.rows; ++i) column[i] = logits.at(i, j);
      out[j] = static_cast<float>(-predicted_distance_from_logits(column.data(), logits.rows));
    }
  }

 private:
  const Environment& env_;
  EncoderParams params_;
};

/// Exact negated BFS distance within `radius` of the goal; states beyond the
/// enumerated ball score -(radius + 1). Test / commissioning ground truth.
class OracleScorer final : public Scorer {
 public:
  OracleScorer(const Environment& env, int radius) : env_(env), radius_(radius) {}

  void score_batch(const std::vector<State>& states, const State& goal,
                   float* out) const override {
    const auto& dist = distances_for(goal);
    for (std::size_t j = 0; j < states.size(); ++j) {
      const auto it = dist.find(states[j]);
      out[j] = static_cast<float>(it == dist.end() ? -(radius_ + 1) : -it->second);
    }
  }

 private:
  const std::unordered_map<State, int, StateHash>& distances_for(const State& goal) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(goal);
    if (it == cache_.end())
      it = cache_.emplace(goal, oracle_distances(env_, goal, radius_)).first;
    return it->second;
  }

  const Environment& env_;
  int radius_;
  mutable std::mutex mu_;
  mutable std::unordered_map<State, std::unordered_map<State, int, StateHash>, StateHash> cache_;
};

/// Deterministic hash-based noise in [0, 1); the lower-bound baseline.
class RandomScorer final : public Scorer {
 public:
  explicit RandomScorer(std::uint64_t seed = 0) : seed_(seed) {}

  void score_batch(const std::vector<State>& states, const State& goal,
                   float* out) const override {
    for (std::size_t j = 0; j < states.size(); ++j) {
      std::uint64_t h = fnv1a64(&seed_, sizeof(seed_));
      h = fnv1a64(states[j].data(), states[j].size(), h);
      h = fnv1a64(goal.data(), goal.size(), h);
      out[j] = static_cast<float>((h >> 11) * 0x1.0p-53);
    }
  }

 private:
  std::uint64_t seed_;
};

/// Negated token mismatch count between state and goal.
class HammingScorer final : public Scorer {
 public:
  void score_batch(const std::vector<State>& states, const State& goal,
                   float* out) const override {
    for (std::size_t j = 0; j < states.size(); ++j) {
      int mismatches = 0;
      const State& s = states[j];
      const std::size_t n = std::min(s.size(), goal.size());
      for (std::size_t i = 0; i < n; ++i) mismatches += s[i] != goal[i];
      mismatches += static_cast<int>(s.size() > goal.size() ? s.size() - goal.size()
                                                            : goal.size() - s.size());
      out[j] = static_cast<float>(-mismatches);
    }
  }
};

}  // namespace crtr
