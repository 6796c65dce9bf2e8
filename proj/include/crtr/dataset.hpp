#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "crtr/env/env.hpp"
#include "crtr/errors.hpp"
#include "crtr/matrix.hpp"
#include "crtr/rng.hpp"

namespace crtr {

/// Ordered state sequence ending at a goal state, with the actions that
/// connect consecutive states.
struct Trajectory {
  std::vector<State> states;
  std::vector<Action> actions;

  int length() const { return static_cast<int>(states.size()); }
};

struct TrajectoryDataset {
  EnvId env = EnvId::RubiksCube;
  std::vector<Trajectory> trajectories;

  int max_len() const {
    int m = 0;
    for (const auto& t : trajectories) m = std::max(m, t.length());
    return m;
  }
};

/// Batch sampler knobs. repetition_factor R >= 1 and must divide batch_size;
/// R = 1 is the plain sampler, R >= 2 adds same-trajectory negatives.
struct SamplerConfig {
  int batch_size = 512;
  double discount = 0.9;
  int repetition_factor = 2;

  void validate() const {
    if (batch_size < 1) throw ConfigError("sampler: batch_size must be >= 1");
    if (discount < 0.0 || discount >= 1.0)
      throw ConfigError("sampler: discount must be in [0, 1)");
    if (repetition_factor < 1)
      throw ConfigError("sampler: repetition_factor must be >= 1");
    if (batch_size % repetition_factor != 0)
      throw ConfigError("sampler: repetition_factor must divide batch_size");
  }
};

/// Encoded anchor/positive pairs plus their provenance indices.
struct TrainBatch {
  Matrix anchors;    // input_dim x B
  Matrix positives;  // input_dim x B
  std::vector<int> traj_ids;
  std::vector<int> t0;
  std::vector<int> t1;
};

/// Geometric offset with P(k) = (1-g) * g^(k-1) on {1, 2, ...}; the point
/// mass at 1 when the discount is 0.
inline int geometric_offset(double discount, Rng& rng) {
  if (discount < 0.0 || discount >= 1.0)
    throw std::invalid_argument("geometric_offset: discount must be in [0, 1)");
  if (discount == 0.0) return 1;
  const double u = rng.uniform_pos();
  const double k = 1.0 + std::floor(std::log(u) / std::log(discount));
  if (k > 1e18) return static_cast<int>(1e9);
  return static_cast<int>(k);
}

/// Repeatedly deletes two-step detours (s, a, s', a', s) until none remain.
/// Dynamics consistency is preserved: every surviving transition existed in
/// the input.
inline Trajectory remove_single_step_cycles(const Trajectory& traj) {
  Trajectory out;
  if (traj.states.empty()) return out;
  out.states.push_back(traj.states[0]);
  for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
    const State& next = traj.states[t + 1];
    if (out.states.size() >= 2 && next == out.states[out.states.size() - 2]) {
      out.states.pop_back();
      out.actions.pop_back();
    } else {
      out.states.push_back(next);
      out.actions.push_back(traj.actions[t]);
    }
  }
  return out;
}

/// `count` solved-terminating trajectories. Stream-seeded per trajectory so
/// the dataset is independent of generation order.
inline TrajectoryDataset generate_trajectories(const Environment& env, long count,
                                               int length, std::uint64_t seed,
                                               bool remove_cycles = false) {
  if (count < 1 || length < 1)
    throw std::invalid_argument("generate_trajectories: count and length must be >= 1");
  TrajectoryDataset ds;
  ds.env = env.id();
  ds.trajectories.reserve(count);
  for (long i = 0; i < count; ++i) {
    Rng rng = Rng::stream(seed, "trajectory", static_cast<std::uint64_t>(i));
    Trajectory t;
    env.sample_trajectory(rng, length, t.states, t.actions);
    if (remove_cycles) t = remove_single_step_cycles(t);
    ds.trajectories.push_back(std::move(t));
  }
  return ds;
}

/// One training batch per the repetition-factor sampler: batch_size/R
/// trajectory draws, each repeated R times; t0 uniform over [0, T-2]; t1 =
/// min(t0 + geometric offset, T-1). Anchors and positives are the encoded
/// states at t0 and t1. `forced_ids` replaces the uniform id draw (used by
/// the unlimited-data mode, where every fresh trajectory appears exactly R
/// times).
inline TrainBatch sample_batch(const Environment& env, const TrajectoryDataset& ds,
                               const SamplerConfig& cfg, Rng& rng,
                               const std::vector<int>* forced_ids = nullptr) {
  cfg.validate();
  if (ds.trajectories.empty()) throw std::invalid_argument("sample_batch: empty dataset");
  const int B = cfg.batch_size;
  const int R = cfg.repetition_factor;
  TrainBatch batch;
  batch.traj_ids.resize(B);
  batch.t0.resize(B);
  batch.t1.resize(B);
  if (forced_ids) {
    if (static_cast<int>(forced_ids->size()) != B)
      throw std::invalid_argument("sample_batch: forced id count != batch size");
    batch.traj_ids = *forced_ids;
  } else {
    for (int u = 0; u < B / R; ++u) {
      const int id = static_cast<int>(rng.below(ds.trajectories.size()));
      for (int r = 0; r < R; ++r) batch.traj_ids[u * R + r] = id;
    }
  }
  const int dim = env.encoding_dim();
  batch.anchors = Matrix(dim, B);
  batch.positives = Matrix(dim, B);
  std::vector<float> col(dim);
  auto write_col = [&](Matrix& m, int j, const State& s) {
    std::fill(col.begin(), col.end(), 0.0f);
    env.encode_into(s, col.data());
    for (int i = 0; i < dim; ++i) m.at(i, j) = col[i];
  };
  for (int j = 0; j < B; ++j) {
    const Trajectory& traj = ds.trajectories[batch.traj_ids[j]];
    const int T = traj.length();
    if (T < 2) throw std::invalid_argument("sample_batch: trajectory too short");
    const int t0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(T - 1)));
    const int t1 = std::min(t0 + geometric_offset(cfg.discount, rng), T - 1);
    batch.t0[j] = t0;
    batch.t1[j] = t1;
    write_col(batch.anchors, j, traj.states[t0]);
    write_col(batch.positives, j, traj.states[t1]);
  }
  return batch;
}

}  // namespace crtr
