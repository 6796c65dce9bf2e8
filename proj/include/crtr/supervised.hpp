#pragma once

#include <cmath>

#include "crtr/contrastive.hpp"
#include "crtr/dataset.hpp"
#include "crtr/encoder.hpp"

namespace crtr {

/// Distance-bin classifier setup: one class per possible step offset, capped
/// at the maximum trajectory length observed in the dataset.
struct BinConfig {
  int n_bins = 2;

  void validate() const {
    if (n_bins < 2) throw ConfigError("bin config: need at least 2 bins");
  }
};

inline int bin_distance(int delta_t, const BinConfig& cfg) {
  if (delta_t < 0) throw std::invalid_argument("bin_distance: negative offset");
  return std::min(delta_t, cfg.n_bins - 1);
}

/// Softmax cross-entropy over logits columns. Returns the mean loss and the
/// gradient w.r.t. the logits.
struct CrossEntropyResult {
  double loss = 0.0;
  Matrix grad_logits;
};

inline CrossEntropyResult cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
  require_shape(logits.cols == static_cast<int>(labels.size()),
                "cross_entropy: label count mismatch");
  const int C = logits.rows, B = logits.cols;
  CrossEntropyResult res;
  res.grad_logits = Matrix(C, B);
  double total = 0.0;
  for (int j = 0; j < B; ++j) {
    double mx = -1e300;
    for (int i = 0; i < C; ++i) mx = std::max(mx, static_cast<double>(logits.at(i, j)));
    double denom = 0.0;
    for (int i = 0; i < C; ++i) denom += std::exp(logits.at(i, j) - mx);
    const int y = labels[j];
    if (y < 0 || y >= C) throw std::invalid_argument("cross_entropy: label out of range");
    total += std::log(denom) + mx - logits.at(y, j);
    for (int i = 0; i < C; ++i) {
      const double soft = std::exp(logits.at(i, j) - mx) / denom;
      res.grad_logits.at(i, j) = static_cast<float>((soft - (i == y ? 1.0 : 0.0)) / B);
    }
  }
  res.loss = total / B;
  return res;
}

/// Builds the concatenated (state, goal) encoding batch the classifier takes
/// as input.
inline Matrix concat_pair_batch(const Matrix& anchors, const Matrix& positives) {
  const int dim = anchors.rows, B = anchors.cols;
  Matrix out(2 * dim, B);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < B; ++j) {
      out.at(i, j) = anchors.at(i, j);
      out.at(dim + i, j) = positives.at(i, j);
    }
  return out;
}

/// One supervised step: sample pairs with repetition factor 1, classify the
/// time offset into bins, cross-entropy, Adam. Returns loss and bin accuracy.
inline StepStats supervised_train_step(const Environment& env, EncoderParams& params,
                                       AdamState& adam, const TrajectoryDataset& ds,
                                       const ContrastiveConfig& cfg, const BinConfig& bins,
                                       Rng& rng, const std::vector<int>* forced_ids = nullptr) {
  bins.validate();
  SamplerConfig sampler = cfg.sampler;
  sampler.repetition_factor = 1;
  const TrainBatch batch = sample_batch(env, ds, sampler, rng, forced_ids);
  const Matrix input = concat_pair_batch(batch.anchors, batch.positives);
  std::vector<int> labels(batch.t0.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels[i] = bin_distance(batch.t1[i] - batch.t0[i], bins);

  ForwardCache cache;
  const Matrix logits = encode_forward(params, input, &cache);
  require_shape(logits.rows == bins.n_bins, "supervised_train_step: logits/bins mismatch");
  const CrossEntropyResult ce = cross_entropy(logits, labels);
  if (!std::isfinite(ce.loss)) throw TrainingError("supervised_train_step: non-finite loss");
  std::vector<float> grads(params.data.size(), 0.0f);
  encode_backward(params, cache, ce.grad_logits, grads);
  adam_step(params, grads, adam, static_cast<float>(cfg.lr));

  int correct = 0;
  for (int j = 0; j < logits.cols; ++j) {
    int arg = 0;
    for (int i = 1; i < logits.rows; ++i)
      if (logits.at(i, j) > logits.at(arg, j)) arg = i;
    if (arg == labels[j]) ++correct;
  }
  return {ce.loss, static_cast<double>(correct) / logits.cols};
}

/// Heuristic readout: expected bin index under the softmax distribution
/// (lower = predicted closer).
inline double predicted_distance_from_logits(const float* logits, int n_bins) {
  double mx = -1e300;
  for (int i = 0; i < n_bins; ++i) mx = std::max(mx, static_cast<double>(logits[i]));
  double denom = 0.0;
  for (int i = 0; i < n_bins; ++i) denom += std::exp(logits[i] - mx);
  double expect = 0.0;
  for (int i = 0; i < n_bins; ++i) expect += i * (std::exp(logits[i] - mx) / denom);
  return expect;
}

inline double predicted_distance(const Environment& env, const EncoderParams& params,
                                 const State& s, const State& g) {
  const int dim = env.encoding_dim();
  Matrix input(2 * dim, 1);
  env.encode_into(s, input.data.data());
  env.encode_into(g, input.data.data() + dim);
  const Matrix logits = encode_forward(params, input);
  return predicted_distance_from_logits(logits.data.data(), logits.rows);
}

}  // namespace crtr
