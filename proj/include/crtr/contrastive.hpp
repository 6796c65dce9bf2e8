#pragma once

#include <cmath>
#include <span>
#include <string>

#include "crtr/dataset.hpp"
#include "crtr/encoder.hpp"
#include "crtr/errors.hpp"

namespace crtr {

/// Higher score always means more similar; the distance metrics are negated.
enum class SimilarityMetric { Dot, NegL2, NegL2Squared };

enum class LossVariant { Forward, Backward, Symmetric };

inline const char* to_string(SimilarityMetric m) {
  switch (m) {
    case SimilarityMetric::Dot: return "dot";
    case SimilarityMetric::NegL2: return "l2";
    case SimilarityMetric::NegL2Squared: return "l2_squared";
  }
  return "?";
}

inline SimilarityMetric metric_from_string(const std::string& s) {
  if (s == "dot") return SimilarityMetric::Dot;
  if (s == "l2") return SimilarityMetric::NegL2;
  if (s == "l2_squared") return SimilarityMetric::NegL2Squared;
  throw ConfigError("unknown similarity metric: " + s);
}

inline const char* to_string(LossVariant v) {
  switch (v) {
    case LossVariant::Forward: return "forward";
    case LossVariant::Backward: return "backward";
    case LossVariant::Symmetric: return "symmetric";
  }
  return "?";
}

inline LossVariant variant_from_string(const std::string& s) {
  if (s == "forward") return LossVariant::Forward;
  if (s == "backward") return LossVariant::Backward;
  if (s == "symmetric") return LossVariant::Symmetric;
  throw ConfigError("unknown loss variant: " + s);
}

inline float similarity(std::span<const float> u, std::span<const float> v,
                        SimilarityMetric metric) {
  if (u.size() != v.size()) throw std::invalid_argument("similarity: dimension mismatch");
  double acc = 0.0;
  switch (metric) {
    case SimilarityMetric::Dot:
      for (std::size_t i = 0; i < u.size(); ++i) acc += static_cast<double>(u[i]) * v[i];
      return static_cast<float>(acc);
    case SimilarityMetric::NegL2:
    case SimilarityMetric::NegL2Squared:
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = static_cast<double>(u[i]) - v[i];
        acc += d * d;
      }
      return metric == SimilarityMetric::NegL2 ? static_cast<float>(-std::sqrt(acc))
                                               : static_cast<float>(-acc);
  }
  return 0.0f;
}

/// B x B score matrix from embedding columns: entry (i, j) is the similarity
/// of anchor i and positive j divided by the temperature.
inline Matrix embedding_scores(const Matrix& emb_a, const Matrix& emb_p,
                               SimilarityMetric metric, double temperature) {
  require_shape(emb_a.rows == emb_p.rows, "embedding_scores: repr dims differ");
  require_shape(emb_a.cols == emb_p.cols, "embedding_scores: batch sizes differ");
  if (temperature <= 0.0) throw std::invalid_argument("embedding_scores: temperature <= 0");
  const int B = emb_a.cols;
  const float inv_tau = static_cast<float>(1.0 / temperature);
  if (metric == SimilarityMetric::Dot) {
    Matrix at = transposed(emb_a);
    Matrix scores;
    gemm(at, emb_p, scores);  // scores_ij = a_i . p_j
    scale_inplace(scores, inv_tau);
    return scores;
  }
  // Distance metrics: direct pairwise evaluation (the norm-expansion GEMM
  // route cancels catastrophically for nearby embeddings, which then poisons
  // the 1/d factor in the gradient).
  const Matrix at = transposed(emb_a);  // B x repr, contiguous per item
  const Matrix pt = transposed(emb_p);
  const int K = emb_a.rows;
  Matrix scores(B, B);
  for (int i = 0; i < B; ++i) {
    const float* a = at.row(i);
    float* out = scores.row(i);
    for (int j = 0; j < B; ++j) {
      const float* p = pt.row(j);
      double d2 = 0.0;
      for (int k = 0; k < K; ++k) {
        const double d = static_cast<double>(a[k]) - p[k];
        d2 += d * d;
      }
      out[j] = metric == SimilarityMetric::NegL2
                   ? static_cast<float>(-std::sqrt(d2) * inv_tau)
                   : static_cast<float>(-d2 * inv_tau);
    }
  }
  return scores;
}

/// Critic scores via two encoder passes with shared weights.
inline Matrix score_matrix(const EncoderParams& params, const Matrix& anchors,
                           const Matrix& positives, SimilarityMetric metric,
                           double temperature) {
  require_shape(anchors.cols == positives.cols, "score_matrix: batch sizes differ");
  const Matrix emb_a = encode_forward(params, anchors);
  const Matrix emb_p = encode_forward(params, positives);
  return embedding_scores(emb_a, emb_p, metric, temperature);
}

/// Gradients of the scores w.r.t. both embedding sides.
inline void embedding_scores_backward(const Matrix& emb_a, const Matrix& emb_p,
                                      SimilarityMetric metric, double temperature,
                                      const Matrix& grad_scores, Matrix& d_emb_a,
                                      Matrix& d_emb_p) {
  const int B = emb_a.cols;
  const float inv_tau = static_cast<float>(1.0 / temperature);
  if (metric == SimilarityMetric::Dot) {
    Matrix gt = transposed(grad_scores);
    gemm(emb_p, gt, d_emb_a);
    scale_inplace(d_emb_a, inv_tau);
    gemm(emb_a, grad_scores, d_emb_p);
    scale_inplace(d_emb_p, inv_tau);
    return;
  }
  // For both distance metrics dS_ij/da_i = w_ij (a_i - p_j) and
  // dS_ij/dp_j = -w_ij (a_i - p_j); fold w into the upstream gradient.
  Matrix g(B, B);
  if (metric == SimilarityMetric::NegL2Squared) {
    for (int i = 0; i < B; ++i)
      for (int j = 0; j < B; ++j) g.at(i, j) = grad_scores.at(i, j) * (-2.0f * inv_tau);
  } else {
    const Matrix at = transposed(emb_a);
    const Matrix pt = transposed(emb_p);
    const int K = emb_a.rows;
    for (int i = 0; i < B; ++i) {
      const float* a = at.row(i);
      for (int j = 0; j < B; ++j) {
        const float* p = pt.row(j);
        double d2 = 0.0;
        for (int k = 0; k < K; ++k) {
          const double d = static_cast<double>(a[k]) - p[k];
          d2 += d * d;
        }
        const double dist = std::sqrt(d2);
        g.at(i, j) =
            dist > 0.0 ? static_cast<float>(grad_scores.at(i, j) * (-inv_tau / dist)) : 0.0f;
      }
    }
  }
  std::vector<float> row_sum(B, 0.0f), col_sum(B, 0.0f);
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < B; ++j) {
      row_sum[i] += g.at(i, j);
      col_sum[j] += g.at(i, j);
    }
  Matrix gt = transposed(g);
  Matrix pa;  // Ep * g^T, repr x B
  gemm(emb_p, gt, pa);
  Matrix ag;  // Ea * g, repr x B
  gemm(emb_a, g, ag);
  d_emb_a = Matrix(emb_a.rows, B);
  d_emb_p = Matrix(emb_a.rows, B);
  for (int i = 0; i < emb_a.rows; ++i) {
    const float* ea = emb_a.row(i);
    const float* ep = emb_p.row(i);
    float* da = d_emb_a.row(i);
    float* dp = d_emb_p.row(i);
    const float* par = pa.row(i);
    const float* agr = ag.row(i);
    for (int j = 0; j < B; ++j) {
      da[j] = ea[j] * row_sum[j] - par[j];
      dp[j] = ep[j] * col_sum[j] - agr[j];
    }
  }
}

struct InfoNceResult {
  double loss = 0.0;
  Matrix grad_scores;
};

/// InfoNCE over a square score matrix. Forward normalizes each row over the
/// positives, Backward each column over the anchors, Symmetric averages the
/// two. Mean reduction; numerically stabilized by max subtraction.
inline InfoNceResult infonce(const Matrix& scores, LossVariant variant) {
  require_shape(scores.rows == scores.cols && scores.rows >= 1, "infonce: scores not square");
  if (!scores.all_finite()) throw std::invalid_argument("infonce: non-finite scores");
  const int B = scores.rows;
  InfoNceResult res;
  res.grad_scores = Matrix(B, B);

  std::vector<float> expbuf(B);
  auto accumulate = [&](bool rows, double weight) {
    double loss = 0.0;
    for (int i = 0; i < B; ++i) {
      float mx = -3e38f;
      for (int j = 0; j < B; ++j) {
        const float v = rows ? scores.at(i, j) : scores.at(j, i);
        if (v > mx) mx = v;
      }
      double denom = 0.0;
      for (int j = 0; j < B; ++j) {
        const float e = std::exp((rows ? scores.at(i, j) : scores.at(j, i)) - mx);
        expbuf[j] = e;
        denom += e;
      }
      loss += std::log(denom) + mx - scores.at(i, i);
      const double scale = weight / (denom * B);
      for (int j = 0; j < B; ++j) {
        const double upd = expbuf[j] * scale - (i == j ? weight / B : 0.0);
        if (rows)
          res.grad_scores.at(i, j) += static_cast<float>(upd);
        else
          res.grad_scores.at(j, i) += static_cast<float>(upd);
      }
    }
    return loss / B;
  };

  switch (variant) {
    case LossVariant::Forward:
      res.loss = accumulate(true, 1.0);
      break;
    case LossVariant::Backward:
      res.loss = accumulate(false, 1.0);
      break;
    case LossVariant::Symmetric:
      res.loss = 0.5 * (accumulate(true, 0.5) + accumulate(false, 0.5));
      break;
  }
  return res;
}

/// Fraction of rows whose argmax (first maximum) is the diagonal entry.
inline double in_batch_accuracy(const Matrix& scores) {
  require_shape(scores.rows == scores.cols && scores.rows >= 1,
                "in_batch_accuracy: scores not square");
  int correct = 0;
  for (int i = 0; i < scores.rows; ++i) {
    const float* r = scores.row(i);
    int arg = 0;
    for (int j = 1; j < scores.cols; ++j)
      if (r[j] > r[arg]) arg = j;
    if (arg == i) ++correct;
  }
  return static_cast<double>(correct) / scores.rows;
}

/// Full contrastive training configuration (sampler + loss + optimizer).
struct ContrastiveConfig {
  double lr = 3e-4;
  SamplerConfig sampler;
  SimilarityMetric metric = SimilarityMetric::Dot;
  LossVariant variant = LossVariant::Backward;
  double temperature = 0.0;  // <= 0 selects sqrt(repr_dim)
  long steps = 0;
  std::uint64_t seed = 0;

  double effective_temperature(int repr_dim) const {
    return temperature > 0.0 ? temperature : std::sqrt(static_cast<double>(repr_dim));
  }
};

struct StepStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// One sample -> score -> loss -> backprop -> Adam update. Gradients from the
/// anchor and positive passes are summed into the shared encoder weights.
inline StepStats contrastive_train_step(const Environment& env, EncoderParams& params,
                                        AdamState& adam, const TrajectoryDataset& ds,
                                        const ContrastiveConfig& cfg, Rng& rng,
                                        const std::vector<int>* forced_ids = nullptr) {
  const TrainBatch batch = sample_batch(env, ds, cfg.sampler, rng, forced_ids);
  const double tau = cfg.effective_temperature(params.arch.repr_dim);
  const int B = batch.anchors.cols;
  const int dim = batch.anchors.rows;

  // Anchors and positives go through one shared-weight pass as a single
  // 2B-column batch.
  Matrix combined(dim, 2 * B);
  for (int i = 0; i < dim; ++i) {
    float* dst = combined.row(i);
    std::copy_n(batch.anchors.row(i), B, dst);
    std::copy_n(batch.positives.row(i), B, dst + B);
  }
  ForwardCache cache;
  const Matrix emb = encode_forward(params, combined, &cache);
  const int repr = emb.rows;
  Matrix emb_a(repr, B), emb_p(repr, B);
  for (int i = 0; i < repr; ++i) {
    std::copy_n(emb.row(i), B, emb_a.row(i));
    std::copy_n(emb.row(i) + B, B, emb_p.row(i));
  }
  const Matrix scores = embedding_scores(emb_a, emb_p, cfg.metric, tau);
  const InfoNceResult nce = infonce(scores, cfg.variant);
  if (!std::isfinite(nce.loss)) throw TrainingError("contrastive_train_step: non-finite loss");

  Matrix d_emb_a, d_emb_p;
  embedding_scores_backward(emb_a, emb_p, cfg.metric, tau, nce.grad_scores, d_emb_a, d_emb_p);
  Matrix d_emb(repr, 2 * B);
  for (int i = 0; i < repr; ++i) {
    std::copy_n(d_emb_a.row(i), B, d_emb.row(i));
    std::copy_n(d_emb_p.row(i), B, d_emb.row(i) + B);
  }
  std::vector<float> grads(params.data.size(), 0.0f);
  encode_backward(params, cache, d_emb, grads);
  adam_step(params, grads, adam, static_cast<float>(cfg.lr));

  return {nce.loss, in_batch_accuracy(scores)};
}

}  // namespace crtr
