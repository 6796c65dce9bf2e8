#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "crtr/errors.hpp"
#include "crtr/matrix.hpp"
#include "crtr/rng.hpp"

namespace crtr {

inline constexpr float kLayerNormEps = 1e-5f;

/// Residual MLP shape: input projection, `depth` residual blocks of
/// dense -> layer-norm -> relu -> dense plus skip, output projection.
struct EncoderArch {
  int input_dim = 0;
  int hidden_dim = 0;
  int depth = 0;
  int repr_dim = 0;

  bool valid() const {
    return input_dim >= 1 && hidden_dim >= 1 && depth >= 0 && repr_dim >= 1 &&
           repr_dim <= hidden_dim;
  }

  std::size_t param_count() const {
    const std::size_t h = hidden_dim;
    std::size_t n = h * input_dim + h;                // input projection
    n += static_cast<std::size_t>(depth) * (h * h + h + h + h + h * h + h);
    n += static_cast<std::size_t>(repr_dim) * h + repr_dim;  // output projection
    return n;
  }

  bool operator==(const EncoderArch&) const = default;
};

/// Byte offsets of each tensor inside the flat parameter vector. This order
/// is also the checkpoint serialization order.
struct ParamLayout {
  struct Block {
    std::size_t w1, b1, ln_scale, ln_shift, w2, b2;
  };
  std::size_t w_in = 0, b_in = 0;
  std::vector<Block> blocks;
  std::size_t w_out = 0, b_out = 0;
  std::size_t total = 0;

  explicit ParamLayout(const EncoderArch& a) {
    const std::size_t h = a.hidden_dim;
    std::size_t off = 0;
    w_in = off;
    off += h * a.input_dim;
    b_in = off;
    off += h;
    blocks.resize(a.depth);
    for (auto& blk : blocks) {
      blk.w1 = off;
      off += h * h;
      blk.b1 = off;
      off += h;
      blk.ln_scale = off;
      off += h;
      blk.ln_shift = off;
      off += h;
      blk.w2 = off;
      off += h * h;
      blk.b2 = off;
      off += h;
    }
    w_out = off;
    off += static_cast<std::size_t>(a.repr_dim) * h;
    b_out = off;
    off += a.repr_dim;
    total = off;
  }
};

/// All encoder weights in one flat float vector (see ParamLayout for order).
struct EncoderParams {
  EncoderArch arch;
  std::vector<float> data;

  EncoderParams() = default;
  explicit EncoderParams(const EncoderArch& a) : arch(a), data(a.param_count(), 0.0f) {}

  ParamLayout layout() const { return ParamLayout(arch); }
};

/// Adam accumulators mirroring a flat parameter vector.
struct AdamState {
  std::vector<float> m, v;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0f), v(n, 0.0f) {}
};

/// One Adam update with bias correction. Rejects non-finite gradients before
/// touching any state, so an aborted step leaves params and moments intact.
inline void adam_step(EncoderParams& params, const std::vector<float>& grads,
                      AdamState& state, float lr, float beta1 = 0.9f,
                      float beta2 = 0.999f, float eps = 1e-8f) {
  if (grads.size() != params.data.size() || state.m.size() != grads.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  for (float g : grads)
    if (!std::isfinite(g)) throw TrainingError("adam_step: non-finite gradient entry");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(static_cast<double>(beta1), static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(static_cast<double>(beta2), static_cast<double>(state.step));
  float* p = params.data.data();
  float* m = state.m.data();
  float* v = state.v.data();
  const float* g = grads.data();
  const std::size_t n = grads.size();
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
    const float mhat = static_cast<float>(m[i] / bc1);
    const float vhat = static_cast<float>(v[i] / bc2);
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

/// Scaled-uniform fan-in initialization (+-sqrt(6/fan_in)) for weights, zero
/// biases, identity layer norm. Deterministic for a fixed seed.
inline EncoderParams init_params(const EncoderArch& arch, std::uint64_t seed) {
  if (!arch.valid()) throw std::invalid_argument("init_params: invalid arch");
  EncoderParams params(arch);
  const ParamLayout lay = params.layout();
  Rng rng = Rng::stream(seed, "encoder_init");
  auto fill_weight = [&](std::size_t off, int rows, int cols) {
    const float bound = std::sqrt(6.0f / static_cast<float>(cols));
    for (std::size_t i = 0; i < static_cast<std::size_t>(rows) * cols; ++i)
      params.data[off + i] = rng.uniform_float(-bound, bound);
  };
  fill_weight(lay.w_in, arch.hidden_dim, arch.input_dim);
  for (const auto& blk : lay.blocks) {
    fill_weight(blk.w1, arch.hidden_dim, arch.hidden_dim);
    for (int i = 0; i < arch.hidden_dim; ++i) params.data[blk.ln_scale + i] = 1.0f;
    fill_weight(blk.w2, arch.hidden_dim, arch.hidden_dim);
  }
  fill_weight(lay.w_out, arch.repr_dim, arch.hidden_dim);
  return params;
}

/// Activation record kept by encode_forward; exactly what encode_backward
/// needs, nothing else.
struct ForwardCache {
  EncoderArch arch;
  int batch = 0;
  Matrix input;
  std::vector<Matrix> h;  // h[0] after input projection, h[l+1] after block l
  struct BlockCache {
    Matrix zhat;                 // normalized pre-activation
    std::vector<float> inv_std;  // per column
    Matrix act;                  // relu output feeding the second dense layer
  };
  std::vector<BlockCache> blocks;
};

namespace detail {

// Column-wise layer norm: stats across features (rows) for each column.
inline void layer_norm_forward(const Matrix& z, const float* scale, const float* shift,
                               Matrix& zhat, std::vector<float>& inv_std, Matrix& out) {
  const int H = z.rows, B = z.cols;
  std::vector<float> mean(B, 0.0f), var(B, 0.0f);
  for (int i = 0; i < H; ++i) {
    const float* r = z.row(i);
    for (int j = 0; j < B; ++j) mean[j] += r[j];
  }
  for (int j = 0; j < B; ++j) mean[j] /= static_cast<float>(H);
  for (int i = 0; i < H; ++i) {
    const float* r = z.row(i);
    for (int j = 0; j < B; ++j) {
      const float d = r[j] - mean[j];
      var[j] += d * d;
    }
  }
  inv_std.resize(B);
  for (int j = 0; j < B; ++j)
    inv_std[j] = 1.0f / std::sqrt(var[j] / static_cast<float>(H) + kLayerNormEps);
  zhat = Matrix(H, B);
  out = Matrix(H, B);
  for (int i = 0; i < H; ++i) {
    const float* zr = z.row(i);
    float* hr = zhat.row(i);
    float* orow = out.row(i);
    const float sc = scale[i], sh = shift[i];
    for (int j = 0; j < B; ++j) {
      hr[j] = (zr[j] - mean[j]) * inv_std[j];
      orow[j] = sc * hr[j] + sh;
    }
  }
}

// Backward through the same layer norm. d_out is consumed in place as scratch.
inline void layer_norm_backward(const Matrix& zhat, const std::vector<float>& inv_std,
                                const float* scale, const Matrix& d_out, float* d_scale,
                                float* d_shift, Matrix& d_z) {
  const int H = zhat.rows, B = zhat.cols;
  Matrix dzhat(H, B);
  for (int i = 0; i < H; ++i) {
    const float* dor = d_out.row(i);
    const float* zr = zhat.row(i);
    float* dzr = dzhat.row(i);
    double dsc = 0.0, dsh = 0.0;
    const float sc = scale[i];
    for (int j = 0; j < B; ++j) {
      dsc += static_cast<double>(dor[j]) * zr[j];
      dsh += dor[j];
      dzr[j] = dor[j] * sc;
    }
    d_scale[i] += static_cast<float>(dsc);
    d_shift[i] += static_cast<float>(dsh);
  }
  std::vector<float> m1(B, 0.0f), m2(B, 0.0f);
  for (int i = 0; i < H; ++i) {
    const float* dzr = dzhat.row(i);
    const float* zr = zhat.row(i);
    for (int j = 0; j < B; ++j) {
      m1[j] += dzr[j];
      m2[j] += dzr[j] * zr[j];
    }
  }
  for (int j = 0; j < B; ++j) {
    m1[j] /= static_cast<float>(H);
    m2[j] /= static_cast<float>(H);
  }
  d_z = Matrix(H, B);
  for (int i = 0; i < H; ++i) {
    const float* dzr = dzhat.row(i);
    const float* zr = zhat.row(i);
    float* out = d_z.row(i);
    for (int j = 0; j < B; ++j) out[j] = inv_std[j] * (dzr[j] - m1[j] - zr[j] * m2[j]);
  }
}

inline void rowsum_into(const Matrix& m, float* out) {
  for (int i = 0; i < m.rows; ++i) {
    const float* r = m.row(i);
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += r[j];
    out[i] += static_cast<float>(s);
  }
}

}  // namespace detail

/// Forward pass over a batch of encoded states (columns). Pure function of
/// (params, batch); fills `cache` for the matching backward call when given.
inline Matrix encode_forward(const EncoderParams& params, const Matrix& batch,
                             ForwardCache* cache = nullptr) {
  const EncoderArch& a = params.arch;
  require_shape(batch.rows == a.input_dim, "encode_forward: input dim mismatch");
  require_shape(batch.cols >= 1, "encode_forward: empty batch");
  const ParamLayout lay = params.layout();
  const int B = batch.cols;
  const float* pd = params.data.data();

  if (cache) {
    cache->arch = a;
    cache->batch = B;
    cache->input = batch;
    cache->h.clear();
    cache->blocks.assign(a.depth, {});
  }

  Matrix h(a.hidden_dim, B);
  gemm_raw(pd + lay.w_in, batch.data.data(), h.data.data(), a.hidden_dim, a.input_dim, B);
  add_row_bias(h, pd + lay.b_in);
  if (cache) cache->h.push_back(h);

  Matrix z(a.hidden_dim, B);
  for (int l = 0; l < a.depth; ++l) {
    const auto& blk = lay.blocks[l];
    gemm_raw(pd + blk.w1, h.data.data(), z.data.data(), a.hidden_dim, a.hidden_dim, B);
    add_row_bias(z, pd + blk.b1);
    Matrix zhat, act;
    std::vector<float> inv_std;
    detail::layer_norm_forward(z, pd + blk.ln_scale, pd + blk.ln_shift, zhat, inv_std, act);
    relu_inplace(act);
    // h += W2 * act + b2 (skip connection)
    Matrix branch(a.hidden_dim, B);
    gemm_raw(pd + blk.w2, act.data.data(), branch.data.data(), a.hidden_dim, a.hidden_dim, B);
    add_row_bias(branch, pd + blk.b2);
    add_inplace(h, branch);
    if (cache) {
      cache->blocks[l].zhat = std::move(zhat);
      cache->blocks[l].inv_std = std::move(inv_std);
      cache->blocks[l].act = std::move(act);
      cache->h.push_back(h);
    }
  }

  Matrix emb(a.repr_dim, B);
  gemm_raw(pd + lay.w_out, h.data.data(), emb.data.data(), a.repr_dim, a.hidden_dim, B);
  add_row_bias(emb, pd + lay.b_out);
  return emb;
}

/// Exact analytic gradients of the embeddings composed with grad_emb,
/// accumulated into `grads` (flat, ParamLayout order).
inline void encode_backward(const EncoderParams& params, const ForwardCache& cache,
                            const Matrix& grad_emb, std::vector<float>& grads) {
  const EncoderArch& a = params.arch;
  if (cache.arch != a || static_cast<int>(cache.h.size()) != a.depth + 1)
    throw std::invalid_argument("encode_backward: cache does not match params");
  require_shape(grad_emb.rows == a.repr_dim && grad_emb.cols == cache.batch,
                "encode_backward: grad shape mismatch");
  if (grads.size() != params.data.size())
    throw std::invalid_argument("encode_backward: grad buffer size mismatch");
  const ParamLayout lay = params.layout();
  const int B = cache.batch;
  const float* pd = params.data.data();
  float* gd = grads.data();

  // Output projection.
  {
    Matrix h_t = transposed(cache.h[a.depth]);
    gemm_raw(grad_emb.data.data(), h_t.data.data(), gd + lay.w_out, a.repr_dim, B,
             a.hidden_dim, true);
    detail::rowsum_into(grad_emb, gd + lay.b_out);
  }
  Matrix dh;
  {
    Matrix w_out_t = transposed_from_raw(pd + lay.w_out, a.repr_dim, a.hidden_dim);
    dh = Matrix(a.hidden_dim, B);
    gemm_raw(w_out_t.data.data(), grad_emb.data.data(), dh.data.data(), a.hidden_dim,
             a.repr_dim, B);
  }

  auto transpose_square = [&](std::size_t off) {
    return transposed_from_raw(pd + off, a.hidden_dim, a.hidden_dim);
  };

  for (int l = a.depth - 1; l >= 0; --l) {
    const auto& blk = lay.blocks[l];
    const auto& bc = cache.blocks[l];
    // Branch: h_out = h_in + W2 * act + b2.
    Matrix act_t = transposed(bc.act);
    gemm_raw(dh.data.data(), act_t.data.data(), gd + blk.w2, a.hidden_dim, B,
             a.hidden_dim, true);
    detail::rowsum_into(dh, gd + blk.b2);
    Matrix w2_t = transpose_square(blk.w2);
    Matrix da(a.hidden_dim, B);
    gemm_raw(w2_t.data.data(), dh.data.data(), da.data.data(), a.hidden_dim, a.hidden_dim, B);
    // ReLU mask (act > 0).
    for (std::size_t i = 0; i < da.size(); ++i)
      if (bc.act.data[i] <= 0.0f) da.data[i] = 0.0f;
    Matrix dz;
    detail::layer_norm_backward(bc.zhat, bc.inv_std, pd + blk.ln_scale, da,
                                gd + blk.ln_scale, gd + blk.ln_shift, dz);
    Matrix hin_t = transposed(cache.h[l]);
    gemm_raw(dz.data.data(), hin_t.data.data(), gd + blk.w1, a.hidden_dim, B,
             a.hidden_dim, true);
    detail::rowsum_into(dz, gd + blk.b1);
    Matrix w1_t = transpose_square(blk.w1);
    Matrix dh_branch(a.hidden_dim, B);
    gemm_raw(w1_t.data.data(), dz.data.data(), dh_branch.data.data(), a.hidden_dim,
             a.hidden_dim, B);
    add_inplace(dh, dh_branch);  // skip connection passes dh through unchanged
  }

  // Input projection.
  {
    Matrix x_t = transposed(cache.input);
    gemm_raw(dh.data.data(), x_t.data.data(), gd + lay.w_in, a.hidden_dim, B,
             a.input_dim, true);
    detail::rowsum_into(dh, gd + lay.b_in);
  }
}

}  // namespace crtr
