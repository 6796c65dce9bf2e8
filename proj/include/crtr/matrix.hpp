#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace crtr {

/// Dense row-major matrix of 32-bit floats. Activations are stored as
/// (features x batch), so one row holds one feature across a batch and
/// vectorizes along the batch dimension.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0f) {}

  float& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  float at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  float* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const float* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
  std::size_t size() const { return data.size(); }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const {
    for (float v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline void require_shape(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

namespace detail {

// 4x32 register-tiled inner kernel: C[4][32] += A[4][k-range] * B[k-range][32].
// Plain loops laid out so the compiler maps the accumulator tile onto SIMD
// registers (32 floats = 2 zmm / 4 ymm per row).
template <int JT>
inline void gemm_tile(const float* __restrict a, const float* __restrict b,
                      float* __restrict c, int K, int N, int i_count) {
  float acc[4][JT];
  for (int i = 0; i < i_count; ++i)
    for (int j = 0; j < JT; ++j) acc[i][j] = c[static_cast<std::size_t>(i) * N + j];
  for (int k = 0; k < K; ++k) {
    const float* __restrict brow = b + static_cast<std::size_t>(k) * N;
    for (int i = 0; i < i_count; ++i) {
      const float av = a[static_cast<std::size_t>(i) * K + k];
      for (int j = 0; j < JT; ++j) acc[i][j] += av * brow[j];
    }
  }
  for (int i = 0; i < i_count; ++i)
    for (int j = 0; j < JT; ++j) c[static_cast<std::size_t>(i) * N + j] = acc[i][j];
}

inline void gemm_block(const float* a, const float* b, float* c, int M, int K, int N,
                       int j0, int j1) {
  constexpr int JT = 32;
  int j = j0;
  for (; j + JT <= j1; j += JT) {
    int i = 0;
    for (; i + 4 <= M; i += 4)
      gemm_tile<JT>(a + static_cast<std::size_t>(i) * K, b + j,
                    c + static_cast<std::size_t>(i) * N + j, K, N, 4);
    if (i < M)
      gemm_tile<JT>(a + static_cast<std::size_t>(i) * K, b + j,
                    c + static_cast<std::size_t>(i) * N + j, K, N, M - i);
  }
  // Column remainder, scalar over j.
  if (j < j1) {
    for (int i = 0; i < M; ++i) {
      const float* arow = a + static_cast<std::size_t>(i) * K;
      float* crow = c + static_cast<std::size_t>(i) * N;
      for (int k = 0; k < K; ++k) {
        const float av = arow[k];
        const float* brow = b + static_cast<std::size_t>(k) * N;
        for (int jj = j; jj < j1; ++jj) crow[jj] += av * brow[jj];
      }
    }
  }
}

}  // namespace detail

/// c = a * b (or += when accumulate), raw row-major buffers, shapes
/// (M x K) * (K x N). Deterministic for a fixed shape regardless of thread
/// count (each output element has a fixed k-order and one writer).
inline void gemm_raw(const float* a, const float* b, float* c, int M, int K, int N,
                     bool accumulate = false) {
  if (!accumulate) std::fill(c, c + static_cast<std::size_t>(M) * N, 0.0f);
  if (M == 0 || N == 0 || K == 0) return;
#if defined(_OPENMP)
  if (static_cast<long long>(M) * K * N >= (1 << 22)) {
    const int tiles = (N + 127) / 128;
#pragma omp parallel for schedule(static)
    for (int t = 0; t < tiles; ++t) {
      const int j0 = t * 128;
      const int j1 = j0 + 128 < N ? j0 + 128 : N;
      detail::gemm_block(a, b, c, M, K, N, j0, j1);
    }
    return;
  }
#endif
  detail::gemm_block(a, b, c, M, K, N, 0, N);
}

inline void gemm(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false) {
  require_shape(a.cols == b.rows, "gemm: inner dimensions differ");
  if (!accumulate) {
    c.rows = a.rows;
    c.cols = b.cols;
    c.data.assign(static_cast<std::size_t>(a.rows) * b.cols, 0.0f);
    gemm_raw(a.data.data(), b.data.data(), c.data.data(), a.rows, a.cols, b.cols, true);
  } else {
    require_shape(c.rows == a.rows && c.cols == b.cols, "gemm: bad accumulator shape");
    gemm_raw(a.data.data(), b.data.data(), c.data.data(), a.rows, a.cols, b.cols, true);
  }
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix c;
  gemm(a, b, c);
  return c;
}

inline Matrix transposed(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  constexpr int TB = 32;  // tile to keep both access patterns cache-resident
  for (int i0 = 0; i0 < a.rows; i0 += TB) {
    const int i1 = std::min(i0 + TB, a.rows);
    for (int j0 = 0; j0 < a.cols; j0 += TB) {
      const int j1 = std::min(j0 + TB, a.cols);
      for (int i = i0; i < i1; ++i) {
        const float* src = a.row(i);
        for (int j = j0; j < j1; ++j)
          t.data[static_cast<std::size_t>(j) * a.rows + i] = src[j];
      }
    }
  }
  return t;
}

/// Blocked transpose of a raw row-major (rows x cols) buffer.
inline Matrix transposed_from_raw(const float* p, int rows, int cols) {
  Matrix t(cols, rows);
  constexpr int TB = 32;
  for (int i0 = 0; i0 < rows; i0 += TB) {
    const int i1 = std::min(i0 + TB, rows);
    for (int j0 = 0; j0 < cols; j0 += TB) {
      const int j1 = std::min(j0 + TB, cols);
      for (int i = i0; i < i1; ++i) {
        const float* src = p + static_cast<std::size_t>(i) * cols;
        for (int j = j0; j < j1; ++j)
          t.data[static_cast<std::size_t>(j) * rows + i] = src[j];
      }
    }
  }
  return t;
}

/// out[r, c] += bias[r] for every column.
inline void add_row_bias(Matrix& m, const float* bias) {
  for (int i = 0; i < m.rows; ++i) {
    float* r = m.row(i);
    const float b = bias[i];
    for (int j = 0; j < m.cols; ++j) r[j] += b;
  }
}

inline void relu_inplace(Matrix& m) {
  for (float& v : m.data) v = v > 0.0f ? v : 0.0f;
}

inline void scale_inplace(Matrix& m, float s) {
  for (float& v : m.data) v *= s;
}

inline void add_inplace(Matrix& dst, const Matrix& src) {
  require_shape(dst.same_shape(src), "add_inplace: shape mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += src.data[i];
}

}  // namespace crtr
