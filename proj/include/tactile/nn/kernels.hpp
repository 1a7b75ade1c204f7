#pragma once

#include "tactile/nn/tensor.hpp"

// Convolution kernels in two flavours with identical contracts:
//
//   reference::  direct nested loops, single-threaded; the test oracle.
//   parallel::   im2col + blocked GEMM, OpenMP across output tiles.
//
// Weights are laid out [out_ch][in_ch][k][k]. Every output element is owned
// by one thread, so results do not depend on the thread count.
namespace tactile::nn {

struct ConvGeometry {
  int kernel = 3;
  int stride = 1;
  int pad = 1;

  // floor((n + 2p - k) / s) + 1
  int out_size(int n) const noexcept { return (n + 2 * pad - kernel) / stride + 1; }
  // Transposed convolution output: (n - 1) s - 2p + k
  int transposed_out_size(int n) const noexcept { return (n - 1) * stride - 2 * pad + kernel; }
};

namespace reference {

// y[n][co] = b[co] + sum_ci,ky,kx w[co][ci][ky][kx] x[n][ci][oy*s+ky-p][ox*s+kx-p]
template <typename T>
void conv2d_forward(const Shape& in, const T* x, int out_ch, const ConvGeometry& g,
                    const T* w, const T* bias, T* y);

// gx = dL/dx given gy = dL/dy; gx is overwritten.
template <typename T>
void conv2d_backward_data(const Shape& in, int out_ch, const ConvGeometry& g, const T* w,
                          const T* gy, T* gx);

// gw += dL/dw, gb += dL/db (gb may be null).
template <typename T>
void conv2d_backward_weight(const Shape& in, const T* x, int out_ch, const ConvGeometry& g,
                            const T* gy, T* gw, T* gb);

// C (M x N) = A (M x K) * B (K x N), row-major, no accumulation.
template <typename T>
void gemm(int m, int n, int k, const T* a, const T* b, T* c);

}  // namespace reference

namespace parallel {

template <typename T>
void conv2d_forward(const Shape& in, const T* x, int out_ch, const ConvGeometry& g,
                    const T* w, const T* bias, T* y);

template <typename T>
void conv2d_backward_data(const Shape& in, int out_ch, const ConvGeometry& g, const T* w,
                          const T* gy, T* gx);

template <typename T>
void conv2d_backward_weight(const Shape& in, const T* x, int out_ch, const ConvGeometry& g,
                            const T* gy, T* gw, T* gb);

// C = A * B (+ C when accumulate). Leading dimensions are row strides.
template <typename T>
void gemm_nn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate);

// C = A^T * B (+ C), A stored K x M.
template <typename T>
void gemm_tn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate);

// C += A * B^T, B stored N x K.
template <typename T>
void gemm_nt_accumulate(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c,
                        int ldc);

int max_threads() noexcept;
void set_threads(int threads) noexcept;

}  // namespace parallel

}  // namespace tactile::nn
