#include <algorithm>

#include "tactile/nn/kernels.hpp"

namespace tactile::nn::reference {

template <typename T>
void conv2d_forward(const Shape& in, const T* x, int out_ch, const ConvGeometry& g,
                    const T* w, const T* bias, T* y) {
  const int ho = g.out_size(in.h);
  const int wo = g.out_size(in.w);
  const int k = g.kernel;
  for (int n = 0; n < in.n; ++n) {
    for (int co = 0; co < out_ch; ++co) {
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
          T acc = bias ? bias[co] : T{};
          for (int ci = 0; ci < in.c; ++ci) {
            for (int ky = 0; ky < k; ++ky) {
              const int iy = oy * g.stride + ky - g.pad;
              if (iy < 0 || iy >= in.h) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int ix = ox * g.stride + kx - g.pad;
                if (ix < 0 || ix >= in.w) continue;
                acc += w[((static_cast<std::size_t>(co) * in.c + ci) * k + ky) * k + kx] *
                       x[((static_cast<std::size_t>(n) * in.c + ci) * in.h + iy) * in.w + ix];
              }
            }
          }
          y[((static_cast<std::size_t>(n) * out_ch + co) * ho + oy) * wo + ox] = acc;
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_data(const Shape& in, int out_ch, const ConvGeometry& g, const T* w,
                          const T* gy, T* gx) {
  const int ho = g.out_size(in.h);
  const int wo = g.out_size(in.w);
  const int k = g.kernel;
  std::fill(gx, gx + in.size(), T{});
  for (int n = 0; n < in.n; ++n) {
    for (int co = 0; co < out_ch; ++co) {
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
          const T grad = gy[((static_cast<std::size_t>(n) * out_ch + co) * ho + oy) * wo + ox];
          for (int ci = 0; ci < in.c; ++ci) {
            for (int ky = 0; ky < k; ++ky) {
              const int iy = oy * g.stride + ky - g.pad;
              if (iy < 0 || iy >= in.h) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int ix = ox * g.stride + kx - g.pad;
                if (ix < 0 || ix >= in.w) continue;
                gx[((static_cast<std::size_t>(n) * in.c + ci) * in.h + iy) * in.w + ix] +=
                    grad * w[((static_cast<std::size_t>(co) * in.c + ci) * k + ky) * k + kx];
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_weight(const Shape& in, const T* x, int out_ch, const ConvGeometry& g,
                            const T* gy, T* gw, T* gb) {
  const int ho = g.out_size(in.h);
  const int wo = g.out_size(in.w);
  const int k = g.kernel;
  for (int n = 0; n < in.n; ++n) {
    for (int co = 0; co < out_ch; ++co) {
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
          const T grad = gy[((static_cast<std::size_t>(n) * out_ch + co) * ho + oy) * wo + ox];
          if (gb) gb[co] += grad;
          for (int ci = 0; ci < in.c; ++ci) {
            for (int ky = 0; ky < k; ++ky) {
              const int iy = oy * g.stride + ky - g.pad;
              if (iy < 0 || iy >= in.h) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int ix = ox * g.stride + kx - g.pad;
                if (ix < 0 || ix >= in.w) continue;
                gw[((static_cast<std::size_t>(co) * in.c + ci) * k + ky) * k + kx] +=
                    grad * x[((static_cast<std::size_t>(n) * in.c + ci) * in.h + iy) * in.w + ix];
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void gemm(int m, int n, int k, const T* a, const T* b, T* c) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      T acc{};
      for (int p = 0; p < k; ++p) {
        acc += a[static_cast<std::size_t>(i) * k + p] * b[static_cast<std::size_t>(p) * n + j];
      }
      c[static_cast<std::size_t>(i) * n + j] = acc;
    }
  }
}

#define TACTILE_INSTANTIATE(T)                                                              \
  template void conv2d_forward<T>(const Shape&, const T*, int, const ConvGeometry&, const T*, \
                                  const T*, T*);                                            \
  template void conv2d_backward_data<T>(const Shape&, int, const ConvGeometry&, const T*,   \
                                        const T*, T*);                                      \
  template void conv2d_backward_weight<T>(const Shape&, const T*, int, const ConvGeometry&, \
                                          const T*, T*, T*);                                \
  template void gemm<T>(int, int, int, const T*, const T*, T*);

TACTILE_INSTANTIATE(float)
TACTILE_INSTANTIATE(double)
#undef TACTILE_INSTANTIATE

}  // namespace tactile::nn::reference
