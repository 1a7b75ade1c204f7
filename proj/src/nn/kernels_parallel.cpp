#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tactile/nn/kernels.hpp"

namespace tactile::nn::parallel {

namespace {

template <typename T>
struct Simd;
template <>
struct Simd<float> {
  typedef float type __attribute__((vector_size(64), aligned(4)));
};
template <>
struct Simd<double> {
  typedef double type __attribute__((vector_size(64), aligned(8)));
};

// Register tile: kMR rows x (kVecs * lanes) columns of C.
constexpr int kMR = 6;
constexpr int kVecs = 2;
template <typename T>
constexpr int kLanes = 64 / static_cast<int>(sizeof(T));
template <typename T>
constexpr int kNR = kVecs * kLanes<T>;
// Depth of one packed B panel.
constexpr int kKC = 256;
// im2col scratch per chunk.
constexpr std::size_t kColumnBudgetBytes = std::size_t{8} << 20;

// tile [+]= packed_a (k x kMR) * packed_b (k x kNR). Accumulators are named
// scalars of vector type so they stay in registers.
template <typename T>
void micro_kernel(int k, const T* packed_a, const T* packed_b, T* c, int ldc, bool accumulate) {
  static_assert(kMR == 6 && kVecs == 2);
  using V = typename Simd<T>::type;
  constexpr int L = kLanes<T>;
  auto row = [&](int r) { return c + static_cast<std::size_t>(r) * ldc; };
  auto load = [&](int r, int v) {
    return accumulate ? *reinterpret_cast<const V*>(row(r) + v * L) : V{};
  };
  V c00 = load(0, 0), c01 = load(0, 1), c10 = load(1, 0), c11 = load(1, 1);
  V c20 = load(2, 0), c21 = load(2, 1), c30 = load(3, 0), c31 = load(3, 1);
  V c40 = load(4, 0), c41 = load(4, 1), c50 = load(5, 0), c51 = load(5, 1);
  for (int p = 0; p < k; ++p) {
    const T* bp = packed_b + static_cast<std::size_t>(p) * kNR<T>;
    const V b0 = *reinterpret_cast<const V*>(bp);
    const V b1 = *reinterpret_cast<const V*>(bp + L);
    const T* ap = packed_a + static_cast<std::size_t>(p) * kMR;
    T av = ap[0];
    c00 += av * b0; c01 += av * b1;
    av = ap[1];
    c10 += av * b0; c11 += av * b1;
    av = ap[2];
    c20 += av * b0; c21 += av * b1;
    av = ap[3];
    c30 += av * b0; c31 += av * b1;
    av = ap[4];
    c40 += av * b0; c41 += av * b1;
    av = ap[5];
    c50 += av * b0; c51 += av * b1;
  }
  auto store = [&](int r, int v, const V& x) { *reinterpret_cast<V*>(row(r) + v * L) = x; };
  store(0, 0, c00); store(0, 1, c01); store(1, 0, c10); store(1, 1, c11);
  store(2, 0, c20); store(2, 1, c21); store(3, 0, c30); store(3, 1, c31);
  store(4, 0, c40); store(4, 1, c41); store(5, 0, c50); store(5, 1, c51);
}

template <typename T>
std::vector<T>& scratch(int slot) {
  thread_local std::vector<T> buffers[4];
  return buffers[slot];
}

// Packs A (or A^T) into row blocks of kMR, each stored k-major, zero padded.
template <typename T, bool TransA>
void pack_a(int m, int k, const T* a, int lda, T* out) {
  const int iblocks = (m + kMR - 1) / kMR;
  for (int ib = 0; ib < iblocks; ++ib) {
    T* dst = out + static_cast<std::size_t>(ib) * k * kMR;
    for (int p = 0; p < k; ++p) {
      for (int r = 0; r < kMR; ++r) {
        const int i = ib * kMR + r;
        T v{};
        if (i < m) {
          v = TransA ? a[static_cast<std::size_t>(p) * lda + i] : a[static_cast<std::size_t>(i) * lda + p];
        }
        dst[static_cast<std::size_t>(p) * kMR + r] = v;
      }
    }
  }
}

template <typename T, bool TransA>
void gemm_driver(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
                 bool accumulate) {
  if (m <= 0 || n <= 0) return;
  if (k <= 0) {
    if (!accumulate) {
      for (int i = 0; i < m; ++i) std::fill(c + static_cast<std::size_t>(i) * ldc, c + static_cast<std::size_t>(i) * ldc + n, T{});
    }
    return;
  }
  constexpr int NR = kNR<T>;
  const int jblocks = (n + NR - 1) / NR;
  const int iblocks = (m + kMR - 1) / kMR;
  auto& packed_a = scratch<T>(1);
  packed_a.resize(static_cast<std::size_t>(iblocks) * k * kMR);
  pack_a<T, TransA>(m, k, a, lda, packed_a.data());
  const T* pa = packed_a.data();
#pragma omp parallel for schedule(static)
  for (int jb = 0; jb < jblocks; ++jb) {
    const int j0 = jb * NR;
    const int nr = std::min(NR, n - j0);
    auto& panel = scratch<T>(2);
    panel.resize(static_cast<std::size_t>(std::min(k, kKC)) * NR);
    T tile[kMR * NR];
    for (int p0 = 0; p0 < k; p0 += kKC) {
      const int kc = std::min(kKC, k - p0);
      const bool acc = accumulate || p0 > 0;
      for (int p = 0; p < kc; ++p) {
        const T* src = b + static_cast<std::size_t>(p0 + p) * ldb + j0;
        T* dst = panel.data() + static_cast<std::size_t>(p) * NR;
        std::copy(src, src + nr, dst);
        std::fill(dst + nr, dst + NR, T{});
      }
      for (int ib = 0; ib < iblocks; ++ib) {
        const int i0 = ib * kMR;
        const int mr = std::min(kMR, m - i0);
        const T* block = pa + (static_cast<std::size_t>(ib) * k + p0) * kMR;
        T* cblock = c + static_cast<std::size_t>(i0) * ldc + j0;
        if (mr == kMR && nr == NR) {
          micro_kernel<T>(kc, block, panel.data(), cblock, ldc, acc);
          continue;
        }
        if (acc) {
          for (int r = 0; r < mr; ++r) {
            std::copy(cblock + static_cast<std::size_t>(r) * ldc,
                      cblock + static_cast<std::size_t>(r) * ldc + nr, tile + r * NR);
          }
        }
        micro_kernel<T>(kc, block, panel.data(), tile, NR, acc);
        for (int r = 0; r < mr; ++r) {
          std::copy(tile + r * NR, tile + r * NR + nr, cblock + static_cast<std::size_t>(r) * ldc);
        }
      }
    }
  }
}

template <typename T>
void im2col(const T* x, int channels, int h, int w, const ConvGeometry& g, int wo, int oy0,
            int oy1, T* col) {
  const int k = g.kernel;
  const int rows = channels * k * k;
  const std::size_t len = static_cast<std::size_t>(oy1 - oy0) * wo;
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const int kx = r % k;
    const int ky = (r / k) % k;
    const int ci = r / (k * k);
    const T* plane = x + static_cast<std::size_t>(ci) * h * w;
    T* dst = col + static_cast<std::size_t>(r) * len;
    for (int oy = oy0; oy < oy1; ++oy) {
      T* out = dst + static_cast<std::size_t>(oy - oy0) * wo;
      const int iy = oy * g.stride + ky - g.pad;
      if (iy < 0 || iy >= h) {
        std::fill(out, out + wo, T{});
        continue;
      }
      const T* src = plane + static_cast<std::size_t>(iy) * w;
      for (int ox = 0; ox < wo; ++ox) {
        const int ix = ox * g.stride + kx - g.pad;
        out[ox] = (ix >= 0 && ix < w) ? src[ix] : T{};
      }
    }
  }
}

template <typename T>
void col2im_accumulate(const T* col, int channels, int h, int w, const ConvGeometry& g, int wo,
                       int oy0, int oy1, T* gx) {
  const int k = g.kernel;
  const std::size_t len = static_cast<std::size_t>(oy1 - oy0) * wo;
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < channels; ++ci) {
    T* plane = gx + static_cast<std::size_t>(ci) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = col + (static_cast<std::size_t>(ci) * k * k + ky * k + kx) * len;
        for (int oy = oy0; oy < oy1; ++oy) {
          const int iy = oy * g.stride + ky - g.pad;
          if (iy < 0 || iy >= h) continue;
          const T* in = src + static_cast<std::size_t>(oy - oy0) * wo;
          T* row = plane + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * g.stride + kx - g.pad;
            if (ix >= 0 && ix < w) row[ix] += in[ox];
          }
        }
      }
    }
  }
}

bool is_pointwise(const ConvGeometry& g) { return g.kernel == 1 && g.stride == 1 && g.pad == 0; }

template <typename T>
int chunk_rows(int col_rows, int wo, int ho) {
  const std::size_t per_row = static_cast<std::size_t>(col_rows) * wo * sizeof(T);
  const std::size_t rows = std::max<std::size_t>(1, kColumnBudgetBytes / std::max<std::size_t>(per_row, 1));
  return static_cast<int>(std::min<std::size_t>(rows, static_cast<std::size_t>(ho)));
}

}  // namespace

template <typename T>
void gemm_nn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate) {
  gemm_driver<T, false>(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

template <typename T>
void gemm_tn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate) {
  gemm_driver<T, true>(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

namespace {

template <typename T>
T hsum(const typename Simd<T>::type& v) {
  T total{};
  for (int l = 0; l < kLanes<T>; ++l) total += v[l];
  return total;
}

}  // namespace

template <typename T>
void gemm_nt_accumulate(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c,
                        int ldc) {
  // 4 x 3 tiles of dot products, vectorised along k and blocked so the
  // A and B slabs of one k block stay in cache.
  using V = typename Simd<T>::type;
  constexpr int L = kLanes<T>;
  constexpr int TM = 4;
  constexpr int TN = 3;
  constexpr int KB = 1024;
  const int iblocks = (m + TM - 1) / TM;
  const int jblocks = (n + TN - 1) / TN;
  for (int p0 = 0; p0 < k; p0 += KB) {
    const int p1 = std::min(k, p0 + KB);
    const int pv = p0 + (p1 - p0) / L * L;
#pragma omp parallel for collapse(2) schedule(static)
    for (int ib = 0; ib < iblocks; ++ib) {
      for (int jb = 0; jb < jblocks; ++jb) {
        const int i0 = ib * TM;
        const int j0 = jb * TN;
        const int mr = std::min(TM, m - i0);
        const int nr = std::min(TN, n - j0);
        const T* ar[TM];
        const T* br[TN];
        for (int r = 0; r < TM; ++r) ar[r] = a + static_cast<std::size_t>(i0 + std::min(r, mr - 1)) * lda;
        for (int r = 0; r < TN; ++r) br[r] = b + static_cast<std::size_t>(j0 + std::min(r, nr - 1)) * ldb;
        V s00{}, s01{}, s02{}, s10{}, s11{}, s12{}, s20{}, s21{}, s22{}, s30{}, s31{}, s32{};
        for (int p = p0; p < pv; p += L) {
          const V b0 = *reinterpret_cast<const V*>(br[0] + p);
          const V b1 = *reinterpret_cast<const V*>(br[1] + p);
          const V b2 = *reinterpret_cast<const V*>(br[2] + p);
          V av = *reinterpret_cast<const V*>(ar[0] + p);
          s00 += av * b0; s01 += av * b1; s02 += av * b2;
          av = *reinterpret_cast<const V*>(ar[1] + p);
          s10 += av * b0; s11 += av * b1; s12 += av * b2;
          av = *reinterpret_cast<const V*>(ar[2] + p);
          s20 += av * b0; s21 += av * b1; s22 += av * b2;
          av = *reinterpret_cast<const V*>(ar[3] + p);
          s30 += av * b0; s31 += av * b1; s32 += av * b2;
        }
        const V* sums[TM][TN] = {{&s00, &s01, &s02}, {&s10, &s11, &s12},
                                 {&s20, &s21, &s22}, {&s30, &s31, &s32}};
        for (int r = 0; r < mr; ++r) {
          for (int q = 0; q < nr; ++q) {
            T total = hsum<T>(*sums[r][q]);
            for (int p = pv; p < p1; ++p) total += ar[r][p] * br[q][p];
            c[static_cast<std::size_t>(i0 + r) * ldc + j0 + q] += total;
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_forward(const Shape& in, const T* x, int out_ch, const ConvGeometry& g,
                    const T* w, const T* bias, T* y) {
  const int ho = g.out_size(in.h);
  const int wo = g.out_size(in.w);
  const int ckk = in.c * g.kernel * g.kernel;
  const std::size_t out_plane = static_cast<std::size_t>(ho) * wo;
  const int rows = chunk_rows<T>(ckk, wo, ho);
  auto& col = scratch<T>(0);
  for (int n = 0; n < in.n; ++n) {
    const T* xn = x + static_cast<std::size_t>(n) * in.c * in.plane();
    T* yn = y + static_cast<std::size_t>(n) * out_ch * out_plane;
    if (is_pointwise(g)) {
      gemm_nn<T>(out_ch, static_cast<int>(out_plane), in.c, w, in.c, xn,
                 static_cast<int>(out_plane), yn, static_cast<int>(out_plane), false);
    } else {
      for (int oy0 = 0; oy0 < ho; oy0 += rows) {
        const int oy1 = std::min(ho, oy0 + rows);
        const int len = (oy1 - oy0) * wo;
        col.resize(static_cast<std::size_t>(ckk) * len);
        im2col(xn, in.c, in.h, in.w, g, wo, oy0, oy1, col.data());
        gemm_nn<T>(out_ch, len, ckk, w, ckk, col.data(), len,
                   yn + static_cast<std::size_t>(oy0) * wo, static_cast<int>(out_plane), false);
      }
    }
    if (bias) {
#pragma omp parallel for schedule(static)
      for (int co = 0; co < out_ch; ++co) {
        T* plane = yn + static_cast<std::size_t>(co) * out_plane;
        const T b = bias[co];
        for (std::size_t i = 0; i < out_plane; ++i) plane[i] += b;
      }
    }
  }
}

template <typename T>
void conv2d_backward_data(const Shape& in, int out_ch, const ConvGeometry& g, const T* w,
                          const T* gy, T* gx) {
  const int ho = g.out_size(in.h);
  const int wo = g.out_size(in.w);
  const int ckk = in.c * g.kernel * g.kernel;
  const std::size_t out_plane = static_cast<std::size_t>(ho) * wo;
  const int rows = chunk_rows<T>(ckk, wo, ho);
  auto& col = scratch<T>(0);
  // Stride-1 layers whose padding keeps the full correlation in range.
  const bool full_conv = g.stride == 1 && !is_pointwise(g) && g.pad <= g.kernel - 1 &&
                         ConvGeometry{g.kernel, 1, g.kernel - 1 - g.pad}.out_size(ho) == in.h &&
                         ConvGeometry{g.kernel, 1, g.kernel - 1 - g.pad}.out_size(wo) == in.w;
  const ConvGeometry flipped_geom{g.kernel, 1, g.kernel - 1 - g.pad};
  std::vector<T> flipped;
  if (full_conv) {
    const int k = g.kernel;
    flipped.resize(static_cast<std::size_t>(out_ch) * ckk);
    for (int co = 0; co < out_ch; ++co) {
      for (int ci = 0; ci < in.c; ++ci) {
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            flipped[((static_cast<std::size_t>(ci) * out_ch + co) * k + (k - 1 - ky)) * k +
                    (k - 1 - kx)] = w[((static_cast<std::size_t>(co) * in.c + ci) * k + ky) * k + kx];
          }
        }
      }
    }
  }
  for (int n = 0; n < in.n; ++n) {
    T* gxn = gx + static_cast<std::size_t>(n) * in.c * in.plane();
    const T* gyn = gy + static_cast<std::size_t>(n) * out_ch * out_plane;
    if (is_pointwise(g)) {
      gemm_tn<T>(in.c, static_cast<int>(out_plane), out_ch, w, in.c, gyn,
                 static_cast<int>(out_plane), gxn, static_cast<int>(out_plane), false);
      continue;
    }
    if (full_conv) {
      // Stride 1: gx is the full correlation of gy with the flipped,
      // channel-swapped kernel.
      const Shape gshape{1, out_ch, ho, wo};
      conv2d_forward<T>(gshape, gyn, in.c, flipped_geom, flipped.data(), nullptr, gxn);
      continue;
    }
    std::fill(gxn, gxn + static_cast<std::size_t>(in.c) * in.plane(), T{});
    for (int oy0 = 0; oy0 < ho; oy0 += rows) {
      const int oy1 = std::min(ho, oy0 + rows);
      const int len = (oy1 - oy0) * wo;
      col.resize(static_cast<std::size_t>(ckk) * len);
      gemm_tn<T>(ckk, len, out_ch, w, ckk, gyn + static_cast<std::size_t>(oy0) * wo,
                 static_cast<int>(out_plane), col.data(), len, false);
      col2im_accumulate(col.data(), in.c, in.h, in.w, g, wo, oy0, oy1, gxn);
    }
  }
}

template <typename T>
void conv2d_backward_weight(const Shape& in, const T* x, int out_ch, const ConvGeometry& g,
                            const T* gy, T* gw, T* gb) {
  const int ho = g.out_size(in.h);
  const int wo = g.out_size(in.w);
  const int ckk = in.c * g.kernel * g.kernel;
  const std::size_t out_plane = static_cast<std::size_t>(ho) * wo;
  const int rows = chunk_rows<T>(ckk, wo, ho);
  auto& col = scratch<T>(0);
  for (int n = 0; n < in.n; ++n) {
    const T* xn = x + static_cast<std::size_t>(n) * in.c * in.plane();
    const T* gyn = gy + static_cast<std::size_t>(n) * out_ch * out_plane;
    if (is_pointwise(g)) {
      gemm_nt_accumulate<T>(out_ch, in.c, static_cast<int>(out_plane), gyn,
                            static_cast<int>(out_plane), xn, static_cast<int>(out_plane), gw,
                            in.c);
    } else {
      for (int oy0 = 0; oy0 < ho; oy0 += rows) {
        const int oy1 = std::min(ho, oy0 + rows);
        const int len = (oy1 - oy0) * wo;
        col.resize(static_cast<std::size_t>(ckk) * len);
        im2col(xn, in.c, in.h, in.w, g, wo, oy0, oy1, col.data());
        // gw (out_ch x ckk) += gy_chunk (out_ch x len) * col^T
        gemm_nt_accumulate<T>(out_ch, ckk, len, gyn + static_cast<std::size_t>(oy0) * wo,
                              static_cast<int>(out_plane), col.data(), len, gw, ckk);
      }
    }
    if (gb) {
#pragma omp parallel for schedule(static)
      for (int co = 0; co < out_ch; ++co) {
        const T* plane = gyn + static_cast<std::size_t>(co) * out_plane;
        T total{};
        for (std::size_t i = 0; i < out_plane; ++i) total += plane[i];
        gb[co] += total;
      }
    }
  }
}

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int threads) noexcept {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

#define TACTILE_INSTANTIATE(T)                                                              \
  template void conv2d_forward<T>(const Shape&, const T*, int, const ConvGeometry&, const T*, \
                                  const T*, T*);                                            \
  template void conv2d_backward_data<T>(const Shape&, int, const ConvGeometry&, const T*,   \
                                        const T*, T*);                                      \
  template void conv2d_backward_weight<T>(const Shape&, const T*, int, const ConvGeometry&, \
                                          const T*, T*, T*);                                \
  template void gemm_nn<T>(int, int, int, const T*, int, const T*, int, T*, int, bool);     \
  template void gemm_tn<T>(int, int, int, const T*, int, const T*, int, T*, int, bool);     \
  template void gemm_nt_accumulate<T>(int, int, int, const T*, int, const T*, int, T*, int);

TACTILE_INSTANTIATE(float)
TACTILE_INSTANTIATE(double)
#undef TACTILE_INSTANTIATE

}  // namespace tactile::nn::parallel
