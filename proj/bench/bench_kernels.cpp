// Compares the reference and OpenMP convolution kernels on the layer shapes
// that dominate training.
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "tactile/nn/kernels.hpp"

using namespace tactile::nn;

namespace {

struct Case {
  const char* name;
  Shape in;
  int out_ch;
  ConvGeometry geom;
};

template <typename F>
double time_ms(F&& f, int reps) {
  f();
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  const bool skip_reference = argc > 1 && std::string_view(argv[1]) == "--parallel-only";
  const std::vector<Case> cases = {
      {"unet 3x3 16->16 @128", {1, 16, 128, 128}, 16, {3, 1, 1}},
      {"unet 3x3 48->16 @128", {1, 48, 128, 128}, 16, {3, 1, 1}},
      {"unet 3x3 64->64 @32", {1, 64, 32, 32}, 64, {3, 1, 1}},
      {"patch 4x4 s2 6->32 @128", {1, 6, 128, 128}, 32, {4, 2, 1}},
      {"patch 4x4 s1 128->256 @16", {1, 128, 16, 16}, 256, {4, 1, 1}},
      {"head 1x1 16->3 @128", {1, 16, 128, 128}, 3, {1, 1, 0}},
  };
  std::mt19937 rng(1);
  std::uniform_real_distribution<float> dist(-1.f, 1.f);
  std::printf("threads: %d\n", parallel::max_threads());
  std::printf("%-28s %8s %12s %12s %12s %12s %10s\n", "layer", "GFLOP", "ref fwd ms",
              "par fwd ms", "par dx ms", "par dw ms", "speedup");
  for (const auto& c : cases) {
    const int ho = c.geom.out_size(c.in.h);
    const int wo = c.geom.out_size(c.in.w);
    const std::size_t wsize =
        static_cast<std::size_t>(c.out_ch) * c.in.c * c.geom.kernel * c.geom.kernel;
    std::vector<float> x(c.in.size()), w(wsize), b(c.out_ch), y(static_cast<std::size_t>(c.in.n) * c.out_ch * ho * wo);
    std::vector<float> gx(x.size()), gw(w.size()), gb(b.size());
    for (auto* v : {&x, &w, &b}) {
      for (auto& e : *v) e = dist(rng);
    }
    const double flop = 2.0 * static_cast<double>(y.size()) * c.in.c * c.geom.kernel * c.geom.kernel;
    double ref = 0;
    if (!skip_reference) {
      ref = time_ms([&] { reference::conv2d_forward(c.in, x.data(), c.out_ch, c.geom, w.data(), b.data(), y.data()); }, 1);
    }
    const double par = time_ms([&] { parallel::conv2d_forward(c.in, x.data(), c.out_ch, c.geom, w.data(), b.data(), y.data()); }, 5);
    const double bwd_data = time_ms([&] {
      parallel::conv2d_backward_data(c.in, c.out_ch, c.geom, w.data(), y.data(), gx.data());
    }, 5);
    const double bwd_weight = time_ms([&] {
      parallel::conv2d_backward_weight(c.in, x.data(), c.out_ch, c.geom, y.data(), gw.data(), gb.data());
    }, 5);
    std::printf("%-28s %8.3f %12.2f %12.2f %12.2f %12.2f %9.1fx\n", c.name, flop * 1e-9, ref, par,
                bwd_data, bwd_weight, skip_reference ? 0.0 : ref / par);
  }
  return 0;
}
