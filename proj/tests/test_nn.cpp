#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "tactile/nn/kernels.hpp"
#include "tactile/nn/layers.hpp"
#include "tactile/random.hpp"

using namespace tactile;
using namespace tactile::nn;
using test_support::relative_error;

namespace {

template <typename T>
std::vector<T> random_vec(std::size_t n, Rng& rng) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.uniform(-1.0, 1.0));
  return v;
}

template <typename T>
Tensor<T> random_tensor(Shape s, Rng& rng) {
  return Tensor<T>(s, random_vec<T>(s.size(), rng));
}

struct Case {
  Shape in;
  int out_ch;
  ConvGeometry g;
};

const std::vector<Case> kCases = {
    {{1, 3, 8, 8}, 4, {3, 1, 1}},   {{2, 5, 9, 7}, 3, {3, 1, 1}},  {{1, 6, 16, 16}, 8, {4, 2, 1}},
    {{1, 4, 11, 13}, 2, {4, 2, 1}}, {{1, 7, 10, 10}, 5, {4, 1, 1}}, {{2, 3, 6, 6}, 9, {1, 1, 0}},
    {{1, 2, 12, 12}, 3, {2, 2, 0}}, {{1, 33, 9, 9}, 17, {3, 1, 1}},
};

template <typename T>
void compare(const std::vector<T>& a, const std::vector<T>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])) <=
            tol * (1.0 + std::abs(static_cast<double>(a[i]))));
  }
}

template <typename T>
void check_kernels_agree(double tol) {
  Rng rng(17);
  for (const auto& c : kCases) {
    CAPTURE(c.in.str());
    const int oh = c.g.out_size(c.in.h), ow = c.g.out_size(c.in.w);
    const std::size_t wsize = static_cast<std::size_t>(c.out_ch) * c.in.c * c.g.kernel * c.g.kernel;
    const auto x = random_vec<T>(c.in.size(), rng);
    const auto w = random_vec<T>(wsize, rng);
    const auto b = random_vec<T>(c.out_ch, rng);
    const std::size_t ysize = static_cast<std::size_t>(c.in.n) * c.out_ch * oh * ow;
    const auto gy = random_vec<T>(ysize, rng);

    std::vector<T> y_ref(ysize), y_par(ysize);
    reference::conv2d_forward(c.in, x.data(), c.out_ch, c.g, w.data(), b.data(), y_ref.data());
    parallel::conv2d_forward(c.in, x.data(), c.out_ch, c.g, w.data(), b.data(), y_par.data());
    compare(y_ref, y_par, tol);

    std::vector<T> gx_ref(x.size()), gx_par(x.size(), T(7));
    reference::conv2d_backward_data(c.in, c.out_ch, c.g, w.data(), gy.data(), gx_ref.data());
    parallel::conv2d_backward_data(c.in, c.out_ch, c.g, w.data(), gy.data(), gx_par.data());
    compare(gx_ref, gx_par, tol);

    // Both accumulate into pre-filled buffers.
    std::vector<T> gw_ref(wsize, T(0.5)), gw_par(wsize, T(0.5)), gb_ref(c.out_ch, T(1)),
        gb_par(c.out_ch, T(1));
    reference::conv2d_backward_weight(c.in, x.data(), c.out_ch, c.g, gy.data(), gw_ref.data(),
                                      gb_ref.data());
    parallel::conv2d_backward_weight(c.in, x.data(), c.out_ch, c.g, gy.data(), gw_par.data(),
                                     gb_par.data());
    compare(gw_ref, gw_par, tol);
    compare(gb_ref, gb_par, tol);
  }
}

}  // namespace

TEST_CASE("reference conv matches a hand computation") {
  // 1x1x3x3 input, one 3x3 kernel of ones, pad 1: each output sums its neighbourhood.
  const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  const std::vector<double> w(9, 1.0);
  const double bias = 0.5;
  std::vector<double> y(9);
  reference::conv2d_forward<double>({1, 1, 3, 3}, x.data(), 1, {3, 1, 1}, w.data(), &bias, y.data());
  const std::vector<double> expected = {12, 21, 16, 27, 45, 33, 24, 39, 28};
  for (int i = 0; i < 9; ++i) CHECK(y[i] == expected[i] + 0.5);
}

TEST_CASE("parallel kernels agree with the reference in double") { check_kernels_agree<double>(1e-12); }

TEST_CASE("parallel kernels agree with the reference in float") { check_kernels_agree<float>(1e-4); }

TEST_CASE("parallel GEMM variants agree with the reference GEMM") {
  Rng rng(5);
  for (auto [m, n, k] : {std::array{1, 1, 1}, std::array{7, 300, 13}, std::array{65, 33, 129},
                         std::array{128, 96, 200}}) {
    const auto a = random_vec<double>(static_cast<std::size_t>(m) * k, rng);
    const auto b = random_vec<double>(static_cast<std::size_t>(k) * n, rng);
    std::vector<double> ref(static_cast<std::size_t>(m) * n), par(ref.size());
    reference::gemm(m, n, k, a.data(), b.data(), ref.data());
    parallel::gemm_nn(m, n, k, a.data(), k, b.data(), n, par.data(), n, false);
    compare(ref, par, 1e-12);

    // A^T B with A stored K x M.
    std::vector<double> at(a.size());
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < k; ++j) at[static_cast<std::size_t>(j) * m + i] = a[static_cast<std::size_t>(i) * k + j];
    }
    std::vector<double> tn(ref.size(), 0.0);
    parallel::gemm_tn(m, n, k, at.data(), m, b.data(), n, tn.data(), n, false);
    compare(ref, tn, 1e-12);

    // A B^T with B stored N x K, accumulated onto ones.
    std::vector<double> bt(b.size());
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < n; ++j) bt[static_cast<std::size_t>(j) * k + i] = b[static_cast<std::size_t>(i) * n + j];
    }
    std::vector<double> nt(ref.size(), 1.0);
    parallel::gemm_nt_accumulate(m, n, k, a.data(), k, bt.data(), k, nt.data(), n);
    for (auto& v : nt) v -= 1.0;
    compare(ref, nt, 1e-12);
  }
}

TEST_CASE("parallel results do not depend on the thread count") {
  Rng rng(3);
  const Case c{{1, 16, 20, 20}, 24, {3, 1, 1}};
  const auto x = random_vec<float>(c.in.size(), rng);
  const auto w = random_vec<float>(24 * 16 * 9, rng);
  const auto b = random_vec<float>(24, rng);
  std::vector<std::vector<float>> outs;
  const int saved = parallel::max_threads();
  for (int threads : {1, 2, 3, 8}) {
    parallel::set_threads(threads);
    std::vector<float> y(24 * 400);
    parallel::conv2d_forward(c.in, x.data(), c.out_ch, c.g, w.data(), b.data(), y.data());
    outs.push_back(y);
  }
  parallel::set_threads(saved);
  for (const auto& y : outs) CHECK(y == outs.front());
}

TEST_CASE("transposed convolution output size and adjointness") {
  Rng rng(8);
  ConvTranspose2d<double> up("up", 4, 3, {2, 2, 0});
  up.init_normal(rng, 0.5);
  const Shape in{1, 4, 5, 6};
  CHECK(up.output_shape(in) == Shape{1, 3, 10, 12});
  // <T x, y> = <x, T^* y> with zero bias.
  std::fill(up.bias.value.begin(), up.bias.value.end(), 0.0);
  const auto x = random_tensor<double>(in, rng);
  const auto y = random_tensor<double>({1, 3, 10, 12}, rng);
  const auto tx = up.forward(x, true);
  const auto tsy = up.backward(y);
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) lhs += tx[i] * y[i];
  for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * tsy[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("instance norm output has zero mean and unit variance per plane") {
  Rng rng(4);
  InstanceNorm2d<double> norm("n", 3);
  const auto x = random_tensor<double>({2, 3, 5, 5}, rng);
  const auto y = norm.forward(x, false);
  for (int n = 0; n < 2; ++n) {
    for (int c = 0; c < 3; ++c) {
      double s = 0, s2 = 0;
      for (int i = 0; i < 25; ++i) {
        const double v = y[(static_cast<std::size_t>(n) * 3 + c) * 25 + i];
        s += v;
        s2 += v * v;
      }
      CHECK(std::abs(s / 25) < 1e-12);
      CHECK(s2 / 25 == doctest::Approx(1.0).epsilon(1e-3));
    }
  }
}

TEST_CASE("max pooling picks the first maximum") {
  MaxPool2d<double> pool;
  Tensor<double> x({1, 1, 2, 4}, std::vector<double>{1, 3, 5, 5, 3, 2, 5, 4});
  const auto y = pool.forward(x, true);
  CHECK(y.values() == std::vector<double>{3, 5});
  const auto g = pool.backward(Tensor<double>({1, 1, 1, 2}, std::vector<double>{10, 20}));
  CHECK(g.values() == std::vector<double>{0, 10, 20, 0, 0, 0, 0, 0});
}

namespace {

// Central-difference check of a scalar function of a parameter vector.
// Returns the fraction of coordinates within the relative tolerance.
double fraction_within(std::vector<double>& values, const std::vector<double>& analytic,
                       const std::function<double()>& loss, double tol, double h = 1e-6) {
  int ok = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + h;
    const double up = loss();
    values[i] = saved - h;
    const double down = loss();
    values[i] = saved;
    const double numeric = (up - down) / (2 * h);
    if (relative_error(analytic[i], numeric) <= tol) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(values.size());
}

template <typename Layer>
void layer_gradient_check(Layer& layer, Shape in, std::vector<Parameter<double>*> params) {
  Rng rng(21);
  auto x = random_tensor<double>(in, rng);
  const auto probe = layer.forward(x, false);
  const auto w = random_tensor<double>(probe.shape(), rng);
  auto loss = [&] {
    const auto y = layer.forward(x, false);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
    return s;
  };
  for (auto* p : params) p->zero_grad();
  layer.forward(x, true);
  const auto gx = layer.backward(w);
  CHECK(fraction_within(x.values(), gx.values(), loss, 1e-5) == 1.0);
  for (auto* p : params) {
    CAPTURE(p->name);
    CHECK(fraction_within(p->value, p->grad, loss, 1e-5) == 1.0);
  }
}

}  // namespace

TEST_CASE("layer gradients match finite differences") {
  set_conv_backend(ConvBackend::Reference);
  Rng rng(2);
  SUBCASE("conv 3x3") {
    Conv2d<double> conv("c", 2, 3, {3, 1, 1});
    conv.init_normal(rng, 0.5);
    layer_gradient_check(conv, {1, 2, 5, 5}, {&conv.weight, &conv.bias});
  }
  SUBCASE("conv 4x4 stride 2") {
    Conv2d<double> conv("c", 2, 2, {4, 2, 1});
    conv.init_normal(rng, 0.5);
    layer_gradient_check(conv, {2, 2, 6, 6}, {&conv.weight, &conv.bias});
  }
  SUBCASE("transposed conv") {
    ConvTranspose2d<double> up("u", 3, 2, {2, 2, 0});
    up.init_normal(rng, 0.5);
    layer_gradient_check(up, {1, 3, 3, 3}, {&up.weight, &up.bias});
  }
  SUBCASE("instance norm") {
    InstanceNorm2d<double> norm("n", 2);
    norm.init_normal(rng, 0.3);
    layer_gradient_check(norm, {2, 2, 4, 4}, {&norm.gamma, &norm.beta});
  }
  SUBCASE("activations") {
    for (auto kind : {ActivationKind::LeakyReLU, ActivationKind::Tanh, ActivationKind::ReLU}) {
      Activation<double> act(kind, 0.2);
      layer_gradient_check(act, {1, 2, 3, 3}, {});
    }
  }
  set_conv_backend(ConvBackend::Parallel);
}
