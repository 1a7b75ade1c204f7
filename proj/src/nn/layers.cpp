#include "tactile/nn/layers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "tactile/error.hpp"

namespace tactile::nn {

namespace {

std::atomic<ConvBackend> g_backend{ConvBackend::Parallel};

template <typename T>
void conv_forward(const Shape& in, const T* x, int out_ch, const ConvGeometry& g, const T* w,
                  const T* b, T* y) {
  if (g_backend.load(std::memory_order_relaxed) == ConvBackend::Reference) {
    reference::conv2d_forward(in, x, out_ch, g, w, b, y);
  } else {
    parallel::conv2d_forward(in, x, out_ch, g, w, b, y);
  }
}

template <typename T>
void conv_backward_data(const Shape& in, int out_ch, const ConvGeometry& g, const T* w,
                        const T* gy, T* gx) {
  if (g_backend.load(std::memory_order_relaxed) == ConvBackend::Reference) {
    reference::conv2d_backward_data(in, out_ch, g, w, gy, gx);
  } else {
    parallel::conv2d_backward_data(in, out_ch, g, w, gy, gx);
  }
}

template <typename T>
void conv_backward_weight(const Shape& in, const T* x, int out_ch, const ConvGeometry& g,
                          const T* gy, T* gw, T* gb) {
  if (g_backend.load(std::memory_order_relaxed) == ConvBackend::Reference) {
    reference::conv2d_backward_weight(in, x, out_ch, g, gy, gw, gb);
  } else {
    parallel::conv2d_backward_weight(in, x, out_ch, g, gy, gw, gb);
  }
}

template <typename T>
void fill_normal(std::vector<T>& v, Rng& rng, double mean, double stddev) {
  for (auto& e : v) e = static_cast<T>(rng.normal(mean, stddev));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::Shape, what);
}

}  // namespace

void set_conv_backend(ConvBackend backend) noexcept { g_backend.store(backend); }
ConvBackend conv_backend() noexcept { return g_backend.load(); }

// ---------------------------------------------------------------------------
// Conv2d

template <typename T>
Conv2d<T>::Conv2d(std::string name, int in_ch, int out_ch, ConvGeometry geometry, bool bias_)
    : weight(name + ".weight", {out_ch, in_ch, geometry.kernel, geometry.kernel}),
      bias(name + ".bias", {bias_ ? out_ch : 0}),
      in_ch_(in_ch),
      out_ch_(out_ch),
      geometry_(geometry),
      has_bias_(bias_) {}

template <typename T>
Shape Conv2d<T>::output_shape(const Shape& in) const {
  require(in.c == in_ch_, "conv " + weight.name + ": expected " + std::to_string(in_ch_) +
                              " input channels, got " + in.str());
  const Shape out{in.n, out_ch_, geometry_.out_size(in.h), geometry_.out_size(in.w)};
  require(out.h > 0 && out.w > 0, "conv " + weight.name + ": input " + in.str() +
                                      " too small for kernel " +
                                      std::to_string(geometry_.kernel));
  return out;
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x, bool cache) {
  Tensor<T> y(output_shape(x.shape()));
  conv_forward(x.shape(), x.data(), out_ch_, geometry_, weight.value.data(),
               has_bias_ ? bias.value.data() : nullptr, y.data());
  if (cache) input_ = x;
  return y;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& grad_out) {
  require(!input_.empty(), "conv " + weight.name + ": backward without cached forward");
  Tensor<T> gx(input_.shape());
  conv_backward_data(input_.shape(), out_ch_, geometry_, weight.value.data(), grad_out.data(),
                     gx.data());
  conv_backward_weight(input_.shape(), input_.data(), out_ch_, geometry_, grad_out.data(),
                       weight.grad.data(), has_bias_ ? bias.grad.data() : nullptr);
  return gx;
}

template <typename T>
void Conv2d<T>::init_normal(Rng& rng, double stddev) {
  fill_normal(weight.value, rng, 0.0, stddev);
  std::fill(bias.value.begin(), bias.value.end(), T{});
}

template <typename T>
void Conv2d<T>::collect(std::vector<Parameter<T>*>& out) {
  out.push_back(&weight);
  if (has_bias_) out.push_back(&bias);
}

// ---------------------------------------------------------------------------
// ConvTranspose2d

template <typename T>
ConvTranspose2d<T>::ConvTranspose2d(std::string name, int in_ch, int out_ch,
                                    ConvGeometry geometry)
    : weight(name + ".weight", {in_ch, out_ch, geometry.kernel, geometry.kernel}),
      bias(name + ".bias", {out_ch}),
      in_ch_(in_ch),
      out_ch_(out_ch),
      geometry_(geometry) {}

template <typename T>
Shape ConvTranspose2d<T>::output_shape(const Shape& in) const {
  require(in.c == in_ch_, "transposed conv " + weight.name + ": expected " +
                              std::to_string(in_ch_) + " input channels, got " + in.str());
  return {in.n, out_ch_, geometry_.transposed_out_size(in.h),
          geometry_.transposed_out_size(in.w)};
}

template <typename T>
Tensor<T> ConvTranspose2d<T>::forward(const Tensor<T>& x, bool cache) {
  const Shape out = output_shape(x.shape());
  Tensor<T> y(out);
  // The adjoint of a convolution from `out` (out_ch_ channels) to `x`.
  conv_backward_data(out, in_ch_, geometry_, weight.value.data(), x.data(), y.data());
  const std::size_t plane = out.plane();
  for (int n = 0; n < out.n; ++n) {
    for (int c = 0; c < out_ch_; ++c) {
      T* p = y.data() + (static_cast<std::size_t>(n) * out_ch_ + c) * plane;
      const T b = bias.value[c];
      for (std::size_t i = 0; i < plane; ++i) p[i] += b;
    }
  }
  if (cache) input_ = x;
  return y;
}

template <typename T>
Tensor<T> ConvTranspose2d<T>::backward(const Tensor<T>& grad_out) {
  require(!input_.empty(), "transposed conv " + weight.name + ": backward without forward");
  const Shape& gs = grad_out.shape();
  Tensor<T> gx(input_.shape());
  conv_forward(gs, grad_out.data(), in_ch_, geometry_, weight.value.data(),
               static_cast<const T*>(nullptr), gx.data());
  conv_backward_weight(gs, grad_out.data(), in_ch_, geometry_, input_.data(),
                       weight.grad.data(), static_cast<T*>(nullptr));
  const std::size_t plane = gs.plane();
  for (int n = 0; n < gs.n; ++n) {
    for (int c = 0; c < out_ch_; ++c) {
      const T* p = grad_out.data() + (static_cast<std::size_t>(n) * out_ch_ + c) * plane;
      T total{};
      for (std::size_t i = 0; i < plane; ++i) total += p[i];
      bias.grad[c] += total;
    }
  }
  return gx;
}

template <typename T>
void ConvTranspose2d<T>::init_normal(Rng& rng, double stddev) {
  fill_normal(weight.value, rng, 0.0, stddev);
  std::fill(bias.value.begin(), bias.value.end(), T{});
}

template <typename T>
void ConvTranspose2d<T>::collect(std::vector<Parameter<T>*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

// ---------------------------------------------------------------------------
// InstanceNorm2d

template <typename T>
InstanceNorm2d<T>::InstanceNorm2d(std::string name, int channels, T eps)
    : gamma(name + ".gamma", {channels}),
      beta(name + ".beta", {channels}),
      channels_(channels),
      eps_(eps) {
  std::fill(gamma.value.begin(), gamma.value.end(), T(1));
}

template <typename T>
Tensor<T> InstanceNorm2d<T>::forward(const Tensor<T>& x, bool cache) {
  const Shape& s = x.shape();
  require(s.c == channels_, "instance norm " + gamma.name + ": channel mismatch " + s.str());
  Tensor<T> y(s);
  Tensor<T> xhat(cache ? s : Shape{});
  std::vector<T> inv_std(static_cast<std::size_t>(s.n) * s.c);
  const std::size_t plane = s.plane();
  const int planes = s.n * s.c;
#pragma omp parallel for schedule(static)
  for (int q = 0; q < planes; ++q) {
    const int c = q % s.c;
    const T* src = x.data() + static_cast<std::size_t>(q) * plane;
    T* dst = y.data() + static_cast<std::size_t>(q) * plane;
    double mean = 0;
    for (std::size_t i = 0; i < plane; ++i) mean += src[i];
    mean /= static_cast<double>(plane);
    double var = 0;
    for (std::size_t i = 0; i < plane; ++i) {
      const double d = src[i] - mean;
      var += d * d;
    }
    var /= static_cast<double>(plane);
    const T istd = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps_)));
    inv_std[q] = istd;
    const T m = static_cast<T>(mean);
    const T g = gamma.value[c];
    const T b = beta.value[c];
    T* xh = cache ? xhat.data() + static_cast<std::size_t>(q) * plane : nullptr;
    for (std::size_t i = 0; i < plane; ++i) {
      const T v = (src[i] - m) * istd;
      if (xh) xh[i] = v;
      dst[i] = g * v + b;
    }
  }
  if (cache) {
    normalized_ = std::move(xhat);
    inv_std_ = std::move(inv_std);
  }
  return y;
}

template <typename T>
Tensor<T> InstanceNorm2d<T>::backward(const Tensor<T>& grad_out) {
  require(!normalized_.empty(), "instance norm " + gamma.name + ": backward without forward");
  const Shape& s = normalized_.shape();
  Tensor<T> gx(s);
  const std::size_t plane = s.plane();
  const double count = static_cast<double>(plane);
  std::vector<double> dgamma(static_cast<std::size_t>(s.n) * s.c);
  std::vector<double> dbeta(dgamma.size());
  const int planes = s.n * s.c;
#pragma omp parallel for schedule(static)
  for (int q = 0; q < planes; ++q) {
    const int c = q % s.c;
    const T* dy = grad_out.data() + static_cast<std::size_t>(q) * plane;
    const T* xh = normalized_.data() + static_cast<std::size_t>(q) * plane;
    T* dx = gx.data() + static_cast<std::size_t>(q) * plane;
    double sum_dy = 0;
    double sum_dy_xh = 0;
    for (std::size_t i = 0; i < plane; ++i) {
      sum_dy += dy[i];
      sum_dy_xh += static_cast<double>(dy[i]) * xh[i];
    }
    dgamma[q] = sum_dy_xh;
    dbeta[q] = sum_dy;
    const double g = gamma.value[c];
    const double scale = g * inv_std_[q] / count;
    for (std::size_t i = 0; i < plane; ++i) {
      dx[i] = static_cast<T>(scale * (count * dy[i] - sum_dy - xh[i] * sum_dy_xh));
    }
  }
  for (int q = 0; q < planes; ++q) {
    gamma.grad[q % s.c] += static_cast<T>(dgamma[q]);
    beta.grad[q % s.c] += static_cast<T>(dbeta[q]);
  }
  return gx;
}

template <typename T>
void InstanceNorm2d<T>::init_normal(Rng& rng, double stddev) {
  fill_normal(gamma.value, rng, 1.0, stddev);
  std::fill(beta.value.begin(), beta.value.end(), T{});
}

template <typename T>
void InstanceNorm2d<T>::collect(std::vector<Parameter<T>*>& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
}

// ---------------------------------------------------------------------------
// Activation

template <typename T>
Tensor<T> Activation<T>::forward(const Tensor<T>& x, bool cache) {
  Tensor<T> y(x.shape());
  const std::size_t n = x.size();
  const T* src = x.data();
  T* dst = y.data();
  switch (kind_) {
    case ActivationKind::ReLU:
      for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] > T{} ? src[i] : T{};
      break;
    case ActivationKind::LeakyReLU:
      for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] > T{} ? src[i] : slope_ * src[i];
      break;
    case ActivationKind::Tanh:
      for (std::size_t i = 0; i < n; ++i) dst[i] = std::tanh(src[i]);
      break;
  }
  if (cache) cached_ = kind_ == ActivationKind::Tanh ? y : x;
  return y;
}

template <typename T>
Tensor<T> Activation<T>::backward(const Tensor<T>& grad_out) {
  require(!cached_.empty(), "activation: backward without cached forward");
  Tensor<T> gx(cached_.shape());
  const std::size_t n = gx.size();
  const T* c = cached_.data();
  const T* dy = grad_out.data();
  T* dx = gx.data();
  switch (kind_) {
    case ActivationKind::ReLU:
      for (std::size_t i = 0; i < n; ++i) dx[i] = c[i] > T{} ? dy[i] : T{};
      break;
    case ActivationKind::LeakyReLU:
      for (std::size_t i = 0; i < n; ++i) dx[i] = c[i] > T{} ? dy[i] : slope_ * dy[i];
      break;
    case ActivationKind::Tanh:
      for (std::size_t i = 0; i < n; ++i) dx[i] = dy[i] * (T(1) - c[i] * c[i]);
      break;
  }
  return gx;
}

// ---------------------------------------------------------------------------
// MaxPool2d

template <typename T>
Tensor<T> MaxPool2d<T>::forward(const Tensor<T>& x, bool cache) {
  const Shape& s = x.shape();
  require(s.h % 2 == 0 && s.w % 2 == 0, "max pool: odd input " + s.str());
  const Shape out{s.n, s.c, s.h / 2, s.w / 2};
  Tensor<T> y(out);
  std::vector<std::uint32_t> argmax(cache ? out.size() : 0);
  const int planes = s.n * s.c;
#pragma omp parallel for schedule(static)
  for (int q = 0; q < planes; ++q) {
    const T* src = x.data() + static_cast<std::size_t>(q) * s.plane();
    T* dst = y.data() + static_cast<std::size_t>(q) * out.plane();
    for (int oy = 0; oy < out.h; ++oy) {
      for (int ox = 0; ox < out.w; ++ox) {
        std::uint32_t best = static_cast<std::uint32_t>((2 * oy) * s.w + 2 * ox);
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const auto idx = static_cast<std::uint32_t>((2 * oy + dy) * s.w + 2 * ox + dx);
            if (src[idx] > src[best]) best = idx;
          }
        }
        const std::size_t o = static_cast<std::size_t>(oy) * out.w + ox;
        dst[o] = src[best];
        if (cache) argmax[static_cast<std::size_t>(q) * out.plane() + o] = best;
      }
    }
  }
  if (cache) {
    input_shape_ = s;
    argmax_ = std::move(argmax);
  }
  return y;
}

template <typename T>
Tensor<T> MaxPool2d<T>::backward(const Tensor<T>& grad_out) {
  require(!argmax_.empty(), "max pool: backward without cached forward");
  Tensor<T> gx(input_shape_);
  const std::size_t out_plane = grad_out.shape().plane();
  const int planes = input_shape_.n * input_shape_.c;
  for (int q = 0; q < planes; ++q) {
    T* dst = gx.data() + static_cast<std::size_t>(q) * input_shape_.plane();
    const T* dy = grad_out.data() + static_cast<std::size_t>(q) * out_plane;
    const std::uint32_t* am = argmax_.data() + static_cast<std::size_t>(q) * out_plane;
    for (std::size_t o = 0; o < out_plane; ++o) dst[am[o]] += dy[o];
  }
  return gx;
}

template class Conv2d<float>;
template class Conv2d<double>;
template class ConvTranspose2d<float>;
template class ConvTranspose2d<double>;
template class InstanceNorm2d<float>;
template class InstanceNorm2d<double>;
template class Activation<float>;
template class Activation<double>;
template class MaxPool2d<float>;
template class MaxPool2d<double>;

}  // namespace tactile::nn
