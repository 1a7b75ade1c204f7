#pragma once

#include <string>
#include <vector>

#include "tactile/nn/kernels.hpp"
#include "tactile/nn/tensor.hpp"
#include "tactile/random.hpp"

namespace tactile::nn {

enum class ConvBackend { Reference, Parallel };

// Process-wide choice of convolution kernels; Parallel unless a test
// pins the reference implementation.
void set_conv_backend(ConvBackend backend) noexcept;
ConvBackend conv_backend() noexcept;

// Layers cache what backward() needs when forward() runs with cache = true.
// backward() accumulates parameter gradients and returns dL/dinput.

template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_ch, int out_ch, ConvGeometry geometry, bool bias = true);

  Tensor<T> forward(const Tensor<T>& x, bool cache);
  Tensor<T> backward(const Tensor<T>& grad_out);
  Shape output_shape(const Shape& in) const;
  void init_normal(Rng& rng, double stddev);
  void collect(std::vector<Parameter<T>*>& out);

  int in_channels() const noexcept { return in_ch_; }
  int out_channels() const noexcept { return out_ch_; }
  const ConvGeometry& geometry() const noexcept { return geometry_; }

  Parameter<T> weight;
  Parameter<T> bias;

 private:
  int in_ch_ = 0;
  int out_ch_ = 0;
  ConvGeometry geometry_;
  bool has_bias_ = true;
  Tensor<T> input_;
};

// Weights laid out [in_ch][out_ch][k][k]; forward is the adjoint of Conv2d.
template <typename T>
class ConvTranspose2d {
 public:
  ConvTranspose2d() = default;
  ConvTranspose2d(std::string name, int in_ch, int out_ch, ConvGeometry geometry);

  Tensor<T> forward(const Tensor<T>& x, bool cache);
  Tensor<T> backward(const Tensor<T>& grad_out);
  Shape output_shape(const Shape& in) const;
  void init_normal(Rng& rng, double stddev);
  void collect(std::vector<Parameter<T>*>& out);

  const ConvGeometry& geometry() const noexcept { return geometry_; }

  Parameter<T> weight;
  Parameter<T> bias;

 private:
  int in_ch_ = 0;
  int out_ch_ = 0;
  ConvGeometry geometry_;
  Tensor<T> input_;
};

// Per-sample, per-channel normalisation with learned scale and shift.
template <typename T>
class InstanceNorm2d {
 public:
  InstanceNorm2d() = default;
  InstanceNorm2d(std::string name, int channels, T eps = T(1e-5));

  Tensor<T> forward(const Tensor<T>& x, bool cache);
  Tensor<T> backward(const Tensor<T>& grad_out);
  void init_normal(Rng& rng, double stddev);
  void collect(std::vector<Parameter<T>*>& out);

  Parameter<T> gamma;
  Parameter<T> beta;

 private:
  int channels_ = 0;
  T eps_ = T(1e-5);
  Tensor<T> normalized_;
  std::vector<T> inv_std_;
};

enum class ActivationKind { ReLU, LeakyReLU, Tanh };

template <typename T>
class Activation {
 public:
  explicit Activation(ActivationKind kind = ActivationKind::ReLU, T slope = T(0.2))
      : kind_(kind), slope_(slope) {}

  Tensor<T> forward(const Tensor<T>& x, bool cache);
  Tensor<T> backward(const Tensor<T>& grad_out);

 private:
  ActivationKind kind_;
  T slope_;
  Tensor<T> cached_;
};

// 2x2 stride-2 max pooling; ties resolve to the first element in raster order.
template <typename T>
class MaxPool2d {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool cache);
  Tensor<T> backward(const Tensor<T>& grad_out);

 private:
  Shape input_shape_;
  std::vector<std::uint32_t> argmax_;
};

}  // namespace tactile::nn
