#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tactile/gan/config.hpp"
#include "tactile/nn/layers.hpp"

namespace tactile::gan {

// One convolution-like layer as seen by a forward pass; used to check the
// shape arithmetic of a built network.
struct LayerTrace {
  std::string name;
  bool transposed = false;
  nn::ConvGeometry geometry;
  nn::Shape input;
  nn::Shape output;
};

// conv3x3 -> norm -> ReLU -> conv3x3 -> norm -> ReLU
template <typename T>
class ConvBlock {
 public:
  ConvBlock() = default;
  ConvBlock(const std::string& name, int in_ch, int out_ch, NormKind norm);

  nn::Tensor<T> forward(const nn::Tensor<T>& x, bool cache, std::vector<LayerTrace>* trace);
  nn::Tensor<T> backward(const nn::Tensor<T>& grad_out);
  void init(Rng& rng, double stddev);
  void collect(std::vector<nn::Parameter<T>*>& out);

 private:
  bool use_norm_ = true;
  nn::Conv2d<T> conv1_, conv2_;
  nn::InstanceNorm2d<T> norm1_, norm2_;
  nn::Activation<T> act1_{nn::ActivationKind::ReLU}, act2_{nn::ActivationKind::ReLU};
};

// Nested U-Net. Node X(i, j) sits at level i (resolution 2^-i) and column j.
// Column 0 is the encoder; X(i, j>0) consumes X(i, 0..j-1) and the upsampled
// X(i+1, j-1). X(0, depth-1) feeds a 1x1 convolution and tanh.
template <typename T>
class Generator {
 public:
  explicit Generator(GeneratorConfig cfg);

  const GeneratorConfig& config() const noexcept { return cfg_; }
  nn::Shape output_shape(const nn::Shape& in) const;

  nn::Tensor<T> forward(const nn::Tensor<T>& x, bool cache,
                        std::vector<LayerTrace>* trace = nullptr);
  // Accumulates parameter gradients; returns dL/dinput.
  nn::Tensor<T> backward(const nn::Tensor<T>& grad_out);

  void init(Rng& rng, double stddev = 0.02);
  std::vector<nn::Parameter<T>*> parameters();

 private:
  struct Node {
    bool active = false;
    ConvBlock<T> block;
    nn::ConvTranspose2d<T> up;  // unused in column 0
  };
  int index(int level, int column) const noexcept { return level * cfg_.depth + column; }
  std::vector<int> inputs_of(int level, int column) const;

  GeneratorConfig cfg_;
  std::vector<Node> nodes_;
  std::vector<nn::MaxPool2d<T>> pools_;
  nn::Conv2d<T> head_;
  nn::Activation<T> tanh_{nn::ActivationKind::Tanh};
  std::vector<nn::Shape> out_shapes_;
};

// Patch classifier over (source, candidate) stacked on channels. Produces one
// logit per overlapping receptive-field patch.
template <typename T>
class Discriminator {
 public:
  explicit Discriminator(DiscriminatorConfig cfg);

  const DiscriminatorConfig& config() const noexcept { return cfg_; }
  nn::Shape output_shape(const nn::Shape& in) const;

  nn::Tensor<T> forward(const nn::Tensor<T>& source, const nn::Tensor<T>& candidate,
                        bool cache, std::vector<LayerTrace>* trace = nullptr);
  // Returns dL/d(candidate); parameter gradients accumulate as usual.
  nn::Tensor<T> backward(const nn::Tensor<T>& grad_out);

  void init(Rng& rng, double stddev = 0.02);
  std::vector<nn::Parameter<T>*> parameters();

 private:
  struct Stage {
    nn::Conv2d<T> conv;
    bool norm = false;
    nn::InstanceNorm2d<T> inorm;
    bool act = false;
    nn::Activation<T> lrelu{nn::ActivationKind::LeakyReLU, T(0.2)};
  };

  DiscriminatorConfig cfg_;
  std::vector<Stage> stages_;
  int source_channels_ = 0;
};

}  // namespace tactile::gan
