#include "tactile/gan/networks.hpp"

#include <array>

#include "tactile/error.hpp"

namespace tactile::gan {

using nn::ConvGeometry;
using nn::Shape;
using nn::Tensor;

namespace {

constexpr ConvGeometry kConv3{3, 1, 1};
constexpr ConvGeometry kUp{2, 2, 0};
constexpr ConvGeometry kPoint{1, 1, 0};
constexpr ConvGeometry kPatchDown{4, 2, 1};
constexpr ConvGeometry kPatchFlat{4, 1, 1};

template <typename Layer, typename T>
Tensor<T> traced(Layer& layer, const Tensor<T>& x, bool cache, std::vector<LayerTrace>* trace,
                 const std::string& name, bool transposed) {
  Tensor<T> y = layer.forward(x, cache);
  if (trace) trace->push_back({name, transposed, layer.geometry(), x.shape(), y.shape()});
  return y;
}

}  // namespace

// ---------------------------------------------------------------------------

template <typename T>
ConvBlock<T>::ConvBlock(const std::string& name, int in_ch, int out_ch, NormKind norm)
    : use_norm_(norm == NormKind::Instance),
      conv1_(name + ".conv1", in_ch, out_ch, kConv3),
      conv2_(name + ".conv2", out_ch, out_ch, kConv3) {
  if (use_norm_) {
    norm1_ = nn::InstanceNorm2d<T>(name + ".norm1", out_ch);
    norm2_ = nn::InstanceNorm2d<T>(name + ".norm2", out_ch);
  }
}

template <typename T>
Tensor<T> ConvBlock<T>::forward(const Tensor<T>& x, bool cache, std::vector<LayerTrace>* trace) {
  Tensor<T> h = traced(conv1_, x, cache, trace, conv1_.weight.name, false);
  if (use_norm_) h = norm1_.forward(h, cache);
  h = act1_.forward(h, cache);
  h = traced(conv2_, h, cache, trace, conv2_.weight.name, false);
  if (use_norm_) h = norm2_.forward(h, cache);
  return act2_.forward(h, cache);
}

template <typename T>
Tensor<T> ConvBlock<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> g = act2_.backward(grad_out);
  if (use_norm_) g = norm2_.backward(g);
  g = conv2_.backward(g);
  g = act1_.backward(g);
  if (use_norm_) g = norm1_.backward(g);
  return conv1_.backward(g);
}

template <typename T>
void ConvBlock<T>::init(Rng& rng, double stddev) {
  conv1_.init_normal(rng, stddev);
  conv2_.init_normal(rng, stddev);
  if (use_norm_) {
    norm1_.init_normal(rng, stddev);
    norm2_.init_normal(rng, stddev);
  }
}

template <typename T>
void ConvBlock<T>::collect(std::vector<nn::Parameter<T>*>& out) {
  conv1_.collect(out);
  if (use_norm_) norm1_.collect(out);
  conv2_.collect(out);
  if (use_norm_) norm2_.collect(out);
}

// ---------------------------------------------------------------------------

template <typename T>
Generator<T>::Generator(GeneratorConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const int d = cfg_.depth;
  nodes_.resize(static_cast<std::size_t>(d) * d);
  pools_.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    Node& n = nodes_[index(i, 0)];
    n.active = true;
    const int in = i == 0 ? cfg_.in_channels : cfg_.channels(i - 1);
    n.block = ConvBlock<T>("g.x" + std::to_string(i) + "0", in, cfg_.channels(i), cfg_.norm);
  }
  for (int j = 1; j < d; ++j) {
    for (int i = 0; i + j < d; ++i) {
      if (!cfg_.nested && i + j != d - 1) continue;
      Node& n = nodes_[index(i, j)];
      n.active = true;
      const std::string tag = "g.x" + std::to_string(i) + std::to_string(j);
      const int c = cfg_.channels(i);
      const int skips = static_cast<int>(inputs_of(i, j).size());
      n.up = nn::ConvTranspose2d<T>(tag + ".up", cfg_.channels(i + 1), c, kUp);
      n.block = ConvBlock<T>(tag, skips * c + c, c, cfg_.norm);
    }
  }
  head_ = nn::Conv2d<T>("g.head", cfg_.channels(0), cfg_.out_channels, kPoint);
}

template <typename T>
std::vector<int> Generator<T>::inputs_of(int level, int column) const {
  std::vector<int> out;
  if (cfg_.nested) {
    for (int k = 0; k < column; ++k) out.push_back(index(level, k));
  } else {
    out.push_back(index(level, 0));
  }
  return out;
}

template <typename T>
Shape Generator<T>::output_shape(const Shape& in) const {
  const int m = cfg_.size_multiple();
  if (in.c != cfg_.in_channels) {
    throw Error(ErrorKind::Shape, "generator expects " + std::to_string(cfg_.in_channels) +
                                      " input channels, got " + in.str());
  }
  if (in.h <= 0 || in.w <= 0 || in.h % m != 0 || in.w % m != 0) {
    throw Error(ErrorKind::Shape, "generator input " + std::to_string(in.h) + "x" +
                                      std::to_string(in.w) +
                                      " violates the size constraint: height and width must "
                                      "be divisible by 2^(depth-1) = " +
                                      std::to_string(m));
  }
  return {in.n, cfg_.out_channels, in.h, in.w};
}

template <typename T>
Tensor<T> Generator<T>::forward(const Tensor<T>& x, bool cache, std::vector<LayerTrace>* trace) {
  output_shape(x.shape());
  const int d = cfg_.depth;
  std::vector<Tensor<T>> out(nodes_.size());
  for (int i = 0; i < d; ++i) {
    Node& n = nodes_[index(i, 0)];
    if (i == 0) {
      out[index(0, 0)] = n.block.forward(x, cache, trace);
    } else {
      Tensor<T> pooled = pools_[i].forward(out[index(i - 1, 0)], cache);
      out[index(i, 0)] = n.block.forward(pooled, cache, trace);
    }
  }
  for (int j = 1; j < d; ++j) {
    for (int i = 0; i + j < d; ++i) {
      Node& n = nodes_[index(i, j)];
      if (!n.active) continue;
      const std::string tag = "g.x" + std::to_string(i) + std::to_string(j);
      Tensor<T> up = traced(n.up, out[index(i + 1, j - 1)], cache, trace, tag + ".up", true);
      std::vector<const Tensor<T>*> parts;
      for (int k : inputs_of(i, j)) parts.push_back(&out[k]);
      parts.push_back(&up);
      out[index(i, j)] = n.block.forward(nn::concat_channels<T>(parts), cache, trace);
    }
  }
  Tensor<T> y = traced(head_, out[index(0, d - 1)], cache, trace, "g.head", false);
  y = tanh_.forward(y, cache);
  if (cache) {
    out_shapes_.assign(nodes_.size(), Shape{});
    for (std::size_t k = 0; k < out.size(); ++k) out_shapes_[k] = out[k].shape();
  }
  return y;
}

template <typename T>
Tensor<T> Generator<T>::backward(const Tensor<T>& grad_out) {
  if (out_shapes_.empty()) throw Error(ErrorKind::Shape, "generator backward without forward");
  const int d = cfg_.depth;
  std::vector<Tensor<T>> grad(nodes_.size());
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (nodes_[k].active) grad[k] = Tensor<T>(out_shapes_[k]);
  }
  grad[index(0, d - 1)] = head_.backward(tanh_.backward(grad_out));
  for (int j = d - 1; j >= 1; --j) {
    for (int i = d - 1 - j; i >= 0; --i) {
      Node& n = nodes_[index(i, j)];
      if (!n.active) continue;
      Tensor<T> gcat = n.block.backward(grad[index(i, j)]);
      std::vector<Tensor<T>*> parts;
      for (int k : inputs_of(i, j)) parts.push_back(&grad[k]);
      Shape up_shape = out_shapes_[index(i, 0)];
      Tensor<T> gup(up_shape);
      parts.push_back(&gup);
      nn::split_channels_accumulate<T>(gcat, parts);
      nn::add_inplace(grad[index(i + 1, j - 1)], n.up.backward(gup));
    }
  }
  for (int i = d - 1; i >= 1; --i) {
    Tensor<T> g = nodes_[index(i, 0)].block.backward(grad[index(i, 0)]);
    nn::add_inplace(grad[index(i - 1, 0)], pools_[i].backward(g));
  }
  return nodes_[index(0, 0)].block.backward(grad[index(0, 0)]);
}

template <typename T>
void Generator<T>::init(Rng& rng, double stddev) {
  for (auto& n : nodes_) {
    if (!n.active) continue;
    n.block.init(rng, stddev);
  }
  for (int j = 1; j < cfg_.depth; ++j) {
    for (int i = 0; i + j < cfg_.depth; ++i) {
      Node& n = nodes_[index(i, j)];
      if (n.active) n.up.init_normal(rng, stddev);
    }
  }
  head_.init_normal(rng, stddev);
}

template <typename T>
std::vector<nn::Parameter<T>*> Generator<T>::parameters() {
  std::vector<nn::Parameter<T>*> out;
  for (int i = 0; i < cfg_.depth; ++i) nodes_[index(i, 0)].block.collect(out);
  for (int j = 1; j < cfg_.depth; ++j) {
    for (int i = 0; i + j < cfg_.depth; ++i) {
      Node& n = nodes_[index(i, j)];
      if (!n.active) continue;
      n.up.collect(out);
      n.block.collect(out);
    }
  }
  head_.collect(out);
  return out;
}

// ---------------------------------------------------------------------------

template <typename T>
Discriminator<T>::Discriminator(DiscriminatorConfig cfg)
    : cfg_(cfg), source_channels_(cfg.in_channels / 2) {
  cfg_.validate();
  int in = cfg_.in_channels;
  for (int l = 0; l <= cfg_.stride2_layers; ++l) {
    Stage s;
    const int out = cfg_.channels(l);
    const ConvGeometry g = l < cfg_.stride2_layers ? kPatchDown : kPatchFlat;
    s.conv = nn::Conv2d<T>("d.c" + std::to_string(l), in, out, g);
    s.norm = l > 0 && cfg_.norm == NormKind::Instance;
    if (s.norm) s.inorm = nn::InstanceNorm2d<T>("d.n" + std::to_string(l), out);
    s.act = true;
    stages_.push_back(std::move(s));
    in = out;
  }
  Stage head;
  head.conv = nn::Conv2d<T>("d.head", in, 1, kPatchFlat);
  stages_.push_back(std::move(head));
}

template <typename T>
Shape Discriminator<T>::output_shape(const Shape& in) const {
  Shape s{in.n, 1, in.h, in.w};
  for (const auto& st : stages_) {
    s.h = st.conv.geometry().out_size(s.h);
    s.w = st.conv.geometry().out_size(s.w);
    if (s.h <= 0 || s.w <= 0) {
      throw Error(ErrorKind::Shape, "discriminator input " + std::to_string(in.h) + "x" +
                                        std::to_string(in.w) + " is too small");
    }
  }
  return s;
}

template <typename T>
Tensor<T> Discriminator<T>::forward(const Tensor<T>& source, const Tensor<T>& candidate,
                                    bool cache, std::vector<LayerTrace>* trace) {
  if (!(source.shape() == candidate.shape())) {
    throw Error(ErrorKind::Shape, "discriminator source " + source.shape().str() +
                                      " and candidate " + candidate.shape().str() +
                                      " differ in shape");
  }
  if (source.shape().c != source_channels_) {
    throw Error(ErrorKind::Shape, "discriminator expects " + std::to_string(source_channels_) +
                                      "-channel images, got " + source.shape().str());
  }
  output_shape(source.shape());
  std::array<const Tensor<T>*, 2> parts{&source, &candidate};
  Tensor<T> h = nn::concat_channels<T>(parts);
  for (auto& st : stages_) {
    h = traced(st.conv, h, cache, trace, st.conv.weight.name, false);
    if (st.norm) h = st.inorm.forward(h, cache);
    if (st.act) h = st.lrelu.forward(h, cache);
  }
  return h;
}

template <typename T>
Tensor<T> Discriminator<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> g = grad_out;
  for (auto it = stages_.rbegin(); it != stages_.rend(); ++it) {
    if (it->act) g = it->lrelu.backward(g);
    if (it->norm) g = it->inorm.backward(g);
    g = it->conv.backward(g);
  }
  const Shape& gs = g.shape();
  Shape half{gs.n, source_channels_, gs.h, gs.w};
  Tensor<T> gsrc(half), gcand(half);
  std::array<Tensor<T>*, 2> parts{&gsrc, &gcand};
  nn::split_channels_accumulate<T>(g, parts);
  return gcand;
}

template <typename T>
void Discriminator<T>::init(Rng& rng, double stddev) {
  for (auto& st : stages_) {
    st.conv.init_normal(rng, stddev);
    if (st.norm) st.inorm.init_normal(rng, stddev);
  }
}

template <typename T>
std::vector<nn::Parameter<T>*> Discriminator<T>::parameters() {
  std::vector<nn::Parameter<T>*> out;
  for (auto& st : stages_) {
    st.conv.collect(out);
    if (st.norm) st.inorm.collect(out);
  }
  return out;
}

template class ConvBlock<float>;
template class ConvBlock<double>;
template class Generator<float>;
template class Generator<double>;
template class Discriminator<float>;
template class Discriminator<double>;

}  // namespace tactile::gan
