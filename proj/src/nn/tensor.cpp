#include "tactile/nn/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "tactile/error.hpp"

namespace tactile::nn {

std::string Shape::str() const {
  return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
         std::to_string(w);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw Error(ErrorKind::Shape, "tensor data size " + std::to_string(data_.size()) +
                                      " does not match shape " + shape_.str());
  }
}

template <typename T>
void Tensor<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>* const> parts) {
  if (parts.empty()) throw Error(ErrorKind::Shape, "concat of zero tensors");
  Shape out = parts[0]->shape();
  out.c = 0;
  for (const auto* p : parts) {
    const Shape& s = p->shape();
    if (s.n != out.n || s.h != out.h || s.w != out.w) {
      throw Error(ErrorKind::Shape,
                  "concat: " + s.str() + " does not match " + parts[0]->shape().str());
    }
    out.c += s.c;
  }
  Tensor<T> result(out);
  const std::size_t plane = out.plane();
  for (int n = 0; n < out.n; ++n) {
    T* dst = result.data() + static_cast<std::size_t>(n) * out.c * plane;
    for (const auto* p : parts) {
      const std::size_t len = static_cast<std::size_t>(p->shape().c) * plane;
      const T* src = p->data() + static_cast<std::size_t>(n) * len;
      dst = std::copy(src, src + len, dst);
    }
  }
  return result;
}

template <typename T>
void split_channels_accumulate(const Tensor<T>& grad, std::span<Tensor<T>* const> grads) {
  const Shape& gs = grad.shape();
  const std::size_t plane = gs.plane();
  std::size_t channel_offset = 0;
  for (auto* g : grads) {
    const Shape& s = g->shape();
    const std::size_t len = static_cast<std::size_t>(s.c) * plane;
    for (int n = 0; n < gs.n; ++n) {
      const T* src =
          grad.data() + (static_cast<std::size_t>(n) * gs.c + channel_offset) * plane;
      T* dst = g->data() + static_cast<std::size_t>(n) * len;
      for (std::size_t i = 0; i < len; ++i) dst[i] += src[i];
    }
    channel_offset += static_cast<std::size_t>(s.c);
  }
  if (channel_offset != static_cast<std::size_t>(gs.c)) {
    throw Error(ErrorKind::Shape, "split: part channels do not sum to " + std::to_string(gs.c));
  }
}

template <typename T>
void add_inplace(Tensor<T>& dst, const Tensor<T>& src) {
  if (!(dst.shape() == src.shape())) {
    throw Error(ErrorKind::Shape, "add: " + dst.shape().str() + " vs " + src.shape().str());
  }
  T* d = dst.data();
  const T* s = src.data();
  const std::size_t n = dst.size();
  for (std::size_t i = 0; i < n; ++i) d[i] += s[i];
}

template <typename T>
Parameter<T>::Parameter(std::string name_, std::vector<int> dims_)
    : name(std::move(name_)), dims(std::move(dims_)) {
  const std::size_t count = std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                                            [](std::size_t a, int b) { return a * b; });
  value.assign(count, T{});
  grad.assign(count, T{});
}

template <typename T>
void Parameter<T>::zero_grad() {
  std::fill(grad.begin(), grad.end(), T{});
}

#define TACTILE_INSTANTIATE(T)                                                          \
  template class Tensor<T>;                                                             \
  template struct Parameter<T>;                                                         \
  template Tensor<T> concat_channels<T>(std::span<const Tensor<T>* const>);             \
  template void split_channels_accumulate<T>(const Tensor<T>&, std::span<Tensor<T>* const>); \
  template void add_inplace<T>(Tensor<T>&, const Tensor<T>&);

TACTILE_INSTANTIATE(float)
TACTILE_INSTANTIATE(double)
#undef TACTILE_INSTANTIATE

}  // namespace tactile::nn
