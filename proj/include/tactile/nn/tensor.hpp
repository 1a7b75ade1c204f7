#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tactile::nn {

// NCHW extents.
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(c) *
           static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  }
  std::size_t plane() const noexcept {
    return static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  }
  std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{}) : shape_(shape), data_(shape.size(), fill) {}
  Tensor(Shape shape, std::vector<T> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> span() noexcept { return data_; }
  std::span<const T> span() const noexcept { return data_; }
  std::vector<T>& values() noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  T& at(int n, int c, int y, int x) noexcept { return data_[offset(n, c, y, x)]; }
  T at(int n, int c, int y, int x) const noexcept { return data_[offset(n, c, y, x)]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  T operator[](std::size_t i) const noexcept { return data_[i]; }

  void fill(T v);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t offset(int n, int c, int y, int x) const noexcept {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }

  Shape shape_;
  std::vector<T> data_;
};

// Channel concatenation along C; all inputs share N, H, W.
template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>* const> parts);

// Splits a gradient of a channel concatenation back into per-part gradients,
// accumulating into `grads[i]` (which must already have the part's shape).
template <typename T>
void split_channels_accumulate(const Tensor<T>& grad, std::span<Tensor<T>* const> grads);

template <typename T>
void add_inplace(Tensor<T>& dst, const Tensor<T>& src);

// A trainable array with its gradient accumulator.
template <typename T>
struct Parameter {
  std::string name;
  std::vector<int> dims;
  std::vector<T> value;
  std::vector<T> grad;

  Parameter() = default;
  Parameter(std::string name_, std::vector<int> dims_);
  std::size_t size() const noexcept { return value.size(); }
  void zero_grad();
};

}  // namespace tactile::nn
