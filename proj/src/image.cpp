#include "tactile/image.hpp"

#include <string>

#include "tactile/error.hpp"

namespace tactile {

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::Shape, "image dimensions must be positive, got " +
                                      std::to_string(width) + "x" + std::to_string(height));
  }
  data_.resize(pixel_count() * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill[0];
    data_[i + 1] = fill[1];
    data_[i + 2] = fill[2];
  }
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::Shape, "image dimensions must be positive, got " +
                                      std::to_string(width) + "x" + std::to_string(height));
  }
  if (data_.size() != pixel_count() * 3) {
    throw Error(ErrorKind::Shape, "image buffer holds " + std::to_string(data_.size()) +
                                      " bytes, expected " + std::to_string(pixel_count() * 3));
  }
}

}  // namespace tactile
