#include "thermoprint/image.hpp"

#include <algorithm>
#include <string>
#include <type_traits>

#include "thermoprint/errors.hpp"

namespace thermoprint {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw DomainError("image dimensions must be positive, got " +
                      std::to_string(width) + "x" + std::to_string(height));
  }
}

}  // namespace

template <typename Tag>
Raster<Tag>::Raster(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  if constexpr (std::is_same_v<Tag, BinaryTag>) {
    if (fill > 1) throw DomainError("binary fill value must be 0 or 1");
  }
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
               fill);
}

template <typename Tag>
Raster<Tag>::Raster(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() !=
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw DomainError("pixel count " + std::to_string(data_.size()) +
                      " does not match " + std::to_string(width) + "x" +
                      std::to_string(height));
  }
  if constexpr (std::is_same_v<Tag, BinaryTag>) {
    if (std::any_of(data_.begin(), data_.end(), [](auto v) { return v > 1; })) {
      throw DomainError("binary image values must be 0 or 1");
    }
  }
}

template <typename Tag>
void Raster<Tag>::set(int row, int col, std::uint8_t value) {
  if constexpr (std::is_same_v<Tag, BinaryTag>) {
    value = value ? 1 : 0;
  }
  data_[index(row, col)] = value;
}

template class Raster<GrayTag>;
template class Raster<BinaryTag>;

std::size_t count_foreground(const BinaryImage& img) {
  return static_cast<std::size_t>(
      std::count(img.data().begin(), img.data().end(), std::uint8_t{1}));
}

bool is_subset(const BinaryImage& inner, const BinaryImage& outer) {
  if (inner.width() != outer.width() || inner.height() != outer.height()) {
    return false;
  }
  auto a = inner.pixels();
  auto b = outer.pixels();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && !b[i]) return false;
  }
  return true;
}

}  // namespace thermoprint
