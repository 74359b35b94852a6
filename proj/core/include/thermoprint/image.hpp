#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace thermoprint {

struct Pixel {
  int row = 0;
  int col = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

struct GrayTag {};
struct BinaryTag {};

/// Row-major 8-bit raster. The tag keeps gray and binary images distinct
/// types; a BinaryImage only ever holds 0 or 1.
template <typename Tag>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, std::uint8_t fill = 0);
  Raster(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::uint8_t operator()(int row, int col) const {
    return data_[index(row, col)];
  }
  void set(int row, int col, std::uint8_t value);

  bool contains(int row, int col) const noexcept {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }
  // Out-of-bounds reads see background.
  std::uint8_t at_or_zero(int row, int col) const noexcept {
    return contains(row, col) ? data_[index(row, col)] : 0;
  }

  std::span<const std::uint8_t> pixels() const noexcept { return data_; }
  const std::vector<std::uint8_t>& data() const noexcept { return data_; }

  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

using GrayImage = Raster<GrayTag>;
using BinaryImage = Raster<BinaryTag>;

extern template class Raster<GrayTag>;
extern template class Raster<BinaryTag>;

std::size_t count_foreground(const BinaryImage& img);

// True when every foreground pixel of `inner` is foreground in `outer`.
bool is_subset(const BinaryImage& inner, const BinaryImage& outer);

}  // namespace thermoprint
