#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "thermoprint/image.hpp"

namespace thermoprint {

/// Connected-component labeling result. Label 0 is background; components
/// are numbered 1..K in raster order of their first pixel.
struct LabelImage {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;
  // component_sizes[k - 1] is the pixel count of label k.
  std::vector<std::size_t> component_sizes;

  std::size_t component_count() const noexcept { return component_sizes.size(); }
  std::int32_t operator()(int row, int col) const {
    return labels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(col)];
  }
};

/// Inclusive bounds of a crop within the source image.
struct CropRect {
  int top = 0;
  int bottom = 0;
  int left = 0;
  int right = 0;

  int width() const noexcept { return right - left + 1; }
  int height() const noexcept { return bottom - top + 1; }
  friend bool operator==(const CropRect&, const CropRect&) = default;
};

struct SegmentedFace {
  BinaryImage mask;
  CropRect crop;
};

// Strictly-greater-than-mean threshold, evaluated in exact integer
// arithmetic as pixel * N > sum.
BinaryImage binarize_mean(const GrayImage& img);

// Two-pass 8-connected labeling with union-find.
LabelImage label_components_8(const BinaryImage& img);

// Keeps only the largest component; ties go to the smallest label.
// Throws NoFaceError when there is no foreground.
BinaryImage largest_component(const LabelImage& labels);

// Tight bounding-box crop of the foreground. Throws NoFaceError when empty.
SegmentedFace crop_to_face(const BinaryImage& mask);

BinaryImage crop(const BinaryImage& img, const CropRect& rect);

// binarize_mean -> label_components_8 -> largest_component -> crop_to_face
SegmentedFace segment_face(const GrayImage& img);

}  // namespace thermoprint
