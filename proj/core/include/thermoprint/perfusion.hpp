#pragma once

#include <string_view>

#include "thermoprint/image.hpp"

namespace thermoprint {

enum class StructuringElement {
  cross3,   // center + 4-neighborhood
  square3,  // full 3x3
};

std::string_view to_string(StructuringElement se);
// Accepts "cross3" / "square3"; throws ConfigError otherwise.
StructuringElement parse_structuring_element(std::string_view name);

struct PerfusionConfig {
  static constexpr int kMaxErosionIterations = 16;

  int erosion_iterations = 1;
  StructuringElement structuring_element = StructuringElement::cross3;

  void validate() const;
};

// Binary erosion with background padding, applied `iterations` times.
BinaryImage erode(const BinaryImage& img, StructuringElement se, int iterations);

// Zhang-Suen thinning. Each sub-iteration selects candidates against the
// pre-pass state, then deletes them in raster order, re-checking that the
// pixel is still simple (one 0->1 transition, 2..6 neighbors) so that thin
// structures such as 2x2 blocks never vanish.
BinaryImage zhang_suen_thin(const BinaryImage& img);

// Deletes, in raster order, every pixel with at least two neighbors whose
// neighbors remain one 8-connected group without it. Repeats until stable.
// This clears full 2x2 blocks and 4-connected staircase corners, leaving an
// 8-minimal skeleton; endpoints are never touched.
BinaryImage remove_redundant_pixels(const BinaryImage& skeleton);

// Thinning followed by the redundancy post-pass.
BinaryImage medial_axis(const BinaryImage& img);

// erode then medial_axis. Throws ErodedToEmptyError if nothing survives
// erosion.
BinaryImage extract_perfusion(const BinaryImage& mask, const PerfusionConfig& cfg);

// Number of 2x2 windows that are entirely foreground.
std::size_t count_full_2x2_blocks(const BinaryImage& img);

}  // namespace thermoprint
