#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "thermoprint/image.hpp"

namespace thermoprint {

enum class PixelClass { background, termination, bifurcation, normal, other };
enum class MinutiaKind { termination, bifurcation };

std::string_view to_string(PixelClass cls);

struct MinutiaPoint {
  int row = 0;
  int col = 0;
  MinutiaKind kind = MinutiaKind::termination;

  friend bool operator==(const MinutiaPoint&, const MinutiaPoint&) = default;
};

struct PruneConfig {
  int border_margin = 2;
  int min_separation = 4;

  // Both values must be >= 0 and <= min(width, height) / 2.
  void validate(int width, int height) const;
};

/// Row-major 3x3 neighborhood; index 4 is the center.
using Window3x3 = std::array<std::uint8_t, 9>;

// Counts foreground among the 8 neighbors of a set center:
// 1 -> termination, 2 -> normal, 3 -> bifurcation, 0 or >= 4 -> other.
PixelClass classify_pixel(const Window3x3& window);

Window3x3 window_at(const BinaryImage& img, int row, int col);

// Terminations and bifurcations of a skeleton in raster order. Pixels on the
// image border see background beyond the edge.
std::vector<MinutiaPoint> extract_minutiae(const BinaryImage& skeleton);

// Drops points within border_margin of an edge, then removes both members of
// every pair closer than min_separation (Chebyshev). Output is raster order
// regardless of input order.
std::vector<MinutiaPoint> prune_minutiae(std::vector<MinutiaPoint> points,
                                         int width, int height,
                                         const PruneConfig& cfg);

struct MinutiaeCounts {
  std::size_t terminations = 0;
  std::size_t bifurcations = 0;
};
MinutiaeCounts count_kinds(const std::vector<MinutiaPoint>& points);

// One "row col kind" line per point, kind in {T, B}.
void write_minutiae(std::ostream& out, const std::vector<MinutiaPoint>& points);
std::vector<MinutiaPoint> read_minutiae(std::istream& in);

// Gray rendering of the skeleton with minutiae marked: ridge pixels 96,
// bifurcations 160, terminations 255 (3x3 marks).
GrayImage minutiae_overlay(const BinaryImage& skeleton,
                           const std::vector<MinutiaPoint>& points);

}  // namespace thermoprint
