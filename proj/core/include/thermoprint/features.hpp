#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "thermoprint/minutiae.hpp"

namespace thermoprint {

/// Minutiae counts over a grid x grid partition of the image plane,
/// raster order over cells.
struct FeatureVector {
  int grid = 0;
  std::vector<std::uint32_t> counts;
  std::optional<int> label;

  std::size_t total() const noexcept;
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct DatasetSplit {
  std::vector<FeatureVector> train;
  std::vector<FeatureVector> test;
  std::uint64_t seed = 0;
  double train_fraction = 0.5;
};

// Point (r, c) lands in cell (floor(r * grid / height), floor(c * grid / width)).
// Requires width, height >= grid; throws BoundsError for points outside.
FeatureVector block_features(const std::vector<MinutiaPoint>& points, int width,
                             int height, int grid);

// Stratified, seeded split: each class contributes ceil(fraction * size)
// samples to train. Both halves keep the input order.
DatasetSplit split_dataset(const std::vector<FeatureVector>& vectors,
                           double train_fraction, std::uint64_t seed);

// Header "label,n=<count>", then "label,c0,...,c(n-1)" per sample. An
// unlabeled sample has an empty label field.
void write_feature_csv(std::ostream& out, const std::vector<FeatureVector>& vectors,
                       std::size_t feature_count);
struct FeatureTable {
  std::size_t feature_count = 0;
  std::vector<FeatureVector> rows;
};
// feature_count must be a perfect square (grid * grid).
FeatureTable read_feature_csv(std::istream& in);

}  // namespace thermoprint
