#include "thermoprint/segmentation.hpp"

#include <algorithm>
#include <numeric>

#include "thermoprint/errors.hpp"

namespace thermoprint {

namespace {

class DisjointSet {
 public:
  std::int32_t make() {
    parent_.push_back(static_cast<std::int32_t>(parent_.size()));
    return parent_.back();
  }

  std::int32_t find(std::int32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // The smaller root wins so provisional labels stay in raster order.
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) {
      parent_[b] = a;
    } else {
      parent_[a] = b;
    }
  }

  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::int32_t> parent_;
};

}  // namespace

BinaryImage binarize_mean(const GrayImage& img) {
  const auto px = img.pixels();
  const std::uint64_t sum =
      std::accumulate(px.begin(), px.end(), std::uint64_t{0});
  const std::uint64_t n = px.size();
  std::vector<std::uint8_t> out(px.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    out[i] = static_cast<std::uint64_t>(px[i]) * n > sum ? 1 : 0;
  }
  return BinaryImage(img.width(), img.height(), std::move(out));
}

LabelImage label_components_8(const BinaryImage& img) {
  const int w = img.width();
  const int h = img.height();
  LabelImage result{w, h, std::vector<std::int32_t>(img.size(), 0), {}};
  auto& labels = result.labels;

  // Provisional labels start at 1; slot 0 is a dummy so indices line up.
  DisjointSet sets;
  sets.make();

  auto label_at = [&](int r, int c) -> std::int32_t {
    if (r < 0 || c < 0 || c >= w) return 0;
    return labels[img.index(r, c)];
  };

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!img(r, c)) continue;
      // Already-visited neighbors: W, NW, N, NE.
      const std::int32_t neighbors[4] = {label_at(r, c - 1), label_at(r - 1, c - 1),
                                         label_at(r - 1, c), label_at(r - 1, c + 1)};
      std::int32_t current = 0;
      for (auto n : neighbors) {
        if (!n) continue;
        if (!current) {
          current = n;
        } else {
          sets.unite(current, n);
        }
      }
      if (!current) current = sets.make();
      labels[img.index(r, c)] = current;
    }
  }

  // Final ids follow the raster order of each component's first pixel.
  std::vector<std::int32_t> remap(sets.size(), 0);
  for (auto& l : labels) {
    if (!l) continue;
    const auto root = sets.find(l);
    if (!remap[root]) {
      result.component_sizes.push_back(0);
      remap[root] = static_cast<std::int32_t>(result.component_sizes.size());
    }
    l = remap[root];
    ++result.component_sizes[static_cast<std::size_t>(l - 1)];
  }
  return result;
}

BinaryImage largest_component(const LabelImage& lbl) {
  if (lbl.component_sizes.empty()) throw NoFaceError();
  const auto best = std::max_element(lbl.component_sizes.begin(),
                                     lbl.component_sizes.end());
  const auto keep =
      static_cast<std::int32_t>(best - lbl.component_sizes.begin()) + 1;
  std::vector<std::uint8_t> out(lbl.labels.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = lbl.labels[i] == keep ? 1 : 0;
  }
  return BinaryImage(lbl.width, lbl.height, std::move(out));
}

BinaryImage crop(const BinaryImage& img, const CropRect& rect) {
  if (rect.top < 0 || rect.left < 0 || rect.bottom >= img.height() ||
      rect.right >= img.width() || rect.top > rect.bottom ||
      rect.left > rect.right) {
    throw BoundsError("crop rectangle outside image");
  }
  BinaryImage out(rect.width(), rect.height());
  for (int r = rect.top; r <= rect.bottom; ++r) {
    for (int c = rect.left; c <= rect.right; ++c) {
      out.set(r - rect.top, c - rect.left, img(r, c));
    }
  }
  return out;
}

SegmentedFace crop_to_face(const BinaryImage& mask) {
  CropRect rect{mask.height(), -1, mask.width(), -1};
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask(r, c)) continue;
      rect.top = std::min(rect.top, r);
      rect.bottom = std::max(rect.bottom, r);
      rect.left = std::min(rect.left, c);
      rect.right = std::max(rect.right, c);
    }
  }
  if (rect.bottom < 0) throw NoFaceError();
  return {crop(mask, rect), rect};
}

SegmentedFace segment_face(const GrayImage& img) {
  return crop_to_face(largest_component(label_components_8(binarize_mean(img))));
}

}  // namespace thermoprint
