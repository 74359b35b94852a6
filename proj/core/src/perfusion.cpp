#include <algorithm>
#include <array>
#include <string>

#include "thermoprint/errors.hpp"
#include "thermoprint/perfusion.hpp"

namespace thermoprint {

namespace {

// Clockwise from north: P2, P3, ..., P9 in Zhang-Suen notation.
constexpr std::array<std::array<int, 2>, 8> kRing = {{
    {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1},
}};

using Ring = std::array<std::uint8_t, 8>;

Ring ring_at(const BinaryImage& img, int r, int c) {
  Ring p{};
  for (std::size_t i = 0; i < 8; ++i) {
    p[i] = img.at_or_zero(r + kRing[i][0], c + kRing[i][1]);
  }
  return p;
}

int ring_count(const Ring& p) {
  int n = 0;
  for (auto v : p) n += v;
  return n;
}

int ring_transitions(const Ring& p) {
  int a = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    if (!p[i] && p[(i + 1) % 8]) ++a;
  }
  return a;
}

bool is_simple(const Ring& p) {
  const int b = ring_count(p);
  return b >= 2 && b <= 6 && ring_transitions(p) == 1;
}

bool zhang_suen_candidate(const Ring& p, int step) {
  if (!is_simple(p)) return false;
  const int p2 = p[0], p4 = p[2], p6 = p[4], p8 = p[6];
  if (step == 0) return p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0;
  return p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0;
}

// Number of 8-connected groups among the foreground ring cells, with the
// center excluded.
int ring_components(const Ring& p) {
  std::array<int, 8> group{};
  group.fill(-1);
  int groups = 0;
  for (std::size_t s = 0; s < 8; ++s) {
    if (!p[s] || group[s] >= 0) continue;
    std::array<std::size_t, 8> stack{};
    std::size_t top = 0;
    stack[top++] = s;
    group[s] = groups;
    while (top) {
      const auto i = stack[--top];
      for (std::size_t j = 0; j < 8; ++j) {
        if (!p[j] || group[j] >= 0) continue;
        const int dr = kRing[i][0] - kRing[j][0];
        const int dc = kRing[i][1] - kRing[j][1];
        if (dr >= -1 && dr <= 1 && dc >= -1 && dc <= 1) {
          group[j] = groups;
          stack[top++] = j;
        }
      }
    }
    ++groups;
  }
  return groups;
}

}  // namespace

std::string_view to_string(StructuringElement se) {
  return se == StructuringElement::cross3 ? "cross3" : "square3";
}

StructuringElement parse_structuring_element(std::string_view name) {
  if (name == "cross3") return StructuringElement::cross3;
  if (name == "square3") return StructuringElement::square3;
  throw ConfigError("unknown structuring element '" + std::string(name) +
                    "' (expected cross3 or square3)");
}

void PerfusionConfig::validate() const {
  if (erosion_iterations < 0 || erosion_iterations > kMaxErosionIterations) {
    throw ConfigError("erosion iterations must be in [0, " +
                      std::to_string(kMaxErosionIterations) + "], got " +
                      std::to_string(erosion_iterations));
  }
}

BinaryImage erode(const BinaryImage& img, StructuringElement se, int iterations) {
  if (iterations < 0) throw ConfigError("erosion iterations must be >= 0");
  BinaryImage current = img;
  for (int it = 0; it < iterations; ++it) {
    BinaryImage next(current.width(), current.height());
    for (int r = 0; r < current.height(); ++r) {
      for (int c = 0; c < current.width(); ++c) {
        if (!current(r, c)) continue;
        bool fits = current.at_or_zero(r - 1, c) && current.at_or_zero(r + 1, c) &&
                    current.at_or_zero(r, c - 1) && current.at_or_zero(r, c + 1);
        if (fits && se == StructuringElement::square3) {
          fits = current.at_or_zero(r - 1, c - 1) &&
                 current.at_or_zero(r - 1, c + 1) &&
                 current.at_or_zero(r + 1, c - 1) && current.at_or_zero(r + 1, c + 1);
        }
        if (fits) next.set(r, c, 1);
      }
    }
    current = std::move(next);
  }
  return current;
}

BinaryImage zhang_suen_thin(const BinaryImage& img) {
  BinaryImage out = img;
  const int w = out.width();
  const int h = out.height();
  const auto n = out.size();

  // Only pixels touching background can ever be deleted; track them.
  std::vector<std::uint8_t> tracked(n, 0);
  std::vector<std::size_t> frontier;
  auto track = [&](int r, int c) {
    const auto i = out.index(r, c);
    if (out(r, c) && !tracked[i]) {
      tracked[i] = 1;
      frontier.push_back(i);
    }
  };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (out(r, c) && ring_count(ring_at(out, r, c)) < 8) track(r, c);
    }
  }

  std::vector<std::size_t> candidates;
  std::vector<std::size_t> deleted;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int step = 0; step < 2; ++step) {
      std::sort(frontier.begin(), frontier.end());
      candidates.clear();
      for (auto i : frontier) {
        const int r = static_cast<int>(i / static_cast<std::size_t>(w));
        const int c = static_cast<int>(i % static_cast<std::size_t>(w));
        if (zhang_suen_candidate(ring_at(out, r, c), step)) candidates.push_back(i);
      }
      deleted.clear();
      for (auto i : candidates) {
        const int r = static_cast<int>(i / static_cast<std::size_t>(w));
        const int c = static_cast<int>(i % static_cast<std::size_t>(w));
        if (is_simple(ring_at(out, r, c))) {
          out.set(r, c, 0);
          deleted.push_back(i);
        }
      }
      if (deleted.empty()) continue;
      changed = true;
      std::erase_if(frontier, [&](std::size_t i) { return out.data()[i] == 0; });
      for (auto i : deleted) {
        const int r = static_cast<int>(i / static_cast<std::size_t>(w));
        const int c = static_cast<int>(i % static_cast<std::size_t>(w));
        for (const auto& d : kRing) {
          if (out.contains(r + d[0], c + d[1])) track(r + d[0], c + d[1]);
        }
      }
    }
  }
  return out;
}

BinaryImage remove_redundant_pixels(const BinaryImage& skeleton) {
  BinaryImage out = skeleton;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int r = 0; r < out.height(); ++r) {
      for (int c = 0; c < out.width(); ++c) {
        if (!out(r, c)) continue;
        const auto ring = ring_at(out, r, c);
        if (ring_count(ring) >= 2 && ring_components(ring) == 1) {
          out.set(r, c, 0);
          changed = true;
        }
      }
    }
  }
  return out;
}

BinaryImage medial_axis(const BinaryImage& img) {
  return remove_redundant_pixels(zhang_suen_thin(img));
}

BinaryImage extract_perfusion(const BinaryImage& mask, const PerfusionConfig& cfg) {
  cfg.validate();
  BinaryImage eroded = erode(mask, cfg.structuring_element, cfg.erosion_iterations);
  if (count_foreground(eroded) == 0) {
    throw ErodedToEmptyError(cfg.erosion_iterations);
  }
  return medial_axis(eroded);
}

std::size_t count_full_2x2_blocks(const BinaryImage& img) {
  std::size_t blocks = 0;
  for (int r = 0; r + 1 < img.height(); ++r) {
    for (int c = 0; c + 1 < img.width(); ++c) {
      if (img(r, c) && img(r, c + 1) && img(r + 1, c) && img(r + 1, c + 1)) {
        ++blocks;
      }
    }
  }
  return blocks;
}

}  // namespace thermoprint
