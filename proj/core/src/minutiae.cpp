#include "thermoprint/minutiae.hpp"

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "thermoprint/errors.hpp"

namespace thermoprint {

namespace {

bool raster_less(const MinutiaPoint& a, const MinutiaPoint& b) {
  return a.row != b.row ? a.row < b.row : a.col < b.col;
}

}  // namespace

std::string_view to_string(PixelClass cls) {
  switch (cls) {
    case PixelClass::background: return "background";
    case PixelClass::termination: return "termination";
    case PixelClass::bifurcation: return "bifurcation";
    case PixelClass::normal: return "normal";
    case PixelClass::other: return "other";
  }
  return "other";
}

void PruneConfig::validate(int width, int height) const {
  const int limit = std::min(width, height) / 2;
  if (border_margin < 0 || min_separation < 0 || border_margin > limit ||
      min_separation > limit) {
    throw ConfigError("prune parameters must lie in [0, " + std::to_string(limit) +
                      "] for a " + std::to_string(width) + "x" +
                      std::to_string(height) + " image");
  }
}

PixelClass classify_pixel(const Window3x3& window) {
  if (!window[4]) return PixelClass::background;
  int n = 0;
  for (std::size_t i = 0; i < 9; ++i) {
    if (i != 4 && window[i]) ++n;
  }
  switch (n) {
    case 1: return PixelClass::termination;
    case 2: return PixelClass::normal;
    case 3: return PixelClass::bifurcation;
    default: return PixelClass::other;
  }
}

Window3x3 window_at(const BinaryImage& img, int row, int col) {
  Window3x3 w{};
  std::size_t k = 0;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) w[k++] = img.at_or_zero(row + dr, col + dc);
  }
  return w;
}

std::vector<MinutiaPoint> extract_minutiae(const BinaryImage& skeleton) {
  std::vector<MinutiaPoint> points;
  for (int r = 0; r < skeleton.height(); ++r) {
    for (int c = 0; c < skeleton.width(); ++c) {
      if (!skeleton(r, c)) continue;
      switch (classify_pixel(window_at(skeleton, r, c))) {
        case PixelClass::termination:
          points.push_back({r, c, MinutiaKind::termination});
          break;
        case PixelClass::bifurcation:
          points.push_back({r, c, MinutiaKind::bifurcation});
          break;
        default:
          break;
      }
    }
  }
  return points;
}

std::vector<MinutiaPoint> prune_minutiae(std::vector<MinutiaPoint> points,
                                         int width, int height,
                                         const PruneConfig& cfg) {
  cfg.validate(width, height);
  for (const auto& p : points) {
    if (p.row < 0 || p.row >= height || p.col < 0 || p.col >= width) {
      throw BoundsError("minutia (" + std::to_string(p.row) + ", " +
                        std::to_string(p.col) + ") outside " +
                        std::to_string(width) + "x" + std::to_string(height));
    }
  }

  const int m = cfg.border_margin;
  std::erase_if(points, [&](const MinutiaPoint& p) {
    return p.row < m || p.col < m || p.row >= height - m || p.col >= width - m;
  });
  std::stable_sort(points.begin(), points.end(), raster_less);

  if (cfg.min_separation > 0) {
    std::vector<std::uint8_t> marked(points.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i + 1; j < points.size(); ++j) {
        const int dr = points[j].row - points[i].row;
        if (dr >= cfg.min_separation) break;
        if (std::abs(points[j].col - points[i].col) < cfg.min_separation) {
          marked[i] = marked[j] = 1;
        }
      }
    }
    std::vector<MinutiaPoint> kept;
    kept.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!marked[i]) kept.push_back(points[i]);
    }
    points = std::move(kept);
  }
  return points;
}

MinutiaeCounts count_kinds(const std::vector<MinutiaPoint>& points) {
  MinutiaeCounts counts;
  for (const auto& p : points) {
    if (p.kind == MinutiaKind::termination) {
      ++counts.terminations;
    } else {
      ++counts.bifurcations;
    }
  }
  return counts;
}

void write_minutiae(std::ostream& out, const std::vector<MinutiaPoint>& points) {
  for (const auto& p : points) {
    out << p.row << ' ' << p.col << ' '
        << (p.kind == MinutiaKind::termination ? 'T' : 'B') << '\n';
  }
}

std::vector<MinutiaPoint> read_minutiae(std::istream& in) {
  std::vector<MinutiaPoint> points;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    MinutiaPoint p;
    std::string kind;
    std::string extra;
    if (!(fields >> p.row >> p.col >> kind) || (fields >> extra) ||
        (kind != "T" && kind != "B")) {
      throw FormatError("malformed minutiae line " + std::to_string(line_no) +
                        ": '" + line + "'");
    }
    p.kind = kind == "T" ? MinutiaKind::termination : MinutiaKind::bifurcation;
    points.push_back(p);
  }
  return points;
}

GrayImage minutiae_overlay(const BinaryImage& skeleton,
                           const std::vector<MinutiaPoint>& points) {
  GrayImage out(skeleton.width(), skeleton.height());
  for (int r = 0; r < skeleton.height(); ++r) {
    for (int c = 0; c < skeleton.width(); ++c) {
      if (skeleton(r, c)) out.set(r, c, 96);
    }
  }
  for (const auto& p : points) {
    const std::uint8_t mark = p.kind == MinutiaKind::termination ? 255 : 160;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (out.contains(p.row + dr, p.col + dc)) out.set(p.row + dr, p.col + dc, mark);
      }
    }
  }
  return out;
}

}  // namespace thermoprint
