#include "thermoprint/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

#include "thermoprint/errors.hpp"
#include "thermoprint/pgm.hpp"
#include "thermoprint/rng.hpp"

namespace thermoprint {

namespace {

// Each vessel is a bright lumen bounded by dark walls; the walls are the
// ridge strokes. After erosion and thinning the lumen collapses onto the
// vessel centerline.
constexpr double kLumenRadius = 2.0;
constexpr double kWallRadius = 5.0;
// Walls are left open around the root so the lumen joins the face region.
constexpr double kOpeningRadius = 5.5;
constexpr double kClearance = 14.0;
constexpr double kFaceAxisFraction = 0.45;
constexpr double kInnerMargin = kWallRadius + 5.0;
constexpr int kTreeAttempts = 400;
constexpr int kBranchAttempts = 60;

struct Point {
  double row = 0.0;
  double col = 0.0;
};

struct Node {
  Point at;
  int parent = -1;
  double direction = 0.0;  // radians, of the edge arriving at this node
  int children = 0;
};

struct Ellipse {
  double cy, cx, ry, rx;

  bool contains(Point p) const {
    const double dy = (p.row - cy) / ry;
    const double dx = (p.col - cx) / rx;
    return dy * dy + dx * dx <= 1.0;
  }
};

Ellipse face_ellipse(const IdentitySpec& spec) {
  return {(spec.height - 1) / 2.0, (spec.width - 1) / 2.0,
          kFaceAxisFraction * spec.height, kFaceAxisFraction * spec.width};
}

Ellipse tree_region(const IdentitySpec& spec) {
  auto e = face_ellipse(spec);
  e.ry -= kInnerMargin;
  e.rx -= kInnerMargin;
  return e;
}

double point_segment_distance(Point p, Point a, Point b) {
  const double vy = b.row - a.row, vx = b.col - a.col;
  const double len2 = vy * vy + vx * vx;
  double t = 0.0;
  if (len2 > 0.0) {
    t = std::clamp(((p.row - a.row) * vy + (p.col - a.col) * vx) / len2, 0.0, 1.0);
  }
  const double dy = p.row - (a.row + t * vy), dx = p.col - (a.col + t * vx);
  return std::sqrt(dy * dy + dx * dx);
}

double cross(Point o, Point a, Point b) {
  return (a.col - o.col) * (b.row - o.row) - (a.row - o.row) * (b.col - o.col);
}

double segment_distance(Point a, Point b, Point c, Point d) {
  const double d1 = cross(a, b, c), d2 = cross(a, b, d);
  const double d3 = cross(c, d, a), d4 = cross(c, d, b);
  if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

Point step(Point from, double direction, double length) {
  return {from.row + length * std::sin(direction), from.col + length * std::cos(direction)};
}

// Edge i connects nodes[i].parent -> i, for i >= 1.
bool clear_of_tree(const std::vector<Node>& nodes, int joint, Point a, Point b) {
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const int p = nodes[i].parent;
    if (p == joint || static_cast<int>(i) == joint) continue;
    if (segment_distance(a, b, nodes[static_cast<std::size_t>(p)].at, nodes[i].at) <
        kClearance) {
      return false;
    }
  }
  return true;
}

std::vector<Node> grow_tree(const IdentitySpec& spec) {
  SplitMix64 rng(spec.identity_seed);
  const auto region = tree_region(spec);
  const double lo = spec.arm_length_min, hi = spec.arm_length_max;

  for (int attempt = 0; attempt < kTreeAttempts; ++attempt) {
    std::vector<Node> nodes;
    Node root;
    root.at = {region.cy + rng.uniform(-0.4, 0.4) * region.ry,
               region.cx + rng.uniform(-0.4, 0.4) * region.rx};
    nodes.push_back(root);
    if (spec.branch_count == 0) return nodes;

    Node trunk;
    trunk.direction = rng.uniform(0.0, 2.0 * std::numbers::pi);
    trunk.at = step(root.at, trunk.direction, rng.uniform(lo, hi));
    trunk.parent = 0;
    if (!region.contains(trunk.at)) continue;
    nodes[0].children = 1;
    nodes.push_back(trunk);

    bool grown = true;
    for (int b = 0; b < spec.branch_count && grown; ++b) {
      grown = false;
      for (int t = 0; t < kBranchAttempts && !grown; ++t) {
        std::vector<int> leaves;
        for (std::size_t i = 1; i < nodes.size(); ++i) {
          if (nodes[i].children == 0) leaves.push_back(static_cast<int>(i));
        }
        const int leaf = leaves[rng.below(leaves.size())];
        const Point base = nodes[static_cast<std::size_t>(leaf)].at;
        const double heading = nodes[static_cast<std::size_t>(leaf)].direction;
        const double deg = std::numbers::pi / 180.0;
        const double left_dir = heading + rng.uniform(25.0, 55.0) * deg;
        const double right_dir = heading - rng.uniform(25.0, 55.0) * deg;
        const Point left = step(base, left_dir, rng.uniform(lo, hi));
        const Point right = step(base, right_dir, rng.uniform(lo, hi));
        if (!region.contains(left) || !region.contains(right)) continue;
        if (!clear_of_tree(nodes, leaf, base, left) ||
            !clear_of_tree(nodes, leaf, base, right)) {
          continue;
        }
        nodes[static_cast<std::size_t>(leaf)].children = 2;
        nodes.push_back({left, leaf, left_dir, 0});
        nodes.push_back({right, leaf, right_dir, 0});
        grown = true;
      }
    }
    if (grown) return nodes;
  }
  throw GeometryError("could not place a vessel tree with " +
                      std::to_string(spec.branch_count) + " branches");
}

}  // namespace

void IdentitySpec::validate() const {
  if (branch_count < 0) throw ConfigError("branch count must be >= 0");
  if (arm_length_min < 1 || arm_length_max < arm_length_min) {
    throw ConfigError("arm length range must satisfy 1 <= min <= max");
  }
  if (!(jitter >= 0.0) || jitter > 10.0) throw ConfigError("jitter must lie in [0, 10]");
  if (width < 8 || height < 8) throw GeometryError("canvas must be at least 8x8");
  const auto region = tree_region(*this);
  if (std::min(region.rx, region.ry) < 2.0 * arm_length_max) {
    throw GeometryError("canvas " + std::to_string(width) + "x" + std::to_string(height) +
                        " too small for arms up to " + std::to_string(arm_length_max) +
                        " px");
  }
}

SynthSample generate_sample(const IdentitySpec& spec, int sample_index) {
  spec.validate();
  auto nodes = grow_tree(spec);

  SplitMix64 rng(mix64(spec.identity_seed, static_cast<std::uint64_t>(sample_index)));
  for (auto& n : nodes) {
    n.at.row += rng.uniform(-spec.jitter, spec.jitter);
    n.at.col += rng.uniform(-spec.jitter, spec.jitter);
  }

  SynthSample sample;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i].children == 1) continue;
    sample.ground_truth.push_back(
        {static_cast<int>(std::lround(nodes[i].at.row)),
         static_cast<int>(std::lround(nodes[i].at.col)),
         nodes[i].children == 0 ? MinutiaKind::termination : MinutiaKind::bifurcation});
  }

  const auto face = face_ellipse(spec);
  std::vector<std::uint8_t> data(static_cast<std::size_t>(spec.width) *
                                 static_cast<std::size_t>(spec.height));

  // Bounding box of everything the tree can touch.
  double top = 1e9, bottom = -1e9, left = 1e9, right = -1e9;
  for (const auto& n : nodes) {
    top = std::min(top, n.at.row);
    bottom = std::max(bottom, n.at.row);
    left = std::min(left, n.at.col);
    right = std::max(right, n.at.col);
  }
  const bool has_tree = nodes.size() > 1;

  std::size_t k = 0;
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c, ++k) {
      const Point p{static_cast<double>(r), static_cast<double>(c)};
      int level = synth_levels::kBackground;
      if (face.contains(p)) {
        level = synth_levels::kFace;
        if (has_tree && p.row >= top - kWallRadius - 1 && p.row <= bottom + kWallRadius + 1 &&
            p.col >= left - kWallRadius - 1 && p.col <= right + kWallRadius + 1) {
          double d = 1e9;
          for (std::size_t i = 1; i < nodes.size(); ++i) {
            d = std::min(d, point_segment_distance(
                                p, nodes[static_cast<std::size_t>(nodes[i].parent)].at,
                                nodes[i].at));
          }
          const double dr = p.row - nodes[0].at.row, dc = p.col - nodes[0].at.col;
          const bool near_root = dr * dr + dc * dc <= kOpeningRadius * kOpeningRadius;
          if (d > kLumenRadius && d <= kWallRadius && !near_root) {
            level = synth_levels::kRidge;
          }
        }
      }
      level += static_cast<int>(rng.between(-synth_levels::kNoise, synth_levels::kNoise));
      data[k] = static_cast<std::uint8_t>(std::clamp(level, 0, 255));
    }
  }
  sample.image = GrayImage(spec.width, spec.height, std::move(data));
  return sample;
}

IdentitySpec identity_spec(std::uint64_t master_seed, int label) {
  IdentitySpec spec;
  spec.identity_seed = mix64(master_seed, static_cast<std::uint64_t>(label));
  return spec;
}

std::vector<ManifestEntry> generate_dataset(int num_identities, int samples_each,
                                            std::uint64_t master_seed,
                                            const std::filesystem::path& outdir) {
  if (num_identities < 1 || samples_each < 1) {
    throw ConfigError("dataset needs at least one identity and one sample each");
  }
  std::filesystem::create_directories(outdir);
  std::vector<ManifestEntry> entries;
  for (int label = 0; label < num_identities; ++label) {
    const auto spec = identity_spec(master_seed, label);
    for (int s = 0; s < samples_each; ++s) {
      char name[64];
      std::snprintf(name, sizeof name, "id%02d_%03d.pgm", label, s);
      save_pgm(outdir / name, generate_sample(spec, s).image, PgmEncoding::binary);
      entries.push_back({name, label});
    }
  }
  std::ofstream manifest(outdir / kManifestName);
  if (!manifest) throw Error("cannot write manifest in " + outdir.string());
  write_manifest(manifest, entries);
  return entries;
}

void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries) {
  out << "filename,label\n";
  for (const auto& e : entries) out << e.filename << ',' << e.label << '\n';
}

std::vector<ManifestEntry> read_manifest(std::istream& in) {
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "filename,label") continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos || comma == 0) {
      throw FormatError("manifest line " + std::to_string(line_no) + " is not 'filename,label'");
    }
    ManifestEntry e;
    e.filename = line.substr(0, comma);
    const char* first = line.data() + comma + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, e.label);
    if (ec != std::errc{} || ptr != last || e.label < 0) {
      throw FormatError("manifest line " + std::to_string(line_no) + " has a bad label");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  return read_manifest(in);
}

}  // namespace thermoprint
