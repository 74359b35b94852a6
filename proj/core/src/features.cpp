#include "thermoprint/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <string>

#include "thermoprint/errors.hpp"
#include "thermoprint/rng.hpp"

namespace thermoprint {

std::size_t FeatureVector::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

FeatureVector block_features(const std::vector<MinutiaPoint>& points, int width,
                             int height, int grid) {
  if (grid < 1) throw ConfigError("grid must be >= 1");
  if (width < grid || height < grid) {
    throw ShapeError("image " + std::to_string(width) + "x" +
                     std::to_string(height) + " is smaller than a " +
                     std::to_string(grid) + "x" + std::to_string(grid) + " grid");
  }
  FeatureVector fv;
  fv.grid = grid;
  fv.counts.assign(static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid), 0);
  for (const auto& p : points) {
    if (p.row < 0 || p.row >= height || p.col < 0 || p.col >= width) {
      throw BoundsError("minutia (" + std::to_string(p.row) + ", " +
                        std::to_string(p.col) + ") outside " +
                        std::to_string(width) + "x" + std::to_string(height));
    }
    const auto cell_row = static_cast<std::int64_t>(p.row) * grid / height;
    const auto cell_col = static_cast<std::int64_t>(p.col) * grid / width;
    ++fv.counts[static_cast<std::size_t>(cell_row * grid + cell_col)];
  }
  return fv;
}

DatasetSplit split_dataset(const std::vector<FeatureVector>& vectors,
                           double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (!vectors[i].label) {
      throw InsufficientDataError("sample " + std::to_string(i) + " has no label");
    }
    by_class[*vectors[i].label].push_back(i);
  }

  SplitMix64 rng(seed);
  std::vector<std::uint8_t> in_train(vectors.size(), 0);
  for (auto& [label, members] : by_class) {
    if (members.size() < 2) {
      throw InsufficientDataError("class " + std::to_string(label) + " has " +
                                  std::to_string(members.size()) +
                                  " sample(s); at least 2 are required");
    }
    // Fisher-Yates with the portable generator.
    for (std::size_t i = members.size() - 1; i > 0; --i) {
      std::swap(members[i], members[rng.below(i + 1)]);
    }
    const auto n = static_cast<double>(members.size());
    const auto take = static_cast<std::size_t>(std::ceil(train_fraction * n - 1e-9));
    for (std::size_t i = 0; i < take; ++i) in_train[members[i]] = 1;
  }

  DatasetSplit split;
  split.seed = seed;
  split.train_fraction = train_fraction;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    (in_train[i] ? split.train : split.test).push_back(vectors[i]);
  }
  return split;
}

void write_feature_csv(std::ostream& out, const std::vector<FeatureVector>& vectors,
                       std::size_t feature_count) {
  out << "label,n=" << feature_count << '\n';
  for (const auto& v : vectors) {
    if (v.counts.size() != feature_count) {
      throw ShapeError("feature vector has " + std::to_string(v.counts.size()) +
                       " entries, expected " + std::to_string(feature_count));
    }
    if (v.label) out << *v.label;
    for (auto c : v.counts) out << ',' << c;
    out << '\n';
  }
}

namespace {

template <typename T>
bool parse_int(std::string_view text, T& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

}  // namespace

FeatureTable read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("feature CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  constexpr std::string_view prefix = "label,n=";
  FeatureTable table;
  if (line.rfind(prefix, 0) != 0 ||
      !parse_int(std::string_view(line).substr(prefix.size()), table.feature_count)) {
    throw FormatError("feature CSV header must be 'label,n=<count>', got '" + line + "'");
  }
  const auto grid = static_cast<int>(std::lround(std::sqrt(
      static_cast<double>(table.feature_count))));
  if (static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid) !=
          table.feature_count ||
      grid < 1) {
    throw FormatError("feature count " + std::to_string(table.feature_count) +
                      " is not a square grid");
  }

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != table.feature_count + 1) {
      throw ShapeError("feature CSV line " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size() - 1) + " features, expected " +
                       std::to_string(table.feature_count));
    }
    FeatureVector fv;
    fv.grid = grid;
    if (!fields[0].empty()) {
      int label = 0;
      if (!parse_int(fields[0], label) || label < 0) {
        throw FormatError("bad label on feature CSV line " + std::to_string(line_no));
      }
      fv.label = label;
    }
    fv.counts.resize(table.feature_count);
    for (std::size_t i = 0; i < table.feature_count; ++i) {
      if (!parse_int(fields[i + 1], fv.counts[i])) {
        throw FormatError("bad count on feature CSV line " + std::to_string(line_no));
      }
    }
    table.rows.push_back(std::move(fv));
  }
  return table;
}

}  // namespace thermoprint
