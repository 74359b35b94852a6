#include "thermoprint/pgm.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "thermoprint/errors.hpp"

namespace thermoprint {

namespace {

constexpr long kMaxSide = 1L << 16;

bool is_space(std::uint8_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments between header tokens.
  void skip_separators() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool at_end() const { return pos_ >= bytes_.size(); }
  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }
  std::uint8_t peek() const { return bytes_[pos_]; }

  // Reads an unsigned decimal token; returns false at end of input.
  bool read_number(long& out, const char* what) {
    skip_separators();
    if (at_end()) return false;
    std::size_t start = pos_;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) ++pos_;
    if (start == pos_) {
      throw FormatError(std::string("expected ") + what + " in PGM data");
    }
    if (pos_ < bytes_.size() && !is_space(bytes_[pos_]) && bytes_[pos_] != '#') {
      throw FormatError(std::string("malformed ") + what + " in PGM data");
    }
    const char* first = reinterpret_cast<const char*>(bytes_.data() + start);
    const char* last = reinterpret_cast<const char*>(bytes_.data() + pos_);
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
      throw FormatError(std::string(what) + " out of range in PGM data");
    }
    return true;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

long header_field(Cursor& cur, const char* what) {
  long v = 0;
  if (!cur.read_number(v, what)) {
    throw FormatError(std::string("PGM header ends before ") + what);
  }
  return v;
}

}  // namespace

GrayImage read_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw FormatError("not a PGM file: magic must be P2 or P5");
  }
  const bool binary = bytes[1] == '5';
  Cursor cur(bytes);
  cur.advance(2);
  if (!cur.at_end() && !is_space(cur.peek()) && cur.peek() != '#') {
    throw FormatError("malformed PGM magic");
  }

  const long width = header_field(cur, "width");
  const long height = header_field(cur, "height");
  const long maxval = header_field(cur, "maxval");
  if (width < 1 || height < 1 || width > kMaxSide || height > kMaxSide) {
    throw FormatError("PGM dimensions out of range: " + std::to_string(width) +
                      "x" + std::to_string(height));
  }
  if (maxval < 1) throw FormatError("PGM maxval must be positive");
  if (maxval > 255) {
    throw UnsupportedDepthError("PGM maxval " + std::to_string(maxval) +
                                " exceeds 255");
  }

  const auto count = static_cast<std::size_t>(width * height);
  std::vector<std::uint8_t> data;
  data.reserve(count);

  if (binary) {
    if (cur.at_end() || !is_space(cur.peek())) {
      throw TruncationError("P5 raster missing after header");
    }
    cur.advance(1);
    if (bytes.size() - cur.pos() < count) {
      throw TruncationError("P5 raster has " +
                            std::to_string(bytes.size() - cur.pos()) + " of " +
                            std::to_string(count) + " pixels");
    }
    data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(cur.pos()),
                bytes.begin() + static_cast<std::ptrdiff_t>(cur.pos() + count));
    for (auto v : data) {
      if (v > maxval) throw FormatError("PGM sample exceeds maxval");
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      long v = 0;
      if (!cur.read_number(v, "sample")) {
        throw TruncationError("P2 raster has " + std::to_string(i) + " of " +
                              std::to_string(count) + " pixels");
      }
      if (v > maxval) throw FormatError("PGM sample exceeds maxval");
      data.push_back(static_cast<std::uint8_t>(v));
    }
  }
  return GrayImage(static_cast<int>(width), static_cast<int>(height),
                   std::move(data));
}

std::vector<std::uint8_t> write_pgm(const GrayImage& img, PgmEncoding encoding) {
  std::string header = (encoding == PgmEncoding::binary ? "P5\n" : "P2\n") +
                       std::to_string(img.width()) + " " +
                       std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  if (encoding == PgmEncoding::binary) {
    out.insert(out.end(), img.data().begin(), img.data().end());
    return out;
  }
  for (int r = 0; r < img.height(); ++r) {
    std::string line;
    for (int c = 0; c < img.width(); ++c) {
      if (c) line += ' ';
      line += std::to_string(img(r, c));
    }
    line += '\n';
    out.insert(out.end(), line.begin(), line.end());
  }
  return out;
}

GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return read_pgm(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const TruncationError& e) {
    throw TruncationError(path.string() + ": " + e.what());
  }
}

void save_pgm(const std::filesystem::path& path, const GrayImage& img,
              PgmEncoding encoding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  auto bytes = write_pgm(img, encoding);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

GrayImage binary_to_gray(const BinaryImage& img) {
  std::vector<std::uint8_t> data(img.data());
  for (auto& v : data) v = v ? 255 : 0;
  return GrayImage(img.width(), img.height(), std::move(data));
}

BinaryImage gray_to_binary_lossless(const GrayImage& img) {
  std::vector<std::uint8_t> data(img.data());
  for (auto& v : data) {
    if (v != 0 && v != 255) {
      throw DomainError("intensity " + std::to_string(v) +
                        " is not a binary level (0 or 255)");
    }
    v = v ? 1 : 0;
  }
  return BinaryImage(img.width(), img.height(), std::move(data));
}

BinaryImage load_binary_pgm(const std::filesystem::path& path) {
  return gray_to_binary_lossless(load_pgm(path));
}

void save_binary_pgm(const std::filesystem::path& path, const BinaryImage& img) {
  save_pgm(path, binary_to_gray(img), PgmEncoding::binary);
}

}  // namespace thermoprint
