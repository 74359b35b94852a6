#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "thermoprint/image.hpp"

namespace thermoprint {

enum class PgmEncoding { ascii, binary };  // P2, P5

// Parses a P2 or P5 graymap with maxval <= 255. Samples are stored as-is,
// never rescaled to 255.
GrayImage read_pgm(std::span<const std::uint8_t> bytes);

// Always writes maxval 255.
std::vector<std::uint8_t> write_pgm(const GrayImage& img, PgmEncoding encoding);

GrayImage load_pgm(const std::filesystem::path& path);
void save_pgm(const std::filesystem::path& path, const GrayImage& img,
              PgmEncoding encoding = PgmEncoding::binary);

// 1 -> 255, 0 -> 0.
GrayImage binary_to_gray(const BinaryImage& img);
// Inverse of binary_to_gray; throws DomainError on any value not in {0, 255}.
BinaryImage gray_to_binary_lossless(const GrayImage& img);

// Convenience for binary stage outputs persisted as 0/255 PGM.
BinaryImage load_binary_pgm(const std::filesystem::path& path);
void save_binary_pgm(const std::filesystem::path& path, const BinaryImage& img);

}  // namespace thermoprint
