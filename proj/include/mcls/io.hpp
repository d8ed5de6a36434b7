#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mcls/image.hpp"

namespace mcls {

// Binary PGM (P5). 8-bit data round-trips exactly; 16-bit data (maxval > 255)
// is rescaled onto [0, 255] by v * 255 / maxval.
GrayImage<double> read_pgm(const std::filesystem::path& path);
GrayImage<double> parse_pgm(const std::vector<unsigned char>& bytes);
/// Writes 8-bit P5; values are rounded and clamped to [0, 255].
void write_pgm(const GrayImage<double>& image, const std::filesystem::path& path);

/// Masks are stored as 0/255 PGMs and read back with a 127 threshold.
BinaryMask read_mask_pgm(const std::filesystem::path& path);
void write_mask_pgm(const BinaryMask& mask, const std::filesystem::path& path);

// FMAP: the bytes "FMAP", then width and height as little-endian uint32, then
// width*height little-endian IEEE-754 float32 values in row-major order.
Plane<float> parse_fmap(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> encode_fmap(const Plane<float>& field);
Plane<float> read_fmap(const std::filesystem::path& path);
void write_fmap(const Plane<float>& field, const std::filesystem::path& path);

/// FMAP read as a probability map: rejects NaN and values outside [0, 1].
ProbMap<double> read_prob_map(const std::filesystem::path& path);
/// FMAP read as a level-set field: rejects non-finite values.
LevelSetField<double> read_level_set(const std::filesystem::path& path);

void write_fmap(const Plane<double>& field, const std::filesystem::path& path);

/// RGB P6 image, used for colour overlays.
void write_ppm(const Plane<std::uint8_t>& red, const Plane<std::uint8_t>& green,
               const Plane<std::uint8_t>& blue, const std::filesystem::path& path);

std::vector<unsigned char> read_bytes(const std::filesystem::path& path);
/// Writes through a temporary file in the same directory followed by a rename.
void write_bytes_atomic(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace mcls
