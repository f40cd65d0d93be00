#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gdl/map2d.hpp"

namespace gdl::io {

// Binary PGM (P5). Samples above 255 are written most-significant byte
// first, per the Netpbm convention.
void write_pgm16(const Map2D<std::uint16_t>& image, int maxval,
                 const std::filesystem::path& path);

struct Pgm16 {
  Map2D<std::uint16_t> pixels;
  int maxval = 0;
};

Pgm16 read_pgm16(const std::filesystem::path& path);

void write_pgm8(const Map2D<std::uint8_t>& image,
                const std::filesystem::path& path);

Map2D<std::uint8_t> read_pgm8(const std::filesystem::path& path);

// Float map: magic "FMAP", u32 format version, u32 width, u32 height, then
// row-major little-endian f32. NaN marks invalid pixels.
void write_fmap(const Map2D<double>& map, const std::filesystem::path& path);
Map2D<double> read_fmap(const std::filesystem::path& path);

// Linear min-max normalization of the finite values onto 0..255; the map
// minimum renders as 0, the maximum as 255, non-finite pixels as 0.
Map2D<std::uint8_t> normalize_to_gray(const Map2D<double>& map);

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::uint64_t checksum_file(const std::filesystem::path& path);

// manifest.txt: one "<16-hex-digit checksum>  <name>" line per artifact,
// sorted by name so identical artifact sets compare byte-equal.
void write_manifest(const std::filesystem::path& dir,
                    const std::vector<std::string>& names);

}  // namespace gdl::io
