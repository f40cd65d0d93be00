#include "gdl/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>

#include "gdl/error.hpp"

namespace gdl::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

void finish(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

// Reads one whitespace-delimited PGM header token, skipping # comments.
std::string pgm_token(std::istream& in) {
  std::string token;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

int parse_dim(const std::string& token, const char* what) {
  if (token.empty() ||
      !std::all_of(token.begin(), token.end(),
                   [](unsigned char c) { return std::isdigit(c); }))
    throw IoError(std::string("PGM header: bad ") + what);
  const long v = std::strtol(token.c_str(), nullptr, 10);
  if (v <= 0 || v > 1 << 20)
    throw IoError(std::string("PGM header: out-of-range ") + what);
  return static_cast<int>(v);
}

}  // namespace

void write_pgm16(const Map2D<std::uint16_t>& image, int maxval,
                 const std::filesystem::path& path) {
  if (image.empty()) throw std::invalid_argument("write_pgm16: empty image");
  if (maxval < 256 || maxval > 65535)
    throw std::invalid_argument("write_pgm16: maxval must be in [256, 65535]");
  for (auto v : image.values())
    if (v > maxval)
      throw std::invalid_argument("write_pgm16: pixel exceeds maxval");

  auto out = open_out(path);
  out << "P5\n" << image.width() << " " << image.height() << "\n" << maxval << "\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(image.width()) * 2);
  for (int y = 0; y < image.height(); ++y) {
    auto src = image.row(y);
    for (int x = 0; x < image.width(); ++x) {
      row[2 * x] = static_cast<unsigned char>(src[x] >> 8);
      row[2 * x + 1] = static_cast<unsigned char>(src[x] & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  finish(out, path);
}

Pgm16 read_pgm16(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (pgm_token(in) != "P5") throw IoError("not a binary PGM: " + path.string());
  const int width = parse_dim(pgm_token(in), "width");
  const int height = parse_dim(pgm_token(in), "height");
  const int maxval = parse_dim(pgm_token(in), "maxval");
  if (maxval < 256 || maxval > 65535)
    throw IoError("read_pgm16: expected a two-byte PGM (maxval >= 256)");

  Pgm16 result{Map2D<std::uint16_t>(width, height), maxval};
  std::vector<unsigned char> row(static_cast<std::size_t>(width) * 2);
  for (int y = 0; y < height; ++y) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size()));
    if (!in) throw IoError("truncated PGM: " + path.string());
    auto dst = result.pixels.row(y);
    for (int x = 0; x < width; ++x) {
      const std::uint16_t v = static_cast<std::uint16_t>(
          (static_cast<unsigned>(row[2 * x]) << 8) | row[2 * x + 1]);
      if (v > maxval) throw IoError("PGM sample exceeds maxval: " + path.string());
      dst[x] = v;
    }
  }
  return result;
}

void write_pgm8(const Map2D<std::uint8_t>& image,
                const std::filesystem::path& path) {
  if (image.empty()) throw std::invalid_argument("write_pgm8: empty image");
  auto out = open_out(path);
  out << "P5\n" << image.width() << " " << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data()),
            static_cast<std::streamsize>(image.size()));
  finish(out, path);
}

Map2D<std::uint8_t> read_pgm8(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (pgm_token(in) != "P5") throw IoError("not a binary PGM: " + path.string());
  const int width = parse_dim(pgm_token(in), "width");
  const int height = parse_dim(pgm_token(in), "height");
  const int maxval = parse_dim(pgm_token(in), "maxval");
  if (maxval > 255)
    throw IoError("read_pgm8: expected a one-byte PGM (maxval <= 255)");
  Map2D<std::uint8_t> image(width, height);
  in.read(reinterpret_cast<char*>(image.data()),
          static_cast<std::streamsize>(image.size()));
  if (!in) throw IoError("truncated PGM: " + path.string());
  return image;
}

namespace {

constexpr char kFmapMagic[4] = {'F', 'M', 'A', 'P'};
constexpr std::uint32_t kFmapVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {
      static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
      static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_fmap(const Map2D<double>& map, const std::filesystem::path& path) {
  if (map.empty()) throw std::invalid_argument("write_fmap: empty map");
  auto out = open_out(path);
  out.write(kFmapMagic, 4);
  put_u32(out, kFmapVersion);
  put_u32(out, static_cast<std::uint32_t>(map.width()));
  put_u32(out, static_cast<std::uint32_t>(map.height()));
  std::vector<unsigned char> row(static_cast<std::size_t>(map.width()) * 4);
  for (int y = 0; y < map.height(); ++y) {
    auto src = map.row(y);
    for (int x = 0; x < map.width(); ++x) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(src[x]));
      row[4 * x] = static_cast<unsigned char>(bits);
      row[4 * x + 1] = static_cast<unsigned char>(bits >> 8);
      row[4 * x + 2] = static_cast<unsigned char>(bits >> 16);
      row[4 * x + 3] = static_cast<unsigned char>(bits >> 24);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  finish(out, path);
}

Map2D<double> read_fmap(const std::filesystem::path& path) {
  auto in = open_in(path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kFmapMagic, 4) != 0)
    throw IoError("not a float map: " + path.string());
  const std::uint32_t version = get_u32(in);
  if (version != kFmapVersion)
    throw IoError("unsupported float-map version in " + path.string());
  const std::uint32_t width = get_u32(in);
  const std::uint32_t height = get_u32(in);
  if (!in || width == 0 || height == 0 || width > (1u << 20) || height > (1u << 20))
    throw IoError("corrupt float-map header: " + path.string());

  Map2D<double> map(static_cast<int>(width), static_cast<int>(height));
  std::vector<unsigned char> row(static_cast<std::size_t>(width) * 4);
  for (std::uint32_t y = 0; y < height; ++y) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size()));
    if (!in) throw IoError("truncated float map: " + path.string());
    auto dst = map.row(static_cast<int>(y));
    for (std::uint32_t x = 0; x < width; ++x) {
      const std::uint32_t bits =
          static_cast<std::uint32_t>(row[4 * x]) |
          (static_cast<std::uint32_t>(row[4 * x + 1]) << 8) |
          (static_cast<std::uint32_t>(row[4 * x + 2]) << 16) |
          (static_cast<std::uint32_t>(row[4 * x + 3]) << 24);
      dst[x] = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  in.peek();
  if (!in.eof()) throw IoError("trailing bytes in float map: " + path.string());
  return map;
}

Map2D<std::uint8_t> normalize_to_gray(const Map2D<double>& map) {
  if (map.empty()) throw std::invalid_argument("normalize_to_gray: empty map");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : map.values()) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Map2D<std::uint8_t> gray(map.width(), map.height());
  if (!(hi > lo)) return gray;  // all invalid or constant: all black
  const double scale = 255.0 / (hi - lo);
  for (int y = 0; y < map.height(); ++y) {
    auto src = map.row(y);
    auto dst = gray.row(y);
    for (int x = 0; x < map.width(); ++x) {
      const double v = src[x];
      dst[x] = std::isfinite(v)
                   ? static_cast<std::uint8_t>(
                         std::clamp(std::floor((v - lo) * scale + 0.5), 0.0, 255.0))
                   : 0;
    }
  }
  return gray;
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::uint64_t checksum_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::uint64_t hash = 14695981039346656037ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const auto got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ULL;
    }
  }
  if (!in.eof()) throw IoError("read failed: " + path.string());
  return hash;
}

void write_manifest(const std::filesystem::path& dir,
                    const std::vector<std::string>& names) {
  std::vector<std::string> sorted = names;
  std::sort(sorted.begin(), sorted.end());
  auto out = open_out(dir / "manifest.txt");
  char line[512];
  for (const auto& name : sorted) {
    const std::uint64_t sum = checksum_file(dir / name);
    std::snprintf(line, sizeof(line), "%016llx  %s\n",
                  static_cast<unsigned long long>(sum), name.c_str());
    out << line;
  }
  finish(out, dir / "manifest.txt");
}

}  // namespace gdl::io
