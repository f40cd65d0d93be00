#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace gdl {

// Dense row-major 2D image. at(x, y) addresses column x of row y.
template <typename T>
class Map2D {
 public:
  Map2D() = default;
  Map2D(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("Map2D: dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> row(int y) { return {data_.data() + index(0, y), static_cast<std::size_t>(width_)}; }
  std::span<const T> row(int y) const { return {data_.data() + index(0, y), static_cast<std::size_t>(width_)}; }
  std::span<T> values() { return {data_.data(), data_.size()}; }
  std::span<const T> values() const { return {data_.data(), data_.size()}; }

  bool same_shape(const Map2D& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Map2D& a, const Map2D& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// Per-pixel validity. Nonzero means valid.
using Mask = Map2D<std::uint8_t>;

inline long long valid_count(const Mask& m) {
  long long n = 0;
  for (auto v : m.values()) n += (v != 0);
  return n;
}

// Pairwise tree summation. Fixed reduction order independent of chunking,
// so loss and metric values reproduce bit-for-bit across runs.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace gdl
