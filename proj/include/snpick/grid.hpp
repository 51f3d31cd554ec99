#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "snpick/errors.hpp"

namespace snpick {

// Row-major 2D grid. Pixel (x, y) = column x of row y; index y*width + x.
template <typename T>
class Grid {
 public:
  Grid() = default;

  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0)
      throw config_error("grid dimensions must be non-negative");
    values_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  Grid(int width, int height, std::vector<T> values)
      : width_(width), height_(height), values_(std::move(values)) {
    if (width < 0 || height < 0)
      throw config_error("grid dimensions must be non-negative");
    if (values_.size() != static_cast<std::size_t>(width) * height)
      throw config_error("grid value count " + std::to_string(values_.size()) +
                         " does not match " + std::to_string(width) + "x" +
                         std::to_string(height));
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  T& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }

  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  const std::vector<T>& values() const { return values_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Grid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
};

using FloatGrid = Grid<double>;
using BinaryMask = Grid<std::uint8_t>;

inline std::size_t count_set(const BinaryMask& m) {
  return static_cast<std::size_t>(
      std::count_if(m.values().begin(), m.values().end(),
                    [](std::uint8_t b) { return b != 0; }));
}

inline bool any_set(const BinaryMask& m) {
  return std::any_of(m.values().begin(), m.values().end(),
                     [](std::uint8_t b) { return b != 0; });
}

// Height field above the table plane, in mm, plus the pixel pitch.
class DepthMap {
 public:
  DepthMap() = default;

  DepthMap(FloatGrid heights, double scale_mm_per_px)
      : heights_(std::move(heights)), scale_(scale_mm_per_px) {
    if (scale_ <= 0.0)
      throw config_error("depth map scale must be > 0 mm/px");
    for (int y = 0; y < heights_.height(); ++y) {
      for (int x = 0; x < heights_.width(); ++x) {
        const double v = heights_.at(x, y);
        if (!std::isfinite(v) || v < 0.0)
          throw io_error("invalid depth value at row " + std::to_string(y) +
                         ", col " + std::to_string(x) +
                         " (must be finite and >= 0 mm)");
      }
    }
  }

  int width() const { return heights_.width(); }
  int height() const { return heights_.height(); }
  double scale() const { return scale_; }
  const FloatGrid& heights() const { return heights_; }
  double at(int x, int y) const { return heights_.at(x, y); }

  bool operator==(const DepthMap&) const = default;

 private:
  FloatGrid heights_;
  double scale_ = 1.0;
};

}  // namespace snpick
