#pragma once

#include <string>
#include <tuple>

#include "snpick/errors.hpp"
#include "snpick/grid.hpp"

namespace snpick {

// Open picking area the depth source covers.
struct SceneConfig {
  double pick_area_w_mm = 300.0;
  double pick_area_h_mm = 250.0;
  double background_mm = 0.0;
  std::string depth_source;  // file path or simulator handle

  void validate() const {
    if (pick_area_w_mm <= 0.0 || pick_area_h_mm <= 0.0)
      throw config_error("pick area dimensions must be > 0 mm");
  }
};

// Target region: everything at or above the target height.
inline BinaryMask threshold_target(const DepthMap& d, double target_height_mm) {
  if (target_height_mm < 0.0)
    throw config_error("target height must be >= 0 mm");
  BinaryMask m(d.width(), d.height(), 0);
  for (std::size_t i = 0; i < m.size(); ++i)
    m[i] = d.heights()[i] >= target_height_mm ? 1 : 0;
  return m;
}

// Collision region: material strictly taller than the descending tips'
// clearance. A block exactly at tip height is not a collision, so closing
// at table level (rz = 0) does not collide with the table itself.
inline BinaryMask threshold_collision(const DepthMap& d, double insertion_depth_rz_mm) {
  if (insertion_depth_rz_mm < 0.0)
    throw config_error("insertion depth must be >= 0 mm");
  BinaryMask m(d.width(), d.height(), 0);
  for (std::size_t i = 0; i < m.size(); ++i)
    m[i] = d.heights()[i] > insertion_depth_rz_mm ? 1 : 0;
  return m;
}

struct PeakPixel {
  int x = 0;
  int y = 0;
  double height_mm = 0.0;
};

// Maximum height cell, first in raster order on ties.
inline PeakPixel highest_point(const DepthMap& d) {
  if (d.heights().empty()) throw config_error("highest_point on empty depth map");
  PeakPixel best{0, 0, d.at(0, 0)};
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x)
      if (d.at(x, y) > best.height_mm) best = {x, y, d.at(x, y)};
  return best;
}

}  // namespace snpick
