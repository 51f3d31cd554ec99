#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "snpick/errors.hpp"
#include "snpick/grid.hpp"

namespace snpick {

// Parallel-jaw geometry, all lengths in mm. The aperture axis is +x at
// rotation 0; the two plates flank the jaw interior along that axis.
struct GripperSpec {
  double plate_lateral_width_mm = 15.0;  // contact length along the plates
  double plate_thickness_mm = 3.0;
  double max_aperture_mm = 71.12;
  double aperture_w_mm = 40.0;
  double insertion_depth_rz_mm = 0.0;

  void validate() const {
    if (plate_lateral_width_mm <= 0.0 || plate_thickness_mm <= 0.0)
      throw config_error("plate dimensions must be > 0 mm");
    if (max_aperture_mm <= 0.0)
      throw config_error("max aperture must be > 0 mm");
    if (!(aperture_w_mm > 0.0) || aperture_w_mm > max_aperture_mm)
      throw config_error("aperture " + std::to_string(aperture_w_mm) +
                         " mm outside (0, " + std::to_string(max_aperture_mm) +
                         "] mm");
    if (insertion_depth_rz_mm < 0.0)
      throw config_error("insertion depth must be >= 0 mm");
  }

  GripperSpec with_aperture(double w_mm) const {
    GripperSpec s = *this;
    s.aperture_w_mm = w_mm;
    return s;
  }
};

inline void to_json(nlohmann::json& j, const GripperSpec& s) {
  j = {{"plate_lateral_width_mm", s.plate_lateral_width_mm},
       {"plate_thickness_mm", s.plate_thickness_mm},
       {"max_aperture_mm", s.max_aperture_mm},
       {"aperture_w_mm", s.aperture_w_mm},
       {"insertion_depth_rz_mm", s.insertion_depth_rz_mm}};
}

inline void from_json(const nlohmann::json& j, GripperSpec& s) {
  s = GripperSpec{};
  if (j.contains("plate_lateral_width_mm"))
    j.at("plate_lateral_width_mm").get_to(s.plate_lateral_width_mm);
  if (j.contains("plate_thickness_mm"))
    j.at("plate_thickness_mm").get_to(s.plate_thickness_mm);
  if (j.contains("max_aperture_mm")) j.at("max_aperture_mm").get_to(s.max_aperture_mm);
  if (j.contains("aperture_w_mm")) j.at("aperture_w_mm").get_to(s.aperture_w_mm);
  if (j.contains("insertion_depth_rz_mm"))
    j.at("insertion_depth_rz_mm").get_to(s.insertion_depth_rz_mm);
}

// Contact kernel (jaw interior) and collision kernel (plate footprints) on a
// shared odd window centered on the gripper axis.
struct FootprintMasks {
  BinaryMask gc;
  BinaryMask gcp;
  int anchor_x = 0;  // gripper center pixel within the window
  int anchor_y = 0;
  double rotation_deg = 0.0;
};

namespace detail {

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Quarter turns must be exact: cos(90 deg) evaluates to ~6e-17, which leaks
// across the half-open rectangle bounds and grows the mask by a pixel row.
inline double snap_trig(double v) {
  for (double target : {-1.0, 0.0, 1.0})
    if (std::abs(v - target) < 1e-12) return target;
  return v;
}

// Center-sampling on half-open intervals: an n-px-wide rectangle covers
// exactly n pixel centers when its extent is n * scale.
inline bool in_half_open(double v, double lo, double hi) { return v >= lo && v < hi; }

}  // namespace detail

// Rasterizes the jaw interior and plate footprints at the given in-plane
// rotation. The window is the smallest odd square that holds the footprint
// at any rotation, so one aperture gives one window for the whole sweep.
inline FootprintMasks rasterize_footprints(const GripperSpec& spec,
                                           double rotation_deg,
                                           double scale_mm_per_px) {
  spec.validate();
  if (scale_mm_per_px <= 0.0) throw config_error("scale must be > 0 mm/px");
  if (rotation_deg < 0.0 || rotation_deg >= 180.0)
    throw config_error("rotation must lie in [0, 180) degrees");

  const double w = spec.aperture_w_mm;
  const double t = spec.plate_thickness_mm;
  const double len = spec.plate_lateral_width_mm;
  const double s = scale_mm_per_px;

  const double outer_radius = std::hypot(w / 2.0 + t, len / 2.0);
  const int half = static_cast<int>(std::ceil(outer_radius / s)) + 1;
  const int k = 2 * half + 1;

  FootprintMasks fp;
  fp.gc = BinaryMask(k, k, 0);
  fp.gcp = BinaryMask(k, k, 0);
  fp.anchor_x = half;
  fp.anchor_y = half;
  fp.rotation_deg = rotation_deg;

  const double rad = detail::deg_to_rad(rotation_deg);
  const double c = detail::snap_trig(std::cos(rad));
  const double sn = detail::snap_trig(std::sin(rad));

  int left_plate = 0, right_plate = 0;
  for (int qy = 0; qy < k; ++qy) {
    for (int qx = 0; qx < k; ++qx) {
      // pixel center in mm, rotated back into the gripper frame
      const double px = (qx - half) * s;
      const double py = (qy - half) * s;
      const double u = px * c + py * sn;   // along the aperture axis
      const double v = -px * sn + py * c;  // along the plates
      if (!detail::in_half_open(v, -len / 2.0, len / 2.0)) continue;
      if (detail::in_half_open(u, -w / 2.0, w / 2.0)) {
        fp.gc.at(qx, qy) = 1;
      } else if (detail::in_half_open(u, w / 2.0, w / 2.0 + t)) {
        fp.gcp.at(qx, qy) = 1;
        ++right_plate;
      } else if (detail::in_half_open(u, -w / 2.0 - t, -w / 2.0)) {
        fp.gcp.at(qx, qy) = 1;
        ++left_plate;
      }
    }
  }

  if (!any_set(fp.gc))
    throw config_error("jaw interior rasterizes to zero pixels at scale " +
                       std::to_string(s) + " mm/px");
  if (left_plate == 0 || right_plate == 0)
    throw config_error("plate footprint rasterizes to zero pixels at scale " +
                       std::to_string(s) + " mm/px");
  return fp;
}

// Orientations to evaluate; jaw symmetry makes rotations 180 deg apart
// identical, so the sweep stops short of 180.
inline std::vector<double> sweep_orientations(double step_deg) {
  if (!(step_deg > 0.0) || step_deg > 90.0)
    throw config_error("orientation step must lie in (0, 90] degrees");
  std::vector<double> out;
  for (double r = 0.0; r < 180.0 - 1e-9; r += step_deg) out.push_back(r);
  return out;
}

}  // namespace snpick
