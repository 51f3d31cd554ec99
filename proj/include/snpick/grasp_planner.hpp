#pragma once

// Collision-free grasp search on depth maps: threshold the scene into target
// and collision regions, convolve with the gripper footprints, smooth, and
// take the constrained argmax. The entanglement extension locates the peak
// of the smoothed collision density and derives the outward spread move
// along the line joining it to the grasp point.

#include <cmath>
#include <optional>

#include <json.hpp>

#include "snpick/convolution.hpp"
#include "snpick/depth_scene.hpp"
#include "snpick/errors.hpp"
#include "snpick/grid.hpp"
#include "snpick/gripper.hpp"

namespace snpick {

// Placements where target material lies between the jaws: wc = 1{Oc * gc > 0}.
inline BinaryMask contact_region(const BinaryMask& oc, const BinaryMask& gc) {
  return binary_convolve(oc, gc);
}

// Placements where a plate could hit material: wcp = 1{Ocp * gcp > 0}.
inline BinaryMask collision_region(const BinaryMask& ocp, const BinaryMask& gcp) {
  return binary_convolve(ocp, gcp);
}

namespace detail {

inline void require_normalized(const FloatGrid& g) {
  require_odd_kernel(g.width(), g.height());
  double sum = 0.0;
  for (double v : g.values()) sum += v;
  if (std::abs(sum - 1.0) > 1e-9)
    throw config_error("smoothing kernel must be normalized to sum 1");
}

inline BinaryMask and_not(const BinaryMask& a, const BinaryMask& b) {
  BinaryMask out(a.width(), a.height(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (a[i] && !b[i]) ? 1 : 0;
  return out;
}

}  // namespace detail

// Smoothed indicator of collision-free contact: G = (wc AND NOT wcp) * g.
inline FloatGrid graspability_map(const BinaryMask& wc, const BinaryMask& wcp,
                                  const FloatGrid& g) {
  detail::require_normalized(g);
  if (!wc.same_shape(wcp)) throw config_error("wc/wcp shape mismatch");
  return convolve(detail::and_not(wc, wcp), g);
}

// Smoothed collision density: G' = wcp * g.
inline FloatGrid entanglement_map(const BinaryMask& wcp, const FloatGrid& g) {
  detail::require_normalized(g);
  return convolve(wcp, g);
}

struct ScoredPixel {
  int x = 0;
  int y = 0;
  double score = 0.0;
};

// argmax of G over collision-free pixels, raster order on ties; empty when
// no collision-free pixel carries a positive response (the orientation is
// then discarded by the sweep).
inline std::optional<ScoredPixel> find_grasp_point(const FloatGrid& G,
                                                   const BinaryMask& wcp) {
  if (!G.same_shape(wcp)) throw config_error("G/wcp shape mismatch");
  std::optional<ScoredPixel> best;
  for (int y = 0; y < G.height(); ++y)
    for (int x = 0; x < G.width(); ++x) {
      if (wcp.at(x, y)) continue;
      if (!best || G.at(x, y) > best->score) best = ScoredPixel{x, y, G.at(x, y)};
    }
  if (best && !(best->score > 0.0)) return std::nullopt;
  return best;
}

// argmax of G' over colliding pixels; empty when nothing collides and there
// is nothing to spread.
inline std::optional<ScoredPixel> find_entanglement_point(const FloatGrid& Gprime,
                                                          const BinaryMask& wcp) {
  if (!Gprime.same_shape(wcp)) throw config_error("G'/wcp shape mismatch");
  std::optional<ScoredPixel> best;
  for (int y = 0; y < Gprime.height(); ++y)
    for (int x = 0; x < Gprime.width(); ++x) {
      if (!wcp.at(x, y)) continue;
      if (!best || Gprime.at(x, y) > best->score)
        best = ScoredPixel{x, y, Gprime.at(x, y)};
    }
  return best;
}

// All intermediate maps for one orientation; used for inspection dumps and
// for exercising the pipeline stages one by one.
struct GraspabilityMaps {
  BinaryMask wc;
  BinaryMask wcp;
  FloatGrid G;
  FloatGrid Gprime;
  double rotation_deg = 0.0;
};

inline GraspabilityMaps compute_maps(const DepthMap& d, const GripperSpec& spec,
                                     double rotation_deg, double sigma_mm) {
  const auto top = highest_point(d);
  const BinaryMask oc = threshold_target(d, top.height_mm);
  const BinaryMask ocp = threshold_collision(d, spec.insertion_depth_rz_mm);
  const FootprintMasks fp = rasterize_footprints(spec, rotation_deg, d.scale());
  const FloatGrid g = gaussian_kernel(sigma_mm / d.scale());

  GraspabilityMaps maps;
  maps.rotation_deg = rotation_deg;
  maps.wc = contact_region(oc, fp.gc);
  maps.wcp = collision_region(ocp, fp.gcp);
  maps.G = graspability_map(maps.wc, maps.wcp, g);
  maps.Gprime = entanglement_map(maps.wcp, g);
  return maps;
}

struct PixelPoint {
  int x = 0;
  int y = 0;
};

struct GraspPlan {
  PixelPoint grasp;                        // collision-free pick point Or
  double rotation_deg = 0.0;               // orientation the sweep selected
  std::optional<PixelPoint> entanglement;  // peak entanglement point Er
  double spread_dir_x = 1.0;               // unit vector along Or -> Er
  double spread_dir_y = 0.0;
  double spread_extent_mm = 0.0;           // outward travel per plate
  double score = 0.0;                      // peak graspability value

  // Orientation with the opening axis laid along the spread line, in
  // [0, 180); equals rotation_deg when there is nothing to spread.
  double aligned_rotation_deg() const {
    if (!entanglement) return rotation_deg;
    double deg = std::atan2(spread_dir_y, spread_dir_x) * 180.0 / std::numbers::pi;
    while (deg < 0.0) deg += 180.0;
    while (deg >= 180.0) deg -= 180.0;
    return deg;
  }
};

inline void to_json(nlohmann::json& j, const GraspPlan& p) {
  j = nlohmann::json{
      {"Or", {{"rx", p.grasp.x}, {"ry", p.grasp.y}}},
      {"rtheta_deg", p.rotation_deg},
      {"spread_direction", {p.spread_dir_x, p.spread_dir_y}},
      {"spread_extent_mm", p.spread_extent_mm},
      {"score", p.score},
  };
  if (p.entanglement)
    j["Er"] = {{"x", p.entanglement->x}, {"y", p.entanglement->y}};
  else
    j["Er"] = nullptr;
  j["aligned_rtheta_deg"] = p.aligned_rotation_deg();
}

inline void from_json(const nlohmann::json& j, GraspPlan& p) {
  p = GraspPlan{};
  p.grasp.x = j.at("Or").at("rx").get<int>();
  p.grasp.y = j.at("Or").at("ry").get<int>();
  p.rotation_deg = j.at("rtheta_deg").get<double>();
  const auto& dir = j.at("spread_direction");
  p.spread_dir_x = dir.at(0).get<double>();
  p.spread_dir_y = dir.at(1).get<double>();
  p.spread_extent_mm = j.at("spread_extent_mm").get<double>();
  p.score = j.at("score").get<double>();
  if (j.contains("Er") && !j.at("Er").is_null())
    p.entanglement = PixelPoint{j.at("Er").at("x").get<int>(),
                                j.at("Er").at("y").get<int>()};
}

// Full sweep: per orientation build the maps and keep the best positive
// peak (strictly greater wins, so the smallest orientation takes ties).
// Returns nothing when every orientation is blocked.
inline std::optional<GraspPlan> plan_grasp(const DepthMap& d,
                                           const GripperSpec& spec,
                                           double sigma_mm,
                                           double orientation_step_deg = 15.0) {
  spec.validate();
  if (!(sigma_mm > 0.0)) throw config_error("sigma must be > 0 mm");
  if (d.heights().empty()) throw config_error("cannot plan on an empty depth map");

  const auto top = highest_point(d);
  const BinaryMask oc = threshold_target(d, top.height_mm);
  const BinaryMask ocp = threshold_collision(d, spec.insertion_depth_rz_mm);
  const FloatGrid g = gaussian_kernel(sigma_mm / d.scale());

  std::optional<ScoredPixel> best;
  double best_rotation = 0.0;
  BinaryMask best_wcp;
  for (double rotation : sweep_orientations(orientation_step_deg)) {
    const FootprintMasks fp = rasterize_footprints(spec, rotation, d.scale());
    const BinaryMask wc = contact_region(oc, fp.gc);
    const BinaryMask wcp = collision_region(ocp, fp.gcp);
    const FloatGrid G = convolve(detail::and_not(wc, wcp), g);
    const auto cand = find_grasp_point(G, wcp);
    if (cand && (!best || cand->score > best->score)) {
      best = cand;
      best_rotation = rotation;
      best_wcp = wcp;
    }
  }
  if (!best) return std::nullopt;

  GraspPlan plan;
  plan.grasp = {best->x, best->y};
  plan.rotation_deg = best_rotation;
  plan.score = best->score;
  plan.spread_extent_mm = (spec.max_aperture_mm - spec.aperture_w_mm) / 2.0;

  const FloatGrid gprime = convolve(best_wcp, g);
  if (const auto er = find_entanglement_point(gprime, best_wcp)) {
    plan.entanglement = PixelPoint{er->x, er->y};
    const double dx = er->x - best->x;
    const double dy = er->y - best->y;
    const double dist = std::hypot(dx, dy);
    if (dist >= 1.0) {
      plan.spread_dir_x = dx / dist;
      plan.spread_dir_y = dy / dist;
      return plan;
    }
  }
  // nothing to spread toward (or it coincides with the grasp point):
  // fall back to the jaw opening axis
  const double rad = detail::deg_to_rad(best_rotation);
  plan.spread_dir_x = detail::snap_trig(std::cos(rad));
  plan.spread_dir_y = detail::snap_trig(std::sin(rad));
  return plan;
}

}  // namespace snpick
