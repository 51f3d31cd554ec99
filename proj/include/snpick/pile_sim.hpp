#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "snpick/errors.hpp"
#include "snpick/grid.hpp"
#include "snpick/rng.hpp"

namespace snpick {

// ---------------------------------------------------------------------------
// plane geometry for wire-shaped particles

struct Segment {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

namespace detail {

inline double point_segment_distance(double px, double py, const Segment& s) {
  const double dx = s.x1 - s.x0;
  const double dy = s.y1 - s.y0;
  const double len_sq = dx * dx + dy * dy;
  double t = 0.0;
  if (len_sq > 0.0)
    t = std::clamp(((px - s.x0) * dx + (py - s.y0) * dy) / len_sq, 0.0, 1.0);
  const double cx = s.x0 + t * dx;
  const double cy = s.y0 + t * dy;
  return std::hypot(px - cx, py - cy);
}

inline double cross(double ax, double ay, double bx, double by) {
  return ax * by - ay * bx;
}

inline bool segments_intersect(const Segment& a, const Segment& b) {
  const double d1 = cross(b.x1 - b.x0, b.y1 - b.y0, a.x0 - b.x0, a.y0 - b.y0);
  const double d2 = cross(b.x1 - b.x0, b.y1 - b.y0, a.x1 - b.x0, a.y1 - b.y0);
  const double d3 = cross(a.x1 - a.x0, a.y1 - a.y0, b.x0 - a.x0, b.y0 - a.y0);
  const double d4 = cross(a.x1 - a.x0, a.y1 - a.y0, b.x1 - a.x0, b.y1 - a.y0);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  return false;  // collinear touching is covered by the distance checks
}

inline double segment_segment_distance(const Segment& a, const Segment& b) {
  if (segments_intersect(a, b)) return 0.0;
  double d = point_segment_distance(a.x0, a.y0, b);
  d = std::min(d, point_segment_distance(a.x1, a.y1, b));
  d = std::min(d, point_segment_distance(b.x0, b.y0, a));
  d = std::min(d, point_segment_distance(b.x1, b.y1, a));
  return d;
}

inline double footprint_distance(const std::vector<Segment>& a,
                                 const std::vector<Segment>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& sa : a)
    for (const Segment& sb : b)
      best = std::min(best, segment_segment_distance(sa, sb));
  return best;
}

// An axis-aligned box in its own frame: |x| <= hx, |y| <= hy.
// Liang-Barsky clip of the segment against the box.
inline bool segment_hits_box(const Segment& s, double hx, double hy) {
  const double dx = s.x1 - s.x0;
  const double dy = s.y1 - s.y0;
  double t0 = 0.0, t1 = 1.0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {s.x0 + hx, hx - s.x0, s.y0 + hy, hy - s.y0};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;  // parallel and outside
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0)
      t0 = std::max(t0, r);
    else
      t1 = std::min(t1, r);
    if (t0 > t1) return false;
  }
  return true;
}

// Oriented box: center (cx,cy), half extents (hu,hv), u axis at angle_deg.
inline bool segment_hits_oriented_box(const Segment& s, double cx, double cy,
                                      double angle_deg, double hu, double hv) {
  const double rad = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double n = std::sin(rad);
  auto to_frame = [&](double x, double y, double& u, double& v) {
    const double px = x - cx;
    const double py = y - cy;
    u = px * c + py * n;
    v = -px * n + py * c;
  };
  Segment local;
  to_frame(s.x0, s.y0, local.x0, local.y0);
  to_frame(s.x1, s.y1, local.x1, local.y1);
  return segment_hits_box(local, hu, hv);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// particles and piles

enum class ParticleKind { staple, strand };

inline std::string to_string(ParticleKind k) {
  return k == ParticleKind::staple ? "staple" : "strand";
}

inline ParticleKind particle_kind_from_string(const std::string& s) {
  if (s == "staple") return ParticleKind::staple;
  if (s == "strand") return ParticleKind::strand;
  throw config_error("unknown particle kind '" + s + "'");
}

struct Particle {
  std::uint64_t id = 0;
  double x_mm = 0.0;
  double y_mm = 0.0;
  double phi_deg = 0.0;  // in-plane heading of the crown / stem
  ParticleKind kind = ParticleKind::staple;
  double crown_width_d_mm = 12.0;
  double protrusion_length_l_mm = 0.0;
  int layer = 0;
  double unit_mass_g = 1.0;
};

struct EntanglementEdge {
  std::uint64_t a = 0;  // canonical: a < b
  std::uint64_t b = 0;
  double strength = 1.0;  // in (0, 1]; doubles as the co-lift probability
};

struct PileParams {
  int n = 0;
  double d_mm = 12.0;
  double l_mm = 0.0;
  double area_w_mm = 300.0;
  double area_h_mm = 250.0;
  std::uint64_t seed = 0;
  double alpha = 0.8;               // edge strength = min(1, alpha*l/d)
  double spread_attenuation = 0.25; // strength multiplier inside the swept band
  ParticleKind kind = ParticleKind::staple;
  double unit_mass_g = 1.0;
  double wire_width_mm = 1.5;        // stroke width of the rendered wire
  double particle_thickness_mm = 2.0;  // height added per stacked layer
  double prune_threshold = 0.05;     // attenuated edges below this are dropped

  void validate() const {
    if (n < 0) throw config_error("pile particle count must be >= 0");
    if (!(d_mm > 0.0)) throw config_error("crown width d must be > 0 mm");
    if (l_mm < 0.0) throw config_error("protrusion length l must be >= 0 mm");
    if (!(area_w_mm > 0.0) || !(area_h_mm > 0.0))
      throw config_error("pick area dimensions must be > 0 mm");
    if (!(unit_mass_g > 0.0)) throw config_error("unit mass must be > 0 g");
    if (!(alpha >= 0.0)) throw config_error("alpha must be >= 0");
    if (!(spread_attenuation >= 0.0 && spread_attenuation <= 1.0))
      throw config_error("spread attenuation must be in [0, 1]");
    if (!(wire_width_mm > 0.0)) throw config_error("wire width must be > 0 mm");
    if (!(particle_thickness_mm > 0.0))
      throw config_error("particle thickness must be > 0 mm");
  }
};

inline void to_json(nlohmann::json& j, const PileParams& p) {
  j = nlohmann::json{{"n", p.n},
                     {"d_mm", p.d_mm},
                     {"l_mm", p.l_mm},
                     {"area_mm", {p.area_w_mm, p.area_h_mm}},
                     {"seed", p.seed},
                     {"alpha", p.alpha},
                     {"spread_attenuation", p.spread_attenuation},
                     {"kind", to_string(p.kind)},
                     {"unit_mass_g", p.unit_mass_g},
                     {"wire_width_mm", p.wire_width_mm},
                     {"particle_thickness_mm", p.particle_thickness_mm},
                     {"prune_threshold", p.prune_threshold}};
}

inline void from_json(const nlohmann::json& j, PileParams& p) {
  p = PileParams{};
  p.n = j.value("n", p.n);
  p.d_mm = j.value("d_mm", p.d_mm);
  p.l_mm = j.value("l_mm", p.l_mm);
  if (j.contains("area_mm")) {
    const auto& a = j.at("area_mm");
    p.area_w_mm = a.at(0).get<double>();
    p.area_h_mm = a.at(1).get<double>();
  }
  p.seed = j.value("seed", p.seed);
  p.alpha = j.value("alpha", p.alpha);
  p.spread_attenuation = j.value("spread_attenuation", p.spread_attenuation);
  if (j.contains("kind")) p.kind = particle_kind_from_string(j.at("kind"));
  p.unit_mass_g = j.value("unit_mass_g", p.unit_mass_g);
  p.wire_width_mm = j.value("wire_width_mm", p.wire_width_mm);
  p.particle_thickness_mm = j.value("particle_thickness_mm", p.particle_thickness_mm);
  p.prune_threshold = j.value("prune_threshold", p.prune_threshold);
  p.validate();
}

struct PileState {
  PileParams params;  // generation knobs, kept so resets and replays match
  std::vector<Particle> particles;
  std::vector<EntanglementEdge> edges;
  std::uint64_t rng_seed = 0;

  double area_w_mm() const { return params.area_w_mm; }
  double area_h_mm() const { return params.area_h_mm; }

  double total_mass() const {
    double m = 0.0;
    for (const Particle& p : particles) m += p.unit_mass_g;
    return m;
  }
};

// Wire path of one particle. A staple bends both protrusions the same way
// (a squared-off U); a strand kinks them at per-particle pseudo-random
// angles derived from (pile seed, id), so no extra state needs storing.
inline std::vector<Segment> footprint(const Particle& p, std::uint64_t pile_seed) {
  const double rad = p.phi_deg * std::numbers::pi / 180.0;
  const double ux = std::cos(rad);
  const double uy = std::sin(rad);
  const double half = p.crown_width_d_mm / 2.0;
  const double e0x = p.x_mm - half * ux, e0y = p.y_mm - half * uy;
  const double e1x = p.x_mm + half * ux, e1y = p.y_mm + half * uy;

  std::vector<Segment> segs;
  segs.push_back({e0x, e0y, e1x, e1y});
  if (p.protrusion_length_l_mm <= 0.0) return segs;

  const double l = p.protrusion_length_l_mm;
  if (p.kind == ParticleKind::staple) {
    const double vx = -uy, vy = ux;
    segs.push_back({e0x, e0y, e0x + l * vx, e0y + l * vy});
    segs.push_back({e1x, e1y, e1x + l * vx, e1y + l * vy});
  } else {
    for (int i = 0; i < 2; ++i) {
      Rng leg(derive_seed(derive_seed(pile_seed, p.id), 7000u + i));
      const double a = leg.uniform(0.0, 2.0 * std::numbers::pi);
      const double ex = i == 0 ? e0x : e1x;
      const double ey = i == 0 ? e0y : e1y;
      segs.push_back({ex, ey, ex + l * std::cos(a), ey + l * std::sin(a)});
    }
  }
  return segs;
}

// Farthest a particle's wire can stick out from its center.
inline double particle_reach_mm(const PileParams& p) {
  return std::hypot(p.d_mm / 2.0, std::max(0.0, p.l_mm)) + p.wire_width_mm / 2.0;
}

namespace detail {

inline std::vector<std::vector<Segment>> all_footprints(const PileState& s) {
  std::vector<std::vector<Segment>> fps;
  fps.reserve(s.particles.size());
  for (const Particle& p : s.particles) fps.push_back(footprint(p, s.rng_seed));
  return fps;
}

// Drop-order layering: a particle rests on top of everything it touches.
inline void assign_layers(PileState& s) {
  const auto fps = all_footprints(s);
  const double touch = s.params.wire_width_mm;
  for (std::size_t i = 0; i < s.particles.size(); ++i) {
    int layer = 0;
    for (std::size_t j = 0; j < i; ++j)
      if (footprint_distance(fps[i], fps[j]) <= touch)
        layer = std::max(layer, s.particles[j].layer + 1);
    s.particles[i].layer = layer;
  }
}

// Random-geometric entanglement: wires passing within hooking range l of
// each other get an edge of strength min(1, alpha*l/d). No protrusions,
// no hooks, no edges.
inline void build_edges(PileState& s) {
  s.edges.clear();
  const double l = s.params.l_mm;
  if (l <= 0.0) return;
  const double strength = std::min(1.0, s.params.alpha * l / s.params.d_mm);
  if (strength <= 0.0) return;
  const auto fps = all_footprints(s);
  for (std::size_t i = 0; i < s.particles.size(); ++i)
    for (std::size_t j = i + 1; j < s.particles.size(); ++j)
      if (footprint_distance(fps[i], fps[j]) <= l)
        s.edges.push_back({std::min(s.particles[i].id, s.particles[j].id),
                           std::max(s.particles[i].id, s.particles[j].id),
                           strength});
}

// Center-biased placement with bounded rejection sampling; the margin keeps
// whole footprints inside the pick area.
inline void place_particles(PileState& s, Rng& rng) {
  const double margin = particle_reach_mm(s.params);
  const double w = s.params.area_w_mm;
  const double h = s.params.area_h_mm;
  if (2.0 * margin >= w || 2.0 * margin >= h)
    throw sim_error("pick area " + std::to_string(w) + "x" + std::to_string(h) +
                    " mm cannot hold particles reaching " +
                    std::to_string(margin) + " mm from center");
  const double cx = w / 2.0, cy = h / 2.0;
  const double sdx = (w / 2.0 - margin) / 2.0;
  const double sdy = (h / 2.0 - margin) / 2.0;

  for (Particle& p : s.particles) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      const double x = rng.normal(cx, sdx);
      const double y = rng.normal(cy, sdy);
      if (x >= margin && x <= w - margin && y >= margin && y <= h - margin) {
        p.x_mm = x;
        p.y_mm = y;
        placed = true;
      }
    }
    if (!placed)
      throw sim_error("failed to place a particle after 1000 attempts; "
                      "pick area too small for the pile");
    p.phi_deg = rng.uniform(0.0, 360.0);
  }
}

}  // namespace detail

// Recompute stacking and entanglement for externally edited states.
inline void settle_layers(PileState& s) { detail::assign_layers(s); }
inline void rebuild_entanglement(PileState& s) { detail::build_edges(s); }

inline PileState generate_pile(const PileParams& params) {
  params.validate();
  PileState s;
  s.params = params;
  s.rng_seed = params.seed;
  s.particles.resize(static_cast<std::size_t>(params.n));
  for (int i = 0; i < params.n; ++i) {
    Particle& p = s.particles[static_cast<std::size_t>(i)];
    p.id = static_cast<std::uint64_t>(i);
    p.kind = params.kind;
    p.crown_width_d_mm = params.d_mm;
    p.protrusion_length_l_mm = params.l_mm;
    p.unit_mass_g = params.unit_mass_g;
  }
  if (params.n > 0) {
    Rng rng(params.seed);
    detail::place_particles(s, rng);
    detail::assign_layers(s);
    detail::build_edges(s);
  }
  return s;
}

// Shake-and-settle between trials: same material, fresh packing and edges.
inline PileState reset_pile(const PileState& old, std::uint64_t seed) {
  PileState s = old;
  s.rng_seed = seed;
  s.params.seed = seed;
  if (!s.particles.empty()) {
    Rng rng(seed);
    detail::place_particles(s, rng);
    detail::assign_layers(s);
    detail::build_edges(s);
  } else {
    s.edges.clear();
  }
  return s;
}

// Top-down height field: per-pixel max of (layer+1) * particle_thickness
// over every wire covering the pixel center; bare floor stays 0.
inline DepthMap render_depth(const PileState& s, double scale_mm_per_px) {
  if (!(scale_mm_per_px > 0.0)) throw config_error("render scale must be > 0");
  const int w = static_cast<int>(std::ceil(s.area_w_mm() / scale_mm_per_px));
  const int h = static_cast<int>(std::ceil(s.area_h_mm() / scale_mm_per_px));
  if (w <= 0 || h <= 0) throw config_error("render target has no pixels");

  FloatGrid g(w, h, 0.0);
  const double rr = s.params.wire_width_mm / 2.0;
  for (const Particle& p : s.particles) {
    const double height = (p.layer + 1) * s.params.particle_thickness_mm;
    for (const Segment& seg : footprint(p, s.rng_seed)) {
      const int x0 = std::max(
          0, static_cast<int>(std::floor((std::min(seg.x0, seg.x1) - rr) /
                                         scale_mm_per_px)));
      const int x1 = std::min(
          w - 1, static_cast<int>(std::ceil((std::max(seg.x0, seg.x1) + rr) /
                                            scale_mm_per_px)));
      const int y0 = std::max(
          0, static_cast<int>(std::floor((std::min(seg.y0, seg.y1) - rr) /
                                         scale_mm_per_px)));
      const int y1 = std::min(
          h - 1, static_cast<int>(std::ceil((std::max(seg.y0, seg.y1) + rr) /
                                            scale_mm_per_px)));
      for (int py = y0; py <= y1; ++py)
        for (int px = x0; px <= x1; ++px) {
          const double mx = (px + 0.5) * scale_mm_per_px;
          const double my = (py + 0.5) * scale_mm_per_px;
          if (detail::point_segment_distance(mx, my, seg) <= rr)
            g.at(px, py) = std::max(g.at(px, py), height);
        }
    }
  }
  return DepthMap(std::move(g), scale_mm_per_px);
}

// ---------------------------------------------------------------------------
// picking

enum class Strategy { FP, GI, SnP };

inline std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::FP: return "FP";
    case Strategy::GI: return "GI";
    default: return "SnP";
  }
}

struct PickParams {
  double x_mm = 0.0;           // jaw center
  double y_mm = 0.0;
  double rotation_deg = 0.0;   // opening-axis angle
  double aperture_w_mm = 40.0; // plate separation at insertion
  double jaw_lateral_mm = 15.0;
  double max_aperture_mm = 71.12;  // outward plate travel limit when spreading
  double spread_dir_x = 1.0;       // unit direction of the spread line
  double spread_dir_y = 0.0;
};

struct PickOutcome {
  std::vector<std::uint64_t> picked_ids;
  double picked_mass_g = 0.0;
  Strategy strategy = Strategy::FP;
  PickParams params;
  bool spread = false;
  int edges_attenuated = 0;
  int edges_pruned = 0;
};

// Closing the jaws sweeps everything between the plates into the grip, then
// entangled neighbors ride along. When `spread` is set, the plates first
// travel outward along the spread line, weakening every edge that crosses
// the swept band (and dropping the ones that end up negligible).
inline PickOutcome simulate_pick(PileState& s, const PickParams& params,
                                 bool spread, std::uint64_t seed,
                                 Strategy strategy) {
  if (params.x_mm < 0.0 || params.x_mm > s.area_w_mm() || params.y_mm < 0.0 ||
      params.y_mm > s.area_h_mm())
    throw sim_error("pick point (" + std::to_string(params.x_mm) + ", " +
                    std::to_string(params.y_mm) + ") outside the " +
                    std::to_string(s.area_w_mm()) + "x" +
                    std::to_string(s.area_h_mm()) + " mm pick area");
  if (!(params.aperture_w_mm > 0.0))
    throw config_error("pick aperture must be > 0 mm");

  PickOutcome out;
  out.strategy = strategy;
  out.params = params;
  out.spread = spread;

  std::map<std::uint64_t, const Particle*> by_id;
  std::map<std::uint64_t, std::vector<Segment>> fps;
  for (const Particle& p : s.particles) {
    by_id[p.id] = &p;
    fps[p.id] = footprint(p, s.rng_seed);
  }

  if (spread) {
    // two bands, one per plate, from the resting aperture out to the limit
    const double inner = params.aperture_w_mm / 2.0;
    const double outer = std::max(inner, params.max_aperture_mm / 2.0);
    const double hu = (outer - inner) / 2.0;
    const double hv = params.jaw_lateral_mm / 2.0;
    const double band_deg =
        std::atan2(params.spread_dir_y, params.spread_dir_x) * 180.0 /
        std::numbers::pi;
    auto crosses_band = [&](const EntanglementEdge& e) {
      const Particle* pa = by_id.count(e.a) ? by_id[e.a] : nullptr;
      const Particle* pb = by_id.count(e.b) ? by_id[e.b] : nullptr;
      if (!pa || !pb) return false;
      const Segment link{pa->x_mm, pa->y_mm, pb->x_mm, pb->y_mm};
      for (double side : {1.0, -1.0}) {
        const double mid = side * (inner + outer) / 2.0;
        const double cx = params.x_mm + mid * params.spread_dir_x;
        const double cy = params.y_mm + mid * params.spread_dir_y;
        if (hu > 0.0 &&
            detail::segment_hits_oriented_box(link, cx, cy, band_deg, hu, hv))
          return true;
      }
      return false;
    };
    std::vector<EntanglementEdge> kept;
    kept.reserve(s.edges.size());
    for (EntanglementEdge e : s.edges) {
      if (crosses_band(e)) {
        e.strength *= s.params.spread_attenuation;
        ++out.edges_attenuated;
        if (e.strength < s.params.prune_threshold) {
          ++out.edges_pruned;
          continue;
        }
      }
      kept.push_back(e);
    }
    s.edges = std::move(kept);
  }

  // direct set: footprint touches the between-plates rectangle
  std::set<std::uint64_t> picked;
  for (const Particle& p : s.particles) {
    for (const Segment& seg : fps[p.id]) {
      if (detail::segment_hits_oriented_box(
              seg, params.x_mm, params.y_mm, params.rotation_deg,
              params.aperture_w_mm / 2.0, params.jaw_lateral_mm / 2.0)) {
        picked.insert(p.id);
        break;
      }
    }
  }

  // co-lift closure: each edge is one seeded coin weighted by its strength,
  // independent of traversal order
  std::map<std::uint64_t, std::vector<const EntanglementEdge*>> adj;
  for (const EntanglementEdge& e : s.edges) {
    adj[e.a].push_back(&e);
    adj[e.b].push_back(&e);
  }
  std::deque<std::uint64_t> frontier(picked.begin(), picked.end());
  while (!frontier.empty()) {
    const std::uint64_t id = frontier.front();
    frontier.pop_front();
    for (const EntanglementEdge* e : adj[id]) {
      const std::uint64_t other = e->a == id ? e->b : e->a;
      if (picked.count(other)) continue;
      if (pair_uniform(seed, e->a, e->b) < e->strength) {
        picked.insert(other);
        frontier.push_back(other);
      }
    }
  }

  for (std::uint64_t id : picked) {
    out.picked_ids.push_back(id);
    out.picked_mass_g += by_id[id]->unit_mass_g;
  }

  std::erase_if(s.particles,
                [&](const Particle& p) { return picked.count(p.id) > 0; });
  std::erase_if(s.edges, [&](const EntanglementEdge& e) {
    return picked.count(e.a) > 0 || picked.count(e.b) > 0;
  });
  return out;
}

// ---------------------------------------------------------------------------
// state (de)serialization for replay

inline void to_json(nlohmann::json& j, const Particle& p) {
  j = nlohmann::json{{"id", p.id},
                     {"x_mm", p.x_mm},
                     {"y_mm", p.y_mm},
                     {"phi_deg", p.phi_deg},
                     {"kind", to_string(p.kind)},
                     {"crown_width_d_mm", p.crown_width_d_mm},
                     {"protrusion_length_l_mm", p.protrusion_length_l_mm},
                     {"layer", p.layer},
                     {"unit_mass_g", p.unit_mass_g}};
}

inline void from_json(const nlohmann::json& j, Particle& p) {
  p.id = j.at("id").get<std::uint64_t>();
  p.x_mm = j.at("x_mm").get<double>();
  p.y_mm = j.at("y_mm").get<double>();
  p.phi_deg = j.at("phi_deg").get<double>();
  p.kind = particle_kind_from_string(j.at("kind").get<std::string>());
  p.crown_width_d_mm = j.at("crown_width_d_mm").get<double>();
  p.protrusion_length_l_mm = j.at("protrusion_length_l_mm").get<double>();
  p.layer = j.at("layer").get<int>();
  p.unit_mass_g = j.at("unit_mass_g").get<double>();
}

inline void to_json(nlohmann::json& j, const PileState& s) {
  nlohmann::json edges = nlohmann::json::array();
  for (const EntanglementEdge& e : s.edges)
    edges.push_back({{"a", e.a}, {"b", e.b}, {"strength", e.strength}});
  j = nlohmann::json{{"params", s.params},
                     {"rng_seed", s.rng_seed},
                     {"particles", s.particles},
                     {"entanglement_edges", std::move(edges)}};
}

inline void from_json(const nlohmann::json& j, PileState& s) {
  s = PileState{};
  s.params = j.at("params").get<PileParams>();
  s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  s.particles = j.at("particles").get<std::vector<Particle>>();
  std::set<std::uint64_t> ids;
  for (const Particle& p : s.particles) ids.insert(p.id);
  if (ids.size() != s.particles.size())
    throw io_error("pile state has duplicate particle ids");
  for (const auto& je : j.at("entanglement_edges")) {
    EntanglementEdge e;
    e.a = je.at("a").get<std::uint64_t>();
    e.b = je.at("b").get<std::uint64_t>();
    e.strength = je.at("strength").get<double>();
    if (!ids.count(e.a) || !ids.count(e.b))
      throw io_error("entanglement edge references a missing particle id");
    if (!(e.strength > 0.0 && e.strength <= 1.0))
      throw io_error("entanglement edge strength must be in (0, 1]");
    s.edges.push_back(e);
  }
}

}  // namespace snpick
