#pragma once

// Test-only reference implementations. Everything here is deliberately the
// slow, obvious route (nested loops, exhaustive scans) and must stay
// independent of the library code paths it is used to check.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <tuple>
#include <vector>

#include "snpick/convolution.hpp"
#include "snpick/grid.hpp"
#include "snpick/gripper.hpp"

namespace oracle {

// Four-nested-loop direct sum with explicit zero padding.
inline snpick::FloatGrid convolve_direct(const snpick::FloatGrid& in,
                                         const snpick::FloatGrid& k) {
  const int ax = k.width() / 2;
  const int ay = k.height() / 2;
  snpick::FloatGrid out(in.width(), in.height(), 0.0);
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) {
      double sum = 0.0;
      for (int qy = 0; qy < k.height(); ++qy) {
        for (int qx = 0; qx < k.width(); ++qx) {
          const int ix = x + qx - ax;
          const int iy = y + qy - ay;
          double v = 0.0;  // zero padding outside the input
          if (ix >= 0 && ix < in.width() && iy >= 0 && iy < in.height())
            v = in.at(ix, iy);
          sum += v * k.at(qx, qy);
        }
      }
      out.at(x, y) = sum;
    }
  }
  return out;
}

inline snpick::FloatGrid mask_to_float(const snpick::BinaryMask& m) {
  snpick::FloatGrid g(m.width(), m.height(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) g[i] = m[i] ? 1.0 : 0.0;
  return g;
}

// Binarized convolution response of two masks: 1{(a * b) > 0}.
inline snpick::BinaryMask binary_convolve_direct(const snpick::BinaryMask& in,
                                                 const snpick::BinaryMask& k) {
  const snpick::FloatGrid r = convolve_direct(mask_to_float(in), mask_to_float(k));
  snpick::BinaryMask out(in.width(), in.height(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = r[i] > 0.0 ? 1 : 0;
  return out;
}

// Exhaustive max scan, first hit in raster order wins.
inline std::tuple<int, int, double> highest_point_scan(const snpick::FloatGrid& g) {
  int bx = 0, by = 0;
  double best = g.at(0, 0);
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x)
      if (g.at(x, y) > best) {
        best = g.at(x, y);
        bx = x;
        by = y;
      }
  return {bx, by, best};
}

// Argmax of grid restricted to pixels where pred(mask value) holds;
// raster-order tie-break, nullopt when the restricted set is empty or the
// max is not strictly positive (require_positive).
template <typename Pred>
inline std::optional<std::tuple<int, int, double>> restricted_argmax(
    const snpick::FloatGrid& g, const snpick::BinaryMask& mask, Pred pred,
    bool require_positive) {
  bool found = false;
  int bx = 0, by = 0;
  double best = 0.0;
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) {
      if (!pred(mask.at(x, y))) continue;
      if (!found || g.at(x, y) > best) {
        best = g.at(x, y);
        bx = x;
        by = y;
        found = true;
      }
    }
  if (!found) return std::nullopt;
  if (require_positive && !(best > 0.0)) return std::nullopt;
  return std::make_tuple(bx, by, best);
}

// Exhaustive grasp search: every orientation of the sweep, every pixel,
// direct-sum convolutions throughout, global argmax of the constrained
// objective (smoothed collision-free contact, zero where a plate collides).
// Earliest orientation and raster order break ties.
struct PlanOracleResult {
  bool found = false;
  int x = 0, y = 0;
  double rotation_deg = 0.0;
  double score = 0.0;
  bool has_entanglement = false;
  int ex = 0, ey = 0;
};

inline PlanOracleResult plan_exhaustive(const snpick::DepthMap& d,
                                        const snpick::GripperSpec& spec,
                                        double sigma_mm, double step_deg) {
  using snpick::BinaryMask;
  using snpick::FloatGrid;

  const auto top = oracle::highest_point_scan(d.heights());
  const double top_h = std::get<2>(top);

  BinaryMask oc(d.width(), d.height(), 0);
  BinaryMask ocp(d.width(), d.height(), 0);
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x) {
      oc.at(x, y) = d.at(x, y) >= top_h ? 1 : 0;
      ocp.at(x, y) = d.at(x, y) > spec.insertion_depth_rz_mm ? 1 : 0;
    }
  const FloatGrid g = snpick::gaussian_kernel(sigma_mm / d.scale());

  PlanOracleResult best;
  BinaryMask best_wcp;
  FloatGrid best_gprime;
  for (double rotation = 0.0; rotation < 180.0 - 1e-9; rotation += step_deg) {
    const auto fp = snpick::rasterize_footprints(spec, rotation, d.scale());
    const BinaryMask wc = binary_convolve_direct(oc, fp.gc);
    const BinaryMask wcp = binary_convolve_direct(ocp, fp.gcp);
    BinaryMask free_contact(d.width(), d.height(), 0);
    for (std::size_t i = 0; i < free_contact.size(); ++i)
      free_contact[i] = (wc[i] && !wcp[i]) ? 1 : 0;
    const FloatGrid G = convolve_direct(mask_to_float(free_contact), g);
    const FloatGrid gprime = convolve_direct(mask_to_float(wcp), g);

    for (int y = 0; y < d.height(); ++y)
      for (int x = 0; x < d.width(); ++x) {
        const double f = wcp.at(x, y) ? 0.0 : G.at(x, y);
        if (f > best.score) {
          best.found = true;
          best.x = x;
          best.y = y;
          best.rotation_deg = rotation;
          best.score = f;
          best_wcp = wcp;
          best_gprime = gprime;
        }
      }
  }
  if (!best.found) return best;

  double best_h = 0.0;
  bool h_found = false;
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x) {
      const double h = best_wcp.at(x, y) ? best_gprime.at(x, y) : 0.0;
      if (best_wcp.at(x, y) && (!h_found || h > best_h)) {
        h_found = true;
        best_h = h;
        best.ex = x;
        best.ey = y;
      }
    }
  best.has_entanglement = h_found;
  return best;
}

// Ordinary least squares y = a*x + b via the closed-form normal equations.
inline std::pair<double, double> line_fit_normal_equations(
    const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  return {slope, intercept};
}

}  // namespace oracle
