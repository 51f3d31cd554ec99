#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "snpick/errors.hpp"
#include "snpick/grid.hpp"

namespace snpick {

namespace detail {

struct PixelBox {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;  // inclusive; empty when x1 < x0
  bool empty() const { return x1 < x0 || y1 < y0; }
};

template <typename T>
PixelBox nonzero_box(const Grid<T>& g) {
  PixelBox b{g.width(), g.height(), -1, -1};
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x)
      if (g.at(x, y) != T{}) {
        b.x0 = std::min(b.x0, x);
        b.y0 = std::min(b.y0, y);
        b.x1 = std::max(b.x1, x);
        b.y1 = std::max(b.y1, y);
      }
  return b;
}

inline void require_odd_kernel(int kw, int kh) {
  if (kw <= 0 || kh <= 0 || kw % 2 == 0 || kh % 2 == 0)
    throw config_error("kernel dimensions must be odd and positive, got " +
                       std::to_string(kw) + "x" + std::to_string(kh));
}

}  // namespace detail

// Zero-padded correlation-style sum with the kernel anchored at its center:
// out[x,y] = sum_{qx,qy} in[x+qx-ax, y+qy-ay] * k[qx,qy].
// Output pixels out of reach of any nonzero input stay exactly 0.
inline FloatGrid convolve(const FloatGrid& input, const FloatGrid& kernel) {
  detail::require_odd_kernel(kernel.width(), kernel.height());
  const int ax = kernel.width() / 2;
  const int ay = kernel.height() / 2;

  FloatGrid out(input.width(), input.height(), 0.0);
  const detail::PixelBox box = detail::nonzero_box(input);
  if (box.empty()) return out;

  const int ox0 = std::max(0, box.x0 - ax);
  const int ox1 = std::min(input.width() - 1, box.x1 + ax);
  const int oy0 = std::max(0, box.y0 - ay);
  const int oy1 = std::min(input.height() - 1, box.y1 + ay);

  for (int y = oy0; y <= oy1; ++y) {
    for (int x = ox0; x <= ox1; ++x) {
      double sum = 0.0;
      for (int qy = 0; qy < kernel.height(); ++qy) {
        const int iy = y + qy - ay;
        if (iy < 0 || iy >= input.height()) continue;
        for (int qx = 0; qx < kernel.width(); ++qx) {
          const int ix = x + qx - ax;
          if (ix < 0 || ix >= input.width()) continue;
          sum += input.at(ix, iy) * kernel.at(qx, qy);
        }
      }
      out.at(x, y) = sum;
    }
  }
  return out;
}

inline FloatGrid to_float(const BinaryMask& m) {
  FloatGrid g(m.width(), m.height(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) g[i] = m[i] ? 1.0 : 0.0;
  return g;
}

inline FloatGrid convolve(const BinaryMask& input, const FloatGrid& kernel) {
  return convolve(to_float(input), kernel);
}

// Indicator of a positive convolution response: out = 1{(in * k) > 0}.
// Scatter over set pixels; exact for 0/1 masks, no float accumulation.
inline BinaryMask binary_convolve(const BinaryMask& input,
                                  const BinaryMask& kernel) {
  detail::require_odd_kernel(kernel.width(), kernel.height());
  const int ax = kernel.width() / 2;
  const int ay = kernel.height() / 2;

  // Input pixel i lands on output p = i - (q - anchor) for each set cell q.
  std::vector<std::pair<int, int>> offsets;
  for (int qy = 0; qy < kernel.height(); ++qy)
    for (int qx = 0; qx < kernel.width(); ++qx)
      if (kernel.at(qx, qy)) offsets.emplace_back(ax - qx, ay - qy);

  BinaryMask out(input.width(), input.height(), 0);
  for (int y = 0; y < input.height(); ++y)
    for (int x = 0; x < input.width(); ++x) {
      if (!input.at(x, y)) continue;
      for (const auto& [dx, dy] : offsets) {
        const int px = x + dx;
        const int py = y + dy;
        if (out.in_bounds(px, py)) out.at(px, py) = 1;
      }
    }
  return out;
}

// Normalized isotropic Gaussian on odd support 2*ceil(3*sigma)+1.
// sigma <= 0 degenerates to the 1x1 identity kernel.
inline FloatGrid gaussian_kernel(double sigma_px) {
  if (!(sigma_px > 0.0)) return FloatGrid(1, 1, 1.0);
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_px)));
  const int k = 2 * radius + 1;
  FloatGrid g(k, k, 0.0);
  double sum = 0.0;
  for (int qy = 0; qy < k; ++qy)
    for (int qx = 0; qx < k; ++qx) {
      const double dx = qx - radius;
      const double dy = qy - radius;
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_px * sigma_px));
      g.at(qx, qy) = v;
      sum += v;
    }
  for (int qy = 0; qy < k; ++qy)
    for (int qx = 0; qx < k; ++qx) g.at(qx, qy) /= sum;
  return g;
}

}  // namespace snpick
