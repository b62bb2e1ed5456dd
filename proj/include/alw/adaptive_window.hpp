#pragma once

// Adaptive local window: per contour point and per axis, the window extent is
//
//   W = L / ln(L) * (GH + 1/GC + 1/LC + 1/f)^-1
//
// with L the current lesion extent along the axis, GH/GC the global
// homogeneity/contrast of the ROI, LC the local contrast along the axis and f
// the mean energy of the previous iteration relative to the first one. The raw
// value is rounded to the nearest odd integer and clamped.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "alw/error.hpp"
#include "alw/levelset.hpp"
#include "alw/texture.hpp"

namespace alw::window {

inline constexpr int kDefaultMin = 5;
inline constexpr int kDefaultMax = 35;
inline constexpr double kMinLesionExtent = 3.0;
inline constexpr double kMinEnergyRatio = 1e-3;

struct LesionScale {
  double lx = kMinLesionExtent;
  double ly = kMinLesionExtent;
};

struct Extent {
  int wx = kDefaultMin;
  int wy = kDefaultMin;
  friend bool operator==(const Extent&, const Extent&) = default;
};

struct Params {
  int w_min = kDefaultMin;
  int w_max = kDefaultMax;
  /// Multiplier applied to GC and LC before they are inverted. Texture
  /// contrasts arrive normalized to [0, 1]; (N_G - 1)^2 restores gray-level units.
  double contrast_scale = 1.0;
  /// Base of the logarithm in the lesion-scale factor L / log(L).
  double log_base = std::numbers::e;
};

/// Windows chosen for every ZLS point of one iteration.
struct WindowPlan {
  int iteration = 0;
  LesionScale lesion;
  std::vector<Extent> windows;  // parallel to the band's zls_points
};

/// Tight bounding box extents of the interior (phi < 0), floored at 3 px.
inline LesionScale lesion_dims(const levelset::DistanceMap& map) {
  int x0 = std::numeric_limits<int>::max(), y0 = std::numeric_limits<int>::max();
  int x1 = -1, y1 = -1;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (!levelset::is_inside(map.phi(x, y))) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) throw ContourCollapse("contour has no interior");
  return {std::max<double>(x1 - x0 + 1, kMinLesionExtent), std::max<double>(y1 - y0 + 1, kMinLesionExtent)};
}

/// Nearest odd integer, ties toward the larger window, clamped to [w_min, w_max].
inline int round_odd(double raw, int w_min, int w_max) {
  if (std::isnan(raw)) return w_min;
  if (raw >= w_max) return w_max;
  if (raw <= w_min) return w_min;
  const double k = std::floor((raw - 1.0) / 2.0 + 0.5);
  return std::clamp(static_cast<int>(2.0 * k + 1.0), w_min, w_max);
}

/// Unrounded window extent along one axis.
inline double raw_extent(double lesion_extent, double gh, double gc, double lc, double f_norm, double contrast_scale = 1.0,
                         double log_base = std::numbers::e) {
  const double l = std::max(lesion_extent, kMinLesionExtent);
  const double gc_s = std::max(gc, texture::kContrastFloor) * contrast_scale;
  const double lc_s = std::max(lc, texture::kContrastFloor) * contrast_scale;
  const double f = std::clamp(f_norm, kMinEnergyRatio, 1.0);
  const double denom = gh + 1.0 / gc_s + 1.0 / lc_s + 1.0 / f;
  return l / (std::log(l) / std::log(log_base)) / denom;
}

inline Extent estimate_window(const LesionScale& scale, double gh, double gc, double lc_x, double lc_y, double f_norm,
                              const Params& p = {}) {
  if (p.w_min < 1 || p.w_max < p.w_min || p.w_min % 2 == 0 || p.w_max % 2 == 0) {
    throw InvalidConfig("window clamps must be odd with 1 <= w_min <= w_max");
  }
  if (!(p.log_base > 1.0)) throw InvalidConfig("window log base must be > 1");
  return {round_odd(raw_extent(scale.lx, gh, gc, lc_x, f_norm, p.contrast_scale, p.log_base), p.w_min, p.w_max),
          round_odd(raw_extent(scale.ly, gh, gc, lc_y, f_norm, p.contrast_scale, p.log_base), p.w_min, p.w_max)};
}

/// Hysteresis on a re-estimated window: keeps `previous` while the raw
/// estimate stays within `margin` px of it, otherwise rounds the estimate.
/// Prevents two-step limit cycles between neighbouring odd sizes.
inline int settle(int previous, double raw, double margin, int w_min, int w_max) {
  if (margin > 0.0 && previous >= w_min && previous <= w_max && std::abs(raw - previous) <= margin) return previous;
  return round_odd(raw, w_min, w_max);
}

/// Window re-estimate with hysteresis against the window used last time.
inline Extent estimate_window_settled(const Extent& previous, const LesionScale& scale, double gh, double gc, double lc_x,
                                      double lc_y, double f_norm, double margin, const Params& p = {}) {
  const Extent fresh = estimate_window(scale, gh, gc, lc_x, lc_y, f_norm, p);  // validates p
  if (!(margin > 0.0)) return fresh;
  return {settle(previous.wx, raw_extent(scale.lx, gh, gc, lc_x, f_norm, p.contrast_scale, p.log_base), margin, p.w_min, p.w_max),
          settle(previous.wy, raw_extent(scale.ly, gh, gc, lc_y, f_norm, p.contrast_scale, p.log_base), margin, p.w_min, p.w_max)};
}

/// First-iteration window: local contrast stands in as GC and the energy term as 1.
inline Extent bootstrap_window(const LesionScale& scale, double gh, double gc, const Params& p = {}) {
  return estimate_window(scale, gh, gc, gc, gc, 1.0, p);
}

/// F_j / F_1 clamped into [1e-3, 1]; F_1 is floored at 1e-6.
inline double normalize_energy_trace(double f_bar_j, double f_bar_1) {
  const double base = std::max(f_bar_1, 1e-6);
  const double r = f_bar_j / base;
  if (std::isnan(r)) return kMinEnergyRatio;
  return std::clamp(r, kMinEnergyRatio, 1.0);
}

}  // namespace alw::window
