#pragma once

// Signed distance map, smoothed Heaviside/Dirac pair, narrow band bookkeeping,
// curvature and the explicit evolution step.
//
// Sign convention: phi < 0 strictly inside the contour, phi >= 0 outside.
// A positive force inflates the contour, i.e. lowers phi.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "alw/error.hpp"
#include "alw/image.hpp"

namespace alw::levelset {

inline constexpr double kDefaultEpsilon = 1.5;
inline constexpr double kDefaultBandRadius = 4.0;
inline constexpr double kMaxStep = 0.45;
inline constexpr double kGradientFloor = 1e-8;

/// Smoothed step: 1 above +eps, 0 below -eps.
inline double heaviside(double phi, double eps) {
  if (phi > eps) return 1.0;
  if (phi < -eps) return 0.0;
  return 0.5 * (1.0 + phi / eps + std::sin(std::numbers::pi * phi / eps) / std::numbers::pi);
}

/// Derivative of heaviside: a raised-cosine bump of half-width eps.
inline double dirac(double phi, double eps) {
  if (std::abs(phi) > eps) return 0.0;
  return (1.0 + std::cos(std::numbers::pi * phi / eps)) / (2.0 * eps);
}

/// Weight of the contour interior at a point (1 deep inside, 0 far outside).
inline double inside_weight(double phi, double eps) { return heaviside(-phi, eps); }

struct DistanceMap {
  Raster<double> phi;
  double epsilon = kDefaultEpsilon;
  double band_radius = kDefaultBandRadius;

  int width() const { return phi.width(); }
  int height() const { return phi.height(); }
};

/// Exact signed distance to a circle over a width x height grid.
inline DistanceMap init_circle(int width, int height, double cx, double cy, double radius,
                               double epsilon = kDefaultEpsilon, double band_radius = kDefaultBandRadius) {
  if (!(radius >= 2.0)) throw InvalidSeed("initial circle radius must be at least 2 pixels");
  if (width < 3 || height < 3) throw InvalidInput("level-set grid must be at least 3x3");
  if (cx < 0 || cy < 0 || cx > width - 1 || cy > height - 1) throw InvalidSeed("circle center lies outside the ROI");
  DistanceMap map{Raster<double>(width, height), epsilon, band_radius};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) map.phi(x, y) = std::hypot(x - cx, y - cy) - radius;
  }
  return map;
}

struct NarrowBand {
  std::vector<std::size_t> points;      // row-major indices with |phi| <= band_radius
  std::vector<std::size_t> zls_points;  // indices with a 4-neighbour of opposite sign
};

inline bool is_inside(double phi) { return phi < 0.0; }

inline bool has_opposite_neighbour(const Raster<double>& phi, int x, int y) {
  const bool in = is_inside(phi(x, y));
  return (x > 0 && is_inside(phi(x - 1, y)) != in) || (x + 1 < phi.width() && is_inside(phi(x + 1, y)) != in) ||
         (y > 0 && is_inside(phi(x, y - 1)) != in) || (y + 1 < phi.height() && is_inside(phi(x, y + 1)) != in);
}

/// Collects band and zero-level-set points; throws ContourCollapse if phi is single-signed.
inline NarrowBand rebuild_band(const DistanceMap& map) {
  NarrowBand band;
  const auto& phi = map.phi;
  for (int y = 0; y < phi.height(); ++y) {
    for (int x = 0; x < phi.width(); ++x) {
      const std::size_t i = phi.index(x, y);
      const bool zls = has_opposite_neighbour(phi, x, y);
      if (zls) band.zls_points.push_back(i);
      if (zls || std::abs(phi[i]) <= map.band_radius) band.points.push_back(i);
    }
  }
  if (band.zls_points.empty()) throw ContourCollapse("zero level set vanished");
  return band;
}

/// Binary interior mask (phi < 0).
inline Mask interior_mask(const DistanceMap& map) {
  Mask m(map.width(), map.height());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = is_inside(map.phi[i]) ? 1 : 0;
  return m;
}

struct Gradient {
  double x = 0.0;
  double y = 0.0;
  double norm() const { return std::hypot(x, y); }
};

/// Central-difference gradient with replicated borders.
inline Gradient gradient(const Raster<double>& phi, int x, int y) {
  return {0.5 * (phi.clamped(x + 1, y) - phi.clamped(x - 1, y)), 0.5 * (phi.clamped(x, y + 1) - phi.clamped(x, y - 1))};
}

/// div(grad phi / |grad phi|) by central differences; border cells use replicated values.
inline double curvature(const Raster<double>& phi, int x, int y) {
  const double c = phi(x, y);
  const double l = phi.clamped(x - 1, y), r = phi.clamped(x + 1, y);
  const double u = phi.clamped(x, y - 1), d = phi.clamped(x, y + 1);
  const double px = 0.5 * (r - l);
  const double py = 0.5 * (d - u);
  const double pxx = r - 2.0 * c + l;
  const double pyy = d - 2.0 * c + u;
  const double pxy = 0.25 * (phi.clamped(x + 1, y + 1) - phi.clamped(x + 1, y - 1) - phi.clamped(x - 1, y + 1) +
                             phi.clamped(x - 1, y - 1));
  const double g2 = px * px + py * py;
  const double g = std::max(std::sqrt(g2), kGradientFloor);
  return (pxx * py * py - 2.0 * px * py * pxy + pyy * px * px) / (g * g * g);
}

inline double curvature(const DistanceMap& map, Pixel p) { return curvature(map.phi, p.x, p.y); }

/// Discrete contour length: sum of dirac(phi) |grad phi| over the grid.
inline double contour_length(const DistanceMap& map) {
  double len = 0.0;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const double dl = dirac(map.phi(x, y), map.epsilon);
      if (dl > 0.0) len += dl * gradient(map.phi, x, y).norm();
    }
  }
  return len;
}

/// Rebuilds phi as a signed distance while keeping every sign.
///
/// Seeds: cells with an opposite-sign 4-neighbour get the foot point
/// p - phi(p) grad/|grad|^2 on the interface. Two raster sweeps then propagate
/// the nearest foot point to every other cell.
inline void reinitialize(DistanceMap& map) {
  auto& phi = map.phi;
  const int w = phi.width();
  const int h = phi.height();
  constexpr double kFar = std::numeric_limits<double>::infinity();
  std::vector<double> fx(phi.size(), 0.0), fy(phi.size(), 0.0), dist(phi.size(), kFar);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!has_opposite_neighbour(phi, x, y)) continue;
      const std::size_t i = phi.index(x, y);
      const Gradient g = gradient(phi, x, y);
      const double g2 = g.x * g.x + g.y * g.y;
      double ox = 0.0, oy = 0.0;
      if (g2 > kGradientFloor) {
        ox = -phi[i] * g.x / g2;
        oy = -phi[i] * g.y / g2;
      }
      // The foot point can never be farther than the nearest axis crossing.
      double best = std::hypot(ox, oy);
      const int nx[4] = {-1, 1, 0, 0}, ny[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int qx = x + nx[k], qy = y + ny[k];
        if (!phi.contains(qx, qy) || is_inside(phi(qx, qy)) == is_inside(phi[i])) continue;
        const double t = phi[i] / (phi[i] - phi(qx, qy));
        if (g2 <= kGradientFloor || t < best) {
          best = t;
          ox = t * nx[k];
          oy = t * ny[k];
        }
      }
      fx[i] = x + ox;
      fy[i] = y + oy;
      dist[i] = std::hypot(ox, oy);
    }
  }

  auto relax = [&](int x, int y, int qx, int qy) {
    if (!phi.contains(qx, qy)) return;
    const std::size_t j = phi.index(qx, qy);
    if (dist[j] == kFar) return;
    const std::size_t i = phi.index(x, y);
    const double d = std::hypot(x - fx[j], y - fy[j]);
    if (d < dist[i]) {
      dist[i] = d;
      fx[i] = fx[j];
      fy[i] = fy[j];
    }
  };
  for (int pass = 0; pass < 2; ++pass) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        relax(x, y, x - 1, y);
        relax(x, y, x - 1, y - 1);
        relax(x, y, x, y - 1);
        relax(x, y, x + 1, y - 1);
      }
      for (int x = w - 1; x >= 0; --x) relax(x, y, x + 1, y);
    }
    for (int y = h - 1; y >= 0; --y) {
      for (int x = w - 1; x >= 0; --x) {
        relax(x, y, x + 1, y);
        relax(x, y, x + 1, y + 1);
        relax(x, y, x, y + 1);
        relax(x, y, x - 1, y + 1);
      }
      for (int x = 0; x < w; ++x) relax(x, y, x - 1, y);
    }
  }

  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (dist[i] == kFar) continue;  // no interface anywhere: leave untouched
    const double mag = dist[i];
    phi[i] = is_inside(phi[i]) ? -std::max(mag, std::numeric_limits<double>::min()) : mag;
  }
}

/// Exact nearest-point lookup among a fixed set of grid points, by bucketing.
/// Ties go to the lowest row-major index.
class NearestPoint {
 public:
  NearestPoint(int width, int height, const std::vector<std::size_t>& points, int cell = 8)
      : width_(width), cell_(cell), cols_((width + cell - 1) / cell), rows_((height + cell - 1) / cell),
        buckets_(static_cast<std::size_t>(cols_ * rows_)) {
    for (std::size_t k = 0; k < points.size(); ++k) {
      const int x = static_cast<int>(points[k] % static_cast<std::size_t>(width));
      const int y = static_cast<int>(points[k] / static_cast<std::size_t>(width));
      buckets_[static_cast<std::size_t>((y / cell_) * cols_ + x / cell_)].push_back({x, y, points[k], k});
    }
  }

  /// Position (in the constructor's list) of the point nearest to (x, y); npos if empty.
  std::size_t nearest(int x, int y) const {
    const int bx = x / cell_, by = y / cell_;
    std::size_t best = npos;
    long long best_d2 = std::numeric_limits<long long>::max();
    std::size_t best_index = std::numeric_limits<std::size_t>::max();
    const int max_ring = std::max(cols_, rows_);
    for (int ring = 0; ring <= max_ring; ++ring) {
      if (best != npos) {
        // Every point in this ring is at least (ring - 1) * cell away.
        const long long lower = static_cast<long long>(ring - 1) * cell_;
        if (lower > 0 && lower * lower > best_d2) break;
      }
      for (int cy = by - ring; cy <= by + ring; ++cy) {
        if (cy < 0 || cy >= rows_) continue;
        for (int cx = bx - ring; cx <= bx + ring; ++cx) {
          if (cx < 0 || cx >= cols_) continue;
          if (std::max(std::abs(cx - bx), std::abs(cy - by)) != ring) continue;
          for (const auto& e : buckets_[static_cast<std::size_t>(cy * cols_ + cx)]) {
            const long long dx = e.x - x, dy = e.y - y;
            const long long d2 = dx * dx + dy * dy;
            if (d2 < best_d2 || (d2 == best_d2 && e.index < best_index)) {
              best_d2 = d2;
              best_index = e.index;
              best = e.slot;
            }
          }
        }
      }
    }
    return best;
  }

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

 private:
  struct Entry {
    int x;
    int y;
    std::size_t index;
    std::size_t slot;
  };
  int width_;
  int cell_;
  int cols_;
  int rows_;
  std::vector<std::vector<Entry>> buckets_;
};

struct EvolveOptions {
  double dt = 1.0;
  double max_step = kMaxStep;
  int reinit_every = 1;  // 0 disables periodic reinitialization
};

struct StepInfo {
  std::size_t sign_changes = 0;  // band points whose inside/outside label flipped
  std::size_t band_size = 0;
  double max_update = 0.0;
  bool reinitialized = false;
};

/// True when the interface has drifted to where the next step could stall:
/// some ZLS cell sits within 1 px of the band edge, or an opposite-sign
/// neighbour of a ZLS cell lies outside the Dirac support.
inline bool band_needs_rebuild(const DistanceMap& map, const NarrowBand& band) {
  const auto& phi = map.phi;
  for (std::size_t i : band.zls_points) {
    const double a = std::abs(phi[i]);
    if (a >= map.band_radius - 1.0 || a >= map.epsilon) return true;
  }
  return false;
}

/// One explicit step of phi <- phi + dt * dirac(phi) * (-force + mu * curvature).
///
/// `zls_forces[k]` is the force at band.zls_points[k]; every other band point
/// takes the force of its nearest ZLS point. The whole update is scaled down
/// when any |delta phi| would exceed options.max_step. `step_index` (1-based)
/// drives periodic reinitialization.
inline StepInfo evolve_step(DistanceMap& map, const NarrowBand& band, const std::vector<double>& zls_forces, double mu,
                            const EvolveOptions& options, int step_index = 1) {
  if (zls_forces.size() != band.zls_points.size()) throw ContractViolation("one force per ZLS point is required");
  if (!(options.dt > 0.0)) throw InvalidConfig("dt must be positive");
  auto& phi = map.phi;
  const int w = phi.width();

  const NearestPoint nearest(w, phi.height(), band.zls_points);
  std::vector<double> update(band.points.size(), 0.0);
  double max_abs = 0.0;
  for (std::size_t k = 0; k < band.points.size(); ++k) {
    const std::size_t i = band.points[k];
    const double dl = dirac(phi[i], map.epsilon);
    if (dl == 0.0) continue;
    const int x = static_cast<int>(i % static_cast<std::size_t>(w));
    const int y = static_cast<int>(i / static_cast<std::size_t>(w));
    const std::size_t src = nearest.nearest(x, y);
    const double force = zls_forces[src];
    const double kappa = mu > 0.0 ? curvature(phi, x, y) : 0.0;
    update[k] = options.dt * dl * (-force + mu * kappa);
    max_abs = std::max(max_abs, std::abs(update[k]));
  }
  const double scale = max_abs > options.max_step ? options.max_step / max_abs : 1.0;

  StepInfo info;
  info.band_size = band.points.size();
  info.max_update = max_abs * scale;
  for (std::size_t k = 0; k < band.points.size(); ++k) {
    if (update[k] == 0.0) continue;
    const std::size_t i = band.points[k];
    const bool before = is_inside(phi[i]);
    phi[i] += scale * update[k];
    if (is_inside(phi[i]) != before) ++info.sign_changes;
  }

  const NarrowBand after = rebuild_band(map);
  const bool periodic = options.reinit_every > 0 && step_index % options.reinit_every == 0;
  if (periodic || band_needs_rebuild(map, after)) {
    reinitialize(map);
    info.reinitialized = true;
  }
  return info;
}

}  // namespace alw::levelset
