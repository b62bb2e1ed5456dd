#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "alw/error.hpp"

namespace alw {

/// Integer pixel coordinate; x is the column, y the row.
struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Row-major 2D grid.
template <class T>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0) throw InvalidInput("negative raster dimensions");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Raster(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0 ||
        data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw InvalidInput("raster data length does not match width x height");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  /// Value at (x, y) with coordinates clamped into the grid (replicated border).
  const T& clamped(int x, int y) const {
    return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Mask = Raster<std::uint8_t>;

/// Physical pixel size in mm along each axis.
struct Spacing {
  double x = 1.0;
  double y = 1.0;
  friend bool operator==(const Spacing&, const Spacing&) = default;
};

/// Scalar raster with every value finite and inside [0, 1].
class GrayImage {
 public:
  GrayImage() = default;
  explicit GrayImage(Raster<double> pixels, std::optional<Spacing> spacing = std::nullopt)
      : pixels_(std::move(pixels)), spacing_(spacing) {
    for (double v : pixels_.values()) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw InvalidInput("GrayImage intensities must be finite and within [0, 1]");
      }
    }
  }

  int width() const { return pixels_.width(); }
  int height() const { return pixels_.height(); }
  std::size_t size() const { return pixels_.size(); }
  double operator()(int x, int y) const { return pixels_(x, y); }
  const Raster<double>& pixels() const { return pixels_; }
  const std::optional<Spacing>& spacing() const { return spacing_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  Raster<double> pixels_;
  std::optional<Spacing> spacing_;
};

/// Axis-aligned pixel rectangle; (x0, y0) is the top-left corner.
struct Roi {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  int x1() const { return x0 + width; }   // exclusive
  int y1() const { return y0 + height; }  // exclusive
  bool contains(int x, int y) const { return x >= x0 && y >= y0 && x < x1() && y < y1(); }
  friend bool operator==(const Roi&, const Roi&) = default;
};

/// Intersection of `roi` with a width x height image. May have zero area.
inline Roi clamp_roi(const Roi& roi, int width, int height) {
  const int x0 = std::clamp(roi.x0, 0, width);
  const int y0 = std::clamp(roi.y0, 0, height);
  const int x1 = std::clamp(roi.x1(), 0, width);
  const int y1 = std::clamp(roi.y1(), 0, height);
  return Roi{x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

/// Affine rescale of an arbitrary-range raster into [0, 1]. A constant raster maps to 0.5.
inline GrayImage normalize(const Raster<double>& raw, std::optional<Spacing> spacing = std::nullopt) {
  if (raw.empty()) throw InvalidInput("cannot normalize an empty image");
  double lo = raw[0];
  double hi = raw[0];
  for (double v : raw.values()) {
    if (!std::isfinite(v)) throw InvalidInput("image contains non-finite values");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Raster<double> out(raw.width(), raw.height(), 0.5);
  if (hi > lo) {
    const double range = hi - lo;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      out[i] = std::clamp((raw[i] - lo) / range, 0.0, 1.0);
    }
  }
  return GrayImage(std::move(out), spacing);
}

inline GrayImage normalize(const GrayImage& image) { return normalize(image.pixels(), image.spacing()); }

struct CropResult {
  GrayImage image;
  Roi roi;  // the ROI after clamping to the parent image
};

/// Sub-raster under `roi`, clamped to the image bounds first.
inline CropResult crop(const GrayImage& image, const Roi& roi) {
  const Roi r = clamp_roi(roi, image.width(), image.height());
  if (r.width == 0 || r.height == 0) throw InvalidInput("ROI has zero area after clamping");
  Raster<double> out(r.width, r.height);
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) out(x, y) = image(r.x0 + x, r.y0 + y);
  }
  return {GrayImage(std::move(out), image.spacing()), r};
}

template <class T>
Raster<T> crop_raster(const Raster<T>& raster, const Roi& roi) {
  const Roi r = clamp_roi(roi, raster.width(), raster.height());
  Raster<T> out(r.width, r.height);
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) out(x, y) = raster(r.x0 + x, r.y0 + y);
  }
  return out;
}

/// Writes `mask` (ROI-sized) into a zeroed raster of the parent size at `roi`'s origin.
inline Mask embed_mask(const Mask& mask, const Roi& roi, int width, int height) {
  Mask out(width, height, 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const int px = roi.x0 + x;
      const int py = roi.y0 + y;
      if (out.contains(px, py)) out(px, py) = mask(x, y);
    }
  }
  return out;
}

struct ClaheParams {
  int tiles_x = 8;
  int tiles_y = 8;
  double clip_limit = 0.01;
  int bins = 256;
};

/// Clips every bin of `hist` at `limit` and spreads the clipped mass evenly over all bins.
inline void clip_histogram(std::span<double> hist, double limit) {
  double excess = 0.0;
  for (double& h : hist) {
    if (h > limit) {
      excess += h - limit;
      h = limit;
    }
  }
  const double share = excess / static_cast<double>(hist.size());
  for (double& h : hist) h += share;
}

namespace detail {

inline int intensity_bin(double v, int bins) {
  return std::clamp(static_cast<int>(v * bins), 0, bins - 1);
}

// Gray-level mapping of one tile: cumulative clipped histogram, or identity when
// the tile holds a single occupied bin.
struct TileMapping {
  bool identity = false;
  std::vector<double> lut;

  double operator()(double v) const {
    if (identity) return v;
    return lut[static_cast<std::size_t>(intensity_bin(v, static_cast<int>(lut.size())))];
  }
};

inline std::vector<int> tile_edges(int extent, int tiles) {
  std::vector<int> edges(static_cast<std::size_t>(tiles) + 1);
  for (int i = 0; i <= tiles; ++i) edges[static_cast<std::size_t>(i)] = static_cast<int>(
      static_cast<long long>(i) * extent / tiles);
  return edges;
}

// Index pair and weight of the tile centers bracketing coordinate `c`.
struct Bracket {
  int lo;
  int hi;
  double t;
};

inline Bracket bracket(double c, const std::vector<double>& centers) {
  const int n = static_cast<int>(centers.size());
  if (c <= centers.front()) return {0, 0, 0.0};
  if (c >= centers.back()) return {n - 1, n - 1, 0.0};
  int lo = 0;
  while (lo + 1 < n && centers[static_cast<std::size_t>(lo + 1)] <= c) ++lo;
  const double a = centers[static_cast<std::size_t>(lo)];
  const double b = centers[static_cast<std::size_t>(lo + 1)];
  return {lo, lo + 1, (c - a) / (b - a)};
}

}  // namespace detail

/// Contrast-limited adaptive histogram equalization with a uniform target distribution.
/// Tile mappings are blended bilinearly between neighbouring tile centers.
inline GrayImage clahe(const GrayImage& image, const ClaheParams& params = {}) {
  if (params.tiles_x < 1 || params.tiles_y < 1) throw InvalidConfig("CLAHE tile grid must be at least 1x1");
  if (!(params.clip_limit > 0.0 && params.clip_limit <= 1.0)) {
    throw InvalidConfig("CLAHE clip_limit must be in (0, 1]");
  }
  if (params.bins < 2) throw InvalidConfig("CLAHE needs at least 2 histogram bins");
  const int w = image.width();
  const int h = image.height();
  if (w / params.tiles_x < 2 || h / params.tiles_y < 2) {
    throw InvalidConfig("CLAHE tiles must be at least 2x2 pixels");
  }

  const auto xs = detail::tile_edges(w, params.tiles_x);
  const auto ys = detail::tile_edges(h, params.tiles_y);
  std::vector<double> cx(static_cast<std::size_t>(params.tiles_x));
  std::vector<double> cy(static_cast<std::size_t>(params.tiles_y));
  for (std::size_t i = 0; i < cx.size(); ++i) cx[i] = 0.5 * (xs[i] + xs[i + 1] - 1);
  for (std::size_t j = 0; j < cy.size(); ++j) cy[j] = 0.5 * (ys[j] + ys[j + 1] - 1);

  std::vector<detail::TileMapping> maps(static_cast<std::size_t>(params.tiles_x * params.tiles_y));
  const auto bins = static_cast<std::size_t>(params.bins);
  for (int ty = 0; ty < params.tiles_y; ++ty) {
    for (int tx = 0; tx < params.tiles_x; ++tx) {
      std::vector<double> hist(bins, 0.0);
      const int x0 = xs[static_cast<std::size_t>(tx)], x1 = xs[static_cast<std::size_t>(tx) + 1];
      const int y0 = ys[static_cast<std::size_t>(ty)], y1 = ys[static_cast<std::size_t>(ty) + 1];
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) hist[static_cast<std::size_t>(detail::intensity_bin(image(x, y), params.bins))] += 1.0;
      }
      const double count = static_cast<double>((x1 - x0) * (y1 - y0));
      auto& m = maps[static_cast<std::size_t>(ty * params.tiles_x + tx)];
      if (std::count_if(hist.begin(), hist.end(), [](double v) { return v > 0.0; }) <= 1) {
        m.identity = true;
        continue;
      }
      clip_histogram(hist, params.clip_limit * count);
      m.lut.resize(bins);
      double acc = 0.0;
      for (std::size_t b = 0; b < bins; ++b) {
        acc += hist[b];
        m.lut[b] = std::clamp(acc / count, 0.0, 1.0);
      }
    }
  }

  Raster<double> out(w, h);
  for (int y = 0; y < h; ++y) {
    const auto by = detail::bracket(y, cy);
    for (int x = 0; x < w; ++x) {
      const auto bx = detail::bracket(x, cx);
      const double v = image(x, y);
      auto at = [&](int tx, int ty) { return maps[static_cast<std::size_t>(ty * params.tiles_x + tx)](v); };
      const double top = (1.0 - bx.t) * at(bx.lo, by.lo) + bx.t * at(bx.hi, by.lo);
      const double bottom = (1.0 - bx.t) * at(bx.lo, by.hi) + bx.t * at(bx.hi, by.hi);
      out(x, y) = std::clamp((1.0 - by.t) * top + by.t * bottom, 0.0, 1.0);
    }
  }
  return GrayImage(std::move(out), image.spacing());
}

}  // namespace alw
