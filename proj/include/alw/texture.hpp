#pragma once

// Gray-level co-occurrence matrices and the two Haralick features the window
// estimator needs: homogeneity and contrast. Contrast is divided by (N_G-1)^2
// so that both features live in [0, 1].

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "alw/error.hpp"
#include "alw/image.hpp"

namespace alw::texture {

inline constexpr int kDefaultLevels = 32;
inline constexpr int kDefaultOffset = 1;
/// Lower bound applied to every contrast before it is inverted.
inline constexpr double kContrastFloor = 1e-3;

using Quantized = Raster<std::uint16_t>;

enum class Direction { deg0, deg90, deg180, deg270 };
inline constexpr std::array<Direction, 4> kAllDirections{Direction::deg0, Direction::deg90, Direction::deg180,
                                                        Direction::deg270};

/// Pixel step (dx, dy) of the second pair member for direction `dir` at distance `d`.
inline Pixel offset(Direction dir, int d) {
  switch (dir) {
    case Direction::deg0: return {d, 0};
    case Direction::deg90: return {0, d};
    case Direction::deg180: return {-d, 0};
    case Direction::deg270: return {0, -d};
  }
  return {0, 0};
}

/// Maps v in [0,1] to floor(v * levels), with 1.0 clamped into the top level.
inline Quantized quantize(const GrayImage& image, int levels) {
  if (levels < 2) throw InvalidConfig("quantization needs at least 2 gray levels");
  if (levels > 65535) throw InvalidConfig("too many gray levels");
  Quantized q(image.width(), image.height());
  const auto& px = image.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    q[i] = static_cast<std::uint16_t>(std::min(static_cast<int>(px[i] * levels), levels - 1));
  }
  return q;
}

/// Co-occurrence counts for one direction.
class Glcm {
 public:
  explicit Glcm(int levels) : levels_(levels), counts_(static_cast<std::size_t>(levels) * levels, 0) {}

  int levels() const { return levels_; }
  std::uint64_t& at(int m, int n) { return counts_[static_cast<std::size_t>(m) * levels_ + n]; }
  std::uint64_t at(int m, int n) const { return counts_[static_cast<std::size_t>(m) * levels_ + n]; }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }
  /// Probabilities P(m, n); all zeros when the matrix is empty.
  std::vector<double> normalized() const {
    std::vector<double> p(counts_.size(), 0.0);
    const auto t = total();
    if (t == 0) return p;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<double>(counts_[i]) / static_cast<double>(t);
    return p;
  }
  Glcm transposed() const {
    Glcm t(levels_);
    for (int m = 0; m < levels_; ++m)
      for (int n = 0; n < levels_; ++n) t.at(n, m) = at(m, n);
    return t;
  }

  friend bool operator==(const Glcm&, const Glcm&) = default;

 private:
  int levels_;
  std::vector<std::uint64_t> counts_;
};

/// Counts pairs (p, p + offset) with both members inside `window` (clamped to the raster).
inline Glcm glcm(const Quantized& q, int levels, Direction dir, int d, const Roi& window) {
  Glcm g(levels);
  const Roi r = clamp_roi(window, q.width(), q.height());
  const Pixel o = offset(dir, d);
  for (int y = r.y0; y < r.y1(); ++y) {
    const int y2 = y + o.y;
    if (y2 < r.y0 || y2 >= r.y1()) continue;
    for (int x = r.x0; x < r.x1(); ++x) {
      const int x2 = x + o.x;
      if (x2 < r.x0 || x2 >= r.x1()) continue;
      const int m = q(x, y);
      const int n = q(x2, y2);
      if (m >= levels || n >= levels) throw ContractViolation("quantized value exceeds level count");
      ++g.at(m, n);
    }
  }
  return g;
}

inline Glcm glcm(const Quantized& q, int levels, Direction dir, int d) {
  return glcm(q, levels, dir, d, Roi{0, 0, q.width(), q.height()});
}

struct Haralick {
  double homogeneity = 0.0;
  double contrast = 0.0;  // normalized by (levels - 1)^2
};

/// Homogeneity sum P/(1+|m-n|) and normalized contrast sum |m-n|^2 P / (N_G-1)^2.
/// An empty matrix yields zeros.
inline Haralick haralick(const Glcm& g) {
  const auto t = g.total();
  if (t == 0) return {};
  const int levels = g.levels();
  double hom = 0.0;
  double con = 0.0;
  for (int m = 0; m < levels; ++m) {
    for (int n = 0; n < levels; ++n) {
      const auto c = g.at(m, n);
      if (c == 0) continue;
      const double p = static_cast<double>(c) / static_cast<double>(t);
      const double diff = std::abs(m - n);
      hom += p / (1.0 + diff);
      con += diff * diff * p;
    }
  }
  const double scale = static_cast<double>(levels - 1) * static_cast<double>(levels - 1);
  return {hom, con / scale};
}

struct GlobalTexture {
  double gh = 1.0;
  double gc = kContrastFloor;
};

/// Per-axis local contrast around one contour point.
struct LocalContrast {
  double x = kContrastFloor;
  double y = kContrastFloor;
  friend bool operator==(const LocalContrast&, const LocalContrast&) = default;
};

/// Homogeneity and floored contrast averaged over the four directions, computed over the whole raster.
inline GlobalTexture global_stats(const Quantized& q, int levels, int d) {
  if (d < 1) throw InvalidConfig("GLCM offset must be at least 1 pixel");
  double gh = 0.0;
  double gc = 0.0;
  for (auto dir : kAllDirections) {
    const Glcm g = glcm(q, levels, dir, d);
    if (g.total() == 0) throw InvalidInput("ROI too small for a co-occurrence pair in every direction");
    const Haralick f = haralick(g);
    gh += f.homogeneity;
    gc += f.contrast;
  }
  return {gh / 4.0, std::max(gc / 4.0, kContrastFloor)};
}

inline GlobalTexture global_stats(const GrayImage& roi_image, int levels = kDefaultLevels, int d = kDefaultOffset) {
  return global_stats(quantize(roi_image, levels), levels, d);
}

/// Window of extents (wx, wy) centered on `center`, before clamping.
inline Roi centered_window(Pixel center, int wx, int wy) {
  return Roi{center.x - wx / 2, center.y - wy / 2, wx, wy};
}

namespace detail {

// Normalized contrast of one direction inside `r`, accumulated straight from
// pixel pairs; equal to haralick(glcm(...)).contrast.
inline double pair_contrast(const Quantized& q, int levels, Direction dir, int d, const Roi& r) {
  const Pixel o = offset(dir, d);
  std::uint64_t pairs = 0;
  std::uint64_t sq = 0;
  for (int y = r.y0; y < r.y1(); ++y) {
    const int y2 = y + o.y;
    if (y2 < r.y0 || y2 >= r.y1()) continue;
    const std::uint16_t* row = &q(0, y);
    const std::uint16_t* row2 = &q(0, y2);
    for (int x = std::max(r.x0, r.x0 - o.x); x < std::min(r.x1(), r.x1() - o.x); ++x) {
      const int diff = static_cast<int>(row[x]) - static_cast<int>(row2[x + o.x]);
      sq += static_cast<std::uint64_t>(diff * diff);
      ++pairs;
    }
  }
  if (pairs == 0) return 0.0;
  const double scale = static_cast<double>(levels - 1) * static_cast<double>(levels - 1);
  return static_cast<double>(sq) / static_cast<double>(pairs) / scale;
}

}  // namespace detail

/// X contrast from the 0/180 degree matrices, Y contrast from 90/270, inside the
/// (wx, wy) window around `center` clamped to the raster. Both floored.
inline LocalContrast local_contrast(const Quantized& q, int levels, Pixel center, int wx, int wy, int d) {
  if (wx < 1 || wy < 1 || wx % 2 == 0 || wy % 2 == 0) throw InvalidConfig("local window extents must be odd and positive");
  const Roi r = clamp_roi(centered_window(center, wx, wy), q.width(), q.height());
  const double cx = 0.5 * (detail::pair_contrast(q, levels, Direction::deg0, d, r) +
                           detail::pair_contrast(q, levels, Direction::deg180, d, r));
  const double cy = 0.5 * (detail::pair_contrast(q, levels, Direction::deg90, d, r) +
                           detail::pair_contrast(q, levels, Direction::deg270, d, r));
  return {std::max(cx, kContrastFloor), std::max(cy, kContrastFloor)};
}

inline LocalContrast local_contrast(const GrayImage& roi_image, Pixel center, int wx, int wy,
                                    int levels = kDefaultLevels, int d = kDefaultOffset) {
  return local_contrast(quantize(roi_image, levels), levels, center, wx, wy, d);
}

/// Global pair plus per-contour-point local contrasts for one iteration.
struct TextureStats {
  GlobalTexture global;
  std::vector<LocalContrast> local;
};

}  // namespace alw::texture
