#pragma once

// Region statistics and per-point forces for the four energy models.
//
// Forces follow the level-set sign convention: positive inflates the contour
// at that point (the pixel is pulled into the interior). Each force is the
// negative derivative of the model's window functional with respect to the
// interior weight of the pixel.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alw/error.hpp"
#include "alw/image.hpp"
#include "alw/levelset.hpp"

namespace alw::energy {

inline constexpr int kDefaultHistBins = 32;
inline constexpr double kRatioFloor = 1e-6;
inline constexpr double kEnergyFloor = 1e-6;
/// Interior or exterior mass at or below this is treated as empty.
inline constexpr double kMinRegionMass = 1e-9;

enum class Model { global_pc, local_pc, mean_separation, histogram_separation };

inline std::string_view to_string(Model m) {
  switch (m) {
    case Model::global_pc: return "global-pc";
    case Model::local_pc: return "local-pc";
    case Model::mean_separation: return "ms";
    case Model::histogram_separation: return "hs";
  }
  return "?";
}

inline Model model_from_string(std::string_view s) {
  if (s == "global-pc" || s == "global_pc" || s == "GlobalPC") return Model::global_pc;
  if (s == "local-pc" || s == "local_pc" || s == "LocalPC" || s == "pc") return Model::local_pc;
  if (s == "ms" || s == "MS" || s == "mean-separation") return Model::mean_separation;
  if (s == "hs" || s == "HS" || s == "histogram-separation") return Model::histogram_separation;
  throw InvalidConfig("unknown energy model '" + std::string(s) + "'");
}

struct RegionStats {
  double m_u = 0.0;  // interior mean
  double m_v = 0.0;  // exterior mean
  double a_u = 0.0;  // interior Heaviside mass
  double a_v = 0.0;  // exterior Heaviside mass
  double ss_u = 0.0;  // sum of (I - m_u)^2 weighted by the interior
  double ss_v = 0.0;  // sum of (I - m_v)^2 weighted by the exterior
  double pixels = 0.0;  // window pixel count
  std::vector<double> p_u;  // normalized interior histogram (empty unless requested)
  std::vector<double> p_v;

  bool one_sided() const { return a_u <= kMinRegionMass || a_v <= kMinRegionMass; }
};

inline int hist_bin(double v, int bins) { return std::clamp(static_cast<int>(v * bins), 0, bins - 1); }

/// Summed-area tables of the Heaviside-weighted moments over an ROI grid, so
/// that the statistics of any axis-aligned window cost O(bins).
class RegionIntegrals {
 public:
  RegionIntegrals(const GrayImage& image, const levelset::DistanceMap& map, int hist_bins = 0)
      : w_(image.width()), h_(image.height()), bins_(hist_bins) {
    if (map.width() != w_ || map.height() != h_) throw InvalidInput("image and distance map sizes differ");
    const std::size_t stride = static_cast<std::size_t>(w_ + 1) * static_cast<std::size_t>(h_ + 1);
    const std::size_t nb = static_cast<std::size_t>(std::max(bins_, 0));
    const std::size_t planes = kFixedPlanes + 2 * nb;
    sat_.assign(planes * stride, 0.0);
    std::vector<double> cell(planes, 0.0);
    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        const double v = image(x, y);
        const double hin = levelset::inside_weight(map.phi(x, y), map.epsilon);
        const double hout = 1.0 - hin;
        std::fill(cell.begin(), cell.end(), 0.0);
        cell[0] = hin;
        cell[1] = hin * v;
        cell[2] = hin * v * v;
        cell[3] = hout;
        cell[4] = hout * v;
        cell[5] = hout * v * v;
        if (bins_ > 0) {
          const auto b = static_cast<std::size_t>(hist_bin(v, bins_));
          cell[kFixedPlanes + b] = hin;
          cell[kFixedPlanes + nb + b] = hout;
        }
        for (std::size_t p = 0; p < planes; ++p) {
          double* s = &sat_[p * stride];
          s[at(x + 1, y + 1)] = cell[p] + s[at(x, y + 1)] + s[at(x + 1, y)] - s[at(x, y)];
        }
      }
    }
  }

  int width() const { return w_; }
  int height() const { return h_; }
  int bins() const { return bins_; }

  /// Statistics of the window `roi`, clamped to the grid.
  RegionStats query(const Roi& roi) const {
    const Roi r = clamp_roi(roi, w_, h_);
    RegionStats s;
    s.pixels = static_cast<double>(r.width) * r.height;
    if (r.width == 0 || r.height == 0) return s;
    const double in = sum(0, r), in_v = sum(1, r), in_vv = sum(2, r);
    const double out = sum(3, r), out_v = sum(4, r), out_vv = sum(5, r);
    s.a_u = std::max(in, 0.0);
    s.a_v = std::max(out, 0.0);
    if (s.a_u > kMinRegionMass) {
      s.m_u = in_v / s.a_u;
      s.ss_u = std::max(in_vv - s.m_u * in_v, 0.0);
    }
    if (s.a_v > kMinRegionMass) {
      s.m_v = out_v / s.a_v;
      s.ss_v = std::max(out_vv - s.m_v * out_v, 0.0);
    }
    if (bins_ > 0) {
      const auto nb = static_cast<std::size_t>(bins_);
      s.p_u.assign(nb, 0.0);
      s.p_v.assign(nb, 0.0);
      for (std::size_t b = 0; b < nb; ++b) {
        s.p_u[b] = std::max(sum(kFixedPlanes + b, r), 0.0);
        s.p_v[b] = std::max(sum(kFixedPlanes + nb + b, r), 0.0);
      }
      normalize_hist(s.p_u);
      normalize_hist(s.p_v);
    }
    return s;
  }

  RegionStats whole() const { return query(Roi{0, 0, w_, h_}); }

 private:
  static constexpr std::size_t kFixedPlanes = 6;

  static void normalize_hist(std::vector<double>& p) {
    const double t = std::accumulate(p.begin(), p.end(), 0.0);
    if (t <= kMinRegionMass) {
      std::fill(p.begin(), p.end(), 0.0);
      return;
    }
    for (double& v : p) v /= t;
  }

  std::size_t at(int x, int y) const { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w_ + 1) + static_cast<std::size_t>(x); }

  double sum(std::size_t plane, const Roi& r) const {
    const std::size_t stride = static_cast<std::size_t>(w_ + 1) * static_cast<std::size_t>(h_ + 1);
    const double* s = &sat_[plane * stride];
    return s[at(r.x1(), r.y1())] - s[at(r.x0, r.y1())] - s[at(r.x1(), r.y0)] + s[at(r.x0, r.y0)];
  }

  int w_;
  int h_;
  int bins_;
  std::vector<double> sat_;
};

/// Region statistics of one window; convenience wrapper that builds the tables once.
inline RegionStats region_stats(const GrayImage& image, const levelset::DistanceMap& map, const Roi& window,
                                int hist_bins = 0) {
  return RegionIntegrals(image, map, hist_bins).query(window);
}

// ---------------------------------------------------------------------------
// Piecewise constant

inline double pc_force(double intensity, const RegionStats& s, double lambda1, double lambda2) {
  if (s.one_sided()) return 0.0;
  const double du = intensity - s.m_u;
  const double dv = intensity - s.m_v;
  return -lambda1 * du * du + lambda2 * dv * dv;
}

/// Integrand of the piecewise-constant fitting energy at one pixel.
inline double pc_energy(double intensity, double inside, const RegionStats& s, double lambda1, double lambda2) {
  const double du = intensity - s.m_u;
  const double dv = intensity - s.m_v;
  return lambda1 * du * du * inside + lambda2 * dv * dv * (1.0 - inside);
}

/// Window fitting energy per pixel, from the moments in `s`.
inline double pc_window_energy(const RegionStats& s, double lambda1, double lambda2) {
  if (s.pixels <= 0.0) return 0.0;
  return (lambda1 * s.ss_u + lambda2 * s.ss_v) / s.pixels;
}

// ---------------------------------------------------------------------------
// Mean separation

/// Gradient of the mean-separation functional -(m_u - m_v)^2 / 2, negated.
inline double ms_force(double intensity, const RegionStats& s) {
  if (s.one_sided()) return 0.0;
  return (s.m_u - s.m_v) * ((intensity - s.m_u) / s.a_u + (intensity - s.m_v) / s.a_v);
}

/// The separation functional whose descent ms_force follows.
inline double ms_separation(const RegionStats& s) { return -0.5 * (s.m_u - s.m_v) * (s.m_u - s.m_v); }

/// Area-normalized residual energy of a window (the value traced per iteration).
inline double ms_energy(const RegionStats& s, double lambda1 = 1.0, double lambda2 = 1.0) {
  if (s.one_sided()) return 0.0;
  return lambda1 * s.ss_u / (s.a_u * s.a_u) + lambda2 * s.ss_v / (s.a_v * s.a_v);
}

// ---------------------------------------------------------------------------
// Histogram separation

/// Bhattacharyya coefficient of two normalized histograms.
inline double bhattacharyya(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ContractViolation("histograms have different bin counts");
  double sp = 0.0, sq = 0.0, b = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) throw ContractViolation("histogram has negative mass");
    sp += p[i];
    sq += q[i];
    b += std::sqrt(p[i] * q[i]);
  }
  if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9) throw ContractViolation("histogram is not normalized");
  return std::min(b, 1.0);
}

namespace detail {
// sqrt(num / den) with den floored; 0 when both bins are empty.
inline double guarded_ratio(double num, double den) {
  if (num <= 0.0 && den <= 0.0) return 0.0;
  return std::sqrt(num / std::max(den, kRatioFloor));
}
}  // namespace detail

/// Histogram-separation force at a pixel whose intensity falls in bin `bin`.
inline double hs_force(int bin, const RegionStats& s, double b, double lambda1, double lambda2) {
  if (s.one_sided() || s.p_u.empty()) return 0.0;
  const auto k = static_cast<std::size_t>(bin);
  const double pu = s.p_u[k];
  const double pv = s.p_v[k];
  return b * (1.0 / s.a_u - 1.0 / s.a_v) - lambda1 / s.a_u * detail::guarded_ratio(pv, pu) +
         lambda2 / s.a_v * detail::guarded_ratio(pu, pv);
}

inline double hs_force(double intensity, const RegionStats& s, double lambda1, double lambda2) {
  if (s.one_sided() || s.p_u.empty()) return 0.0;
  const double b = bhattacharyya(s.p_u, s.p_v);
  return hs_force(hist_bin(intensity, static_cast<int>(s.p_u.size())), s, b, lambda1, lambda2);
}

/// Histogram overlap energy of a window, (lambda1 + lambda2) * B.
inline double hs_energy(const RegionStats& s, double lambda1, double lambda2) {
  if (s.one_sided() || s.p_u.empty()) return 0.0;
  return (lambda1 + lambda2) * bhattacharyya(s.p_u, s.p_v);
}

// ---------------------------------------------------------------------------

/// Arithmetic mean of the per-point energies of one iteration.
inline double mean_energy(std::span<const double> energies) {
  if (energies.empty()) throw ContourCollapse("no zero-level-set points to average energy over");
  return std::accumulate(energies.begin(), energies.end(), 0.0) / static_cast<double>(energies.size());
}

struct Weights {
  double lambda1 = 2.0;
  double lambda2 = 2.0;
};

/// Force of `model` at a pixel of intensity `intensity`, given its window statistics.
inline double force(Model model, double intensity, const RegionStats& s, const Weights& w) {
  switch (model) {
    case Model::global_pc:
    case Model::local_pc: return pc_force(intensity, s, w.lambda1, w.lambda2);
    case Model::mean_separation: return ms_force(intensity, s);
    case Model::histogram_separation: return hs_force(intensity, s, w.lambda1, w.lambda2);
  }
  return 0.0;
}

/// Window energy of `model` (nonnegative), used for the per-iteration trace.
inline double window_energy(Model model, const RegionStats& s, const Weights& w) {
  switch (model) {
    case Model::global_pc:
    case Model::local_pc: return pc_window_energy(s, w.lambda1, w.lambda2);
    case Model::mean_separation: return ms_energy(s, w.lambda1, w.lambda2);
    case Model::histogram_separation: return hs_energy(s, w.lambda1, w.lambda2);
  }
  return 0.0;
}

}  // namespace alw::energy
