#pragma once

// End-to-end driver: long-axis seed -> ROI -> preprocessing -> circular
// initial contour -> iterate {windows, region statistics, forces, evolution}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "alw/adaptive_window.hpp"
#include "alw/energy.hpp"
#include "alw/error.hpp"
#include "alw/image.hpp"
#include "alw/levelset.hpp"
#include "alw/parallel.hpp"
#include "alw/texture.hpp"

namespace alw {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Two user-marked endpoints of the lesion's long axis, in image coordinates.
struct SeedAxis {
  Point2 p1;
  Point2 p2;

  double length() const { return std::hypot(p2.x - p1.x, p2.y - p1.y); }
  Point2 midpoint() const { return {0.5 * (p1.x + p2.x), 0.5 * (p1.y + p2.y)}; }
  friend bool operator==(const SeedAxis&, const SeedAxis&) = default;
};

struct WindowMode {
  enum class Kind { adaptive, fixed, global };
  Kind kind = Kind::adaptive;
  int size = 0;  // only for fixed

  static WindowMode adaptive() { return {Kind::adaptive, 0}; }
  static WindowMode fixed(int k) { return {Kind::fixed, k}; }
  static WindowMode global() { return {Kind::global, 0}; }

  std::string to_string() const {
    switch (kind) {
      case Kind::adaptive: return "adaptive";
      case Kind::fixed: return "fixed(" + std::to_string(size) + ")";
      case Kind::global: return "global";
    }
    return "?";
  }
  static WindowMode parse(const std::string& s) {
    if (s == "adaptive") return adaptive();
    if (s == "global") return global();
    if (s.rfind("fixed:", 0) == 0 || s.rfind("fixed(", 0) == 0) {
      std::string digits = s.substr(6);
      if (!digits.empty() && digits.back() == ')') digits.pop_back();
      int k = 0;
      try {
        std::size_t used = 0;
        k = std::stoi(digits, &used);
        if (used != digits.size()) k = 0;
      } catch (...) {
        k = 0;
      }
      if (k < 1 || k % 2 == 0) throw InvalidConfig("fixed window size must be a positive odd integer: " + s);
      return fixed(k);
    }
    throw InvalidConfig("unknown window mode '" + s + "'");
  }
  friend bool operator==(const WindowMode&, const WindowMode&) = default;
};

/// How the ROI is derived from the seed.
enum class RoiPolicy {
  circle_box,  // bounding box of the initial circle, plus margin
  seed_box,    // bounding box of the two seed points, plus margin
};

struct SegConfig {
  energy::Model model = energy::Model::local_pc;
  double mu = 0.15;
  double lambda1 = 2.0;
  double lambda2 = 2.0;
  WindowMode window_mode = WindowMode::adaptive();

  double epsilon = levelset::kDefaultEpsilon;
  double band_radius = levelset::kDefaultBandRadius;
  double dt_max = 1.0;
  double max_step = levelset::kMaxStep;
  int reinit_every = 1;  // 0 disables periodic reinitialization
  int max_iters = 50;
  double conv_tol = 0.002;          // sign-change fraction of band points
  double conv_tol_energy = 1e-3;    // relative change of the mean energy
  int conv_patience = 5;

  int n_g = texture::kDefaultLevels;
  int glcm_d = texture::kDefaultOffset;
  int hist_bins = energy::kDefaultHistBins;
  int w_min = window::kDefaultMin;
  int w_max = window::kDefaultMax;
  /// Multiplier on GC/LC inside the window estimator; 0 selects (n_g - 1)^2.
  double contrast_scale = 0.0;
  /// Base of the logarithm in the window estimator's L / log(L) factor.
  double window_log_base = 10.0;
  /// A point keeps its previous window while the new raw estimate is within this many px (0 disables).
  double window_hysteresis = 2.0;
  /// Quantile of |force| at the first iteration used as the force unit.
  double force_quantile = 0.5;

  bool clahe = false;
  ClaheParams clahe_params{};

  int roi_margin = 10;
  RoiPolicy roi_policy = RoiPolicy::circle_box;
  int threads = 0;

  double effective_contrast_scale() const {
    return contrast_scale > 0.0 ? contrast_scale : static_cast<double>(n_g - 1) * (n_g - 1);
  }

  /// Effective window mode: the global piecewise-constant model ignores windows.
  WindowMode effective_window_mode() const {
    return model == energy::Model::global_pc ? WindowMode::global() : window_mode;
  }

  void validate() const {
    if (!(mu >= 0.0)) throw InvalidConfig("mu must be >= 0");
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw InvalidConfig("lambda1 and lambda2 must be > 0");
    if (max_iters < 1) throw InvalidConfig("max_iters must be >= 1");
    if (!(epsilon > 0.0)) throw InvalidConfig("epsilon must be > 0");
    if (!(band_radius > epsilon)) throw InvalidConfig("band_radius must exceed epsilon");
    if (!(dt_max > 0.0) || !(max_step > 0.0)) throw InvalidConfig("dt_max and max_step must be > 0");
    if (conv_patience < 1) throw InvalidConfig("conv_patience must be >= 1");
    if (n_g < 2) throw InvalidConfig("n_g must be >= 2");
    if (glcm_d < 1) throw InvalidConfig("glcm_d must be >= 1");
    if (hist_bins < 2) throw InvalidConfig("hist_bins must be >= 2");
    if (w_min < 1 || w_max < w_min || w_min % 2 == 0 || w_max % 2 == 0) {
      throw InvalidConfig("w_min/w_max must be odd with 1 <= w_min <= w_max");
    }
    if (window_mode.kind == WindowMode::Kind::fixed && (window_mode.size < 1 || window_mode.size % 2 == 0)) {
      throw InvalidConfig("fixed window size must be a positive odd integer");
    }
    if (!(window_hysteresis >= 0.0)) throw InvalidConfig("window_hysteresis must be >= 0");
    if (!(window_log_base > 1.0)) throw InvalidConfig("window_log_base must be > 1");
    if (!(force_quantile > 0.0 && force_quantile <= 1.0)) throw InvalidConfig("force_quantile must be in (0, 1]");
    if (roi_margin < 0) throw InvalidConfig("roi_margin must be >= 0");
  }
};

/// Summary of the windows emitted in one iteration.
struct WindowStats {
  int min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  double mean_x = 0.0, mean_y = 0.0;
};

struct IterationRecord {
  double mean_energy = 0.0;
  double sign_change_fraction = 0.0;
  double rel_energy_change = std::numeric_limits<double>::infinity();
  std::size_t zls_points = 0;
  WindowStats windows;
  bool reinitialized = false;
};

enum class StopReason { converged, max_iters, contour_collapse };

inline std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::converged: return "converged";
    case StopReason::max_iters: return "max_iters";
    case StopReason::contour_collapse: return "contour_collapse";
  }
  return "?";
}

struct SegResult {
  Roi roi;
  Mask mask;  // ROI-sized, 1 where phi < 0
  int iterations_run = 0;
  std::vector<double> energy_trace;
  std::vector<IterationRecord> iterations;
  /// Every window emitted, per iteration (empty rows in global mode).
  std::vector<std::vector<window::Extent>> emitted_windows;
  texture::GlobalTexture global_texture;
  bool converged = false;
  StopReason stop_reason = StopReason::max_iters;
};

/// Contour collapse during segmentation, carrying the traces gathered so far.
class SegmentationCollapse : public ContourCollapse {
 public:
  SegmentationCollapse(const std::string& what, SegResult partial)
      : ContourCollapse(what), partial_(std::move(partial)) {}
  const SegResult& partial() const { return partial_; }

 private:
  SegResult partial_;
};

inline void validate_seed(const SeedAxis& seed, int width, int height) {
  auto inside = [&](const Point2& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0 && p.y >= 0 && p.x <= width - 1 && p.y <= height - 1;
  };
  if (!inside(seed.p1) || !inside(seed.p2)) throw InvalidSeed("seed points must lie inside the image");
  if (seed.p1 == seed.p2) throw InvalidSeed("seed points must differ");
}

/// ROI around the seed expanded by `margin` pixels and clamped to the image.
inline Roi make_roi(const SeedAxis& seed, int width, int height, int margin = 10,
                    RoiPolicy policy = RoiPolicy::circle_box) {
  validate_seed(seed, width, height);
  double lo_x, hi_x, lo_y, hi_y;
  if (policy == RoiPolicy::seed_box) {
    lo_x = std::min(seed.p1.x, seed.p2.x);
    hi_x = std::max(seed.p1.x, seed.p2.x);
    lo_y = std::min(seed.p1.y, seed.p2.y);
    hi_y = std::max(seed.p1.y, seed.p2.y);
  } else {
    const Point2 c = seed.midpoint();
    const double r = seed.length() / 2.0;
    lo_x = c.x - r;
    hi_x = c.x + r;
    lo_y = c.y - r;
    hi_y = c.y + r;
  }
  const int x0 = static_cast<int>(std::floor(lo_x)) - margin;
  const int y0 = static_cast<int>(std::floor(lo_y)) - margin;
  const int x1 = static_cast<int>(std::ceil(hi_x)) + margin;  // inclusive
  const int y1 = static_cast<int>(std::ceil(hi_y)) + margin;
  const Roi r = clamp_roi(Roi{x0, y0, x1 - x0 + 1, y1 - y0 + 1}, width, height);
  if (r.width < 3 || r.height < 3) throw InvalidSeed("ROI smaller than 3x3 after clamping");
  return r;
}

/// Circle through the seed endpoints (seed as diameter), expressed in ROI coordinates.
inline levelset::DistanceMap init_contour(const SeedAxis& seed, const Roi& roi,
                                          double epsilon = levelset::kDefaultEpsilon,
                                          double band_radius = levelset::kDefaultBandRadius) {
  const Point2 c = seed.midpoint();
  const double r = seed.length() / 2.0;
  if (!(r >= 2.0)) throw InvalidSeed("seed axis shorter than 4 pixels");
  return levelset::init_circle(roi.width, roi.height, c.x - roi.x0, c.y - roi.y0, r, epsilon, band_radius);
}

/// True once the last `patience` iterations all moved fewer than `tol` of the
/// band points across the contour and changed the mean energy by less than
/// `tol_energy` (relative). Both comparisons are strict.
inline bool converged(const std::vector<IterationRecord>& history, double tol, double tol_energy, int patience) {
  if (patience < 1 || history.size() < static_cast<std::size_t>(patience)) return false;
  for (auto it = history.end() - patience; it != history.end(); ++it) {
    if (!(it->sign_change_fraction < tol) || !(it->rel_energy_change < tol_energy)) return false;
  }
  return true;
}

namespace detail {

inline WindowStats summarize(const std::vector<window::Extent>& ws) {
  WindowStats s;
  if (ws.empty()) return s;
  s.min_x = s.max_x = ws.front().wx;
  s.min_y = s.max_y = ws.front().wy;
  double sx = 0.0, sy = 0.0;
  for (const auto& w : ws) {
    s.min_x = std::min(s.min_x, w.wx);
    s.max_x = std::max(s.max_x, w.wx);
    s.min_y = std::min(s.min_y, w.wy);
    s.max_y = std::max(s.max_y, w.wy);
    sx += w.wx;
    sy += w.wy;
  }
  s.mean_x = sx / static_cast<double>(ws.size());
  s.mean_y = sy / static_cast<double>(ws.size());
  return s;
}

inline double quantile_abs(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  for (double& x : v) x = std::abs(x);
  const auto k = static_cast<std::size_t>(std::clamp(q * static_cast<double>(v.size() - 1), 0.0,
                                                     static_cast<double>(v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

}  // namespace detail

/// Preprocessed ROI raster: normalized over the full image, cropped, optionally CLAHE-enhanced.
inline GrayImage preprocess(const GrayImage& image, const Roi& roi, const SegConfig& config) {
  GrayImage img = crop(normalize(image), roi).image;
  if (config.clahe) {
    ClaheParams p = config.clahe_params;
    p.tiles_x = std::clamp(p.tiles_x, 1, std::max(1, img.width() / 2));
    p.tiles_y = std::clamp(p.tiles_y, 1, std::max(1, img.height() / 2));
    img = clahe(img, p);
  }
  return img;
}

/// Segments the lesion marked by `seed` in `image`.
inline SegResult segment(const GrayImage& image, const SeedAxis& seed, const SegConfig& config) {
  config.validate();
  const Roi roi = make_roi(seed, image.width(), image.height(), config.roi_margin, config.roi_policy);
  const GrayImage img = preprocess(image, roi, config);
  const int n_g = config.n_g;
  const auto quantized = texture::quantize(img, n_g);
  const auto global = texture::global_stats(quantized, n_g, config.glcm_d);

  levelset::DistanceMap map = init_contour(seed, roi, config.epsilon, config.band_radius);
  const WindowMode mode = config.effective_window_mode();
  const energy::Weights weights{config.lambda1, config.lambda2};
  const bool need_hist = config.model == energy::Model::histogram_separation;
  window::Params wparams{config.w_min, config.w_max, config.effective_contrast_scale(), config.window_log_base};
  levelset::EvolveOptions evolve{config.dt_max, config.max_step, config.reinit_every};
  const unsigned workers = worker_count(config.threads);

  SegResult result;
  result.roi = roi;
  result.global_texture = global;

  std::vector<std::size_t> prev_points;
  std::vector<window::Extent> prev_windows;
  double f_first = 0.0;
  double force_scale = 0.0;
  const int w = img.width();

  auto finish = [&](StopReason reason) {
    result.stop_reason = reason;
    result.converged = reason == StopReason::converged;
    result.mask = levelset::interior_mask(map);
    return result;
  };

  for (int j = 1; j <= config.max_iters; ++j) {
    levelset::NarrowBand band;
    window::LesionScale lesion;
    try {
      band = levelset::rebuild_band(map);
      lesion = window::lesion_dims(map);
    } catch (const ContourCollapse& e) {
      result.mask = levelset::interior_mask(map);
      result.stop_reason = StopReason::contour_collapse;
      throw SegmentationCollapse(e.what(), result);
    }
    const auto& zls = band.zls_points;
    const std::size_t n = zls.size();
    const energy::RegionIntegrals integrals(img, map, need_hist ? config.hist_bins : 0);

    std::vector<window::Extent> windows;
    if (mode.kind == WindowMode::Kind::fixed) {
      windows.assign(n, {mode.size, mode.size});
    } else if (mode.kind == WindowMode::Kind::adaptive) {
      windows.resize(n);
      if (j == 1 || prev_points.empty()) {
        const auto boot = window::bootstrap_window(lesion, global.gh, global.gc, wparams);
        std::fill(windows.begin(), windows.end(), boot);
      } else {
        const double f_norm = window::normalize_energy_trace(result.energy_trace.back(), f_first);
        const levelset::NearestPoint previous(w, img.height(), prev_points);
        parallel_for(n, workers, [&](std::size_t k) {
          const int x = static_cast<int>(zls[k] % static_cast<std::size_t>(w));
          const int y = static_cast<int>(zls[k] / static_cast<std::size_t>(w));
          const window::Extent last = prev_windows[previous.nearest(x, y)];
          const auto lc = texture::local_contrast(quantized, n_g, {x, y}, last.wx, last.wy, config.glcm_d);
          windows[k] = window::estimate_window_settled(last, lesion, global.gh, global.gc, lc.x, lc.y, f_norm,
                                                       config.window_hysteresis, wparams);
        });
      }
    }

    std::vector<double> forces(n, 0.0);
    std::vector<double> energies(n, 0.0);
    if (mode.kind == WindowMode::Kind::global) {
      const auto stats = integrals.whole();
      const double e = energy::window_energy(config.model, stats, weights);
      for (std::size_t k = 0; k < n; ++k) {
        forces[k] = energy::force(config.model, img.pixels()[zls[k]], stats, weights);
        energies[k] = e;
      }
    } else {
      parallel_for(n, workers, [&](std::size_t k) {
        const int x = static_cast<int>(zls[k] % static_cast<std::size_t>(w));
        const int y = static_cast<int>(zls[k] / static_cast<std::size_t>(w));
        const auto stats = integrals.query(texture::centered_window({x, y}, windows[k].wx, windows[k].wy));
        forces[k] = energy::force(config.model, img.pixels()[zls[k]], stats, weights);
        energies[k] = energy::window_energy(config.model, stats, weights);
      });
    }

    const double f_bar = std::max(energy::mean_energy(energies), energy::kEnergyFloor);
    if (j == 1) f_first = f_bar;

    IterationRecord rec;
    rec.mean_energy = f_bar;
    rec.zls_points = n;
    rec.windows = detail::summarize(windows);
    if (!result.energy_trace.empty()) {
      const double prev = result.energy_trace.back();
      rec.rel_energy_change = std::abs(f_bar - prev) / std::max(prev, energy::kEnergyFloor);
    }

    if (force_scale <= 0.0) force_scale = detail::quantile_abs(forces, config.force_quantile);
    const double unit = force_scale > 0.0 ? force_scale : 1.0;
    for (double& f : forces) f = std::clamp(f / unit, -1.0, 1.0);

    levelset::StepInfo step;
    try {
      step = levelset::evolve_step(map, band, forces, config.mu, evolve, j);
    } catch (const ContourCollapse& e) {
      result.energy_trace.push_back(f_bar);
      result.iterations.push_back(rec);
      result.emitted_windows.push_back(std::move(windows));
      result.iterations_run = j;
      result.mask = levelset::interior_mask(map);
      result.stop_reason = StopReason::contour_collapse;
      throw SegmentationCollapse(e.what(), result);
    }
    rec.sign_change_fraction =
        step.band_size > 0 ? static_cast<double>(step.sign_changes) / static_cast<double>(step.band_size) : 0.0;
    rec.reinitialized = step.reinitialized;

    result.energy_trace.push_back(f_bar);
    result.iterations.push_back(rec);
    result.iterations_run = j;
    prev_points = zls;
    prev_windows = windows;
    result.emitted_windows.push_back(std::move(windows));

    if (converged(result.iterations, config.conv_tol, config.conv_tol_energy, config.conv_patience)) {
      return finish(StopReason::converged);
    }
  }
  return finish(StopReason::max_iters);
}

inline SegResult segment(const Raster<double>& raw, const SeedAxis& seed, const SegConfig& config) {
  return segment(normalize(raw), seed, config);
}

}  // namespace alw
