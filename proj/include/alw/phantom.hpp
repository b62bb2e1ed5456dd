#pragma once

// Synthetic lesion phantoms with analytic ground truth, and the evaluation
// harness that compares segmentation methods on them by Dice overlap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "alw/error.hpp"
#include "alw/image.hpp"
#include "alw/parallel.hpp"
#include "alw/segmenter.hpp"

namespace alw::phantom {

enum class Shape { disk, ellipse, blob };
enum class Background { flat, stripes, speckle };

inline std::string_view to_string(Shape s) {
  switch (s) {
    case Shape::disk: return "disk";
    case Shape::ellipse: return "ellipse";
    case Shape::blob: return "blob";
  }
  return "?";
}
inline std::string_view to_string(Background b) {
  switch (b) {
    case Background::flat: return "flat";
    case Background::stripes: return "stripes";
    case Background::speckle: return "speckle";
  }
  return "?";
}
inline Shape shape_from_string(std::string_view s) {
  if (s == "disk") return Shape::disk;
  if (s == "ellipse") return Shape::ellipse;
  if (s == "blob") return Shape::blob;
  throw InvalidInput("unknown phantom shape '" + std::string(s) + "'");
}
inline Background background_from_string(std::string_view s) {
  if (s == "flat") return Background::flat;
  if (s == "stripes") return Background::stripes;
  if (s == "speckle") return Background::speckle;
  throw InvalidInput("unknown phantom background '" + std::string(s) + "'");
}

struct PhantomSpec {
  std::string id = "case";
  Shape shape = Shape::disk;
  double size_px = 40.0;         // long-axis length
  double aspect = 1.0;           // short/long axis ratio (ellipse, blob base)
  double angle_deg = 0.0;        // long-axis orientation
  double contrast = 0.5;         // lesion minus background intensity
  double heterogeneity = 0.0;    // amplitude of the smooth in-lesion intensity field
  double noise_sigma = 0.0;      // additive Gaussian noise
  Background background = Background::flat;
  double texture_amplitude = 0.1;
  double background_level = 0.3;
  int canvas = 0;                // square canvas side; 0 = size_px + 60
  std::uint64_t rng_seed = 1;

  int canvas_side() const { return canvas > 0 ? canvas : static_cast<int>(std::ceil(size_px)) + 60; }

  void validate() const {
    if (!(contrast > 0.0 && contrast <= 1.0)) throw InvalidInput("phantom contrast must be in (0, 1]");
    if (!(noise_sigma >= 0.0)) throw InvalidInput("phantom noise_sigma must be >= 0");
    if (!(size_px >= 4.0)) throw InvalidInput("phantom size_px must be >= 4");
    if (!(aspect > 0.0 && aspect <= 1.0)) throw InvalidInput("phantom aspect must be in (0, 1]");
    if (!(heterogeneity >= 0.0) || !(texture_amplitude >= 0.0)) throw InvalidInput("phantom amplitudes must be >= 0");
    if (size_px + 4.0 > canvas_side()) throw InvalidInput("phantom shape larger than its canvas");
  }
};

struct Phantom {
  GrayImage image;
  Mask truth;
  SeedAxis seed;
};

namespace detail {

// Radius of the lesion boundary along polar angle `t` (relative to the long axis).
struct Outline {
  Shape shape;
  double a;  // semi long axis
  double b;  // semi short axis
  std::vector<double> amp;
  std::vector<double> phase;

  double radius(double t) const {
    const double c = std::cos(t), s = std::sin(t);
    double r = a * b / std::sqrt(b * b * c * c + a * a * s * s);
    if (shape == Shape::blob) {
      double m = 1.0;
      for (std::size_t k = 0; k < amp.size(); ++k) m += amp[k] * std::cos(static_cast<double>(k + 2) * t + phase[k]);
      r *= m;
    }
    return r;
  }
};

}  // namespace detail

/// Deterministic phantom for `spec`. The image is normalized to [0, 1]; the
/// canonical seed is the pair of boundary points farthest apart.
inline Phantom generate(const PhantomSpec& spec) {
  spec.validate();
  const int n = spec.canvas_side();
  std::mt19937_64 rng(spec.rng_seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double cx = 0.5 * (n - 1);
  const double cy = 0.5 * (n - 1);
  const double theta = spec.angle_deg * std::numbers::pi / 180.0;
  detail::Outline outline{spec.shape, spec.size_px / 2.0, spec.size_px / 2.0, {}, {}};
  if (spec.shape == Shape::ellipse || spec.shape == Shape::blob) outline.b = outline.a * spec.aspect;
  if (spec.shape == Shape::blob) {
    for (int k = 0; k < 3; ++k) {
      outline.amp.push_back(0.06 + 0.04 * uni(rng));
      outline.phase.push_back(2.0 * std::numbers::pi * uni(rng));
    }
  }

  // Canonical long axis: farthest pair among densely sampled boundary points.
  constexpr int kSamples = 720;
  std::vector<Point2> boundary(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    const double t = 2.0 * std::numbers::pi * i / kSamples;
    const double r = outline.radius(t);
    boundary[static_cast<std::size_t>(i)] = {cx + r * std::cos(t + theta), cy + r * std::sin(t + theta)};
  }
  SeedAxis seed{boundary[0], boundary[kSamples / 2]};
  double best = -1.0;
  for (int i = 0; i < kSamples; ++i) {
    for (int k = i + 1; k < kSamples; ++k) {
      const auto& p = boundary[static_cast<std::size_t>(i)];
      const auto& q = boundary[static_cast<std::size_t>(k)];
      const double d = std::hypot(p.x - q.x, p.y - q.y);
      if (d > best + 1e-12) {
        best = d;
        seed = {p, q};
      }
    }
  }
  for (const auto& p : boundary) {
    if (p.x < 1.0 || p.y < 1.0 || p.x > n - 2.0 || p.y > n - 2.0) throw InvalidInput("phantom shape larger than its canvas");
  }

  // Smooth heterogeneity field in [-1, 1]: a ramp plus a low-frequency product of cosines.
  const double ramp_dir = 2.0 * std::numbers::pi * uni(rng);
  const double ph1 = 2.0 * std::numbers::pi * uni(rng), ph2 = 2.0 * std::numbers::pi * uni(rng);
  const double period = std::max(8.0, spec.size_px * 0.6);
  const double stripe_dir = std::numbers::pi * uni(rng);
  const double stripe_phase = 2.0 * std::numbers::pi * uni(rng);

  Mask truth(n, n, 0);
  Raster<double> raw(n, n, spec.background_level);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double rx = dx * std::cos(theta) + dy * std::sin(theta);
      const double ry = -dx * std::sin(theta) + dy * std::cos(theta);
      const double rr = std::hypot(rx, ry);
      const bool inside = rr <= outline.radius(std::atan2(ry, rx));
      if (inside) {
        truth(x, y) = 1;
        const double ramp = std::clamp((dx * std::cos(ramp_dir) + dy * std::sin(ramp_dir)) / outline.a, -1.0, 1.0);
        const double wave = std::cos(2.0 * std::numbers::pi * dx / period + ph1) *
                            std::cos(2.0 * std::numbers::pi * dy / period + ph2);
        raw(x, y) += spec.contrast + spec.heterogeneity * (0.5 * ramp + 0.5 * wave);
      } else if (spec.background == Background::stripes) {
        const double u = dx * std::cos(stripe_dir) + dy * std::sin(stripe_dir);
        raw(x, y) += spec.texture_amplitude * std::sin(2.0 * std::numbers::pi * u / 6.0 + stripe_phase);
      }
    }
  }
  if (spec.background == Background::speckle) {
    Raster<double> field(n, n);
    for (auto& v : field.values()) v = gauss(rng);
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        if (truth(x, y)) continue;
        double s = 0.0;
        for (int j = -1; j <= 1; ++j)
          for (int i = -1; i <= 1; ++i) s += field.clamped(x + i, y + j);
        raw(x, y) += spec.texture_amplitude * s / 3.0;  // unit variance after the 3x3 box sum
      }
    }
  }
  if (spec.noise_sigma > 0.0) {
    for (auto& v : raw.values()) v += spec.noise_sigma * gauss(rng);
  }
  return {normalize(raw), std::move(truth), seed};
}

/// 2|A and B| / (|A| + |B|); two empty masks score 1.
inline double dice(const Mask& a, const Mask& b) {
  if (a.width() != b.width() || a.height() != b.height()) throw InvalidInput("Dice of masks with different sizes");
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] != 0, y = b[i] != 0;
    na += x;
    nb += y;
    both += x && y;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

/// Moves each endpoint uniformly within a disk of the given diameter. Draws that
/// leave the width x height image are repeated (up to 100 times), then clamped.
inline SeedAxis perturb_seed(const SeedAxis& seed, double diameter, std::uint64_t rng_seed, int width, int height) {
  if (!(diameter >= 0.0)) throw InvalidInput("perturbation diameter must be >= 0");
  if (diameter == 0.0) return seed;
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto move = [&](const Point2& p) {
    Point2 q = p;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const double r = 0.5 * diameter * std::sqrt(uni(rng));
      const double t = 2.0 * std::numbers::pi * uni(rng);
      q = {p.x + r * std::cos(t), p.y + r * std::sin(t)};
      if (q.x >= 0 && q.y >= 0 && q.x <= width - 1 && q.y <= height - 1) return q;
    }
    return Point2{std::clamp(q.x, 0.0, width - 1.0), std::clamp(q.y, 0.0, height - 1.0)};
  };
  const Point2 a = move(seed.p1);
  const Point2 b = move(seed.p2);
  return {a, b};
}

struct Method {
  std::string name;
  SegConfig config;
};

/// Builds a method from its short name: alw, flw<k>, global-pc, each optionally
/// suffixed with -pc / -ms / -hs to pick the local energy model.
inline Method method_from_name(const std::string& name, const SegConfig& base = {}) {
  Method m{name, base};
  std::string stem = name;
  if (auto dash = name.rfind('-'); dash != std::string::npos && name != "global-pc") {
    const std::string suffix = name.substr(dash + 1);
    if (suffix == "pc") m.config.model = energy::Model::local_pc;
    else if (suffix == "ms") m.config.model = energy::Model::mean_separation;
    else if (suffix == "hs") m.config.model = energy::Model::histogram_separation;
    else throw InvalidConfig("unknown method '" + name + "'");
    stem = name.substr(0, dash);
  }
  if (stem == "alw") {
    m.config.window_mode = WindowMode::adaptive();
  } else if (stem == "global-pc" || stem == "global") {
    m.config.model = energy::Model::global_pc;
    m.config.window_mode = WindowMode::global();
  } else if (stem.rfind("flw", 0) == 0 && stem.size() > 3) {
    m.config.window_mode = WindowMode::parse("fixed:" + stem.substr(3));
  } else {
    throw InvalidConfig("unknown method '" + name + "'");
  }
  return m;
}

struct CompareOptions {
  int perturbations = 5;
  double perturb_diameter = 5.0;
  int bootstrap_resamples = 10000;
  std::uint64_t bootstrap_seed = 12345;
  double big_difference = 0.10;
  int threads = 0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap 95% interval of the mean.
inline Interval bootstrap_ci(const std::vector<double>& values, int resamples, std::uint64_t seed) {
  if (values.empty()) return {};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> means(static_cast<std::size_t>(std::max(resamples, 1)));
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[pick(rng)];
    m = s / static_cast<double>(values.size());
  }
  std::sort(means.begin(), means.end());
  auto at = [&](double q) {
    const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(means.size() - 1)));
    return means[k];
  };
  return {at(0.025), at(0.975)};
}

inline double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Population standard deviation.
inline double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

struct RunOutcome {
  int seed_index = 0;  // 0 = canonical
  bool ok = false;
  double dice = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string error;
};

struct CaseResult {
  std::string case_id;
  std::string method;
  std::vector<RunOutcome> runs;
  double mean_dice = 0.0;    // over successful runs
  double dice_spread = 0.0;  // std over successful runs
  bool ok = false;           // at least one run succeeded
};

struct MethodSummary {
  std::string method;
  double mean_dice = 0.0;
  Interval ci;
  double robustness_spread = 0.0;  // mean per-case Dice std over seed perturbations
  int cases_ok = 0;
  int failures = 0;
};

struct PairedDifference {
  std::string method;     // compared against the reference (first) method
  std::string reference;
  double mean_difference = 0.0;  // reference minus method
  Interval ci;
  int paired_cases = 0;
  std::vector<std::pair<std::string, double>> big_differences;  // (case id, difference)
};

struct EvalReport {
  std::vector<std::string> methods;
  std::vector<std::string> case_ids;
  std::vector<CaseResult> cases;  // sorted by (case id, method order)
  std::vector<MethodSummary> summaries;
  std::vector<PairedDifference> paired;
  int failures = 0;

  const MethodSummary& summary(const std::string& method) const {
    for (const auto& s : summaries)
      if (s.method == method) return s;
    throw InvalidInput("no summary for method " + method);
  }
};

/// Segments one phantom with one method over the canonical seed and its perturbations.
inline CaseResult run_case(const PhantomSpec& spec, const Phantom& ph, const Method& method, const CompareOptions& opt) {
  CaseResult cr{spec.id, method.name, {}, 0.0, 0.0, false};
  const int n = ph.image.width();
  std::vector<double> ok_dice;
  for (int s = 0; s <= opt.perturbations; ++s) {
    RunOutcome out;
    out.seed_index = s;
    const SeedAxis seed =
        s == 0 ? ph.seed : perturb_seed(ph.seed, opt.perturb_diameter, spec.rng_seed * 1000003ULL + static_cast<std::uint64_t>(s), n, ph.image.height());
    try {
      const SegResult r = segment(ph.image, seed, method.config);
      const Mask full = embed_mask(r.mask, r.roi, n, ph.image.height());
      out.ok = true;
      out.dice = dice(full, ph.truth);
      out.iterations = r.iterations_run;
      out.converged = r.converged;
      ok_dice.push_back(out.dice);
    } catch (const Error& e) {
      out.error = e.what();
    }
    cr.runs.push_back(std::move(out));
  }
  cr.ok = !ok_dice.empty();
  cr.mean_dice = mean_of(ok_dice);
  cr.dice_spread = stddev_of(ok_dice);
  return cr;
}

/// Runs every method on every case. The first method is the reference for paired differences.
inline EvalReport compare(const std::vector<PhantomSpec>& suite, const std::vector<Method>& methods,
                          const CompareOptions& opt = {}) {
  if (suite.empty()) throw InvalidInput("comparison suite has no cases");
  if (methods.size() < 2) throw InvalidInput("comparison needs at least two methods");

  EvalReport report;
  for (const auto& m : methods) report.methods.push_back(m.name);

  std::vector<std::size_t> order(suite.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return suite[a].id < suite[b].id; });

  const std::size_t jobs = suite.size() * methods.size();
  std::vector<CaseResult> results(jobs);
  std::vector<std::optional<Phantom>> phantoms(suite.size());
  for (std::size_t c = 0; c < suite.size(); ++c) phantoms[c] = generate(suite[c]);
  parallel_for(jobs, worker_count(opt.threads), [&](std::size_t job) {
    const std::size_t c = job / methods.size();
    const std::size_t m = job % methods.size();
    results[job] = run_case(suite[c], *phantoms[c], methods[m], opt);
  });

  for (std::size_t c : order) {
    report.case_ids.push_back(suite[c].id);
    for (std::size_t m = 0; m < methods.size(); ++m) report.cases.push_back(results[c * methods.size() + m]);
  }

  auto result_of = [&](std::size_t c, std::size_t m) -> const CaseResult& { return results[c * methods.size() + m]; };
  for (std::size_t m = 0; m < methods.size(); ++m) {
    MethodSummary s;
    s.method = methods[m].name;
    std::vector<double> means, spreads;
    for (std::size_t c : order) {
      const auto& cr = result_of(c, m);
      for (const auto& r : cr.runs) s.failures += r.ok ? 0 : 1;
      if (!cr.ok) continue;
      ++s.cases_ok;
      means.push_back(cr.mean_dice);
      spreads.push_back(cr.dice_spread);
    }
    s.mean_dice = mean_of(means);
    s.ci = bootstrap_ci(means, opt.bootstrap_resamples, opt.bootstrap_seed + m);
    s.robustness_spread = mean_of(spreads);
    report.failures += s.failures;
    report.summaries.push_back(s);
  }
  for (std::size_t m = 1; m < methods.size(); ++m) {
    PairedDifference pd;
    pd.method = methods[m].name;
    pd.reference = methods[0].name;
    std::vector<double> diffs;
    for (std::size_t c : order) {
      const auto& ref = result_of(c, 0);
      const auto& other = result_of(c, m);
      if (!ref.ok || !other.ok) continue;
      const double d = ref.mean_dice - other.mean_dice;
      diffs.push_back(d);
      if (std::abs(d) > opt.big_difference) pd.big_differences.emplace_back(suite[c].id, d);
    }
    pd.paired_cases = static_cast<int>(diffs.size());
    pd.mean_difference = mean_of(diffs);
    pd.ci = bootstrap_ci(diffs, opt.bootstrap_resamples, opt.bootstrap_seed + 1000 + m);
    report.paired.push_back(std::move(pd));
  }
  return report;
}

}  // namespace alw::phantom
