#include <gtest/gtest.h>

#include "alw/phantom.hpp"
#include "alw/segmenter.hpp"

using namespace alw;

namespace {

phantom::PhantomSpec noiseless_disk() {
  phantom::PhantomSpec s;
  s.id = "disk";
  s.shape = phantom::Shape::disk;
  s.size_px = 40;
  s.contrast = 0.5;
  s.noise_sigma = 0.0;
  s.texture_amplitude = 0.0;
  return s;
}

IterationRecord record(double frac, double rel) {
  IterationRecord r;
  r.sign_change_fraction = frac;
  r.rel_energy_change = rel;
  return r;
}

}  // namespace

TEST(MakeRoi, SeedBoxArithmetic) {
  const auto r = make_roi(SeedAxis{{50, 50}, {70, 50}}, 200, 200, 10, RoiPolicy::seed_box);
  EXPECT_EQ(r.x0, 40);
  EXPECT_EQ(r.y0, 40);
  EXPECT_EQ(r.x1() - 1, 80);
  EXPECT_EQ(r.y1() - 1, 60);
}

TEST(MakeRoi, CircleBoxCoversInitialCircle) {
  const auto r = make_roi(SeedAxis{{50, 50}, {70, 50}}, 200, 200, 10);
  EXPECT_EQ(r, (Roi{40, 30, 41, 41}));
}

TEST(MakeRoi, ClampsNearBorderAndRejectsDegenerateSeed) {
  const auto r = make_roi(SeedAxis{{2, 3}, {20, 3}}, 100, 100, 10);
  EXPECT_EQ(r.x0, 0);
  EXPECT_EQ(r.y0, 0);
  EXPECT_THROW(make_roi(SeedAxis{{5, 5}, {5, 5}}, 100, 100), InvalidSeed);
  EXPECT_THROW(make_roi(SeedAxis{{5, 5}, {150, 5}}, 100, 100), InvalidSeed);
}

TEST(InitContour, SeedIsDiameter) {
  const Roi roi{0, 0, 100, 100};
  const auto m = init_contour(SeedAxis{{50, 50}, {70, 50}}, roi);
  EXPECT_DOUBLE_EQ(m.phi(60, 50), -10.0);
  EXPECT_DOUBLE_EQ(m.phi(70, 50), 0.0);
  const auto d = init_contour(SeedAxis{{0, 0}, {6, 8}}, roi);
  EXPECT_DOUBLE_EQ(d.phi(3, 4), -5.0);
  EXPECT_THROW(init_contour(SeedAxis{{10, 10}, {12, 10}}, roi), InvalidSeed);
}

TEST(InitContour, UsesRoiCoordinates) {
  const auto m = init_contour(SeedAxis{{50, 50}, {70, 50}}, Roi{40, 30, 41, 41});
  EXPECT_DOUBLE_EQ(m.phi(20, 20), -10.0);
}

TEST(Converged, Examples) {
  std::vector<IterationRecord> frozen(5, record(0.0, 0.0));
  EXPECT_TRUE(converged(frozen, 0.002, 1e-3, 5));
  std::vector<IterationRecord> shrinking(5, record(0.01, 0.0));
  EXPECT_FALSE(converged(shrinking, 0.002, 1e-3, 5));
  std::vector<IterationRecord> boundary(5, record(0.002, 0.0));
  EXPECT_FALSE(converged(boundary, 0.002, 1e-3, 5));
  std::vector<IterationRecord> energy_boundary(5, record(0.0, 1e-3));
  EXPECT_FALSE(converged(energy_boundary, 0.002, 1e-3, 5));
  EXPECT_FALSE(converged(std::vector<IterationRecord>(4, record(0, 0)), 0.002, 1e-3, 5));
}

TEST(Converged, OnlyTheLastWindowMatters) {
  std::vector<IterationRecord> h(3, record(0.5, 1.0));
  for (int i = 0; i < 5; ++i) h.push_back(record(0.0, 0.0));
  EXPECT_TRUE(converged(h, 0.002, 1e-3, 5));
  h.push_back(record(0.5, 0.0));
  EXPECT_FALSE(converged(h, 0.002, 1e-3, 5));
}

TEST(WindowMode, ParseAndEcho) {
  EXPECT_EQ(WindowMode::parse("fixed:11").to_string(), "fixed(11)");
  EXPECT_EQ(WindowMode::parse("fixed(15)"), WindowMode::fixed(15));
  EXPECT_EQ(WindowMode::parse("adaptive"), WindowMode::adaptive());
  EXPECT_EQ(WindowMode::parse("global"), WindowMode::global());
  EXPECT_THROW(WindowMode::parse("fixed:10"), InvalidConfig);
  EXPECT_THROW(WindowMode::parse("fixed:x"), InvalidConfig);
  EXPECT_THROW(WindowMode::parse("wide"), InvalidConfig);
}

TEST(SegConfig, ValidationRejectsBadValues) {
  SegConfig c;
  EXPECT_NO_THROW(c.validate());
  c.mu = -1;
  EXPECT_THROW(c.validate(), InvalidConfig);
  c = {};
  c.w_min = 4;
  EXPECT_THROW(c.validate(), InvalidConfig);
  c = {};
  c.window_log_base = 1.0;
  EXPECT_THROW(c.validate(), InvalidConfig);
  c = {};
  c.force_quantile = 0.0;
  EXPECT_THROW(c.validate(), InvalidConfig);
  c = {};
  c.band_radius = 1.0;
  EXPECT_THROW(c.validate(), InvalidConfig);
}

TEST(Segment, NoiselessDiskReachesHighDice) {
  const auto ph = phantom::generate(noiseless_disk());
  // Start from a circle well inside the lesion.
  const Point2 c = ph.seed.midpoint();
  const SeedAxis seed{{c.x - 10, c.y}, {c.x + 10, c.y}};
  const auto r = segment(ph.image, seed, SegConfig{});
  const auto full = embed_mask(r.mask, r.roi, ph.image.width(), ph.image.height());
  EXPECT_GE(phantom::dice(full, ph.truth), 0.95);
  EXPECT_EQ(r.energy_trace.size(), static_cast<std::size_t>(r.iterations_run));
  EXPECT_EQ(r.emitted_windows.size(), static_cast<std::size_t>(r.iterations_run));
}

TEST(Segment, ContourOnTheEdgeStaysPut) {
  const auto ph = phantom::generate(noiseless_disk());
  SegConfig cfg;
  cfg.max_iters = 5;
  const auto r = segment(ph.image, ph.seed, cfg);
  const auto full = embed_mask(r.mask, r.roi, ph.image.width(), ph.image.height());
  EXPECT_GE(phantom::dice(full, ph.truth), 0.98);
  // Fewer than one band point in a hundred changes side per step.
  for (const auto& it : r.iterations) EXPECT_LT(it.sign_change_fraction, 0.01);
}

TEST(Segment, IsDeterministic) {
  auto spec = noiseless_disk();
  spec.noise_sigma = 0.05;
  spec.shape = phantom::Shape::blob;
  spec.aspect = 0.8;
  const auto ph = phantom::generate(spec);
  SegConfig cfg;
  cfg.max_iters = 15;
  const auto a = segment(ph.image, ph.seed, cfg);
  cfg.threads = 1;
  const auto b = segment(ph.image, ph.seed, cfg);
  EXPECT_EQ(a.mask, b.mask);
  EXPECT_EQ(a.energy_trace, b.energy_trace);
}

TEST(Segment, FixedWindowsAreConstant) {
  const auto ph = phantom::generate(noiseless_disk());
  SegConfig cfg;
  cfg.max_iters = 6;
  cfg.window_mode = WindowMode::fixed(11);
  const auto r = segment(ph.image, ph.seed, cfg);
  for (const auto& row : r.emitted_windows)
    for (const auto& w : row) EXPECT_EQ(w, (window::Extent{11, 11}));
}

TEST(Segment, AdaptiveWindowsRespectClamps) {
  auto spec = noiseless_disk();
  spec.noise_sigma = 0.04;
  spec.background = phantom::Background::speckle;
  const auto ph = phantom::generate(spec);
  SegConfig cfg;
  cfg.max_iters = 8;
  const auto r = segment(ph.image, ph.seed, cfg);
  for (const auto& row : r.emitted_windows) {
    EXPECT_FALSE(row.empty());
    for (const auto& w : row) {
      EXPECT_EQ(w.wx % 2, 1);
      EXPECT_EQ(w.wy % 2, 1);
      EXPECT_GE(std::min(w.wx, w.wy), cfg.w_min);
      EXPECT_LE(std::max(w.wx, w.wy), cfg.w_max);
    }
  }
}

TEST(Segment, GlobalModelRunsWithoutWindows) {
  const auto ph = phantom::generate(noiseless_disk());
  SegConfig cfg;
  cfg.model = energy::Model::global_pc;
  cfg.max_iters = 10;
  const auto r = segment(ph.image, ph.seed, cfg);
  for (const auto& row : r.emitted_windows) EXPECT_TRUE(row.empty());
  EXPECT_GT(r.iterations_run, 0);
}

TEST(Segment, RejectsSeedOutsideImage) {
  const auto ph = phantom::generate(noiseless_disk());
  EXPECT_THROW(segment(ph.image, SeedAxis{{-5, 3}, {20, 20}}, SegConfig{}), InvalidSeed);
}
