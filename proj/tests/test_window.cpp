#include <gtest/gtest.h>

#include <cmath>

#include "alw/adaptive_window.hpp"

using namespace alw;
using namespace alw::window;

TEST(LesionDims, CircleAndEllipse) {
  // Off-lattice centers keep grid points off the boundary (phi = 0 is outside).
  const auto c = lesion_dims(levelset::init_circle(60, 60, 30.3, 29.6, 10));
  EXPECT_NEAR(c.lx, 21, 1);
  EXPECT_NEAR(c.ly, 21, 1);
  Raster<double> phi(80, 40);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 80; ++x) phi(x, y) = std::hypot((x - 40.3) / 20.0, (y - 20.4) / 8.0) - 1.0;
  const auto e = lesion_dims(levelset::DistanceMap{phi});
  EXPECT_NEAR(e.lx, 41, 1);
  EXPECT_NEAR(e.ly, 17, 1);
}

TEST(LesionDims, SinglePixelFloorsAtThree) {
  levelset::DistanceMap m{Raster<double>(9, 9, 1.0)};
  m.phi(4, 4) = -0.5;
  const auto s = lesion_dims(m);
  EXPECT_EQ(s.lx, 3.0);
  EXPECT_EQ(s.ly, 3.0);
  m.phi(4, 4) = 0.5;
  EXPECT_THROW(lesion_dims(m), ContourCollapse);
}

TEST(RawExtent, NaturalLogExampleClampsToMinimum) {
  // (50 / ln 50) / (0.9 + 2 + 2 + 2) = 12.78 / 6.9 = 1.85
  const double raw = raw_extent(50, 0.9, 0.5, 0.5, 0.5);
  EXPECT_NEAR(raw, 50.0 / std::log(50.0) / 6.9, 1e-12);
  EXPECT_NEAR(raw, 1.85, 0.01);
  const auto w = estimate_window({50, 50}, 0.9, 0.5, 0.5, 0.5, 0.5);
  EXPECT_EQ(w.wx, kDefaultMin);
}

TEST(RawExtent, LogBaseRescalesLinearly) {
  const double e = raw_extent(60, 0.7, 0.02, 0.03, 0.4, 961.0);
  const double ten = raw_extent(60, 0.7, 0.02, 0.03, 0.4, 961.0, 10.0);
  EXPECT_NEAR(ten / e, std::log(10.0), 1e-12);
}

TEST(EstimateWindow, SymmetricInputsGiveSquareWindow) {
  const auto w = estimate_window({64, 64}, 0.6, 0.01, 0.02, 0.02, 0.5, Params{5, 35, 961.0, 10.0});
  EXPECT_EQ(w.wx, w.wy);
}

TEST(EstimateWindow, AxesAreDecoupled) {
  const Params p{5, 35, 961.0, 10.0};
  const auto a = estimate_window({80, 30}, 0.6, 0.01, 0.02, 0.004, 0.5, p);
  const auto b = estimate_window({80, 45}, 0.6, 0.01, 0.02, 0.009, 0.5, p);
  EXPECT_EQ(a.wx, b.wx);
}

TEST(EstimateWindow, MonotoneInLocalContrast) {
  const Params p{5, 35, 961.0, 10.0};
  double prev = 0;
  for (double lc = 1e-3; lc < 1.0; lc *= 1.5) {
    const double raw = raw_extent(90, 0.5, 0.02, lc, 0.5, p.contrast_scale, p.log_base);
    EXPECT_GE(raw, prev);
    prev = raw;
    const auto w = estimate_window({90, 90}, 0.5, 0.02, lc, lc, 0.5, p);
    EXPECT_EQ(w.wx % 2, 1);
    EXPECT_GE(w.wx, 5);
    EXPECT_LE(w.wx, 35);
  }
}

TEST(EstimateWindow, HomogeneousRoiGoesToMinimum) {
  // Floored contrasts make their reciprocals dominate the denominator.
  const auto w = bootstrap_window({60, 60}, 1.0, texture::kContrastFloor);
  EXPECT_EQ(w, (Extent{kDefaultMin, kDefaultMin}));
}

TEST(EstimateWindow, ModerateTextureBootstrapInRange) {
  const auto w = bootstrap_window({60, 60}, 0.45, 0.01, Params{5, 35, 961.0, 10.0});
  EXPECT_GE(w.wx, 9);
  EXPECT_LE(w.wx, 35);
}

TEST(EstimateWindow, RejectsBadParams) {
  EXPECT_THROW(estimate_window({10, 10}, 1, 1, 1, 1, 1, Params{4, 35}), InvalidConfig);
  EXPECT_THROW(estimate_window({10, 10}, 1, 1, 1, 1, 1, Params{9, 7}), InvalidConfig);
  EXPECT_THROW(estimate_window({10, 10}, 1, 1, 1, 1, 1, Params{5, 35, 1.0, 1.0}), InvalidConfig);
}

TEST(RoundOdd, NearestOddWithTiesUp) {
  EXPECT_EQ(round_odd(10.0, 5, 35), 11);
  EXPECT_EQ(round_odd(12.0, 5, 35), 13);
  EXPECT_EQ(round_odd(11.9, 5, 35), 11);
  EXPECT_EQ(round_odd(13.1, 5, 35), 13);
  EXPECT_EQ(round_odd(2.0, 5, 35), 5);
  EXPECT_EQ(round_odd(1e9, 5, 35), 35);
  EXPECT_EQ(round_odd(std::nan(""), 5, 35), 5);
  for (double r = 0; r < 50; r += 0.37) {
    const int w = round_odd(r, 5, 35);
    EXPECT_EQ(w % 2, 1);
    EXPECT_GE(w, 5);
    EXPECT_LE(w, 35);
  }
}

TEST(Settle, HoldsWithinMarginOnly) {
  EXPECT_EQ(settle(13, 14.6, 2.0, 5, 35), 13);
  EXPECT_EQ(settle(13, 11.2, 2.0, 5, 35), 13);
  EXPECT_EQ(settle(13, 15.4, 2.0, 5, 35), 15);
  EXPECT_EQ(settle(13, 14.6, 0.0, 5, 35), 15);
  const Extent prev{13, 21};
  const Params p{5, 35, 961.0, 10.0};
  const auto fresh = estimate_window({70, 70}, 0.5, 0.02, 0.03, 0.03, 0.5, p);
  EXPECT_EQ(estimate_window_settled(prev, {70, 70}, 0.5, 0.02, 0.03, 0.03, 0.5, 0.0, p), fresh);
}

TEST(NormalizeEnergyTrace, Examples) {
  EXPECT_EQ(normalize_energy_trace(2.0, 2.0), 1.0);
  EXPECT_EQ(normalize_energy_trace(0.0, 2.0), 1e-3);
  EXPECT_DOUBLE_EQ(normalize_energy_trace(0.5, 2.0), 0.25);
  EXPECT_EQ(normalize_energy_trace(5.0, 2.0), 1.0);
}
