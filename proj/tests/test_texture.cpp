#include <gtest/gtest.h>

#include <random>

#include "alw/texture.hpp"
#include "oracles.hpp"

using namespace alw;
using namespace alw::texture;

namespace {

Quantized random_quantized(int w, int h, int levels, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, levels - 1);
  Quantized q(w, h);
  for (auto& v : q.values()) v = static_cast<std::uint16_t>(u(rng));
  return q;
}

Quantized transpose(const Quantized& q) {
  Quantized t(q.height(), q.width());
  for (int y = 0; y < q.height(); ++y)
    for (int x = 0; x < q.width(); ++x) t(y, x) = q(x, y);
  return t;
}

}  // namespace

TEST(Quantize, Examples) {
  const GrayImage g(Raster<double>(3, 1, std::vector<double>{0.0, 1.0, 0.5}));
  const auto q32 = quantize(g, 32);
  EXPECT_EQ(q32(0, 0), 0);
  EXPECT_EQ(q32(1, 0), 31);
  EXPECT_EQ(quantize(g, 8)(2, 0), 4);
  EXPECT_THROW(quantize(g, 1), InvalidConfig);
}

TEST(Glcm, MatchesPairCountingOracle) {
  std::mt19937_64 rng(42);
  for (int levels : {8, 32}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto q = random_quantized(16, 16, levels, rng);
      for (int d = 1; d <= 5; ++d) {
        for (auto dir : kAllDirections) {
          const auto o = offset(dir, d);
          const auto expected = oracle::glcm(q, levels, o.x, o.y);
          const auto g = glcm(q, levels, dir, d);
          for (int m = 0; m < levels; ++m)
            for (int n = 0; n < levels; ++n) ASSERT_EQ(g.at(m, n), expected[m][n]);
          EXPECT_EQ(g.total(), static_cast<std::uint64_t>(16 * (16 - d)));
        }
      }
    }
  }
}

TEST(Glcm, ConstantBlockCountsSixHorizontalPairs) {
  const Quantized q(3, 3, 5);
  const auto g = glcm(q, 8, Direction::deg0, 1);
  EXPECT_EQ(g.at(5, 5), 6u);
  EXPECT_EQ(g.total(), 6u);
}

TEST(Glcm, SinglePairAndReverseDirection) {
  const Quantized q(2, 1, std::vector<std::uint16_t>{2, 7});
  EXPECT_EQ(glcm(q, 8, Direction::deg0, 1).at(2, 7), 1u);
  EXPECT_EQ(glcm(q, 8, Direction::deg180, 1).at(7, 2), 1u);
  EXPECT_EQ(glcm(q, 8, Direction::deg180, 1).total(), 1u);
}

TEST(Glcm, OppositeDirectionsAreTransposes) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto q = random_quantized(12, 9, 8, rng);
    for (int d = 1; d <= 3; ++d) {
      EXPECT_EQ(glcm(q, 8, Direction::deg180, d), glcm(q, 8, Direction::deg0, d).transposed());
      EXPECT_EQ(glcm(q, 8, Direction::deg270, d), glcm(q, 8, Direction::deg90, d).transposed());
    }
  }
}

TEST(Glcm, NormalizedSumsToOne) {
  std::mt19937_64 rng(4);
  const auto q = random_quantized(10, 10, 16, rng);
  for (auto dir : kAllDirections) {
    double s = 0;
    for (double p : glcm(q, 16, dir, 2).normalized()) s += p;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Glcm, WindowRestrictsBothPairMembers) {
  std::mt19937_64 rng(5);
  const auto q = random_quantized(12, 12, 8, rng);
  const Roi r{3, 2, 5, 6};
  Quantized sub(5, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 5; ++x) sub(x, y) = q(3 + x, 2 + y);
  for (auto dir : kAllDirections) EXPECT_EQ(glcm(q, 8, dir, 1, r), glcm(sub, 8, dir, 1));
}

TEST(Haralick, DiagonalMatrix) {
  Glcm g(8);
  for (int i = 0; i < 8; ++i) g.at(i, i) = 3;
  const auto h = haralick(g);
  EXPECT_DOUBLE_EQ(h.homogeneity, 1.0);
  EXPECT_DOUBLE_EQ(h.contrast, 0.0);
}

TEST(Haralick, ExtremeOffDiagonalCell) {
  Glcm g(32);
  g.at(0, 31) = 5;
  const auto h = haralick(g);
  EXPECT_DOUBLE_EQ(h.homogeneity, 1.0 / 32.0);
  EXPECT_DOUBLE_EQ(h.contrast, 1.0);
}

TEST(Haralick, TwoCellMatrix) {
  Glcm g(16);
  g.at(0, 0) = 1;
  g.at(0, 1) = 1;
  const auto h = haralick(g);
  EXPECT_DOUBLE_EQ(h.homogeneity, 0.75);
  EXPECT_DOUBLE_EQ(h.contrast, 0.5 / (15.0 * 15.0));
}

TEST(Haralick, EmptyMatrixGivesZeros) {
  const auto h = haralick(Glcm(8));
  EXPECT_EQ(h.homogeneity, 0.0);
  EXPECT_EQ(h.contrast, 0.0);
}

TEST(GlobalStats, ConstantRoi) {
  const auto t = global_stats(Quantized(8, 8, 3), 8, 1);
  EXPECT_DOUBLE_EQ(t.gh, 1.0);
  EXPECT_DOUBLE_EQ(t.gc, kContrastFloor);
}

TEST(GlobalStats, Checkerboard) {
  const int levels = 32;
  Quantized q(10, 10);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) q(x, y) = static_cast<std::uint16_t>((x + y) % 2 ? levels - 1 : 0);
  const auto t = global_stats(q, levels, 1);
  EXPECT_DOUBLE_EQ(t.gh, 1.0 / levels);
  EXPECT_DOUBLE_EQ(t.gc, 1.0);
}

TEST(GlobalStats, StripesAverageLiesBetweenAxes) {
  Quantized q(12, 12);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x) q(x, y) = static_cast<std::uint16_t>((x / 2) % 2 ? 7 : (y % 3));
  const double horiz = haralick(glcm(q, 8, Direction::deg0, 1)).contrast;
  const double vert = haralick(glcm(q, 8, Direction::deg90, 1)).contrast;
  ASSERT_NE(horiz, vert);
  const auto t = global_stats(q, 8, 1);
  EXPECT_GT(t.gc, std::min(horiz, vert));
  EXPECT_LT(t.gc, std::max(horiz, vert));
}

TEST(GlobalStats, RejectsTooSmallOrBadOffset) {
  EXPECT_THROW(global_stats(Quantized(2, 2, 0), 8, 3), InvalidInput);
  EXPECT_THROW(global_stats(Quantized(4, 4, 0), 8, 0), InvalidConfig);
}

TEST(LocalContrast, ConstantWindowFloors) {
  const auto lc = local_contrast(Quantized(11, 11, 4), 8, Pixel{5, 5}, 7, 7, 1);
  EXPECT_EQ(lc.x, kContrastFloor);
  EXPECT_EQ(lc.y, kContrastFloor);
}

TEST(LocalContrast, HorizontalStripes) {
  const int levels = 32;
  Quantized q(15, 15);
  for (int y = 0; y < 15; ++y)
    for (int x = 0; x < 15; ++x) q(x, y) = static_cast<std::uint16_t>(y % 2 ? levels - 1 : 0);
  const auto lc = local_contrast(q, levels, Pixel{7, 7}, 9, 5, 1);
  EXPECT_DOUBLE_EQ(lc.y, 1.0);
  EXPECT_DOUBLE_EQ(lc.x, kContrastFloor);
  const auto swapped = local_contrast(transpose(q), levels, Pixel{7, 7}, 5, 9, 1);
  EXPECT_EQ(swapped.x, lc.y);
  EXPECT_EQ(swapped.y, lc.x);
}

TEST(LocalContrast, TransposeSwapsAxesOnRandomData) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = random_quantized(20, 17, 16, rng);
    const Pixel c{trial % 17, (3 * trial) % 17};
    const auto a = local_contrast(q, 16, c, 7, 11, 2);
    const auto b = local_contrast(transpose(q), 16, Pixel{c.y, c.x}, 11, 7, 2);
    EXPECT_DOUBLE_EQ(a.x, b.y);
    EXPECT_DOUBLE_EQ(a.y, b.x);
  }
}

TEST(LocalContrast, AgreesWithHaralickOnClampedWindow) {
  std::mt19937_64 rng(12);
  const auto q = random_quantized(20, 20, 32, rng);
  const Pixel c{2, 15};
  const Roi r = clamp_roi(centered_window(c, 9, 13), 20, 20);
  const auto lc = local_contrast(q, 32, c, 9, 13, 1);
  const double hx = 0.5 * (haralick(glcm(q, 32, Direction::deg0, 1, r)).contrast +
                           haralick(glcm(q, 32, Direction::deg180, 1, r)).contrast);
  const double hy = 0.5 * (haralick(glcm(q, 32, Direction::deg90, 1, r)).contrast +
                           haralick(glcm(q, 32, Direction::deg270, 1, r)).contrast);
  EXPECT_NEAR(lc.x, std::max(hx, kContrastFloor), 1e-12);
  EXPECT_NEAR(lc.y, std::max(hy, kContrastFloor), 1e-12);
}

TEST(LocalContrast, RejectsEvenWindows) {
  EXPECT_THROW(local_contrast(Quantized(9, 9, 0), 8, Pixel{4, 4}, 4, 5, 1), InvalidConfig);
}
