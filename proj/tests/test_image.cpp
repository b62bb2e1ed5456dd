#include <gtest/gtest.h>
#include <png.h>

#include <filesystem>
#include <random>

#include "alw/image.hpp"
#include "alw/image_io.hpp"

using namespace alw;

namespace {

GrayImage random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Raster<double> r(w, h);
  for (auto& v : r.values()) v = u(rng);
  return GrayImage(r);
}

// Plain histogram equalization of a whole raster: fraction of pixels whose bin
// is at or below the pixel's own bin.
double equalized(const GrayImage& img, double v, int bins, int x0, int x1, int y0, int y1) {
  auto bin = [bins](double a) { return std::min(static_cast<int>(a * bins), bins - 1); };
  double below = 0, total = 0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      total += 1;
      below += bin(img(x, y)) <= bin(v) ? 1 : 0;
    }
  return below / total;
}

}  // namespace

TEST(Normalize, EightBitAffine) {
  const auto g = normalize(Raster<double>(3, 1, std::vector<double>{0, 128, 255}));
  EXPECT_DOUBLE_EQ(g(0, 0), 0.0);
  EXPECT_NEAR(g(1, 0), 0.50196, 1e-5);
  EXPECT_DOUBLE_EQ(g(2, 0), 1.0);
}

TEST(Normalize, SixteenBitAffine) {
  const auto g = normalize(Raster<double>(3, 1, std::vector<double>{100, 300, 500}));
  EXPECT_DOUBLE_EQ(g(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(g(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(g(2, 0), 1.0);
}

TEST(Normalize, ConstantImageMapsToHalf) {
  const auto g = normalize(Raster<double>(4, 3, 17.0));
  for (double v : g.pixels().values()) EXPECT_EQ(v, 0.5);
}

TEST(Normalize, IdempotentOnFullRangeImages) {
  auto g = random_image(20, 10, 7);
  const auto once = normalize(g.pixels());
  EXPECT_EQ(normalize(once), once);
}

TEST(Normalize, RejectsNonFinite) {
  Raster<double> r(2, 2, 0.0);
  r(1, 1) = std::nan("");
  EXPECT_THROW(normalize(r), InvalidInput);
  EXPECT_THROW(normalize(Raster<double>()), InvalidInput);
}

TEST(GrayImage, RejectsOutOfRange) {
  EXPECT_THROW(GrayImage(Raster<double>(2, 2, 1.5)), InvalidInput);
  EXPECT_THROW(Raster<double>(2, 2, std::vector<double>{1, 2, 3}), InvalidInput);
}

TEST(Crop, FullImageIsIdentity) {
  const auto g = random_image(9, 7, 1);
  const auto c = crop(g, Roi{0, 0, 9, 7});
  EXPECT_EQ(c.image, g);
  EXPECT_EQ(c.roi, (Roi{0, 0, 9, 7}));
}

TEST(Crop, CentralBlock) {
  Raster<double> r(4, 4);
  for (int i = 0; i < 16; ++i) r[static_cast<std::size_t>(i)] = i / 15.0;
  const auto c = crop(GrayImage(r), Roi{1, 1, 2, 2});
  ASSERT_EQ(c.image.width(), 2);
  EXPECT_DOUBLE_EQ(c.image(0, 0), 5 / 15.0);
  EXPECT_DOUBLE_EQ(c.image(1, 0), 6 / 15.0);
  EXPECT_DOUBLE_EQ(c.image(0, 1), 9 / 15.0);
  EXPECT_DOUBLE_EQ(c.image(1, 1), 10 / 15.0);
}

TEST(Crop, ClampsPastBorder) {
  const auto g = random_image(10, 10, 2);
  const auto c = crop(g, Roi{6, -3, 10, 8});
  EXPECT_EQ(c.roi, (Roi{6, 0, 4, 5}));
  EXPECT_EQ(c.image.width(), 4);
  EXPECT_EQ(c.image.height(), 5);
  EXPECT_EQ(c.image(0, 0), g(6, 0));
  EXPECT_THROW(crop(g, Roi{20, 20, 3, 3}), InvalidInput);
}

TEST(Crop, NestedCropsCompose) {
  const auto g = random_image(30, 20, 3);
  const auto a = crop(crop(g, Roi{4, 3, 20, 15}).image, Roi{2, 5, 6, 4});
  const auto b = crop(g, Roi{6, 8, 6, 4});
  EXPECT_EQ(a.image, b.image);
}

TEST(EmbedMask, PlacesAtOrigin) {
  Mask m(2, 2, 1);
  const auto out = embed_mask(m, Roi{3, 1, 2, 2}, 6, 4);
  std::size_t n = 0;
  for (auto v : out.values()) n += v;
  EXPECT_EQ(n, 4u);
  EXPECT_EQ(out(3, 1), 1);
  EXPECT_EQ(out(4, 2), 1);
  EXPECT_EQ(out(2, 1), 0);
}

TEST(Clahe, ConstantImageUnchanged) {
  const GrayImage g(Raster<double>(32, 32, 0.3));
  EXPECT_EQ(clahe(g), g);
}

TEST(Clahe, SingleTileWithoutClippingIsHistogramEqualization) {
  const auto g = random_image(16, 12, 4);
  const auto out = clahe(g, ClaheParams{1, 1, 1.0, 64});
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 16; ++x) EXPECT_NEAR(out(x, y), equalized(g, g(x, y), 64, 0, 16, 0, 12), 1e-12);
}

TEST(Clahe, TwoTilesBlendLinearlyBetweenCenters) {
  // Tiles span columns [0,3) and [3,6); their centers sit at x = 1 and x = 4.
  const auto g = random_image(6, 4, 5);
  const auto out = clahe(g, ClaheParams{2, 1, 1.0, 16});
  for (int y = 0; y < 4; ++y) {
    for (int x = 2; x <= 3; ++x) {
      const double t = (x - 1.0) / 3.0;
      const double left = equalized(g, g(x, y), 16, 0, 3, 0, 4);
      const double right = equalized(g, g(x, y), 16, 3, 6, 0, 4);
      EXPECT_NEAR(out(x, y), (1 - t) * left + t * right, 1e-12);
    }
  }
}

TEST(Clahe, OutputStaysInRangeAndPreservesSize) {
  const auto g = random_image(40, 33, 6);
  const auto out = clahe(g);
  EXPECT_EQ(out.width(), 40);
  EXPECT_EQ(out.height(), 33);
  for (double v : out.pixels().values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Clahe, RejectsBadParameters) {
  const auto g = random_image(8, 8, 8);
  EXPECT_THROW(clahe(g, ClaheParams{0, 1, 0.1, 16}), InvalidConfig);
  EXPECT_THROW(clahe(g, ClaheParams{1, 1, 0.0, 16}), InvalidConfig);
  EXPECT_THROW(clahe(g, ClaheParams{8, 8, 0.1, 16}), InvalidConfig);
}

TEST(ClipHistogram, ConservesMassAndCapsBins) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> h(32);
    double before = 0;
    for (auto& v : h) before += (v = u(rng));
    const double limit = 4.0;
    clip_histogram(h, limit);
    double after = 0, excess = 0;
    for (double v : h) after += v;
    EXPECT_NEAR(after, before, 1e-9);
    // Every bin is at most limit plus the evenly redistributed share.
    for (double v : h) excess = std::max(excess, v - limit);
    EXPECT_LE(excess, before / 32.0 + 1e-9);
  }
}

TEST(Pgm, RoundTripsEightBit) {
  Raster<double> r(5, 3);
  for (int i = 0; i < 15; ++i) r[static_cast<std::size_t>(i)] = i / 14.0;
  const GrayImage g(r);
  const auto back = io::decode_pgm(io::encode_pgm(g));
  ASSERT_EQ(back.width(), 5);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(back[i], std::lround(r[i] * 255.0));
}

TEST(Pgm, DecodesSixteenBitAndComments) {
  std::string bytes = "P5\n# comment\n2 1\n65535\n";
  bytes += std::string("\x01\x00\xff\xff", 4);
  const auto r = io::decode_pgm(bytes);
  EXPECT_EQ(r(0, 0), 256.0);
  EXPECT_EQ(r(1, 0), 65535.0);
}

TEST(Pgm, RejectsMalformed) {
  EXPECT_THROW(io::decode_pgm("P2\n1 1\n255\n0"), InvalidInput);
  EXPECT_THROW(io::decode_pgm("P5\n4 4\n255\nab"), InvalidInput);
  EXPECT_THROW(io::decode_pgm("P5\n0 4\n255\n"), InvalidInput);
}

TEST(Pgm, MaskFileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "alw_test_mask";
  std::filesystem::create_directories(dir);
  Mask m(3, 2, 0);
  m(1, 0) = 1;
  m(2, 1) = 1;
  io::write_mask_pgm(dir / "m.pgm", m);
  EXPECT_FALSE(std::filesystem::exists(dir / "m.pgm.tmp"));
  EXPECT_EQ(io::read_mask_pgm(dir / "m.pgm"), m);
  std::filesystem::remove_all(dir);
}

TEST(Png, DecodesGrayscaleFromLibpngEncoder) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = 3;
  img.height = 2;
  img.format = PNG_FORMAT_GRAY;
  const std::vector<png_byte> px{0, 10, 20, 200, 250, 255};
  png_alloc_size_t size = 0;
  ASSERT_TRUE(png_image_write_to_memory(&img, nullptr, &size, 0, px.data(), 0, nullptr));
  std::string buf(size, '\0');
  ASSERT_TRUE(png_image_write_to_memory(&img, buf.data(), &size, 0, px.data(), 0, nullptr));
  buf.resize(size);
  const auto r = io::decode_png(buf);
  ASSERT_EQ(r.width(), 3);
  ASSERT_EQ(r.height(), 2);
  for (std::size_t i = 0; i < px.size(); ++i) EXPECT_EQ(r[i], px[i]);

  const auto path = std::filesystem::temp_directory_path() / "alw_test.png";
  io::write_file_atomic(path, buf);
  EXPECT_EQ(io::read_raster(path), r);
  std::filesystem::remove(path);
}
