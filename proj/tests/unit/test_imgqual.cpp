#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"
#include "uaweight/error.hpp"
#include "uaweight/imgqual.hpp"
#include "uaweight/random.hpp"
#include "uaweight/synth.hpp"

using namespace uaweight;
using uaweight::testkit::solid_image;

namespace {

LumaPlane plane(std::size_t w, std::size_t h, std::vector<double> values) { return {w, h, std::move(values)}; }

LumaPlane constant_plane(std::size_t w, std::size_t h, double v) { return plane(w, h, std::vector<double>(w * h, v)); }

RgbImage checkerboard(std::size_t w, std::size_t h) {
  RgbImage img(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::uint8_t v = ((x + y) % 2) ? 255 : 0;
      std::fill_n(img.at(x, y), 3, v);
    }
  }
  return img;
}

// Straight-loop reference: clamp-to-edge 4-neighbour Laplacian, then the
// population variance of the response, two passes.
double oracle_laplacian_variance(const LumaPlane& p) {
  const long w = static_cast<long>(p.width), h = static_cast<long>(p.height);
  auto px = [&](long x, long y) {
    x = x < 0 ? 0 : (x >= w ? w - 1 : x);
    y = y < 0 ? 0 : (y >= h ? h - 1 : y);
    return p.values[static_cast<std::size_t>(y * w + x)];
  };
  std::vector<double> r;
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      r.push_back(px(x, y - 1) + px(x - 1, y) - 4.0 * px(x, y) + px(x + 1, y) + px(x, y + 1));
    }
  }
  double m = 0.0;
  for (double v : r) m += v;
  m /= static_cast<double>(r.size());
  double var = 0.0;
  for (double v : r) var += (v - m) * (v - m);
  return var / static_cast<double>(r.size());
}

}  // namespace

TEST(Resolution, Branches) {
  EXPECT_EQ(resolution_score(400, 300, 200), 1.0);
  EXPECT_EQ(resolution_score(100, 800, 200), 0.5);
  EXPECT_EQ(resolution_score(200, 200, 200), 1.0);
  EXPECT_EQ(resolution_score(201, 5000, 200), 1.0);
  EXPECT_EQ(resolution_score(1, 1, 200), 1.0 / 200.0);
}

TEST(Resolution, LinearBelowThresholdAndNondecreasing) {
  double prev = 0.0;
  for (std::size_t q = 1; q <= 400; ++q) {
    const double s = resolution_score(q, q + 17, 200);
    if (q <= 200) EXPECT_EQ(s, static_cast<double>(q) / 200.0);
    EXPECT_GE(s, prev);
    prev = s;
  }
}

TEST(OcrText, Branches) {
  EXPECT_EQ(ocr_text_score(0, 200, 0), 1.0);
  EXPECT_EQ(ocr_text_score(200, 200, 200), 1.0);
  EXPECT_EQ(ocr_text_score(500, 200, 1000), 0.5);
  EXPECT_EQ(ocr_text_score(1000, 200, 1000), 0.0);
}

TEST(OcrText, InconsistentLMax) {
  try {
    ocr_text_score(501, 200, 500);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InconsistentLMax);
  }
}

TEST(OcrText, NonincreasingInLength) {
  double prev = 1.0;
  for (std::size_t len = 0; len <= 1000; ++len) {
    const double s = ocr_text_score(len, 200, 1000);
    EXPECT_LE(s, prev);
    EXPECT_GE(s, 0.0);
    prev = s;
  }
}

TEST(Brightness, Formula) {
  EXPECT_EQ(brightness_score(constant_plane(4, 4, 127.5)), 1.0);
  EXPECT_EQ(brightness_score(constant_plane(4, 4, 0.0)), 0.0);
  EXPECT_EQ(brightness_score(constant_plane(4, 4, 255.0)), 0.0);
  EXPECT_DOUBLE_EQ(brightness_score(constant_plane(4, 4, 191.25)), 0.5);
}

TEST(Contrast, Formula) {
  EXPECT_EQ(contrast_score(constant_plane(3, 3, 80.0), 40.0), 0.0);
  EXPECT_EQ(contrast_score(luma_from_rgb(checkerboard(8, 8)).luma, 40.0), 1.0);
  // Alternating 107.5 / 147.5 has sigma exactly 20.
  std::vector<double> v;
  for (int i = 0; i < 16; ++i) v.push_back(i % 2 ? 147.5 : 107.5);
  EXPECT_DOUBLE_EQ(contrast_score(plane(4, 4, v), 40.0), 0.5);
}

TEST(Sharpness, ConstantImageIsZero) { EXPECT_EQ(sharpness_score(constant_plane(6, 6, 200.0), 100.0), 0.0); }

TEST(Sharpness, SinglePixelMatchesBruteForce) {
  auto p = constant_plane(5, 5, 0.0);
  p.values[12] = 255.0;
  const double var = oracle_laplacian_variance(p);
  // Response: -1020 at the centre, 255 at its four neighbours, 0 elsewhere.
  EXPECT_NEAR(var, (1020.0 * 1020.0 + 4 * 255.0 * 255.0) / 25.0, 1e-9);
  EXPECT_NEAR(sharpness_score(p, 1e6), var / 1e6, 1e-15);
  EXPECT_EQ(sharpness_score(p, 100.0), 1.0);
}

TEST(Sharpness, BorderPixelMatchesBruteForce) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t w = 1 + uniform_index(rng, 9), h = 1 + uniform_index(rng, 9);
    std::vector<double> v(w * h);
    for (auto& x : v) x = static_cast<double>(uniform_index(rng, 256));
    const auto p = plane(w, h, v);
    EXPECT_NEAR(sharpness_score(p, 1e9), oracle_laplacian_variance(p) / 1e9, 1e-15) << w << "x" << h;
  }
}

TEST(Sharpness, HugeThresholdTendsToZero) {
  const auto p = luma_from_rgb(checkerboard(10, 10)).luma;
  EXPECT_LT(sharpness_score(p, 1e300), 1e-290);
}

TEST(ColorConstancy, Formula) {
  EXPECT_EQ(color_constancy_score({90.0, 90.0, 90.0}, 0.6), 1.0);
  EXPECT_EQ(color_constancy_score({255.0, 0.0, 0.0}, 0.6), 0.0);
  EXPECT_NEAR(color_constancy_score({200.0, 150.0, 100.0}, 0.6), 1.0 - (100.0 / 200.0) / 0.6, 1e-15);
  EXPECT_NEAR(color_constancy_score({200.0, 150.0, 100.0}, 0.6), 0.1667, 5e-5);
  EXPECT_EQ(color_constancy_score({0.0, 0.0, 0.0}, 0.6), 1.0);
}

TEST(ImageQuality, AllOnes) {
  const auto r = image_quality(checkerboard(256, 256), 0, 0, ImageQualityConfig{});
  EXPECT_EQ(r.per_factor.size(), 6u);
  for (const auto& [f, s] : r.per_factor) EXPECT_EQ(s, 1.0) << to_string(f);
  EXPECT_EQ(r.w_image, 1.0);
}

TEST(ImageQuality, SubsetMean) {
  ImageQualityConfig cfg;
  cfg.enabled_factors = {QualityFactor::resolution, QualityFactor::ocr_text};
  const auto r = image_quality(solid_image(100, 150, 9, 9, 9), 0, 0, cfg);
  ASSERT_EQ(r.per_factor.size(), 2u);
  EXPECT_EQ(r.per_factor.at(QualityFactor::resolution), 0.5);
  EXPECT_EQ(r.per_factor.at(QualityFactor::ocr_text), 1.0);
  EXPECT_EQ(r.w_image, 0.75);
}

TEST(ImageQuality, SyntheticFixtureMatchesIndependentRecomputation) {
  const RgbImage img = procedural_image(150, 120, 77);
  const std::size_t ocr_len = 350, l_max = 700;
  const auto r = image_quality(img, ocr_len, l_max, ImageQualityConfig{});

  // Recompute every factor from raw pixels.
  const std::size_t n = img.width * img.height;
  double sum[3] = {0, 0, 0};
  std::vector<double> luma(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) sum[c] += img.pixels[3 * i + c];
    luma[i] = 0.299 * img.pixels[3 * i] + 0.587 * img.pixels[3 * i + 1] + 0.114 * img.pixels[3 * i + 2];
  }
  double m = 0.0;
  for (double v : luma) m += v;
  m /= static_cast<double>(n);
  double var = 0.0;
  for (double v : luma) var += (v - m) * (v - m);
  var /= static_cast<double>(n);
  const double means[3] = {sum[0] / n, sum[1] / n, sum[2] / n};
  const double hi = std::max({means[0], means[1], means[2]}), lo = std::min({means[0], means[1], means[2]});

  const double expect_res = 120.0 / 200.0;
  const double expect_bright = 1.0 - std::abs(m - 127.5) / 127.5;
  const double expect_contrast = std::min(1.0, std::sqrt(var) / 40.0);
  const double expect_sharp = std::min(1.0, oracle_laplacian_variance(plane(img.width, img.height, luma)) / 100.0);
  const double expect_cc = 1.0 - std::min(1.0, ((hi - lo) / hi) / 0.6);
  const double expect_ocr = 1.0 - 350.0 / 700.0;

  const double tol = 1e-9;
  EXPECT_NEAR(r.per_factor.at(QualityFactor::resolution), expect_res, tol);
  EXPECT_NEAR(r.per_factor.at(QualityFactor::brightness), expect_bright, tol);
  EXPECT_NEAR(r.per_factor.at(QualityFactor::contrast), expect_contrast, tol);
  EXPECT_NEAR(r.per_factor.at(QualityFactor::sharpness), expect_sharp, tol);
  EXPECT_NEAR(r.per_factor.at(QualityFactor::color_constancy), expect_cc, tol);
  EXPECT_NEAR(r.per_factor.at(QualityFactor::ocr_text), expect_ocr, tol);
  EXPECT_NEAR(r.w_image,
              (expect_res + expect_bright + expect_contrast + expect_sharp + expect_cc + expect_ocr) / 6.0, tol);
}

TEST(ImageQuality, ScoresBoundedOnRandomImages) {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t w = 1 + uniform_index(rng, 300), h = 1 + uniform_index(rng, 300);
    RgbImage img(w, h);
    const auto level = uniform_index(rng, 256), spread = uniform_index(rng, 256);
    for (auto& p : img.pixels) {
      p = static_cast<std::uint8_t>(std::clamp<long>(static_cast<long>(level + uniform_index(rng, spread + 1)) -
                                                         static_cast<long>(spread / 2), 0, 255));
    }
    const std::size_t l_max = uniform_index(rng, 1000);
    const auto r = image_quality(img, uniform_index(rng, l_max + 1), l_max, ImageQualityConfig{});
    for (const auto& [f, s] : r.per_factor) {
      EXPECT_GE(s, 0.0) << to_string(f);
      EXPECT_LE(s, 1.0) << to_string(f);
    }
    EXPECT_GE(r.w_image, 0.0);
    EXPECT_LE(r.w_image, 1.0);
  }
}

TEST(ImageQuality, IdenticalBytesGiveBitIdenticalScores) {
  const auto bytes = encode_png(procedural_image(64, 48, 5));
  const auto a = image_quality(decode_luma(bytes), 10, 20, ImageQualityConfig{});
  const auto b = image_quality(decode_luma(bytes), 10, 20, ImageQualityConfig{});
  EXPECT_EQ(a.per_factor, b.per_factor);
  EXPECT_EQ(a.w_image, b.w_image);
}

TEST(ImageQuality, ConfigValidation) {
  ImageQualityConfig cfg;
  cfg.enabled_factors.clear();
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.t_r = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.t_sharp = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_NO_THROW(ImageQualityConfig{}.validate());
}

TEST(ImageQuality, FactorNames) {
  for (const auto f : kAllQualityFactors) EXPECT_EQ(parse_quality_factor(to_string(f)), f);
  EXPECT_THROW(parse_quality_factor("tone"), Error);
}
