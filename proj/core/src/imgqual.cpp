#include "uaweight/imgqual.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uaweight/error.hpp"

namespace uaweight {

std::string_view to_string(QualityFactor factor) noexcept {
  switch (factor) {
    case QualityFactor::resolution: return "resolution";
    case QualityFactor::brightness: return "brightness";
    case QualityFactor::contrast: return "contrast";
    case QualityFactor::sharpness: return "sharpness";
    case QualityFactor::color_constancy: return "color_constancy";
    case QualityFactor::ocr_text: return "ocr_text";
  }
  return "resolution";
}

QualityFactor parse_quality_factor(std::string_view text) {
  for (const auto factor : kAllQualityFactors) {
    if (to_string(factor) == text) return factor;
  }
  fail(ErrorCode::InvalidConfig, "unknown image quality factor '" + std::string(text) + "'");
}

void ImageQualityConfig::validate() const {
  if (t_r == 0) fail(ErrorCode::InvalidConfig, "t_r must be positive");
  if (!(t_contrast > 0.0)) fail(ErrorCode::InvalidConfig, "t_contrast must be positive");
  if (!(t_sharp > 0.0)) fail(ErrorCode::InvalidConfig, "t_sharp must be positive");
  if (!(t_cc > 0.0)) fail(ErrorCode::InvalidConfig, "t_cc must be positive");
  if (enabled_factors.empty()) fail(ErrorCode::InvalidConfig, "at least one image quality factor must be enabled");
}

double resolution_score(std::size_t width, std::size_t height, std::size_t t_r) {
  const std::size_t q = std::min(width, height);
  if (q > t_r) return 1.0;
  return static_cast<double>(q) / static_cast<double>(t_r);
}

double ocr_text_score(std::size_t ocr_length, std::size_t t_text, std::size_t l_max) {
  if (ocr_length > l_max) {
    fail(ErrorCode::InconsistentLMax,
         "OCR length " + std::to_string(ocr_length) + " exceeds l_max " + std::to_string(l_max));
  }
  if (ocr_length <= t_text) return 1.0;
  return 1.0 - static_cast<double>(ocr_length) / static_cast<double>(l_max);
}

double mean(const LumaPlane& luma) {
  double sum = 0.0;
  for (const double v : luma.values) sum += v;
  return sum / static_cast<double>(luma.values.size());
}

double population_variance(std::span<const double> values) {
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double m = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (const double v : values) sq += (v - m) * (v - m);
  return sq / static_cast<double>(values.size());
}

double brightness_score(const LumaPlane& luma) {
  const double m = mean(luma);
  return std::clamp(1.0 - std::abs(m - 127.5) / 127.5, 0.0, 1.0);
}

double contrast_score(const LumaPlane& luma, double t_contrast) {
  const double sigma = std::sqrt(population_variance(luma.values));
  return std::min(1.0, sigma / t_contrast);
}

LumaPlane laplacian(const LumaPlane& luma) {
  const std::size_t w = luma.width;
  const std::size_t h = luma.height;
  LumaPlane out{w, h, std::vector<double>(w * h)};
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t up = y == 0 ? 0 : y - 1;
    const std::size_t down = y + 1 == h ? y : y + 1;
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t left = x == 0 ? 0 : x - 1;
      const std::size_t right = x + 1 == w ? x : x + 1;
      out.values[y * w + x] = luma.at(x, up) + luma.at(x, down) + luma.at(left, y) +
                              luma.at(right, y) - 4.0 * luma.at(x, y);
    }
  }
  return out;
}

double sharpness_score(const LumaPlane& luma, double t_sharp) {
  const LumaPlane response = laplacian(luma);
  return std::min(1.0, population_variance(response.values) / t_sharp);
}

double color_constancy_score(const std::array<double, 3>& channel_means, double t_cc) {
  const auto [lo, hi] = std::minmax_element(channel_means.begin(), channel_means.end());
  const double d = (*hi - *lo) / std::max(*hi, 1e-9);
  return 1.0 - std::min(1.0, d / t_cc);
}

double mean_of_factors(const std::map<QualityFactor, double>& per_factor) {
  double sum = 0.0;
  for (const auto& [factor, score] : per_factor) sum += score;
  return per_factor.empty() ? 0.0 : sum / static_cast<double>(per_factor.size());
}

ImageQualityReport image_quality(const DecodedLuma& decoded, std::size_t ocr_length, std::size_t l_max,
                                 const ImageQualityConfig& config) {
  config.validate();
  const LumaPlane& luma = decoded.luma;
  if (luma.width == 0 || luma.height == 0) fail(ErrorCode::ZeroPixelImage, "image has zero pixels");

  ImageQualityReport report;
  for (const auto factor : config.enabled_factors) {
    double score = 0.0;
    switch (factor) {
      case QualityFactor::resolution: score = resolution_score(luma.width, luma.height, config.t_r); break;
      case QualityFactor::brightness: score = brightness_score(luma); break;
      case QualityFactor::contrast: score = contrast_score(luma, config.t_contrast); break;
      case QualityFactor::sharpness: score = sharpness_score(luma, config.t_sharp); break;
      case QualityFactor::color_constancy:
        score = color_constancy_score(decoded.channel_means, config.t_cc);
        break;
      case QualityFactor::ocr_text: score = ocr_text_score(ocr_length, config.t_text, l_max); break;
    }
    report.per_factor.emplace(factor, score);
  }
  report.w_image = mean_of_factors(report.per_factor);
  return report;
}

ImageQualityReport image_quality(const RgbImage& image, std::size_t ocr_length, std::size_t l_max,
                                 const ImageQualityConfig& config) {
  return image_quality(luma_from_rgb(image), ocr_length, l_max, config);
}

}  // namespace uaweight
