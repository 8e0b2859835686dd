#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>

#include "uaweight/image.hpp"

namespace uaweight {

enum class QualityFactor { resolution, brightness, contrast, sharpness, color_constancy, ocr_text };

inline constexpr std::array<QualityFactor, 6> kAllQualityFactors = {
    QualityFactor::resolution, QualityFactor::brightness,      QualityFactor::contrast,
    QualityFactor::sharpness,  QualityFactor::color_constancy, QualityFactor::ocr_text};

std::string_view to_string(QualityFactor factor) noexcept;
QualityFactor parse_quality_factor(std::string_view text);

struct ImageQualityConfig {
  std::size_t t_r = 200;     // short side, pixels
  std::size_t t_text = 200;  // OCR characters
  double t_contrast = 40.0;  // luma standard deviation
  double t_sharp = 100.0;    // Laplacian-response variance
  double t_cc = 0.6;         // relative channel-mean spread
  std::set<QualityFactor> enabled_factors{kAllQualityFactors.begin(), kAllQualityFactors.end()};

  /// Throws InvalidConfig.
  void validate() const;
};

struct ImageQualityReport {
  std::map<QualityFactor, double> per_factor;
  double w_image = 0.0;
};

/// 1 when min(width, height) exceeds t_r, otherwise min(width, height) / t_r.
double resolution_score(std::size_t width, std::size_t height, std::size_t t_r);

/// 1 when the OCR length is within t_text, otherwise 1 - length / l_max.
/// Throws InconsistentLMax when length > l_max.
double ocr_text_score(std::size_t ocr_length, std::size_t t_text, std::size_t l_max);

double brightness_score(const LumaPlane& luma);
double contrast_score(const LumaPlane& luma, double t_contrast);

/// Response of the 4-neighbour Laplacian with replicated borders.
LumaPlane laplacian(const LumaPlane& luma);
double sharpness_score(const LumaPlane& luma, double t_sharp);

/// Gray-world deviation: (max mean - min mean) / max mean, mapped to
/// 1 - min(1, d / t_cc).
double color_constancy_score(const std::array<double, 3>& channel_means, double t_cc);

double mean(const LumaPlane& luma);
double population_variance(std::span<const double> values);

ImageQualityReport image_quality(const DecodedLuma& decoded, std::size_t ocr_length, std::size_t l_max,
                                 const ImageQualityConfig& config);
ImageQualityReport image_quality(const RgbImage& image, std::size_t ocr_length, std::size_t l_max,
                                 const ImageQualityConfig& config);

/// Averages whichever scores are present; used for the per-factor mean.
double mean_of_factors(const std::map<QualityFactor, double>& per_factor);

}  // namespace uaweight
