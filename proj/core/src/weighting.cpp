#include "uaweight/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "uaweight/error.hpp"

namespace uaweight {

std::string_view to_string(WeightComponent component) noexcept {
  switch (component) {
    case WeightComponent::image: return "image";
    case WeightComponent::coarse: return "coarse";
    case WeightComponent::fine: return "fine";
  }
  return "image";
}

WeightComponent parse_weight_component(std::string_view text) {
  if (text == "image") return WeightComponent::image;
  if (text == "coarse") return WeightComponent::coarse;
  if (text == "fine") return WeightComponent::fine;
  fail(ErrorCode::InvalidConfig, "unknown weight component '" + std::string(text) + "'");
}

void WeightingConfig::validate() const {
  if (!(floor_eps > 0.0) || !std::isfinite(floor_eps)) fail(ErrorCode::InvalidConfig, "floor_eps must be > 0");
  if (enabled_components.empty()) fail(ErrorCode::InvalidConfig, "at least one weight component must be enabled");
}

SampleWeight sample_weight(double w_image, double w_it, double w_ai, const WeightingConfig& config) {
  config.validate();
  if (!std::isfinite(w_image) || !std::isfinite(w_it) || !std::isfinite(w_ai)) {
    fail(ErrorCode::NonFiniteComponent, "weight components must be finite");
  }
  double sum = 0.0;
  if (config.enabled_components.contains(WeightComponent::image)) sum += w_image;
  if (config.enabled_components.contains(WeightComponent::coarse)) sum += w_it;
  if (config.enabled_components.contains(WeightComponent::fine)) sum += w_ai;

  SampleWeight out;
  out.w_image = w_image;
  out.w_it = w_it;
  out.w_ai = w_ai;
  out.raw_mean = sum / static_cast<double>(config.enabled_components.size());
  out.weight = std::max(config.floor_eps, out.raw_mean);
  return out;
}

void softmax_into(std::span<const double> logits, std::span<double> out) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - peak);
    total += out[k];
  }
  for (double& p : out) p /= total;
}

namespace {

void check_inputs(const Matrix& logits, std::span<const std::size_t> labels, std::span<const double> weights) {
  if (logits.rows() == 0) fail(ErrorCode::ShapeMismatch, "empty batch");
  if (logits.cols() < 2) fail(ErrorCode::ShapeMismatch, "need at least two classes");
  if (labels.size() != logits.rows() || weights.size() != logits.rows()) {
    fail(ErrorCode::ShapeMismatch, "logits have " + std::to_string(logits.rows()) + " rows but " +
                                       std::to_string(labels.size()) + " labels and " +
                                       std::to_string(weights.size()) + " weights");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= logits.cols()) fail(ErrorCode::ShapeMismatch, "label index out of range");
    if (!(weights[i] >= 0.0)) fail(ErrorCode::NegativeWeight, "sample weights must be >= 0");
  }
  for (const double z : logits.data()) {
    if (!std::isfinite(z)) fail(ErrorCode::NonFiniteValue, "logits must be finite");
  }
}

}  // namespace

double weighted_ce_loss(const Matrix& logits, std::span<const std::size_t> labels, std::span<const double> weights) {
  check_inputs(logits, labels, weights);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    const double peak = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (const double z : row) sum += std::exp(z - peak);
    // -log softmax_y = log sum exp(z - peak) - (z_y - peak)
    const double nll = std::log(sum) - (row[labels[i]] - peak);
    total += weights[i] * nll;
  }
  return total / static_cast<double>(logits.rows());
}

Matrix weighted_ce_grad(const Matrix& logits, std::span<const std::size_t> labels, std::span<const double> weights) {
  check_inputs(logits, labels, weights);
  Matrix grad(logits.rows(), logits.cols());
  const double inv_b = 1.0 / static_cast<double>(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto out = grad.row(i);
    softmax_into(logits.row(i), out);
    out[labels[i]] -= 1.0;
    const double scale = weights[i] * inv_b;
    for (double& g : out) g *= scale;
  }
  return grad;
}

}  // namespace uaweight
