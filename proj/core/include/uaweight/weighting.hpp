#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string_view>

#include "uaweight/matrix.hpp"

namespace uaweight {

/// The three uncertainty scores that feed a sample's loss weight.
enum class WeightComponent { image, coarse, fine };

std::string_view to_string(WeightComponent component) noexcept;
WeightComponent parse_weight_component(std::string_view text);

struct WeightingConfig {
  double floor_eps = 0.05;
  // Ablations drop components from the mean; the default uses all three.
  std::set<WeightComponent> enabled_components{WeightComponent::image, WeightComponent::coarse,
                                               WeightComponent::fine};

  void validate() const;
};

struct SampleWeight {
  double raw_mean = 0.0;
  double weight = 0.0;
  double w_image = 0.0;
  double w_it = 0.0;
  double w_ai = 0.0;
};

/// raw_mean is the mean of the enabled components; weight = max(floor_eps, raw_mean).
SampleWeight sample_weight(double w_image, double w_it, double w_ai, const WeightingConfig& config = {});

/// Mean over the batch of weights[i] * -log softmax(logits[i])[labels[i]].
double weighted_ce_loss(const Matrix& logits, std::span<const std::size_t> labels, std::span<const double> weights);

/// d(weighted_ce_loss)/d(logits): row i = weights[i] / B * (softmax(logits[i]) - onehot(labels[i])).
Matrix weighted_ce_grad(const Matrix& logits, std::span<const std::size_t> labels, std::span<const double> weights);

/// Numerically stable softmax of one row.
void softmax_into(std::span<const double> logits, std::span<double> out);

}  // namespace uaweight
