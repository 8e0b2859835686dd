#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uaweight/random.hpp"

namespace uaweight {

enum class RelevanceMode { raw, contrastive };

std::string_view to_string(RelevanceMode mode) noexcept;
RelevanceMode parse_relevance_mode(std::string_view text);

struct RelevanceConfig {
  double temperature = 0.0;  // similarities are scaled by exp(temperature)
  RelevanceMode mode = RelevanceMode::raw;
  std::size_t negatives_per_sample = 15;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Coarse (image-text) and fine (aspect-image) relevance of one sample.
/// Raw mode: both in [-e^t, e^t]. Contrastive mode: both in (0, 1).
struct RelevanceScores {
  double w_it = 0.0;
  double w_ai = 0.0;
};

std::vector<double> l2_normalize(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

/// Cosine similarity of the L2-normalized inputs times exp(t).
double scaled_cosine(std::span<const double> a, std::span<const double> b, double t);

/// Draws k distinct batch indices other than `positive`, uniformly without
/// replacement. Throws BatchTooSmall unless 2 <= batch_size and k < batch_size.
std::vector<std::size_t> sample_negatives(std::size_t batch_size, std::size_t positive, std::size_t k, Rng& rng);
std::vector<std::string> sample_negatives(std::span<const std::string> batch_keys, std::size_t positive,
                                          std::size_t k, Rng& rng);

/// Softmax over scaled cosines between `anchor` and each candidate; the
/// first candidate is the paired item.
std::vector<double> contrastive_distribution(std::span<const double> anchor,
                                             std::span<const std::vector<double>> candidates, double t);

/// W^IT. Raw mode scores the paired text only; contrastive mode returns the
/// paired text's softmax probability against the negative texts.
double coarse_relevance(std::span<const double> image, std::span<const double> text,
                        std::span<const std::vector<double>> negative_texts, const RelevanceConfig& config);

/// W^AI, the aspect-image analogue of coarse_relevance with negative images.
double fine_relevance(std::span<const double> aspect, std::span<const double> image,
                      std::span<const std::vector<double>> negative_images, const RelevanceConfig& config);

}  // namespace uaweight
