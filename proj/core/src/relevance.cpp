#include "uaweight/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uaweight/error.hpp"

namespace uaweight {

std::string_view to_string(RelevanceMode mode) noexcept {
  return mode == RelevanceMode::raw ? "raw" : "contrastive";
}

RelevanceMode parse_relevance_mode(std::string_view text) {
  if (text == "raw") return RelevanceMode::raw;
  if (text == "contrastive") return RelevanceMode::contrastive;
  fail(ErrorCode::InvalidConfig, "unknown relevance mode '" + std::string(text) + "'");
}

void RelevanceConfig::validate() const {
  if (negatives_per_sample < 1) fail(ErrorCode::InvalidConfig, "negatives_per_sample must be >= 1");
  if (!std::isfinite(std::exp(temperature))) fail(ErrorCode::InvalidConfig, "exp(temperature) must be finite");
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::DimMismatch, "dot product of dims " + std::to_string(a.size()) + " and " +
                                     std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

std::vector<double> l2_normalize(std::span<const double> v) {
  // Scale by the largest magnitude first so tiny or huge inputs neither
  // underflow nor overflow when squared.
  double peak = 0.0;
  for (const double x : v) peak = std::max(peak, std::abs(x));
  if (!(peak > 0.0) || !std::isfinite(peak)) fail(ErrorCode::ZeroVector, "cannot normalize a zero vector");
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= peak;
  const double norm = std::sqrt(dot(out, out));
  for (double& x : out) x /= norm;
  return out;
}

double scaled_cosine(std::span<const double> a, std::span<const double> b, double t) {
  if (a.size() != b.size()) {
    fail(ErrorCode::DimMismatch, "cosine of dims " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  return dot(l2_normalize(a), l2_normalize(b)) * std::exp(t);
}

std::vector<std::size_t> sample_negatives(std::size_t batch_size, std::size_t positive, std::size_t k, Rng& rng) {
  if (batch_size < 2 || k + 1 > batch_size) {
    fail(ErrorCode::BatchTooSmall, "cannot draw " + std::to_string(k) + " negatives from a batch of " +
                                       std::to_string(batch_size));
  }
  if (positive >= batch_size) fail(ErrorCode::ShapeMismatch, "positive index outside the batch");
  std::vector<std::size_t> pool;
  pool.reserve(batch_size - 1);
  for (std::size_t i = 0; i < batch_size; ++i) {
    if (i != positive) pool.push_back(i);
  }
  // Partial Fisher-Yates: the first k slots become a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::vector<std::string> sample_negatives(std::span<const std::string> batch_keys, std::size_t positive,
                                          std::size_t k, Rng& rng) {
  std::vector<std::string> keys;
  for (const auto index : sample_negatives(batch_keys.size(), positive, k, rng)) keys.push_back(batch_keys[index]);
  return keys;
}

std::vector<double> contrastive_distribution(std::span<const double> anchor,
                                             std::span<const std::vector<double>> candidates, double t) {
  if (candidates.empty()) fail(ErrorCode::ShapeMismatch, "contrastive distribution needs a paired candidate");
  std::vector<double> logits;
  logits.reserve(candidates.size());
  for (const auto& c : candidates) logits.push_back(scaled_cosine(anchor, c, t));
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& z : logits) {
    z = std::exp(z - peak);
    total += z;
  }
  for (double& z : logits) z /= total;
  return logits;
}

namespace {

double paired_relevance(std::span<const double> anchor, std::span<const double> paired,
                        std::span<const std::vector<double>> negatives, const RelevanceConfig& config) {
  if (config.mode == RelevanceMode::raw) return scaled_cosine(anchor, paired, config.temperature);
  std::vector<std::vector<double>> candidates;
  candidates.reserve(negatives.size() + 1);
  candidates.emplace_back(paired.begin(), paired.end());
  candidates.insert(candidates.end(), negatives.begin(), negatives.end());
  return contrastive_distribution(anchor, candidates, config.temperature).front();
}

}  // namespace

double coarse_relevance(std::span<const double> image, std::span<const double> text,
                        std::span<const std::vector<double>> negative_texts, const RelevanceConfig& config) {
  return paired_relevance(image, text, negative_texts, config);
}

double fine_relevance(std::span<const double> aspect, std::span<const double> image,
                      std::span<const std::vector<double>> negative_images, const RelevanceConfig& config) {
  return paired_relevance(aspect, image, negative_images, config);
}

}  // namespace uaweight
