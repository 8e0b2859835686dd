#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "uaweight/corpus.hpp"
#include "uaweight/image.hpp"
#include "uaweight/random.hpp"
#include "uaweight/trainer.hpp"

namespace uaweight {

enum class DegradationKind { gaussian_blur, downscale, brightness_shift, ocr_inject };

std::string_view to_string(DegradationKind kind) noexcept;
DegradationKind parse_degradation_kind(std::string_view text);  // throws UnknownKind

struct Degradation {
  DegradationKind kind;
  double magnitude;  // blur sigma, scale factor, luma offset, or OCR characters

  bool operator==(const Degradation&) const = default;
};

/// Parses "kind:magnitude", e.g. "gaussian_blur:2".
Degradation parse_degradation(std::string_view text);

/// Blur sigma 2, downscale to 0.4, 400 injected OCR characters.
std::vector<Degradation> default_degradations();

struct SynthSpec {
  std::size_t n_samples = 200;
  std::size_t feature_dim = 16;
  std::size_t n_classes = 3;  // 2 or 3 (manifest labels are sentiment polarities)
  double lowq_fraction = 0.3;
  double label_noise_p = 0.3;  // low-quality samples only
  std::vector<Degradation> degradations = default_degradations();
  std::uint64_t rng_seed = 1;

  std::size_t image_width = 224;
  std::size_t image_height = 224;
  std::size_t embedding_dim = 32;
  double class_separation = 3.0;  // distance of each class centroid from the origin
  double embedding_noise = 0.3;   // per-modality noise around the shared latent of a clean sample
  std::size_t clean_ocr_max = 150;

  void validate() const;
};

RgbImage gaussian_blur(const RgbImage& image, double sigma);
RgbImage downscale(const RgbImage& image, double factor);
RgbImage brightness_shift(const RgbImage& image, double amount);

/// Applies one degradation; ocr_inject leaves pixels untouched (it only
/// affects the OCR sidecar).
RgbImage degrade(const RgbImage& image, DegradationKind kind, double magnitude);

/// Seeded procedural scene: textured background with colored rectangles and discs.
RgbImage procedural_image(std::size_t width, std::size_t height, std::uint64_t seed);

std::string random_ocr_text(std::size_t length, Rng& rng);

struct SynthCorpus {
  Corpus corpus;
  std::vector<RgbImage> images;  // aligned with corpus.samples()
  EmbeddingTable image_embeddings{EmbeddingKind::image, 0};
  EmbeddingTable text_embeddings{EmbeddingKind::text, 0};
  EmbeddingTable aspect_embeddings{EmbeddingKind::aspect, 0};
  FeatureSet features;
  std::vector<std::size_t> latent_class;
  std::vector<bool> low_quality;
};

SynthCorpus generate_corpus(const SynthSpec& spec);

/// File names inside a generated corpus directory.
struct SynthLayout {
  static constexpr std::string_view manifest = "manifest.tsv";
  static constexpr std::string_view images = "images";
  static constexpr std::string_view ocr = "ocr.json";
  static constexpr std::string_view image_embeddings = "emb_image.jsonl";
  static constexpr std::string_view text_embeddings = "emb_text.jsonl";
  static constexpr std::string_view aspect_embeddings = "emb_aspect.jsonl";
  static constexpr std::string_view features = "features.jsonl";
  static constexpr std::string_view truth = "truth.tsv";
};

void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

/// generate_corpus followed by write_corpus.
SynthCorpus gen_corpus(const SynthSpec& spec, const std::filesystem::path& dir);

}  // namespace uaweight
