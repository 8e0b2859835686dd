#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uaweight/corpus.hpp"
#include "uaweight/error.hpp"
#include "uaweight/image.hpp"
#include "uaweight/imgqual.hpp"
#include "uaweight/relevance.hpp"
#include "uaweight/trainer.hpp"
#include "uaweight/weighting.hpp"

namespace uaweight {

struct PipelineConfig {
  ImageQualityConfig image_quality;
  RelevanceConfig relevance;
  WeightingConfig weighting;
  TrainConfig train;

  void validate() const;
};

/// Parses a JSON document with optional sections "image_quality",
/// "relevance", "weighting" and "train". Missing keys keep their defaults;
/// unknown keys are rejected with InvalidConfig.
PipelineConfig parse_pipeline_config(std::string_view json_text);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
std::string format_pipeline_config(const PipelineConfig& config);

/// One row of the per-sample score report.
struct ScoreRecord {
  std::string id;
  std::map<QualityFactor, double> image_scores;  // enabled factors only
  double w_image = 0.0;
  double w_it = 0.0;
  double w_ai = 0.0;
  double raw_mean = 0.0;
  double weight = 0.0;

  bool operator==(const ScoreRecord&) const = default;
};

/// Thrown when inputs fail validation; carries one diagnostic per offending row.
class ValidationError : public Error {
 public:
  ValidationError(ErrorCode code, std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

using ImageSource = std::function<RgbImage(const std::string& image_file)>;

/// Loads `image_file` relative to `dir`.
ImageSource directory_image_source(std::filesystem::path dir);

struct AssessInputs {
  const Corpus& corpus;
  const EmbeddingTable& image_embeddings;
  const EmbeddingTable& text_embeddings;
  const EmbeddingTable& aspect_embeddings;
  ImageSource images;
};

/// Scores every sample: image quality per unique image, coarse and fine
/// relevance, and the floored mean weight. Output is in manifest order.
///
/// In contrastive mode the in-batch negatives come from consecutive groups of
/// negatives_per_sample + 1 samples (a lone trailing sample joins the previous
/// group); sample i draws from Rng(rng_seed ^ i).
std::vector<ScoreRecord> assess(const AssessInputs& inputs, const PipelineConfig& config, std::size_t jobs = 1);

/// Fixed column order shared by the JSONL and CSV report forms.
std::vector<std::string> score_columns();

std::string format_score_jsonl(const std::vector<ScoreRecord>& records);
std::string format_score_csv(const std::vector<ScoreRecord>& records);
std::string format_weights_csv(const std::vector<ScoreRecord>& records);

std::vector<ScoreRecord> parse_score_jsonl(std::string_view contents);
std::vector<ScoreRecord> parse_score_csv(std::string_view contents);

/// id -> weight rows, in file order.
std::vector<std::pair<std::string, double>> parse_weights_csv(std::string_view contents);

struct WeightStats {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  double lo = 0.0;  // histogram range
  double hi = 1.0;
  std::vector<std::size_t> bins;
};

/// Histogram over [min(0, min weight), max(1, max weight)] with `bins` equal bins.
WeightStats weight_stats(std::span<const double> weights, std::size_t bins);
std::string format_weight_stats(const WeightStats& stats);

}  // namespace uaweight
