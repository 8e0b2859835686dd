#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uaweight/matrix.hpp"

namespace uaweight {

/// Multinomial logistic regression: logits = weights * x + bias.
struct LinearModel {
  std::vector<std::string> classes;
  Matrix weights;  // K x D
  std::vector<double> bias;

  std::size_t num_classes() const noexcept { return classes.size(); }
  std::size_t dim() const noexcept { return weights.cols(); }

  void logits_into(std::span<const double> x, std::span<double> out) const;
  std::size_t predict(std::span<const double> x) const;

  bool operator==(const LinearModel&) const = default;
};

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double l2_reg = 1e-4;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct TrainOutcome {
  LinearModel model;
  // Full-data objective (weighted CE + l2_reg/2 * |W|^2) before training and
  // after every epoch.
  std::vector<double> objective_history;
};

/// Seeded mini-batch gradient descent from all-zero parameters. `labels`
/// index into `classes`. Throws DegenerateData when fewer than two classes
/// occur in `labels`, ShapeMismatch on inconsistent sizes.
TrainOutcome train(const Matrix& features, std::span<const std::size_t> labels, std::span<const double> weights,
                   std::vector<std::string> classes, const TrainConfig& config);

double training_objective(const LinearModel& model, const Matrix& features, std::span<const std::size_t> labels,
                          std::span<const double> weights, double l2_reg);

struct EvalReport {
  std::vector<std::string> classes;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;                // aligned with classes
  std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]

  bool operator==(const EvalReport&) const = default;
};

/// F1 of a class with an undefined precision or recall counts as 0.
EvalReport evaluate(const LinearModel& model, const Matrix& features, std::span<const std::size_t> labels);

struct ExperimentReport {
  EvalReport weighted;
  EvalReport unweighted;
  double delta_accuracy = 0.0;  // weighted - unweighted
  double delta_macro_f1 = 0.0;
};

/// Trains a weighted and an all-ones model with identical seeds and data
/// order, then evaluates both on the held-out set.
ExperimentReport run_experiment(const Matrix& train_features, std::span<const std::size_t> train_labels,
                                std::span<const double> train_weights, const Matrix& test_features,
                                std::span<const std::size_t> test_labels, const std::vector<std::string>& classes,
                                const TrainConfig& config);

/// Keyed, labelled feature vectors as stored in a features file.
struct FeatureSet {
  std::vector<std::string> keys;
  std::vector<std::string> labels;
  Matrix features;

  std::size_t size() const noexcept { return keys.size(); }
  FeatureSet slice(std::size_t begin, std::size_t end) const;
};

FeatureSet parse_features(std::string_view contents);
FeatureSet load_features(const std::filesystem::path& path);
std::string format_features(const FeatureSet& set);
void write_features(const std::filesystem::path& path, const FeatureSet& set);

/// Sorted distinct label strings.
std::vector<std::string> class_list(std::span<const std::string> labels);
std::vector<std::size_t> encode_labels(std::span<const std::string> labels, const std::vector<std::string>& classes);

std::string format_model(const LinearModel& model);
LinearModel parse_model(std::string_view contents);
void save_model(const std::filesystem::path& path, const LinearModel& model);
LinearModel load_model(const std::filesystem::path& path);

std::string format_eval_report(const EvalReport& report);
std::string format_experiment_report(const ExperimentReport& report);

}  // namespace uaweight
