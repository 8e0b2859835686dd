#include "uaweight/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "uaweight/error.hpp"
#include "uaweight/random.hpp"
#include "uaweight/text_io.hpp"
#include "uaweight/weighting.hpp"

namespace uaweight {

using nlohmann::json;

void LinearModel::logits_into(std::span<const double> x, std::span<double> out) const {
  for (std::size_t k = 0; k < num_classes(); ++k) {
    const auto w = weights.row(k);
    double z = bias[k];
    for (std::size_t d = 0; d < w.size(); ++d) z += w[d] * x[d];
    out[k] = z;
  }
}

std::size_t LinearModel::predict(std::span<const double> x) const {
  std::vector<double> z(num_classes());
  logits_into(x, z);
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail(ErrorCode::InvalidConfig, "learning_rate must be > 0");
  }
  if (batch_size == 0) fail(ErrorCode::InvalidConfig, "batch_size must be positive");
  if (!(l2_reg >= 0.0)) fail(ErrorCode::InvalidConfig, "l2_reg must be >= 0");
}

namespace {

Matrix logits_of(const LinearModel& model, const Matrix& features) {
  Matrix logits(features.rows(), model.num_classes());
  for (std::size_t i = 0; i < features.rows(); ++i) model.logits_into(features.row(i), logits.row(i));
  return logits;
}

double squared_norm(const Matrix& m) {
  double s = 0.0;
  for (const double v : m.data()) s += v * v;
  return s;
}

}  // namespace

double training_objective(const LinearModel& model, const Matrix& features, std::span<const std::size_t> labels,
                          std::span<const double> weights, double l2_reg) {
  return weighted_ce_loss(logits_of(model, features), labels, weights) + 0.5 * l2_reg * squared_norm(model.weights);
}

TrainOutcome train(const Matrix& features, std::span<const std::size_t> labels, std::span<const double> weights,
                   std::vector<std::string> classes, const TrainConfig& config) {
  config.validate();
  const std::size_t n = features.rows();
  const std::size_t dim = features.cols();
  const std::size_t k = classes.size();
  if (k < 2) fail(ErrorCode::ShapeMismatch, "need at least two classes");
  if (labels.size() != n || weights.size() != n) {
    fail(ErrorCode::ShapeMismatch, std::to_string(n) + " feature rows but " + std::to_string(labels.size()) +
                                       " labels and " + std::to_string(weights.size()) + " weights");
  }
  if (n < k) fail(ErrorCode::DegenerateData, "fewer samples than classes");
  for (const auto label : labels) {
    if (label >= k) fail(ErrorCode::ShapeMismatch, "label index out of range");
  }
  for (const double w : weights) {
    if (!std::isfinite(w)) fail(ErrorCode::NonFiniteValue, "sample weights must be finite");
    if (w < 0.0) fail(ErrorCode::NegativeWeight, "sample weights must be >= 0");
  }
  if (std::set<std::size_t>(labels.begin(), labels.end()).size() < 2) {
    fail(ErrorCode::DegenerateData, "training labels contain a single class");
  }

  TrainOutcome outcome;
  LinearModel& model = outcome.model;
  model.classes = std::move(classes);
  model.weights = Matrix(k, dim);
  model.bias.assign(k, 0.0);
  outcome.objective_history.push_back(training_objective(model, features, labels, weights, config.l2_reg));

  Rng rng(config.rng_seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  const std::size_t cap = std::min(config.batch_size, n);
  std::vector<std::size_t> batch_labels(cap);
  std::vector<double> batch_weights(cap);
  Matrix grad_w(k, dim);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < n; start += cap) {
      const std::size_t b = std::min(cap, n - start);
      Matrix logits(b, k);
      batch_labels.resize(b);
      batch_weights.resize(b);
      for (std::size_t r = 0; r < b; ++r) {
        const std::size_t idx = order[start + r];
        model.logits_into(features.row(idx), logits.row(r));
        batch_labels[r] = labels[idx];
        batch_weights[r] = weights[idx];
      }
      const Matrix g = weighted_ce_grad(logits, batch_labels, batch_weights);

      for (std::size_t c = 0; c < k; ++c) {
        auto gw = grad_w.row(c);
        const auto w = model.weights.row(c);
        for (std::size_t d = 0; d < dim; ++d) gw[d] = config.l2_reg * w[d];
      }
      std::vector<double> grad_b(k, 0.0);
      for (std::size_t r = 0; r < b; ++r) {
        const auto x = features.row(order[start + r]);
        for (std::size_t c = 0; c < k; ++c) {
          const double gc = g(r, c);
          grad_b[c] += gc;
          auto gw = grad_w.row(c);
          for (std::size_t d = 0; d < dim; ++d) gw[d] += gc * x[d];
        }
      }
      for (std::size_t c = 0; c < k; ++c) {
        auto w = model.weights.row(c);
        const auto gw = grad_w.row(c);
        for (std::size_t d = 0; d < dim; ++d) w[d] -= config.learning_rate * gw[d];
        model.bias[c] -= config.learning_rate * grad_b[c];
      }
    }
    outcome.objective_history.push_back(training_objective(model, features, labels, weights, config.l2_reg));
  }
  return outcome;
}

EvalReport evaluate(const LinearModel& model, const Matrix& features, std::span<const std::size_t> labels) {
  if (labels.size() != features.rows()) fail(ErrorCode::ShapeMismatch, "features and labels differ in length");
  if (features.rows() > 0 && features.cols() != model.dim()) {
    fail(ErrorCode::DimMismatch, "feature dim " + std::to_string(features.cols()) + " but model dim " +
                                     std::to_string(model.dim()));
  }
  const std::size_t k = model.num_classes();
  EvalReport report;
  report.classes = model.classes;
  report.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    if (labels[i] >= k) fail(ErrorCode::ShapeMismatch, "label index out of range");
    const std::size_t predicted = model.predict(features.row(i));
    ++report.confusion[labels[i]][predicted];
    if (predicted == labels[i]) ++correct;
  }
  report.accuracy = features.rows() == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(features.rows());

  report.per_class_f1.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t predicted_c = 0;
    std::size_t actual_c = 0;
    for (std::size_t j = 0; j < k; ++j) {
      predicted_c += report.confusion[j][c];
      actual_c += report.confusion[c][j];
    }
    const std::size_t tp = report.confusion[c][c];
    if (predicted_c == 0 || actual_c == 0 || tp == 0) continue;
    const double precision = static_cast<double>(tp) / static_cast<double>(predicted_c);
    const double recall = static_cast<double>(tp) / static_cast<double>(actual_c);
    report.per_class_f1[c] = 2.0 * precision * recall / (precision + recall);
  }
  double sum = 0.0;
  for (const double f : report.per_class_f1) sum += f;
  report.macro_f1 = k == 0 ? 0.0 : sum / static_cast<double>(k);
  return report;
}

ExperimentReport run_experiment(const Matrix& train_features, std::span<const std::size_t> train_labels,
                                std::span<const double> train_weights, const Matrix& test_features,
                                std::span<const std::size_t> test_labels, const std::vector<std::string>& classes,
                                const TrainConfig& config) {
  const std::vector<double> ones(train_labels.size(), 1.0);
  const auto weighted = train(train_features, train_labels, train_weights, classes, config);
  const auto unweighted = train(train_features, train_labels, ones, classes, config);

  ExperimentReport report;
  report.weighted = evaluate(weighted.model, test_features, test_labels);
  report.unweighted = evaluate(unweighted.model, test_features, test_labels);
  report.delta_accuracy = report.weighted.accuracy - report.unweighted.accuracy;
  report.delta_macro_f1 = report.weighted.macro_f1 - report.unweighted.macro_f1;
  return report;
}

FeatureSet FeatureSet::slice(std::size_t begin, std::size_t end) const {
  end = std::min(end, size());
  begin = std::min(begin, end);
  FeatureSet out;
  out.keys.assign(keys.begin() + static_cast<std::ptrdiff_t>(begin), keys.begin() + static_cast<std::ptrdiff_t>(end));
  out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin),
                    labels.begin() + static_cast<std::ptrdiff_t>(end));
  out.features = Matrix(end - begin, features.cols());
  for (std::size_t i = begin; i < end; ++i) {
    std::copy(features.row(i).begin(), features.row(i).end(), out.features.row(i - begin).begin());
  }
  return out;
}

FeatureSet parse_features(std::string_view contents) {
  std::vector<std::string> keys;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    const std::string where = "features line " + std::to_string(line_no) + ": ";
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::MalformedSidecar, where + e.what());
    }
    if (!record.is_object() || !record.contains("key") || !record.contains("vec") || !record.contains("label") ||
        !record["key"].is_string() || !record["vec"].is_array() || !record["label"].is_string()) {
      fail(ErrorCode::MalformedSidecar, where + "expected {key, vec, label}");
    }
    std::vector<double> vec;
    for (const auto& v : record["vec"]) {
      if (!v.is_number()) fail(ErrorCode::MalformedSidecar, where + "non-numeric feature");
      // Features are single precision on disk; round through float so a file
      // reload reproduces in-memory values exactly.
      const double d = static_cast<double>(static_cast<float>(v.get<double>()));
      if (!std::isfinite(d)) fail(ErrorCode::NonFiniteValue, where + "non-finite feature");
      vec.push_back(d);
    }
    if (!rows.empty() && vec.size() != rows.front().size()) {
      fail(ErrorCode::DimMismatch, where + "feature dim " + std::to_string(vec.size()) + " differs from " +
                                       std::to_string(rows.front().size()));
    }
    auto key = record["key"].get<std::string>();
    if (!seen.insert(key).second) fail(ErrorCode::DuplicateId, where + "duplicate key '" + key + "'");
    keys.push_back(std::move(key));
    labels.push_back(record["label"].get<std::string>());
    rows.push_back(std::move(vec));
  }
  FeatureSet set;
  set.keys = std::move(keys);
  set.labels = std::move(labels);
  set.features = Matrix(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), set.features.row(i).begin());
  return set;
}

FeatureSet load_features(const std::filesystem::path& path) { return parse_features(read_file(path)); }

std::string format_features(const FeatureSet& set) {
  std::string out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    out += "{\"key\":" + json_quote(set.keys[i]) + ",\"vec\":[";
    const auto row = set.features.row(i);
    for (std::size_t d = 0; d < row.size(); ++d) {
      if (d) out.push_back(',');
      out += format_g9(static_cast<float>(row[d]));
    }
    out += "],\"label\":" + json_quote(set.labels[i]) + "}\n";
  }
  return out;
}

void write_features(const std::filesystem::path& path, const FeatureSet& set) {
  write_file(path, format_features(set));
}

std::vector<std::string> class_list(std::span<const std::string> labels) {
  const std::set<std::string> distinct(labels.begin(), labels.end());
  return {distinct.begin(), distinct.end()};
}

std::vector<std::size_t> encode_labels(std::span<const std::string> labels, const std::vector<std::string>& classes) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < classes.size(); ++i) index.emplace(classes[i], i);
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& label : labels) {
    const auto it = index.find(label);
    if (it == index.end()) fail(ErrorCode::UnknownLabel, "label '" + label + "' is not a model class");
    out.push_back(it->second);
  }
  return out;
}

std::string format_model(const LinearModel& model) {
  std::string out = "{\"format\":\"uaweight-linear-model\",\"classes\":[";
  for (std::size_t k = 0; k < model.num_classes(); ++k) {
    if (k) out.push_back(',');
    out += json_quote(model.classes[k]);
  }
  out += "],\"dim\":" + std::to_string(model.dim()) + ",\"bias\":[";
  for (std::size_t k = 0; k < model.bias.size(); ++k) {
    if (k) out.push_back(',');
    out += format_g17(model.bias[k]);
  }
  out += "],\"weights\":[";
  for (std::size_t k = 0; k < model.weights.rows(); ++k) {
    out += k ? ",[" : "[";
    const auto row = model.weights.row(k);
    for (std::size_t d = 0; d < row.size(); ++d) {
      if (d) out.push_back(',');
      out += format_g17(row[d]);
    }
    out.push_back(']');
  }
  out += "]}\n";
  return out;
}

LinearModel parse_model(std::string_view contents) {
  json doc;
  try {
    doc = json::parse(contents);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::MalformedSidecar, std::string("model file: ") + e.what());
  }
  try {
    LinearModel model;
    model.classes = doc.at("classes").get<std::vector<std::string>>();
    const auto dim = doc.at("dim").get<std::size_t>();
    model.bias = doc.at("bias").get<std::vector<double>>();
    const auto rows = doc.at("weights").get<std::vector<std::vector<double>>>();
    const std::size_t k = model.classes.size();
    if (k < 2 || model.bias.size() != k || rows.size() != k) {
      fail(ErrorCode::ShapeMismatch, "model file: class, bias and weight counts disagree");
    }
    model.weights = Matrix(k, dim);
    for (std::size_t c = 0; c < k; ++c) {
      if (rows[c].size() != dim) fail(ErrorCode::DimMismatch, "model file: weight row has the wrong dim");
      std::copy(rows[c].begin(), rows[c].end(), model.weights.row(c).begin());
    }
    return model;
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedSidecar, std::string("model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const LinearModel& model) {
  write_file(path, format_model(model));
}

LinearModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

std::string format_eval_report(const EvalReport& report) {
  std::string out = "{\"accuracy\":" + format_g9(report.accuracy) + ",\"macro_f1\":" + format_g9(report.macro_f1) +
                    ",\"per_class_f1\":{";
  for (std::size_t k = 0; k < report.classes.size(); ++k) {
    if (k) out.push_back(',');
    out += json_quote(report.classes[k]) + ":" + format_g9(report.per_class_f1[k]);
  }
  out += "},\"confusion\":[";
  for (std::size_t r = 0; r < report.confusion.size(); ++r) {
    out += r ? ",[" : "[";
    for (std::size_t c = 0; c < report.confusion[r].size(); ++c) {
      if (c) out.push_back(',');
      out += std::to_string(report.confusion[r][c]);
    }
    out.push_back(']');
  }
  out += "]}";
  return out;
}

std::string format_experiment_report(const ExperimentReport& report) {
  return "{\"weighted\":" + format_eval_report(report.weighted) +
         ",\"unweighted\":" + format_eval_report(report.unweighted) +
         ",\"delta_accuracy\":" + format_g9(report.delta_accuracy) +
         ",\"delta_macro_f1\":" + format_g9(report.delta_macro_f1) + "}\n";
}

}  // namespace uaweight
