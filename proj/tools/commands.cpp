#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "uaweight/corpus.hpp"
#include "uaweight/error.hpp"
#include "uaweight/pipeline.hpp"
#include "uaweight/synth.hpp"
#include "uaweight/text_io.hpp"
#include "uaweight/trainer.hpp"

namespace uaweight::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

struct AssessOptions {
  std::string manifest;
  std::string images;
  std::string ocr;
  std::vector<std::string> embeddings;
  std::string config;
  std::string out;
  std::size_t jobs = 1;
  std::optional<std::string> mode;
  std::optional<double> temperature;
  std::optional<std::size_t> negatives;
  std::optional<std::uint64_t> relevance_seed;
  std::optional<double> floor_eps;
  std::vector<std::string> factors;
  std::vector<std::string> components;
};

struct StatsOptions {
  std::string report;
  std::size_t bins = 10;
};

struct TrainOptions {
  std::string features;
  std::string weights;
  std::size_t holdout = 0;
  std::string config;
  std::optional<double> learning_rate;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> l2_reg;
  std::optional<std::uint64_t> seed;
  std::string model;
  std::string report;
  bool compare = false;
};

struct EvalOptions {
  std::string model;
  std::string features;
  std::string out;
};

struct SynthOptions {
  std::string out;
  SynthSpec spec;
  std::vector<std::string> degradations;
};

PipelineConfig base_config(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_pipeline_config(path);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
}

int cmd_assess(const AssessOptions& opt, std::ostream& out) {
  PipelineConfig config = base_config(opt.config);
  if (opt.mode) config.relevance.mode = parse_relevance_mode(*opt.mode);
  if (opt.temperature) config.relevance.temperature = *opt.temperature;
  if (opt.negatives) config.relevance.negatives_per_sample = *opt.negatives;
  if (opt.relevance_seed) config.relevance.rng_seed = *opt.relevance_seed;
  if (opt.floor_eps) config.weighting.floor_eps = *opt.floor_eps;
  if (!opt.factors.empty()) {
    config.image_quality.enabled_factors.clear();
    for (const auto& f : opt.factors) config.image_quality.enabled_factors.insert(parse_quality_factor(f));
  }
  if (!opt.components.empty()) {
    config.weighting.enabled_components.clear();
    for (const auto& c : opt.components) config.weighting.enabled_components.insert(parse_weight_component(c));
  }
  config.validate();

  auto samples = load_manifest(opt.manifest);
  const Corpus corpus = opt.ocr.empty() ? Corpus(std::move(samples), {}) : attach_ocr(std::move(samples), opt.ocr);

  std::map<EmbeddingKind, EmbeddingTable> tables;
  for (const auto& path : opt.embeddings) {
    const auto kind = sniff_embedding_kind(read_file(path));
    if (!kind) fail(ErrorCode::MalformedSidecar, path + ": no embedding records");
    if (tables.contains(*kind)) {
      fail(ErrorCode::WrongKind, path + ": a second '" + std::string(to_string(*kind)) + "' sidecar was given");
    }
    tables.emplace(*kind, load_embeddings(path, *kind));
  }
  for (const auto kind : {EmbeddingKind::image, EmbeddingKind::text, EmbeddingKind::aspect}) {
    if (!tables.contains(kind)) {
      fail(ErrorCode::MissingEmbedding, "no '" + std::string(to_string(kind)) + "' embedding sidecar given");
    }
  }

  const fs::path image_dir = opt.images.empty() ? fs::path(opt.manifest).parent_path() : fs::path(opt.images);
  const AssessInputs inputs{corpus, tables.at(EmbeddingKind::image), tables.at(EmbeddingKind::text),
                            tables.at(EmbeddingKind::aspect), directory_image_source(image_dir)};
  const auto records = assess(inputs, config, opt.jobs);

  const fs::path dir(opt.out);
  ensure_directory(dir);
  write_file(dir / "scores.jsonl", format_score_jsonl(records));
  write_file(dir / "scores.csv", format_score_csv(records));
  write_file(dir / "weights.csv", format_weights_csv(records));

  std::string meta = "{\n  \"tool\": \"uaweight\",\n  \"version\": \"" + std::string(kVersion) +
                     "\",\n  \"created_utc\": \"" + utc_timestamp() + "\",\n  \"manifest\": " +
                     json_quote(opt.manifest) + ",\n  \"images\": " + json_quote(image_dir.string()) +
                     ",\n  \"ocr\": " + json_quote(opt.ocr) + ",\n  \"samples\": " + std::to_string(records.size()) +
                     ",\n  \"l_max\": " + std::to_string(corpus.l_max()) + ",\n  \"config\": ";
  std::string cfg = format_pipeline_config(config);
  while (!cfg.empty() && cfg.back() == '\n') cfg.pop_back();
  meta += cfg + "\n}\n";
  write_file(dir / "run.json", meta);

  out << "assessed " << records.size() << " samples; reports written to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_stats(const StatsOptions& opt, std::ostream& out) {
  const std::string contents = read_file(opt.report);
  std::vector<double> weights;
  if (fs::path(opt.report).extension() == ".csv") {
    for (const auto& [id, w] : parse_weights_csv(contents)) weights.push_back(w);
  } else {
    for (const auto& r : parse_score_jsonl(contents)) weights.push_back(r.weight);
  }
  out << format_weight_stats(weight_stats(weights, opt.bins));
  return kExitOk;
}

std::vector<double> join_weights(const FeatureSet& set, const std::string& path) {
  if (path.empty()) return std::vector<double>(set.size(), 1.0);
  std::map<std::string, double> by_id;
  for (const auto& [id, w] : parse_weights_csv(read_file(path))) by_id[id] = w;
  std::vector<double> weights;
  std::vector<std::string> missing;
  for (const auto& key : set.keys) {
    const auto it = by_id.find(key);
    if (it == by_id.end()) {
      missing.push_back("no weight for training key '" + key + "'");
    } else {
      weights.push_back(it->second);
    }
  }
  if (!missing.empty()) throw ValidationError(ErrorCode::ShapeMismatch, std::move(missing));
  return weights;
}

int cmd_train(const TrainOptions& opt, std::ostream& out) {
  PipelineConfig config = base_config(opt.config);
  auto& tc = config.train;
  if (opt.learning_rate) tc.learning_rate = *opt.learning_rate;
  if (opt.epochs) tc.epochs = *opt.epochs;
  if (opt.batch_size) tc.batch_size = *opt.batch_size;
  if (opt.l2_reg) tc.l2_reg = *opt.l2_reg;
  if (opt.seed) tc.rng_seed = *opt.seed;
  tc.validate();

  const FeatureSet all = load_features(opt.features);
  if (opt.holdout >= all.size()) {
    fail(ErrorCode::ShapeMismatch, "holdout of " + std::to_string(opt.holdout) + " leaves no training data");
  }
  const std::size_t n_train = all.size() - opt.holdout;
  const FeatureSet train_set = all.slice(0, n_train);
  const FeatureSet test_set = opt.holdout > 0 ? all.slice(n_train, all.size()) : train_set;
  const auto classes = class_list(all.labels);
  const auto train_labels = encode_labels(train_set.labels, classes);
  const auto test_labels = encode_labels(test_set.labels, classes);
  const auto weights = join_weights(train_set, opt.weights);

  const auto outcome = train(train_set.features, train_labels, weights, classes, tc);
  save_model(opt.model, outcome.model);

  std::string report_text;
  if (opt.compare) {
    const auto experiment =
        run_experiment(train_set.features, train_labels, weights, test_set.features, test_labels, classes, tc);
    report_text = format_experiment_report(experiment);
    out << "weighted   accuracy " << format_g9(experiment.weighted.accuracy) << "  macro_f1 "
        << format_g9(experiment.weighted.macro_f1) << "\n";
    out << "unweighted accuracy " << format_g9(experiment.unweighted.accuracy) << "  macro_f1 "
        << format_g9(experiment.unweighted.macro_f1) << "\n";
    out << "delta      accuracy " << format_g9(experiment.delta_accuracy) << "  macro_f1 "
        << format_g9(experiment.delta_macro_f1) << "\n";
  } else {
    const auto eval = evaluate(outcome.model, test_set.features, test_labels);
    report_text = format_eval_report(eval) + "\n";
    out << (opt.weights.empty() ? "unweighted" : "weighted") << " model: "
        << (opt.holdout > 0 ? "holdout" : "training") << " accuracy " << format_g9(eval.accuracy) << "  macro_f1 "
        << format_g9(eval.macro_f1) << "\n";
  }
  out << "final objective " << format_g9(outcome.objective_history.back()) << " (initial "
      << format_g9(outcome.objective_history.front()) << ")\n";
  if (!opt.report.empty()) write_file(opt.report, report_text);
  return kExitOk;
}

int cmd_eval(const EvalOptions& opt, std::ostream& out) {
  const auto model = load_model(opt.model);
  const auto set = load_features(opt.features);
  const auto report = evaluate(model, set.features, encode_labels(set.labels, model.classes));
  out << "accuracy: " << format_g9(report.accuracy) << "\n";
  out << "macro_f1: " << format_g9(report.macro_f1) << "\n";
  for (std::size_t k = 0; k < report.classes.size(); ++k) {
    out << "f1[" << report.classes[k] << "]: " << format_g9(report.per_class_f1[k]) << "\n";
  }
  if (!opt.out.empty()) write_file(opt.out, format_eval_report(report) + "\n");
  return kExitOk;
}

int cmd_synth(SynthOptions opt, std::ostream& out) {
  if (!opt.degradations.empty()) {
    opt.spec.degradations.clear();
    for (const auto& d : opt.degradations) {
      if (d != "none") opt.spec.degradations.push_back(parse_degradation(d));
    }
  }
  const auto corpus = gen_corpus(opt.spec, opt.out);
  std::size_t lowq = 0;
  for (const bool b : corpus.low_quality) lowq += b ? 1 : 0;
  out << "generated " << corpus.corpus.size() << " samples (" << lowq << " low-quality) in " << opt.out << "\n";
  return kExitOk;
}

int report_error(const Error& e, std::ostream& err) {
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
    err << "error: " << to_string(v->code()) << "\n";
    for (const auto& d : v->diagnostics()) err << "  " << d << "\n";
  } else {
    err << "error: " << e.what() << "\n";
  }
  return e.code() == ErrorCode::IoFailure ? kExitIo : kExitValidation;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Data-uncertainty scoring and sample reweighting for multimodal aspect-sentiment corpora", "uaweight"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  AssessOptions assess_opt;
  auto* assess_cmd = app.add_subcommand("assess", "Score image quality and relevance, emit per-sample weights");
  assess_cmd->add_option("--manifest", assess_opt.manifest, "Manifest TSV")->required();
  assess_cmd->add_option("--images", assess_opt.images, "Image directory (default: manifest directory)");
  assess_cmd->add_option("--ocr", assess_opt.ocr, "OCR sidecar JSON (image file -> recognized text)");
  assess_cmd->add_option("--embeddings", assess_opt.embeddings, "Embedding sidecars (image, text and aspect)")
      ->required()
      ->expected(1, 3);
  assess_cmd->add_option("--config", assess_opt.config, "Pipeline config JSON");
  assess_cmd->add_option("--out", assess_opt.out, "Output directory")->required();
  assess_cmd->add_option("--jobs", assess_opt.jobs, "Worker threads for image scoring");
  assess_cmd->add_option("--mode", assess_opt.mode, "Relevance mode: raw or contrastive");
  assess_cmd->add_option("--temperature", assess_opt.temperature, "Relevance temperature t (scale e^t)");
  assess_cmd->add_option("--negatives", assess_opt.negatives, "In-batch negatives per sample");
  assess_cmd->add_option("--relevance-seed", assess_opt.relevance_seed, "Seed for negative sampling");
  assess_cmd->add_option("--floor", assess_opt.floor_eps, "Minimum sample weight");
  assess_cmd->add_option("--factors", assess_opt.factors, "Enabled image quality factors");
  assess_cmd->add_option("--components", assess_opt.components, "Enabled weight components (image, coarse, fine)");

  StatsOptions stats_opt;
  auto* stats_cmd = app.add_subcommand("stats", "Summarize the weight distribution of a report");
  stats_cmd->add_option("--report", stats_opt.report, "scores.jsonl or weights.csv")->required();
  stats_cmd->add_option("--bins", stats_opt.bins, "Histogram bins")->check(CLI::PositiveNumber);

  TrainOptions train_opt;
  auto* train_cmd = app.add_subcommand("train", "Train the reference classifier with optional sample weights");
  train_cmd->add_option("--features", train_opt.features, "Features JSONL")->required();
  train_cmd->add_option("--weights", train_opt.weights, "Weights CSV (omit for an unweighted baseline)");
  train_cmd->add_option("--holdout", train_opt.holdout, "Trailing feature records held out for evaluation");
  train_cmd->add_option("--config", train_opt.config, "Pipeline config JSON (train section is used)");
  train_cmd->add_option("--lr", train_opt.learning_rate, "Learning rate");
  train_cmd->add_option("--epochs", train_opt.epochs, "Epochs");
  train_cmd->add_option("--batch-size", train_opt.batch_size, "Mini-batch size");
  train_cmd->add_option("--l2", train_opt.l2_reg, "L2 regularization strength");
  train_cmd->add_option("--seed", train_opt.seed, "Shuffle seed");
  train_cmd->add_option("--model", train_opt.model, "Model output path")->required();
  train_cmd->add_option("--report", train_opt.report, "Evaluation report output path (JSON)");
  train_cmd->add_flag("--compare", train_opt.compare, "Also train an unweighted baseline and report deltas");

  EvalOptions eval_opt;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model on a features file");
  eval_cmd->add_option("--model", eval_opt.model, "Model file")->required();
  eval_cmd->add_option("--features", eval_opt.features, "Features JSONL")->required();
  eval_cmd->add_option("--out", eval_opt.out, "Evaluation report output path (JSON)");

  SynthOptions synth_opt;
  auto& spec = synth_opt.spec;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with planted low-quality samples");
  synth_cmd->add_option("--out", synth_opt.out, "Output directory")->required();
  synth_cmd->add_option("--n", spec.n_samples, "Number of samples");
  synth_cmd->add_option("--dim", spec.feature_dim, "Classifier feature dimension");
  synth_cmd->add_option("--classes", spec.n_classes, "Number of classes (2 or 3)");
  synth_cmd->add_option("--lowq", spec.lowq_fraction, "Fraction of low-quality samples");
  synth_cmd->add_option("--noise", spec.label_noise_p, "Label flip probability for low-quality samples");
  synth_cmd->add_option("--degrade", synth_opt.degradations,
                        "Degradations as kind:magnitude (gaussian_blur, downscale, brightness_shift, ocr_inject), "
                        "or 'none'");
  synth_cmd->add_option("--seed", spec.rng_seed, "Generator seed");
  synth_cmd->add_option("--width", spec.image_width, "Image width");
  synth_cmd->add_option("--height", spec.image_height, "Image height");
  synth_cmd->add_option("--embedding-dim", spec.embedding_dim, "Embedding dimension");
  synth_cmd->add_option("--separation", spec.class_separation, "Class centroid distance from the origin");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*assess_cmd) return cmd_assess(assess_opt, out);
    if (*stats_cmd) return cmd_stats(stats_opt, out);
    if (*train_cmd) return cmd_train(train_opt, out);
    if (*eval_cmd) return cmd_eval(eval_opt, out);
    if (*synth_cmd) return cmd_synth(synth_opt, out);
  } catch (const Error& e) {
    return report_error(e, err);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}

}  // namespace uaweight::cli
