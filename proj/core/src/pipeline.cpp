#include "uaweight/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include <json.hpp>

#include "uaweight/random.hpp"
#include "uaweight/text_io.hpp"

namespace uaweight {

using nlohmann::json;

void PipelineConfig::validate() const {
  image_quality.validate();
  relevance.validate();
  weighting.validate();
  train.validate();
}

namespace {

void reject_unknown(const json& section, std::string_view name, std::initializer_list<std::string_view> allowed) {
  if (!section.is_object()) fail(ErrorCode::InvalidConfig, "config section '" + std::string(name) + "' must be an object");
  for (const auto& [key, value] : section.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(ErrorCode::InvalidConfig, "unknown config key '" + std::string(name) + "." + key + "'");
    }
  }
}

template <typename T>
void read_into(const json& section, const char* key, T& target) {
  if (section.contains(key)) target = section.at(key).get<T>();
}

void read_unsigned(const json& section, const char* key, std::size_t& target) {
  if (!section.contains(key)) return;
  if (!section.at(key).is_number_unsigned()) {
    fail(ErrorCode::InvalidConfig, std::string("config key '") + key + "' must be a nonnegative integer");
  }
  target = section.at(key).get<std::size_t>();
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig config;
  try {
    reject_unknown(doc, "<root>", {"image_quality", "relevance", "weighting", "train"});

    if (doc.contains("image_quality")) {
      const auto& s = doc["image_quality"];
      reject_unknown(s, "image_quality", {"t_r", "t_text", "t_contrast", "t_sharp", "t_cc", "enabled_factors"});
      auto& c = config.image_quality;
      read_unsigned(s, "t_r", c.t_r);
      read_unsigned(s, "t_text", c.t_text);
      read_into(s, "t_contrast", c.t_contrast);
      read_into(s, "t_sharp", c.t_sharp);
      read_into(s, "t_cc", c.t_cc);
      if (s.contains("enabled_factors")) {
        c.enabled_factors.clear();
        for (const auto& name : s["enabled_factors"].get<std::vector<std::string>>()) {
          c.enabled_factors.insert(parse_quality_factor(name));
        }
      }
    }
    if (doc.contains("relevance")) {
      const auto& s = doc["relevance"];
      reject_unknown(s, "relevance", {"temperature", "mode", "negatives_per_sample", "rng_seed"});
      auto& c = config.relevance;
      read_into(s, "temperature", c.temperature);
      if (s.contains("mode")) c.mode = parse_relevance_mode(s["mode"].get<std::string>());
      read_unsigned(s, "negatives_per_sample", c.negatives_per_sample);
      read_into(s, "rng_seed", c.rng_seed);
    }
    if (doc.contains("weighting")) {
      const auto& s = doc["weighting"];
      reject_unknown(s, "weighting", {"floor_eps", "enabled_components"});
      auto& c = config.weighting;
      read_into(s, "floor_eps", c.floor_eps);
      if (s.contains("enabled_components")) {
        c.enabled_components.clear();
        for (const auto& name : s["enabled_components"].get<std::vector<std::string>>()) {
          c.enabled_components.insert(parse_weight_component(name));
        }
      }
    }
    if (doc.contains("train")) {
      const auto& s = doc["train"];
      reject_unknown(s, "train", {"learning_rate", "epochs", "batch_size", "l2_reg", "rng_seed"});
      auto& c = config.train;
      read_into(s, "learning_rate", c.learning_rate);
      read_unsigned(s, "epochs", c.epochs);
      read_unsigned(s, "batch_size", c.batch_size);
      read_into(s, "l2_reg", c.l2_reg);
      read_into(s, "rng_seed", c.rng_seed);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
  }
  config.validate();
  return config;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return parse_pipeline_config(read_file(path));
}

std::string format_pipeline_config(const PipelineConfig& config) {
  nlohmann::ordered_json doc;
  const auto& iq = config.image_quality;
  std::vector<std::string> factors;
  for (const auto f : iq.enabled_factors) factors.emplace_back(to_string(f));
  doc["image_quality"] = {{"t_r", iq.t_r},         {"t_text", iq.t_text}, {"t_contrast", iq.t_contrast},
                          {"t_sharp", iq.t_sharp}, {"t_cc", iq.t_cc},     {"enabled_factors", factors}};
  const auto& rel = config.relevance;
  doc["relevance"] = {{"temperature", rel.temperature},
                      {"mode", std::string(to_string(rel.mode))},
                      {"negatives_per_sample", rel.negatives_per_sample},
                      {"rng_seed", rel.rng_seed}};
  std::vector<std::string> components;
  for (const auto c : config.weighting.enabled_components) components.emplace_back(to_string(c));
  doc["weighting"] = {{"floor_eps", config.weighting.floor_eps}, {"enabled_components", components}};
  const auto& tr = config.train;
  doc["train"] = {{"learning_rate", tr.learning_rate},
                  {"epochs", tr.epochs},
                  {"batch_size", tr.batch_size},
                  {"l2_reg", tr.l2_reg},
                  {"rng_seed", tr.rng_seed}};
  return doc.dump(2) + "\n";
}

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& line : lines) out += "\n  " + line;
  return out;
}

}  // namespace

ValidationError::ValidationError(ErrorCode code, std::vector<std::string> diagnostics)
    : Error(code, std::to_string(diagnostics.size()) + " problem(s):" + join_lines(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

ImageSource directory_image_source(std::filesystem::path dir) {
  return [dir = std::move(dir)](const std::string& image_file) { return read_image(dir / image_file); };
}

namespace {

std::vector<double> widen(const std::vector<float>& v) { return {v.begin(), v.end()}; }

std::string row_label(std::size_t index, const Sample& sample) {
  // Manifest line numbers: the header is line 1.
  return "row " + std::to_string(index + 2) + " (id " + sample.id + ")";
}

void check_embeddings(const AssessInputs& in) {
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < in.corpus.size(); ++i) {
    const auto& s = in.corpus.samples()[i];
    if (!in.text_embeddings.find(s.id)) missing.push_back(row_label(i, s) + ": missing text embedding");
    if (!in.aspect_embeddings.find(s.id)) missing.push_back(row_label(i, s) + ": missing aspect embedding");
    if (!in.image_embeddings.find(s.image_file)) {
      missing.push_back(row_label(i, s) + ": missing image embedding for '" + s.image_file + "'");
    }
  }
  if (!missing.empty()) throw ValidationError(ErrorCode::MissingEmbedding, std::move(missing));

  if (in.corpus.size() == 0) return;
  std::vector<std::string> dims;
  if (in.text_embeddings.dim() != in.image_embeddings.dim()) {
    dims.push_back("text embedding dim " + std::to_string(in.text_embeddings.dim()) + " != image embedding dim " +
                   std::to_string(in.image_embeddings.dim()));
  }
  if (in.aspect_embeddings.dim() != in.image_embeddings.dim()) {
    dims.push_back("aspect embedding dim " + std::to_string(in.aspect_embeddings.dim()) +
                   " != image embedding dim " + std::to_string(in.image_embeddings.dim()));
  }
  if (!dims.empty()) throw ValidationError(ErrorCode::DimMismatch, std::move(dims));
}

std::vector<ImageQualityReport> score_images(const AssessInputs& in, const std::vector<std::string>& files,
                                             const std::vector<std::string>& first_user, const PipelineConfig& config,
                                             std::size_t jobs) {
  std::vector<ImageQualityReport> reports(files.size());
  std::vector<std::string> errors(files.size());
  std::vector<ErrorCode> codes(files.size(), ErrorCode::UndecodableImage);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      try {
        const auto decoded = luma_from_rgb(in.images(files[i]));
        reports[i] = image_quality(decoded, in.corpus.ocr_length(files[i]), in.corpus.l_max(), config.image_quality);
      } catch (const Error& e) {
        errors[i] = "image '" + files[i] + "' (id " + first_user[i] + "): " + e.what();
        codes[i] = e.code();
      }
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, files.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  // A missing file stays an I/O failure; the first failure decides the code.
  std::vector<std::string> failures;
  std::optional<ErrorCode> code;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (errors[i].empty()) continue;
    if (!code) code = codes[i];
    failures.push_back(std::move(errors[i]));
  }
  if (!failures.empty()) throw ValidationError(*code, std::move(failures));
  return reports;
}

}  // namespace

std::vector<ScoreRecord> assess(const AssessInputs& in, const PipelineConfig& config, std::size_t jobs) {
  config.validate();
  check_embeddings(in);
  const auto& samples = in.corpus.samples();
  const std::size_t n = samples.size();

  std::vector<std::string> files;
  std::vector<std::string> first_user;
  std::map<std::string, std::size_t> file_index;
  for (const auto& s : samples) {
    if (file_index.emplace(s.image_file, files.size()).second) {
      files.push_back(s.image_file);
      first_user.push_back(s.id);
    }
  }
  const auto quality = score_images(in, files, first_user, config, jobs);

  std::vector<std::size_t> group_starts;
  const std::size_t group = config.relevance.negatives_per_sample + 1;
  for (std::size_t s = 0; s < n; s += group) group_starts.push_back(s);
  if (group_starts.size() > 1 && n - group_starts.back() == 1) group_starts.pop_back();

  std::vector<ScoreRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& s = samples[i];
    const auto image = widen(*in.image_embeddings.find(s.image_file));
    const auto text = widen(*in.text_embeddings.find(s.id));
    const auto aspect = widen(*in.aspect_embeddings.find(s.id));

    std::vector<std::vector<double>> negative_texts;
    std::vector<std::vector<double>> negative_images;
    if (config.relevance.mode == RelevanceMode::contrastive) {
      const auto it = std::upper_bound(group_starts.begin(), group_starts.end(), i) - 1;
      const std::size_t begin = *it;
      const std::size_t end = (it + 1 == group_starts.end()) ? n : *(it + 1);
      const std::size_t size = end - begin;
      const std::size_t k = std::min(config.relevance.negatives_per_sample, size > 0 ? size - 1 : 0);
      Rng rng(config.relevance.rng_seed ^ static_cast<std::uint64_t>(i));
      try {
        for (const auto j : sample_negatives(size, i - begin, k, rng)) {
          negative_texts.push_back(widen(*in.text_embeddings.find(samples[begin + j].id)));
        }
        for (const auto j : sample_negatives(size, i - begin, k, rng)) {
          negative_images.push_back(widen(*in.image_embeddings.find(samples[begin + j].image_file)));
        }
      } catch (const Error& e) {
        throw ValidationError(e.code(), {row_label(i, s) + ": " + e.what()});
      }
    }

    ScoreRecord record;
    record.id = s.id;
    const auto& q = quality[file_index.at(s.image_file)];
    record.image_scores = q.per_factor;
    try {
      const double w_it = coarse_relevance(image, text, negative_texts, config.relevance);
      const double w_ai = fine_relevance(aspect, image, negative_images, config.relevance);
      const auto w = sample_weight(q.w_image, w_it, w_ai, config.weighting);
      record.w_image = w.w_image;
      record.w_it = w.w_it;
      record.w_ai = w.w_ai;
      record.raw_mean = w.raw_mean;
      record.weight = w.weight;
    } catch (const Error& e) {
      throw ValidationError(e.code(), {row_label(i, s) + ": " + e.what()});
    }
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace uaweight
