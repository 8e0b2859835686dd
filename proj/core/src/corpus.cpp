#include "uaweight/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "uaweight/error.hpp"
#include "uaweight/text_io.hpp"

namespace uaweight {

using nlohmann::json;

std::string_view to_string(Label label) noexcept {
  switch (label) {
    case Label::negative: return "negative";
    case Label::neutral: return "neutral";
    case Label::positive: return "positive";
  }
  return "neutral";
}

Label parse_label(std::string_view text) {
  if (text == "negative") return Label::negative;
  if (text == "neutral") return Label::neutral;
  if (text == "positive") return Label::positive;
  fail(ErrorCode::UnknownLabel, "unknown label '" + std::string(text) + "'");
}

namespace {

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::string row_prefix(std::size_t row) { return "row " + std::to_string(row) + ": "; }

}  // namespace

std::vector<Sample> parse_manifest(std::string_view contents) {
  if (contents.starts_with("\xEF\xBB\xBF")) contents.remove_prefix(3);

  std::vector<Sample> samples;
  std::set<std::string> seen;
  std::size_t row = 0;
  bool header_seen = false;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    const std::string_view line = strip_cr(contents.substr(start, end - start));
    start = end + 1;
    ++row;

    if (!header_seen) {
      if (line != kManifestHeader) {
        fail(ErrorCode::MissingColumn,
             "header must be 'id<TAB>image<TAB>text<TAB>aspect<TAB>label', got '" +
                 std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;

    auto fields = split(line, '\t');
    if (fields.size() != 5) {
      fail(ErrorCode::MissingColumn,
           row_prefix(row) + "expected 5 tab-separated fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t i = 0; i < 4; ++i) {
      if (fields[i].empty()) fail(ErrorCode::MissingColumn, row_prefix(row) + "empty field");
    }

    Sample sample;
    sample.id = std::move(fields[0]);
    sample.image_file = std::move(fields[1]);
    sample.text = std::move(fields[2]);
    sample.aspect = std::move(fields[3]);
    try {
      sample.label = parse_label(fields[4]);
    } catch (const Error& e) {
      fail(ErrorCode::UnknownLabel, row_prefix(row) + "unknown label '" + fields[4] + "'");
    }
    if (sample.text.find(sample.aspect) == std::string::npos) {
      fail(ErrorCode::AspectNotInText,
           row_prefix(row) + "aspect '" + sample.aspect + "' does not occur in text");
    }
    if (!seen.insert(sample.id).second) {
      fail(ErrorCode::DuplicateId, row_prefix(row) + "duplicate id '" + sample.id + "'");
    }
    samples.push_back(std::move(sample));
  }
  if (!header_seen) fail(ErrorCode::MissingColumn, "manifest is empty (no header)");
  return samples;
}

std::vector<Sample> load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path));
}

std::string format_manifest(std::span<const Sample> samples) {
  std::string out(kManifestHeader);
  out.push_back('\n');
  for (const auto& s : samples) {
    for (const std::string* field : {&s.id, &s.image_file, &s.text, &s.aspect}) {
      if (field->find_first_of("\t\n\r") != std::string::npos) {
        fail(ErrorCode::MissingColumn, "sample '" + s.id + "' has a field containing a tab or newline");
      }
    }
    out += s.id + '\t' + s.image_file + '\t' + s.text + '\t' + s.aspect + '\t';
    out += to_string(s.label);
    out.push_back('\n');
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, std::span<const Sample> samples) {
  write_file(path, format_manifest(samples));
}

Corpus::Corpus(std::vector<Sample> samples, std::map<std::string, std::string> ocr_texts)
    : samples_(std::move(samples)) {
  for (const auto& s : samples_) {
    const auto it = ocr_texts.find(s.image_file);
    std::size_t length = 0;
    if (it != ocr_texts.end()) {
      length = utf8_length(it->second);
      ocr_texts_.emplace(s.image_file, it->second);
    }
    ocr_lengths_[s.image_file] = length;
    l_max_ = std::max(l_max_, length);
  }
}

std::size_t Corpus::ocr_length(const std::string& image_file) const {
  const auto it = ocr_lengths_.find(image_file);
  return it == ocr_lengths_.end() ? 0 : it->second;
}

std::map<std::string, std::string> parse_ocr_sidecar(std::string_view contents) {
  json doc;
  try {
    doc = json::parse(contents);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::MalformedSidecar, std::string("OCR sidecar is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::MalformedSidecar, "OCR sidecar must be a JSON object");
  std::map<std::string, std::string> texts;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_string()) {
      fail(ErrorCode::MalformedSidecar, "OCR entry for '" + key + "' is not a string");
    }
    texts.emplace(key, value.get<std::string>());
  }
  return texts;
}

std::string format_ocr_sidecar(const std::map<std::string, std::string>& ocr_texts) {
  std::string out = "{";
  bool first = true;
  for (const auto& [file, text] : ocr_texts) {
    out += first ? "\n  " : ",\n  ";
    out += json_quote(file) + ": " + json_quote(text);
    first = false;
  }
  out += first ? "}\n" : "\n}\n";
  return out;
}

Corpus attach_ocr(std::vector<Sample> samples, const std::filesystem::path& ocr_sidecar) {
  return Corpus(std::move(samples), parse_ocr_sidecar(read_file(ocr_sidecar)));
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& manifest,
                 const std::filesystem::path& ocr_sidecar) {
  write_manifest(manifest, corpus.samples());
  write_file(ocr_sidecar, format_ocr_sidecar(corpus.ocr_texts()));
}

std::string_view to_string(EmbeddingKind kind) noexcept {
  switch (kind) {
    case EmbeddingKind::image: return "image";
    case EmbeddingKind::text: return "text";
    case EmbeddingKind::aspect: return "aspect";
  }
  return "image";
}

EmbeddingKind parse_embedding_kind(std::string_view text) {
  if (text == "image") return EmbeddingKind::image;
  if (text == "text") return EmbeddingKind::text;
  if (text == "aspect") return EmbeddingKind::aspect;
  fail(ErrorCode::WrongKind, "unknown embedding kind '" + std::string(text) + "'");
}

EmbeddingTable::EmbeddingTable(EmbeddingKind kind, std::size_t dim) : kind_(kind), dim_(dim) {}

void EmbeddingTable::insert(std::string key, std::vector<float> vec) {
  if (vec.empty()) fail(ErrorCode::DimMismatch, "embedding '" + key + "' is empty");
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_) {
    fail(ErrorCode::DimMismatch, "embedding '" + key + "' has dim " + std::to_string(vec.size()) +
                                     ", table dim is " + std::to_string(dim_));
  }
  if (!std::all_of(vec.begin(), vec.end(), [](float v) { return std::isfinite(v); })) {
    fail(ErrorCode::NonFiniteValue, "embedding '" + key + "' contains a non-finite value");
  }
  if (!entries_.emplace(key, std::move(vec)).second) {
    fail(ErrorCode::MalformedSidecar, "duplicate embedding key '" + key + "'");
  }
}

const std::vector<float>* EmbeddingTable::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

namespace {

// JSON has no non-finite literals, but Python's json module emits NaN and
// Infinity by default; report those as what they are.
bool mentions_non_finite(std::string_view line) {
  return line.find("NaN") != std::string_view::npos ||
         line.find("Infinity") != std::string_view::npos;
}

}  // namespace

EmbeddingTable parse_embeddings(std::string_view contents, EmbeddingKind kind) {
  EmbeddingTable table(kind, 0);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    const std::string_view line = strip_cr(contents.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    const std::string where = "line " + std::to_string(line_no) + ": ";
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      if (mentions_non_finite(line)) fail(ErrorCode::NonFiniteValue, where + "non-finite vector component");
      fail(ErrorCode::MalformedSidecar, where + e.what());
    }
    if (!record.is_object()) fail(ErrorCode::MalformedSidecar, where + "record is not an object");
    if (record.contains("meta") && !record.contains("key")) {
      table.set_metadata(record["meta"].dump());
      continue;
    }
    for (const char* field : {"key", "kind", "dim", "vec"}) {
      if (!record.contains(field)) {
        fail(ErrorCode::MalformedSidecar, where + "missing field '" + field + "'");
      }
    }
    if (!record["key"].is_string() || !record["kind"].is_string() ||
        !record["dim"].is_number_unsigned() || !record["vec"].is_array()) {
      fail(ErrorCode::MalformedSidecar, where + "field has the wrong type");
    }
    const auto key = record["key"].get<std::string>();
    const auto record_kind = parse_embedding_kind(record["kind"].get<std::string>());
    if (record_kind != kind) {
      fail(ErrorCode::WrongKind, where + "record kind '" + std::string(to_string(record_kind)) +
                                     "' in a '" + std::string(to_string(kind)) + "' sidecar");
    }
    const auto dim = record["dim"].get<std::size_t>();
    const auto& values = record["vec"];
    if (values.size() != dim) {
      fail(ErrorCode::DimMismatch, where + "declared dim " + std::to_string(dim) + " but vec has " +
                                       std::to_string(values.size()) + " values");
    }
    std::vector<float> vec;
    vec.reserve(dim);
    for (const auto& v : values) {
      if (!v.is_number()) fail(ErrorCode::MalformedSidecar, where + "non-numeric vector component");
      const double d = v.get<double>();
      if (!std::isfinite(d) || !std::isfinite(static_cast<float>(d))) {
        fail(ErrorCode::NonFiniteValue, where + "non-finite vector component");
      }
      vec.push_back(static_cast<float>(d));
    }
    if (table.dim() != 0 && dim != table.dim()) {
      fail(ErrorCode::DimMismatch, where + "dim " + std::to_string(dim) + " differs from earlier records (" +
                                       std::to_string(table.dim()) + ")");
    }
    if (table.find(key)) fail(ErrorCode::MalformedSidecar, where + "duplicate key '" + key + "'");
    table.insert(key, std::move(vec));
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, EmbeddingKind kind) {
  return parse_embeddings(read_file(path), kind);
}

std::optional<EmbeddingKind> sniff_embedding_kind(std::string_view contents) {
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    const std::string_view line = strip_cr(contents.substr(start, end - start));
    start = end + 1;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      fail(ErrorCode::MalformedSidecar, "embedding sidecar record is not a JSON object");
    }
    if (record.contains("meta") && !record.contains("key")) continue;
    if (!record.contains("kind") || !record["kind"].is_string()) {
      fail(ErrorCode::MalformedSidecar, "embedding sidecar record has no kind");
    }
    return parse_embedding_kind(record["kind"].get<std::string>());
  }
  return std::nullopt;
}

std::string format_embeddings(const EmbeddingTable& table) {
  std::string out;
  if (table.metadata()) out += "{\"meta\":" + *table.metadata() + "}\n";
  const std::string kind = json_quote(to_string(table.kind()));
  for (const auto& [key, vec] : table.entries()) {
    out += "{\"key\":" + json_quote(key) + ",\"kind\":" + kind +
           ",\"dim\":" + std::to_string(vec.size()) + ",\"vec\":[";
    for (std::size_t i = 0; i < vec.size(); ++i) {
      if (i) out.push_back(',');
      out += format_g9(vec[i]);
    }
    out += "]}\n";
  }
  return out;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
  write_file(path, format_embeddings(table));
}

}  // namespace uaweight
