#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uaweight {

enum class Label { negative, neutral, positive };

std::string_view to_string(Label label) noexcept;
Label parse_label(std::string_view text);

/// One corpus row: an image, the text it was posted with, the aspect term
/// inside that text, and the sentiment toward the aspect.
struct Sample {
  std::string id;
  std::string image_file;
  std::string text;
  std::string aspect;
  Label label = Label::neutral;

  bool operator==(const Sample&) const = default;
};

inline constexpr std::string_view kManifestHeader = "id\timage\ttext\taspect\tlabel";

std::vector<Sample> parse_manifest(std::string_view contents);
std::vector<Sample> load_manifest(const std::filesystem::path& path);
std::string format_manifest(std::span<const Sample> samples);
void write_manifest(const std::filesystem::path& path, std::span<const Sample> samples);

/// Samples plus the OCR statistics of the images they reference.
///
/// `ocr_length(f)` is the code-point count of the recognized text for image
/// `f` (0 when the OCR sidecar has no entry) and `l_max()` is the maximum over
/// every image referenced by the samples. Immutable once built.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<Sample> samples, std::map<std::string, std::string> ocr_texts);

  const std::vector<Sample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }

  const std::map<std::string, std::size_t>& ocr_lengths() const noexcept { return ocr_lengths_; }
  std::size_t ocr_length(const std::string& image_file) const;
  std::size_t l_max() const noexcept { return l_max_; }

  /// OCR strings for referenced images that had a sidecar entry.
  const std::map<std::string, std::string>& ocr_texts() const noexcept { return ocr_texts_; }

  bool operator==(const Corpus&) const = default;

 private:
  std::vector<Sample> samples_;
  std::map<std::string, std::string> ocr_texts_;
  std::map<std::string, std::size_t> ocr_lengths_;
  std::size_t l_max_ = 0;
};

std::map<std::string, std::string> parse_ocr_sidecar(std::string_view contents);
std::string format_ocr_sidecar(const std::map<std::string, std::string>& ocr_texts);

Corpus attach_ocr(std::vector<Sample> samples, const std::filesystem::path& ocr_sidecar);

/// Writes the manifest and OCR sidecar such that reloading yields an equal corpus.
void save_corpus(const Corpus& corpus, const std::filesystem::path& manifest,
                 const std::filesystem::path& ocr_sidecar);

enum class EmbeddingKind { image, text, aspect };

std::string_view to_string(EmbeddingKind kind) noexcept;
EmbeddingKind parse_embedding_kind(std::string_view text);

/// Vectors of one modality. Image entries are keyed by image file, text and
/// aspect entries by sample id. All vectors share `dim()` and are finite.
class EmbeddingTable {
 public:
  EmbeddingTable(EmbeddingKind kind, std::size_t dim);

  EmbeddingKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<std::string, std::vector<float>>& entries() const noexcept { return entries_; }

  void insert(std::string key, std::vector<float> vec);
  const std::vector<float>* find(const std::string& key) const;

  /// Raw JSON of an optional `{"meta": ...}` line (model identifier and such).
  const std::optional<std::string>& metadata() const noexcept { return metadata_; }
  void set_metadata(std::string json) { metadata_ = std::move(json); }

 private:
  EmbeddingKind kind_;
  std::size_t dim_;
  std::map<std::string, std::vector<float>> entries_;
  std::optional<std::string> metadata_;
};

EmbeddingTable parse_embeddings(std::string_view contents, EmbeddingKind kind);
EmbeddingTable load_embeddings(const std::filesystem::path& path, EmbeddingKind kind);

/// Kind of the first data record, or nullopt for a file with no records.
std::optional<EmbeddingKind> sniff_embedding_kind(std::string_view contents);
std::string format_embeddings(const EmbeddingTable& table);
void write_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);

}  // namespace uaweight
