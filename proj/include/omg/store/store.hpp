#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "omg/core/types.hpp"
#include "omg/pipeline/annotation.hpp"

namespace omg {

/// Directory of images named by the hex sha256 of their bytes.
class BlobStore {
 public:
  explicit BlobStore(std::filesystem::path dir);

  /// Stores the bytes (idempotent) and returns "sha256:<hex>".
  std::string put(const std::vector<std::uint8_t>& bytes);
  std::optional<std::vector<std::uint8_t>> get(const std::string& ref) const;
  std::filesystem::path path_for(const std::string& hex) const { return dir_ / hex; }
  const std::filesystem::path& dir() const { return dir_; }

  /// Hex digest of a "sha256:<hex>" reference, or nullopt.
  static std::optional<std::string> digest_of(const std::string& ref);

 private:
  std::filesystem::path dir_;
};

/// Resolves preview images: "sha256:" references through the blob store,
/// other references as files under `base_dir` when present. Anything else
/// becomes a reference-only blob.
ImageResolver make_image_resolver(const BlobStore* blobs, std::filesystem::path base_dir = {});

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct IngestResult {
  std::vector<NewsInstance> instances;  // sorted by id
  std::vector<LineError> errors;
  std::vector<std::string> warnings;
};

/// Reads a corpus file with one JSON object per line:
///   {"id", "headline", "image_ref", "body", "topic", "article_id"?}
/// Unknown topics become "other". Bad lines are reported, not fatal. When a
/// blob store is given, image files referenced relative to the corpus are
/// imported and the reference rewritten to "sha256:<hex>". Throws
/// Error{IoError} when the file cannot be read.
IngestResult ingest_corpus(const std::filesystem::path& path, BlobStore* blobs = nullptr);

struct DatasetMeta {
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::string> annotators;
};

inline constexpr std::string_view kDatasetVersion = "omg-dataset/1";

/// Manifest for a set of instances.
nlohmann::json dataset_manifest(const std::vector<NewsInstance>& instances, const DatasetMeta& meta);

/// Writes <dir>/instances.jsonl (sorted by id) and <dir>/manifest.json while
/// holding <dir>/.lock. Throws Error{Locked} if another writer holds it,
/// Error{IoError} on write failure.
void save_dataset(const std::vector<NewsInstance>& instances, const std::filesystem::path& dir,
                  const DatasetMeta& meta = {});

struct Dataset {
  std::vector<NewsInstance> instances;
  DatasetMeta meta;
  nlohmann::json manifest;
};

/// Throws Error{ManifestMismatch} when the manifest counts differ from the
/// records, Error{ParseError} on a malformed record, Error{IoError} on a
/// missing file.
Dataset load_dataset(const std::filesystem::path& dir);

enum class ExportMode { InterpretationAware, LabelOnly };
std::string_view to_string(ExportMode m);  // "interpretation-aware", "label-only"
ExportMode parse_export_mode(std::string_view s);

inline constexpr std::string_view kLabelSentinel = "<label>";

struct FinetuneRecord {
  std::string id;
  std::string image;
  std::string input_text;
  std::string target_text;
  ExportMode mode = ExportMode::InterpretationAware;
};

/// Headline, article and both oracle interpretations.
std::string finetune_input_text(const NewsInstance& instance);
/// "<rationale>\n<label>misleading" or "<label>misleading".
std::string finetune_target_text(const NewsInstance& instance, ExportMode mode);

/// Records for every labeled instance in `split` (all splits when unset), in
/// id order. Throws Error{MissingAnnotation} naming the instance that lacks a
/// label, rationale or interpretation.
std::vector<FinetuneRecord> finetune_records(const std::vector<NewsInstance>& instances, std::optional<Split> split,
                                             ExportMode mode);

/// Writes the records as JSON lines and returns the count. A stamp, when
/// given, goes to "<out>.stamp.json".
std::size_t export_finetune(const std::vector<NewsInstance>& instances, std::optional<Split> split, ExportMode mode,
                            const std::filesystem::path& out, const nlohmann::json& stamp = nullptr);

/// Whole-file helpers that keep the byte layout fixed.
std::string read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace omg
