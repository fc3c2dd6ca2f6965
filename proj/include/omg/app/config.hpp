#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "omg/llm/backend.hpp"
#include "omg/llm/gateway.hpp"
#include "omg/metrics/metrics.hpp"

namespace omg {

struct EmbedderConfig {
  std::string kind = "hashing";  // "hashing" or "remote"
  std::size_t dims = 256;
  bool bigrams = true;
  std::string endpoint;
  std::string model;
  std::string credential_ref;
};

/// Declarative run configuration; see docs/config.md for the schema.
struct RunConfig {
  std::vector<ModelBackend> backends;

  std::string annotator_a;
  std::string annotator_b;
  std::string content_filter;   // defaults to annotator_a
  std::string judge;            // defaults to annotator_a
  std::string detector;         // defaults to annotator_a
  std::string rewriter;         // defaults to detector
  std::string oracle_rewriter;  // defaults to annotator_a
  std::string analyst;          // defaults to annotator_a

  int word_budget = 3;
  std::uint64_t balance_seed = 17;
  std::uint64_t split_seed = 23;
  double test_fraction = 1.0 / 6.0;
  int concurrency = 4;

  std::optional<std::filesystem::path> cache_dir;
  std::filesystem::path dataset_dir = "data/dataset";
  std::filesystem::path blob_dir = "data/blobs";
  std::filesystem::path reports_dir = "reports";
  std::optional<std::size_t> max_input_chars;
  std::size_t max_upload_bytes = 10 * 1024 * 1024;
  EmbedderConfig embedder;

  /// sha256 of the canonical config document.
  std::string digest;

  std::vector<std::string> backend_ids() const;
  /// Role-to-backend map, for stamps and reports.
  nlohmann::json roles() const;
};

/// Relative paths (directories, mock scripts) resolve against `base_dir`.
/// Throws Error{Config} on a malformed or inconsistent document.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Gateway with every configured backend registered.
std::unique_ptr<Gateway> make_gateway(const RunConfig& config, std::shared_ptr<HttpTransport> transport = nullptr);

std::unique_ptr<Embedder> make_embedder(const RunConfig& config, std::shared_ptr<HttpTransport> transport = nullptr);

/// {config_digest, seeds, backend_ids, command}.
nlohmann::json reproducibility_stamp(const RunConfig& config, const std::string& command);

}  // namespace omg
