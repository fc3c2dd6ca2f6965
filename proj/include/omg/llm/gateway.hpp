#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "omg/llm/backend.hpp"
#include "omg/llm/cache.hpp"
#include "omg/llm/message.hpp"
#include "omg/llm/mock.hpp"
#include "omg/llm/prompts.hpp"
#include "omg/llm/rate_limiter.hpp"
#include "omg/llm/transport.hpp"

namespace omg {

struct CompletionRecord {
  std::string request_digest;
  std::string reply;
  std::optional<nlohmann::json> parsed;  // set only by complete_structured
  double latency_ms = 0.0;
  int retries = 0;
  int repair_rounds = 0;
  bool from_cache = false;
};

struct GatewayOptions {
  std::optional<std::filesystem::path> cache_dir;
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{250};
  std::chrono::milliseconds timeout{120000};
  int max_repair_rounds = 2;
  std::shared_ptr<HttpTransport> transport;  // defaults to the httplib client
};

struct GatewayStats {
  std::size_t network_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t mock_calls = 0;
};

class Gateway {
 public:
  explicit Gateway(GatewayOptions options = {});
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  void add_backend(ModelBackend backend);
  const ModelBackend& backend(const std::string& backend_id) const;
  bool has_backend(const std::string& backend_id) const;
  std::vector<std::string> backend_ids() const;

  static std::string cache_key(const ModelBackend& backend, const std::vector<Message>& messages);

  CompletionRecord complete(const std::string& backend_id, const std::vector<Message>& messages,
                            const RequestContext* context = nullptr);

  CompletionRecord complete_structured(const std::string& backend_id, const std::vector<Message>& messages,
                                       SchemaId schema, const RequestContext* context = nullptr);

  GatewayStats stats() const;

 private:
  struct Limits;

  std::string call_remote(const ModelBackend& backend, const std::vector<Message>& messages, int& retries);
  Limits& limits_for(const std::string& backend_id);

  GatewayOptions options_;
  ReplyCache cache_;
  mutable std::mutex mu_;
  std::map<std::string, ModelBackend> backends_;
  std::map<std::string, std::unique_ptr<Limits>> limits_;
  std::map<std::string, std::shared_future<std::string>> in_flight_;
  std::atomic<std::size_t> network_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::size_t> mock_calls_{0};
};

/// OpenAI-compatible chat-completions request body.
nlohmann::json chat_request_body(const ModelBackend& backend, const std::vector<Message>& messages);

/// Text content of the first choice. Throws Error{TransportError} when the
/// body has no usable content.
std::string chat_reply_text(const std::string& response_body);

}  // namespace omg
