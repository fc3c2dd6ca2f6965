#include "omg/llm/gateway.hpp"

#include <cstdlib>
#include <thread>

#include "omg/error.hpp"
#include "omg/llm/digest.hpp"
#include "omg/llm/schema.hpp"

namespace omg {

using nlohmann::json;

struct Gateway::Limits {
  Limits(int in_flight, double rps, int burst) : slots(in_flight), bucket(rps, burst) {}
  InFlightLimiter slots;
  TokenBucket bucket;
};

Gateway::Gateway(GatewayOptions options) : options_(std::move(options)), cache_(options_.cache_dir) {
  if (!options_.transport) options_.transport = make_http_transport();
  if (options_.max_attempts < 1) options_.max_attempts = 1;
}

Gateway::~Gateway() = default;

void Gateway::add_backend(ModelBackend backend) {
  backend.validate();
  std::lock_guard lock(mu_);
  auto id = backend.backend_id;
  limits_[id] = std::make_unique<Limits>(backend.max_in_flight, backend.requests_per_second, backend.burst);
  backends_[id] = std::move(backend);
}

const ModelBackend& Gateway::backend(const std::string& backend_id) const {
  std::lock_guard lock(mu_);
  auto it = backends_.find(backend_id);
  if (it == backends_.end()) throw Error(ErrorCode::UnknownBackend, "unknown backend '" + backend_id + "'");
  return it->second;
}

bool Gateway::has_backend(const std::string& backend_id) const {
  std::lock_guard lock(mu_);
  return backends_.count(backend_id) > 0;
}

std::vector<std::string> Gateway::backend_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : backends_) ids.push_back(id);
  return ids;
}

Gateway::Limits& Gateway::limits_for(const std::string& backend_id) {
  std::lock_guard lock(mu_);
  return *limits_.at(backend_id);
}

std::string Gateway::cache_key(const ModelBackend& backend, const std::vector<Message>& messages) {
  json msgs = json::array();
  for (const auto& m : messages) {
    json parts = json::array();
    for (const auto& p : m.parts) {
      if (p.kind == ContentPart::Kind::Text) {
        parts.push_back({{"type", "text"}, {"text", p.text}});
      } else {
        parts.push_back({{"type", "image"}, {"digest", p.image ? p.image->digest() : std::string()}});
      }
    }
    msgs.push_back({{"role", m.role}, {"parts", std::move(parts)}});
  }
  json canonical{
      {"model", backend.model_name},
      {"decoding",
       {{"temperature", backend.decoding.temperature},
        {"max_output_tokens", backend.decoding.max_output_tokens},
        {"seed", backend.decoding.seed ? json(*backend.decoding.seed) : json(nullptr)}}},
      {"messages", std::move(msgs)},
  };
  return sha256_hex(canonical.dump());
}

json chat_request_body(const ModelBackend& backend, const std::vector<Message>& messages) {
  json msgs = json::array();
  for (const auto& m : messages) {
    json content = json::array();
    for (const auto& p : m.parts) {
      if (p.kind == ContentPart::Kind::Text) {
        content.push_back({{"type", "text"}, {"text", p.text}});
        continue;
      }
      if (!p.image) continue;
      std::string url;
      if (!p.image->bytes.empty()) {
        url = "data:" + p.image->mime_type + ";base64," + base64_encode(p.image->bytes);
      } else if (p.image->ref.rfind("http://", 0) == 0 || p.image->ref.rfind("https://", 0) == 0) {
        url = p.image->ref;
      } else {
        throw Error(ErrorCode::InvalidInput,
                    "image '" + p.image->ref + "' has no bytes and is not a URL the backend can fetch");
      }
      content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
    }
    msgs.push_back({{"role", m.role}, {"content", std::move(content)}});
  }
  json body{{"model", backend.model_name},
            {"messages", std::move(msgs)},
            {"temperature", backend.decoding.temperature},
            {"max_tokens", backend.decoding.max_output_tokens}};
  if (backend.decoding.seed) body["seed"] = *backend.decoding.seed;
  return body;
}

std::string chat_reply_text(const std::string& response_body) {
  auto j = json::parse(response_body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::TransportError, "backend reply is not JSON");
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
      std::string out;
      for (const auto& part : content) {
        if (part.value("type", "") == "text") out += part.value("text", "");
      }
      return out;
    }
  } catch (const json::exception&) {
  }
  throw Error(ErrorCode::TransportError, "backend reply has no message content");
}

namespace {

bool transient(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

}  // namespace

std::string Gateway::call_remote(const ModelBackend& backend, const std::vector<Message>& messages, int& retries) {
  const char* key = std::getenv(backend.credential_ref.c_str());
  if (!key || !*key) {
    throw Error(ErrorCode::Config, "credential variable " + backend.credential_ref + " is not set");
  }
  auto body = chat_request_body(backend, messages).dump();
  HeaderList headers{{"Authorization", std::string("Bearer ") + key}};

  auto& limits = limits_for(backend.backend_id);
  HttpResponse last;
  for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
    if (attempt > 0) {
      ++retries;
      std::this_thread::sleep_for(options_.backoff_base * (1 << (attempt - 1)));
    }
    limits.bucket.acquire();
    {
      InFlightLimiter::Slot slot(limits.slots);
      network_calls_.fetch_add(1);
      last = options_.transport->post_json(*backend.endpoint, headers, body, options_.timeout);
    }
    if (last.status >= 200 && last.status < 300) return chat_reply_text(last.body);
    if (!transient(last.status)) break;
  }
  if (last.status == 429) {
    throw Error(ErrorCode::RateLimited, "backend " + backend.backend_id + " kept answering 429");
  }
  std::string why = last.status == 0 ? last.error : "HTTP " + std::to_string(last.status);
  throw Error(ErrorCode::TransportError, "backend " + backend.backend_id + ": " + why);
}

CompletionRecord Gateway::complete(const std::string& backend_id, const std::vector<Message>& messages,
                                   const RequestContext* context) {
  const ModelBackend& b = backend(backend_id);
  CompletionRecord rec;
  rec.request_digest = cache_key(b, messages);
  auto start = std::chrono::steady_clock::now();
  auto finish = [&] {
    rec.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
  };

  if (b.provider == Provider::Mock) {
    mock_calls_.fetch_add(1);
    MockRequest req{context, rec.request_digest, &messages};
    auto reply = b.script->lookup(req);
    if (!reply) {
      std::string where = context ? std::string(to_string(context->template_id)) + " / " + context->instance_id +
                                        " / '" + context->tag + "'"
                                  : "digest " + rec.request_digest;
      throw Error(ErrorCode::MockScriptMiss, "mock backend " + backend_id + " has no reply for " + where);
    }
    rec.reply = *reply;
    return finish();
  }

  if (auto hit = cache_.get(rec.request_digest)) {
    cache_hits_.fetch_add(1);
    rec.reply = *hit;
    rec.from_cache = true;
    return finish();
  }

  // Coalesce identical concurrent requests onto one network call.
  std::shared_future<std::string> shared;
  std::optional<std::promise<std::string>> owner;
  {
    std::lock_guard lock(mu_);
    if (auto it = in_flight_.find(rec.request_digest); it != in_flight_.end()) {
      shared = it->second;
    } else {
      owner.emplace();
      shared = owner->get_future().share();
      in_flight_[rec.request_digest] = shared;
    }
  }
  if (!owner) {
    rec.reply = shared.get();
    rec.from_cache = true;
    return finish();
  }

  try {
    rec.reply = call_remote(b, messages, rec.retries);
    cache_.put(rec.request_digest, b.backend_id, b.model_name, rec.reply);
    owner->set_value(rec.reply);
  } catch (...) {
    owner->set_exception(std::current_exception());
    std::lock_guard lock(mu_);
    in_flight_.erase(rec.request_digest);
    throw;
  }
  {
    std::lock_guard lock(mu_);
    in_flight_.erase(rec.request_digest);
  }
  return finish();
}

CompletionRecord Gateway::complete_structured(const std::string& backend_id, const std::vector<Message>& messages,
                                              SchemaId schema, const RequestContext* context) {
  std::vector<Message> convo = messages;
  std::optional<RequestContext> ctx;
  if (context) ctx = *context;
  const int base_round = context ? context->repair_round : 0;
  std::string last_problem;
  int total_retries = 0;
  double total_latency = 0.0;

  for (int round = 0; round <= options_.max_repair_rounds; ++round) {
    if (ctx) ctx->repair_round = base_round + round;
    auto rec = complete(backend_id, convo, ctx ? &*ctx : nullptr);
    total_retries += rec.retries;
    total_latency += rec.latency_ms;
    auto result = validate_reply(schema, rec.reply);
    if (auto* parsed = std::get_if<json>(&result)) {
      rec.parsed = std::move(*parsed);
      rec.retries = total_retries;
      rec.latency_ms = total_latency;
      rec.repair_rounds = round;
      return rec;
    }
    last_problem = std::get<SchemaProblem>(result).message;
    convo.push_back({"assistant", {ContentPart::make_text(rec.reply)}});
    convo.push_back({"user",
                     {ContentPart::make_text("Your previous reply could not be used: " + last_problem +
                                             ". Reply again using exactly this output format and nothing else.\n" +
                                             std::string(schema_format_hint(schema)))}});
  }
  throw Error(ErrorCode::SchemaViolation, "reply from " + backend_id + " does not match " +
                                              std::string(to_string(schema)) + " after " +
                                              std::to_string(options_.max_repair_rounds) +
                                              " repair rounds: " + last_problem);
}

GatewayStats Gateway::stats() const {
  return {network_calls_.load(), cache_hits_.load(), mock_calls_.load()};
}

}  // namespace omg
