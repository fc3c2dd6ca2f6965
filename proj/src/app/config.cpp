#include "omg/app/config.hpp"

#include <set>

#include "omg/error.hpp"
#include "omg/llm/digest.hpp"
#include "omg/store/store.hpp"

namespace omg {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> RunConfig::backend_ids() const {
  std::vector<std::string> ids;
  for (const auto& b : backends) ids.push_back(b.backend_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

json RunConfig::roles() const {
  return {{"annotators", {annotator_a, annotator_b}},
          {"content_filter", content_filter},
          {"judge", judge},
          {"detector", detector},
          {"rewriter", rewriter},
          {"oracle_rewriter", oracle_rewriter},
          {"analyst", analyst}};
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute() || base.empty()) return path;
  return base / path;
}

ModelBackend parse_backend(const json& j, const fs::path& base) {
  ModelBackend b;
  b.backend_id = j.at("id").get<std::string>();
  b.provider = parse_provider(j.value("provider", std::string("mock")));
  b.model_name = j.value("model", b.backend_id);
  b.decoding.temperature = j.value("temperature", 0.0);
  b.decoding.max_output_tokens = j.value("max_output_tokens", 1024);
  if (j.contains("seed") && !j["seed"].is_null()) b.decoding.seed = j["seed"].get<std::int64_t>();
  if (j.contains("endpoint") && !j["endpoint"].is_null()) b.endpoint = j["endpoint"].get<std::string>();
  b.credential_ref = j.value("credential_ref", default_credential_ref(b.backend_id));
  b.max_in_flight = j.value("max_in_flight", 4);
  b.requests_per_second = j.value("requests_per_second", 0.0);
  b.burst = j.value("burst", 4);
  if (b.provider == Provider::Mock) {
    if (!j.contains("mock_script")) {
      throw Error(ErrorCode::Config, "backend " + b.backend_id + ": mock provider needs mock_script");
    }
    const auto& s = j["mock_script"];
    if (s.is_string()) {
      b.script = std::make_shared<MockScript>(MockScript::load(resolve(base, s.get<std::string>()).string()));
    } else {
      b.script = std::make_shared<MockScript>(MockScript::from_json(s));
    }
  }
  b.validate();
  return b;
}

}  // namespace

RunConfig parse_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");
  RunConfig c;
  try {
    std::set<std::string> ids;
    for (const auto& jb : doc.at("backends")) {
      auto b = parse_backend(jb, base_dir);
      if (!ids.insert(b.backend_id).second) throw Error(ErrorCode::Config, "duplicate backend id " + b.backend_id);
      c.backends.push_back(std::move(b));
    }
    const auto& ann = doc.at("annotators");
    if (!ann.is_array() || ann.size() != 2) throw Error(ErrorCode::Config, "annotators must list exactly two backends");
    c.annotator_a = ann[0].get<std::string>();
    c.annotator_b = ann[1].get<std::string>();
    if (c.annotator_a == c.annotator_b) throw Error(ErrorCode::Config, "annotators must be two distinct backends");
    c.content_filter = doc.value("content_filter", c.annotator_a);
    c.judge = doc.value("judge", c.annotator_a);
    c.detector = doc.value("detector", c.annotator_a);
    c.rewriter = doc.value("rewriter", c.detector);
    c.oracle_rewriter = doc.value("oracle_rewriter", c.annotator_a);
    c.analyst = doc.value("analyst", c.annotator_a);

    for (const auto& role : {c.annotator_a, c.annotator_b, c.content_filter, c.judge, c.detector, c.rewriter,
                             c.oracle_rewriter, c.analyst}) {
      if (!ids.count(role)) throw Error(ErrorCode::Config, "role refers to undefined backend '" + role + "'");
    }

    if (doc.contains("protocol")) c.word_budget = doc["protocol"].value("word_budget", c.word_budget);
    if (c.word_budget < 0) throw Error(ErrorCode::Config, "protocol.word_budget must be non-negative");
    if (doc.contains("seeds")) {
      c.balance_seed = doc["seeds"].value("balance", c.balance_seed);
      c.split_seed = doc["seeds"].value("split", c.split_seed);
    }
    if (doc.contains("split")) c.test_fraction = doc["split"].value("test_fraction", c.test_fraction);
    if (c.test_fraction < 0.0 || c.test_fraction > 1.0) {
      throw Error(ErrorCode::Config, "split.test_fraction must lie in [0, 1]");
    }
    c.concurrency = doc.value("concurrency", c.concurrency);
    if (c.concurrency < 1) throw Error(ErrorCode::Config, "concurrency must be at least 1");

    if (doc.contains("cache_dir") && !doc["cache_dir"].is_null()) {
      c.cache_dir = resolve(base_dir, doc["cache_dir"].get<std::string>());
    }
    c.dataset_dir = resolve(base_dir, doc.value("dataset_dir", c.dataset_dir.string()));
    c.blob_dir = resolve(base_dir, doc.value("blob_dir", c.blob_dir.string()));
    c.reports_dir = resolve(base_dir, doc.value("reports_dir", c.reports_dir.string()));
    if (doc.contains("max_input_chars") && !doc["max_input_chars"].is_null()) {
      c.max_input_chars = doc["max_input_chars"].get<std::size_t>();
    }
    c.max_upload_bytes = doc.value("max_upload_bytes", c.max_upload_bytes);

    if (doc.contains("embedder")) {
      const auto& e = doc["embedder"];
      c.embedder.kind = e.value("kind", c.embedder.kind);
      c.embedder.dims = e.value("dims", c.embedder.dims);
      c.embedder.bigrams = e.value("bigrams", c.embedder.bigrams);
      c.embedder.endpoint = e.value("endpoint", std::string());
      c.embedder.model = e.value("model", std::string());
      c.embedder.credential_ref = e.value("credential_ref", std::string("OMG_EMBEDDER_KEY"));
      if (c.embedder.kind != "hashing" && c.embedder.kind != "remote") {
        throw Error(ErrorCode::Config, "embedder.kind must be hashing or remote");
      }
      if (c.embedder.kind == "hashing" && c.embedder.dims == 0) {
        throw Error(ErrorCode::Config, "embedder.dims must be positive");
      }
      if (c.embedder.kind == "remote" && (c.embedder.endpoint.empty() || c.embedder.model.empty())) {
        throw Error(ErrorCode::Config, "remote embedder needs endpoint and model");
      }
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::Config, std::string("config: ") + ex.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    throw Error(ErrorCode::Config, std::string("config: ") + e.what());
  }
  c.digest = sha256_hex(doc.dump());
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::Config, "cannot read config " + path.string());
  }
  auto doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::Config, "config " + path.string() + " is not valid JSON");
  return parse_config(doc, path.parent_path());
}

std::unique_ptr<Gateway> make_gateway(const RunConfig& config, std::shared_ptr<HttpTransport> transport) {
  GatewayOptions opts;
  opts.cache_dir = config.cache_dir;
  opts.transport = std::move(transport);
  auto gw = std::make_unique<Gateway>(opts);
  for (const auto& b : config.backends) gw->add_backend(b);
  return gw;
}

std::unique_ptr<Embedder> make_embedder(const RunConfig& config, std::shared_ptr<HttpTransport> transport) {
  if (config.embedder.kind == "remote") {
    return std::make_unique<RemoteEmbedder>(transport ? transport : make_http_transport(), config.embedder.endpoint,
                                            config.embedder.model, config.embedder.credential_ref);
  }
  return std::make_unique<HashingEmbedder>(config.embedder.dims, config.embedder.bigrams);
}

json reproducibility_stamp(const RunConfig& config, const std::string& command) {
  return {{"config_digest", config.digest},
          {"seeds", {{"balance", config.balance_seed}, {"split", config.split_seed}}},
          {"backend_ids", config.backend_ids()},
          {"roles", config.roles()},
          {"command", command}};
}

}  // namespace omg
