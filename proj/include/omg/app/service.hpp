#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "omg/app/config.hpp"
#include "omg/error.hpp"
#include "omg/llm/gateway.hpp"
#include "omg/pipeline/annotation.hpp"
#include "omg/store/store.hpp"

namespace omg {

struct UploadedPart {
  std::string content;
  std::string filename;
  std::string content_type;
};

struct ServiceRequest {
  std::string method;
  std::string path;
  std::string body;
  std::string content_type;
  std::map<std::string, UploadedPart> parts;  // multipart form fields and files
};

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
  std::string content_type = "application/json";
};

/// Problem document {type, title, status, detail}.
ServiceResponse problem(int status, const std::string& title, const std::string& detail);

/// HTTP status used for an error code.
int http_status_for(ErrorCode code);

/// Request handling for the copilot API, independent of the HTTP server.
///
///   POST /v1/detect                      one-shot {headline, body, ...}
///   POST /v1/correct                     one-shot {headline, body, rationale, protocol}
///   POST /v1/sessions                    create from JSON or multipart
///   GET  /v1/sessions/{id}
///   POST /v1/sessions/{id}/detect
///   POST /v1/sessions/{id}/correct       {protocol, rationale_source, rationale?}
///   POST /v1/sessions/{id}/recheck       {headline}
///   GET  /v1/sessions/{id}/trail
///   POST /v1/analyze/{frames|attribution|modality|prototype}
///   GET  /v1/health
class Service {
 public:
  Service(const RunConfig& config, Gateway& gateway, BlobStore* blobs);

  ServiceResponse dispatch(const ServiceRequest& request);

 private:
  struct Session;

  ServiceResponse create_session(const ServiceRequest& req);
  ServiceResponse get_session(Session& s);
  ServiceResponse detect(Session& s);
  ServiceResponse correct(Session& s, const nlohmann::json& body);
  ServiceResponse recheck(Session& s, const nlohmann::json& body);
  ServiceResponse trail(Session& s);
  ServiceResponse analyze(const std::string& kind, const nlohmann::json& body);
  ServiceResponse detect_once(const nlohmann::json& body);
  ServiceResponse correct_once(const nlohmann::json& body);
  ServiceResponse health();

  std::shared_ptr<Session> find_session(const std::string& id);
  std::string store_image(const std::string& bytes);
  NewsInstance instance_from(const nlohmann::json& body, const std::string& id);

  const RunConfig& config_;
  Gateway& gateway_;
  BlobStore* blobs_;
  PipelineEnv env_;

  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t next_session_ = 1;
};

/// Serves `service` over HTTP until the process is stopped. Throws
/// Error{IoError} when the address cannot be bound.
void serve_http(Service& service, const std::string& host, int port, std::size_t max_body_bytes);

}  // namespace omg
