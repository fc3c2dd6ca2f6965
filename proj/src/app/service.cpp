#include "omg/app/service.hpp"

#include <httplib.h>

#include "omg/analysis/analysis.hpp"
#include "omg/core/json_io.hpp"
#include "omg/core/taxonomy.hpp"
#include "omg/core/text.hpp"
#include "omg/correction/corrector.hpp"
#include "omg/llm/digest.hpp"

namespace omg {

using nlohmann::json;

ServiceResponse problem(int status, const std::string& title, const std::string& detail) {
  ServiceResponse r;
  r.status = status;
  r.content_type = "application/problem+json";
  r.body = {{"type", "about:blank"}, {"title", title}, {"status", status}, {"detail", detail}};
  return r;
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::ParseError:
    case ErrorCode::RationaleRequired:
    case ErrorCode::EmptyInput:
    case ErrorCode::MissingAnnotation:
    case ErrorCode::MissingOracleInterpretations:
    case ErrorCode::MissingReference: return 400;
    case ErrorCode::UnknownBackend: return 404;
    case ErrorCode::MissingDependency:
    case ErrorCode::PreconditionNotFailed: return 409;
    case ErrorCode::Locked: return 423;
    case ErrorCode::RateLimited: return 429;
    case ErrorCode::MockScriptMiss:
    case ErrorCode::SchemaViolation:
    case ErrorCode::TaxonomyViolation:
    case ErrorCode::TransportError: return 502;
    default: return 500;
  }
}

struct Service::Session {
  std::mutex mu;
  std::string id;
  NewsInstance instance;
  std::string original_headline;
  std::optional<AnnotationBundle> detection;
  std::map<ProtocolKind, CorrectionResult> corrections;
  json trail = json::array();

  void append(const std::string& action, json detail) {
    json step{{"step", trail.size() + 1}, {"action", action}, {"headline", instance.preview.headline}};
    step["result"] = std::move(detail);
    trail.push_back(std::move(step));
  }
};

namespace {

struct PayloadTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string protocol_short(ProtocolKind k) { return k == ProtocolKind::MinimalEdit ? "minimal" : "free"; }

ProtocolKind protocol_from(const json& body) {
  auto text = body.value("protocol", std::string("free"));
  if (text == "minimal" || text == "minimal-edit" || text == "MinimalEdit") return ProtocolKind::MinimalEdit;
  if (text == "free" || text == "free-form" || text == "FreeForm") return ProtocolKind::FreeForm;
  throw Error(ErrorCode::InvalidInput, "protocol must be minimal or free");
}

json detection_json(const AnnotationBundle& b) {
  return {{"u_p", b.u_p},
          {"u_c", b.u_c},
          {"label", std::string(to_string(b.judgment.label))},
          {"rationale", b.judgment.rationale}};
}

json correction_json(const CorrectionResult& r) {
  json j = r;
  j["success"] = correction_succeeded(r);
  return j;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '?') break;
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

const std::string& required_text(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string() || text::trim(it->get_ref<const std::string&>()).empty()) {
    throw Error(ErrorCode::InvalidInput, std::string("missing field: ") + key);
  }
  return it->get_ref<const std::string&>();
}

}  // namespace

Service::Service(const RunConfig& config, Gateway& gateway, BlobStore* blobs)
    : config_(config), gateway_(gateway), blobs_(blobs),
      env_{gateway, make_image_resolver(blobs), config.max_input_chars} {}

std::string Service::store_image(const std::string& bytes) {
  if (bytes.size() > config_.max_upload_bytes) {
    throw PayloadTooLarge("image exceeds " + std::to_string(config_.max_upload_bytes) + " bytes");
  }
  if (!blobs_) throw Error(ErrorCode::Config, "the service has no blob store");
  return blobs_->put(std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
}

NewsInstance Service::instance_from(const json& body, const std::string& id) {
  if (!body.is_object()) throw Error(ErrorCode::InvalidInput, "request body must be a JSON object");
  NewsInstance inst;
  inst.instance_id = id;
  inst.preview.headline = required_text(body, "headline");
  inst.article.body = required_text(body, "body");
  inst.article.article_id = body.value("article_id", id);
  inst.article.topic = body.value("topic", std::string(kOtherTopic));
  if (body.contains("image_base64")) {
    auto raw = base64_decode(body.at("image_base64").get<std::string>());
    inst.preview.image_ref = store_image(std::string(raw.begin(), raw.end()));
  } else {
    inst.preview.image_ref = body.value("image_ref", std::string());
  }
  return inst;
}

ServiceResponse Service::dispatch(const ServiceRequest& req) {
  try {
    auto parts = split_path(req.path);
    if (parts.size() < 2 || parts[0] != "v1") return problem(404, "Not Found", "no route for " + req.path);

    json body = json::object();
    bool multipart = !req.parts.empty();
    if (!multipart && !req.body.empty()) {
      body = json::parse(req.body, nullptr, false);
      if (body.is_discarded()) return problem(400, "ParseError", "request body is not valid JSON");
    }

    const auto& head = parts[1];
    const bool post = req.method == "POST";
    const bool get = req.method == "GET";

    if (head == "health" && parts.size() == 2 && get) return health();
    if (head == "detect" && parts.size() == 2 && post) return detect_once(body);
    if (head == "correct" && parts.size() == 2 && post) return correct_once(body);
    if (head == "analyze" && parts.size() == 3 && post) return analyze(parts[2], body);
    if (head == "sessions") {
      if (parts.size() == 2 && post) {
        ServiceRequest copy = req;
        if (!multipart) copy.body = body.dump();
        return create_session(copy);
      }
      if (parts.size() >= 3) {
        auto session = find_session(parts[2]);
        if (!session) return problem(404, "Not Found", "unknown session " + parts[2]);
        std::lock_guard lock(session->mu);
        if (parts.size() == 3 && get) return get_session(*session);
        if (parts.size() == 4) {
          const auto& action = parts[3];
          if (action == "detect" && post) return detect(*session);
          if (action == "correct" && post) return correct(*session, body);
          if (action == "recheck" && post) return recheck(*session, body);
          if (action == "trail" && get) return trail(*session);
        }
      }
    }
    return problem(404, "Not Found", "no route for " + req.method + " " + req.path);
  } catch (const Error& e) {
    return problem(http_status_for(e.code()), std::string(to_string(e.code())), e.what());
  } catch (const PayloadTooLarge& e) {
    return problem(413, "Payload Too Large", e.what());
  } catch (const json::exception& e) {
    return problem(400, "InvalidInput", e.what());
  } catch (const std::exception& e) {
    return problem(500, "Internal Error", e.what());
  }
}

std::shared_ptr<Service::Session> Service::find_session(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

ServiceResponse Service::create_session(const ServiceRequest& req) {
  std::string id;
  {
    std::lock_guard lock(mu_);
    id = "s" + std::to_string(next_session_++);
  }
  json fields = json::object();
  if (!req.parts.empty()) {
    for (const auto& [name, part] : req.parts) {
      if (name != "image") fields[name] = part.content;
    }
  } else {
    fields = json::parse(req.body);
  }
  auto inst = instance_from(fields, id);
  if (auto it = req.parts.find("image"); it != req.parts.end() && !it->second.content.empty()) {
    inst.preview.image_ref = store_image(it->second.content);
  }

  auto session = std::make_shared<Session>();
  session->id = id;
  session->original_headline = inst.preview.headline;
  session->instance = std::move(inst);
  session->append("create", json::object());
  {
    std::lock_guard lock(mu_);
    sessions_[id] = session;
  }
  std::lock_guard lock(session->mu);
  auto r = get_session(*session);
  r.status = 201;
  return r;
}

ServiceResponse Service::get_session(Session& s) {
  json corrections = json::object();
  for (const auto& [k, r] : s.corrections) corrections[protocol_short(k)] = correction_json(r);
  ServiceResponse r;
  r.body = {{"id", s.id},
            {"headline", s.instance.preview.headline},
            {"original_headline", s.original_headline},
            {"image_ref", s.instance.preview.image_ref},
            {"body", s.instance.article.body},
            {"topic", s.instance.article.topic},
            {"detection", s.detection ? detection_json(*s.detection) : json()},
            {"corrections", corrections},
            {"trail_length", s.trail.size()}};
  return r;
}

ServiceResponse Service::detect(Session& s) {
  auto bundle = annotate(env_, config_.detector, s.instance, "detect");
  s.detection = bundle;
  auto out = detection_json(bundle);
  s.append("detect", out);
  return {200, out};
}

ServiceResponse Service::correct(Session& s, const json& body) {
  CorrectionProtocol protocol{protocol_from(body), config_.word_budget};
  auto source_text = body.value("rationale_source", std::string(s.detection ? "self" : "label-only"));
  auto source = parse_rationale_source(source_text);

  CorrectionResult result;
  if (source == RationaleSource::LabelOnly) {
    auto tag = correction_tag(protocol.kind, source);
    result = correct_headline_label_only(env_, config_.rewriter, s.instance, protocol, tag);
    result.verification = verify_correction(env_, config_.judge, s.instance, result.rewritten_headline,
                                            verification_tag(tag));
  } else {
    std::string rationale;
    if (body.contains("rationale")) {
      rationale = body.at("rationale").get<std::string>();
    } else if (source == RationaleSource::SelfGenerated && s.detection) {
      rationale = s.detection->judgment.rationale;
    } else {
      throw Error(ErrorCode::MissingDependency,
                  source == RationaleSource::SelfGenerated ? "run detect first or pass a rationale"
                                                           : "oracle corrections need a rationale in the request");
    }
    auto tag = correction_tag(protocol.kind, source);
    result = correct_headline(env_, config_.rewriter, s.instance, rationale, protocol, tag);
    result.verification = verify_correction(env_, config_.judge, s.instance, result.rewritten_headline,
                                            verification_tag(tag));
  }
  s.corrections[protocol.kind] = result;
  auto out = correction_json(result);
  s.append("correct/" + protocol_short(protocol.kind), out);
  return {200, out};
}

ServiceResponse Service::recheck(Session& s, const json& body) {
  s.instance.preview.headline = required_text(body, "headline");
  auto bundle = annotate(env_, config_.detector, s.instance, "recheck");
  s.detection = bundle;
  auto out = detection_json(bundle);
  out["success"] = bundle.judgment.label == Label::NonMisleading;
  out["extra_words"] = extra_words(s.original_headline, s.instance.preview.headline);
  s.append("recheck", out);
  return {200, out};
}

ServiceResponse Service::trail(Session& s) { return {200, {{"id", s.id}, {"trail", s.trail}}}; }

ServiceResponse Service::detect_once(const json& body) {
  auto inst = instance_from(body, body.value("id", std::string("request")));
  return {200, detection_json(annotate(env_, config_.detector, inst, "detect"))};
}

ServiceResponse Service::correct_once(const json& body) {
  auto inst = instance_from(body, body.value("id", std::string("request")));
  CorrectionProtocol protocol{protocol_from(body), config_.word_budget};
  auto source = parse_rationale_source(body.value("rationale_source", std::string("oracle")));
  auto tag = correction_tag(protocol.kind, source);
  CorrectionResult result = source == RationaleSource::LabelOnly
                                ? correct_headline_label_only(env_, config_.rewriter, inst, protocol, tag)
                                : correct_headline(env_, config_.rewriter, inst, body.value("rationale", std::string()),
                                                   protocol, tag);
  result.verification = verify_correction(env_, config_.judge, inst, result.rewritten_headline, verification_tag(tag));
  return {200, correction_json(result)};
}

ServiceResponse Service::analyze(const std::string& kind, const json& body) {
  if (kind != "frames" && kind != "attribution" && kind != "modality" && kind != "prototype") {
    return problem(404, "Not Found", "unknown analysis kind " + kind);
  }
  const auto& backend = config_.analyst;
  auto id = body.value("id", std::string("request"));
  if (kind == "frames") {
    FrameInput input;
    input.text = required_text(body, "text");
    input.is_article = body.value("is_article", false);
    if (!input.is_article) {
      NewsPreview preview{input.text, body.value("image_ref", std::string()), {}};
      input = preview_frame_input(env_, preview);
    } else {
      input = article_frame_input(env_, NewsArticle{id, input.text, kOtherTopic.data()});
    }
    auto tag = input.is_article ? "frames/context" : "frames/preview";
    auto frames = identify_frames(env_, backend, input, {id, tag});
    return {200, {{"frames", frames.frames()}, {"reasoning", frames.reasoning()}}};
  }

  auto inst = instance_from(body, id);
  inst.final_label = Label::Misleading;
  const auto& rationale = required_text(body, "rationale");
  if (kind == "attribution") {
    auto a = attribute_cause(env_, backend, inst, rationale, {id, "attribution"});
    return {200, {{"class", std::string(to_string(a.cls))}, {"reason", a.reason}}};
  }
  if (kind == "modality") {
    auto u_p = body.at("u_p").get<Interpretation>();
    auto u_c = body.at("u_c").get<Interpretation>();
    u_p.basis = Basis::Preview;
    u_c.basis = Basis::Context;
    auto m = attribute_modality(env_, backend, inst, rationale, u_p, u_c, {id, "modality"});
    return {200, {{"class", std::string(to_string(m.cls))}, {"reason", m.reason}}};
  }
  if (kind == "prototype") {
    auto failed = body.at("correction").get<CorrectionResult>();
    auto source = parse_rationale_source(body.value("rationale_source", std::string("oracle")));
    auto p = visual_prototype(env_, backend, inst, rationale, failed,
                              {id, "prototype/" + correction_tag(failed.protocol.kind, source)});
    return {200, {{"image_description", p.image_description}, {"image_prompt", p.image_prompt}}};
  }
  return problem(404, "Not Found", "unknown analysis kind " + kind);
}

ServiceResponse Service::health() {
  json backends = json::array();
  for (const auto& id : gateway_.backend_ids()) {
    const auto& b = gateway_.backend(id);
    bool ready = b.provider == Provider::Mock ? b.script != nullptr
                                              : b.endpoint.has_value() && std::getenv(b.credential_ref.c_str());
    backends.push_back(
        {{"id", id}, {"provider", std::string(to_string(b.provider))}, {"model", b.model_name}, {"ready", ready}});
  }
  return {200, {{"status", "ok"}, {"backends", backends}}};
}

void serve_http(Service& service, const std::string& host, int port, std::size_t max_body_bytes) {
  httplib::Server server;
  server.set_payload_max_length(max_body_bytes);

  auto handle = [&service](const httplib::Request& hreq, httplib::Response& hres) {
    ServiceRequest req;
    req.method = hreq.method;
    req.path = hreq.path;
    req.content_type = hreq.get_header_value("Content-Type");
    if (hreq.is_multipart_form_data()) {
      for (const auto& [name, file] : hreq.files) req.parts[name] = {file.content, file.filename, file.content_type};
    } else {
      req.body = hreq.body;
    }
    auto res = service.dispatch(req);
    hres.status = res.status;
    hres.set_header("Access-Control-Allow-Origin", "*");
    hres.set_content(res.body.dump(), res.content_type);
  };
  server.Get(".*", handle);
  server.Post(".*", handle);
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  if (!server.bind_to_port(host, port)) {
    throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  server.listen_after_bind();
}

}  // namespace omg
