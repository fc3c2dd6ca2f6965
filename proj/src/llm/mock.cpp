#include "omg/llm/mock.hpp"

#include <fstream>
#include <sstream>

#include "omg/error.hpp"

namespace omg {

void MockScript::add_digest(std::string digest, std::string reply) {
  digests_[std::move(digest)] = std::move(reply);
}

void MockScript::add(TemplateId tpl, std::string instance_id, std::vector<std::string> replies,
                     std::string tag) {
  if (replies.empty()) throw Error(ErrorCode::InvalidInput, "mock entry needs at least one reply");
  entries_[{tpl, std::move(instance_id), std::move(tag)}] = std::move(replies);
}

void MockScript::set_responder(MockResponder responder) { responder_ = std::move(responder); }

std::optional<std::string> MockScript::lookup(const MockRequest& request) const {
  if (auto it = digests_.find(request.digest); it != digests_.end()) return it->second;

  if (const auto* ctx = request.context) {
    for (const std::string& instance : {ctx->instance_id, std::string("*")}) {
      std::string tag = ctx->tag;
      while (true) {
        auto it = entries_.find({ctx->template_id, instance, tag});
        if (it != entries_.end()) {
          const auto& replies = it->second;
          auto round = static_cast<std::size_t>(std::max(ctx->repair_round, 0));
          return replies[std::min(round, replies.size() - 1)];
        }
        if (tag.empty()) break;
        auto slash = tag.rfind('/');
        tag = slash == std::string::npos ? std::string() : tag.substr(0, slash);
      }
    }
  }

  if (responder_) return responder_(request);
  return std::nullopt;
}

namespace {
std::string reply_text(const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }
}  // namespace

MockScript MockScript::from_json(const nlohmann::json& j) {
  MockScript script;
  try {
    if (j.contains("digests")) {
      for (const auto& [digest, reply] : j.at("digests").items()) script.add_digest(digest, reply_text(reply));
    }
    if (j.contains("entries")) {
      for (const auto& e : j.at("entries")) {
        std::vector<std::string> replies;
        if (e.contains("replies")) {
          for (const auto& r : e.at("replies")) replies.push_back(reply_text(r));
        } else {
          replies.push_back(reply_text(e.at("reply")));
        }
        script.add(parse_template_id(e.at("template").get<std::string>()), e.at("instance").get<std::string>(),
                   std::move(replies), e.value("tag", std::string()));
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("mock script: ") + ex.what());
  }
  return script;
}

MockScript MockScript::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open mock script " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto j = nlohmann::json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ParseError, "mock script " + path + " is not valid JSON");
  return from_json(j);
}

}  // namespace omg
