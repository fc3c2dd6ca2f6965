#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "omg/llm/message.hpp"
#include "omg/llm/prompts.hpp"

namespace omg {

/// Identifies a pipeline request independently of its prompt text.
/// `tag` separates repeated uses of one template for the same instance
/// (verification runs, protocols, rationale sources); `repair_round` counts
/// structured-output repair attempts.
struct RequestContext {
  TemplateId template_id = TemplateId::ContentFiltering;
  std::string instance_id;
  std::string tag;
  int repair_round = 0;
};

struct MockRequest {
  const RequestContext* context = nullptr;  // null for context-free requests
  std::string digest;
  const std::vector<Message>* messages = nullptr;
};

using MockResponder = std::function<std::optional<std::string>(const MockRequest&)>;

/// Scripted replies for a Mock backend.
///
/// Lookup order for a request:
///   1. exact request digest
///   2. (template, instance, tag) walking the tag up its '/'-separated
///      prefixes to "", first for the instance id and then for "*"
///   3. the responder callback, if set
/// A scripted entry holds one reply per repair round; later rounds reuse the
/// last reply.
class MockScript {
 public:
  void add_digest(std::string digest, std::string reply);
  void add(TemplateId tpl, std::string instance_id, std::vector<std::string> replies, std::string tag = "");
  void set_responder(MockResponder responder);

  std::optional<std::string> lookup(const MockRequest& request) const;

  /// {"digests": {hex: reply}, "entries": [{"template", "instance", "tag"?,
  ///  "reply" | "replies"}]}. Replies may be strings or JSON values, which
  /// are serialized compactly.
  static MockScript from_json(const nlohmann::json& j);
  static MockScript load(const std::string& path);

 private:
  using Key = std::tuple<TemplateId, std::string, std::string>;
  std::map<std::string, std::string> digests_;
  std::map<Key, std::vector<std::string>> entries_;
  MockResponder responder_;
};

}  // namespace omg
