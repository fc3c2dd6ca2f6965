#pragma once

// Shared helpers for the unit and acceptance suites: well-formed mock
// replies, instance builders, mock-script builders and on-disk scenarios.

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "omg/core/types.hpp"
#include "omg/llm/gateway.hpp"
#include "omg/llm/mock.hpp"

namespace omg::fixture {

std::string reply_content(bool message_suggestive);
std::string reply_preview(const std::string& surface, const std::string& implication);
std::string reply_context(const std::string& surface, const std::string& implication);
std::string reply_judgment(Label label, const std::string& rationale);
std::string reply_correction(const std::string& rewritten, const std::string& cause = "The headline omits the outcome.");
std::string reply_frames(const std::vector<std::string>& frames);
std::string reply_attribution(const std::string& category);
std::string reply_modality(bool text_fixable);
std::string reply_prototype(const std::string& description);

NewsInstance make_instance(const std::string& id, const std::string& headline, const std::string& body,
                           const std::string& topic = "politics");

/// Annotation bundle with distinct texts per backend.
AnnotationBundle make_bundle(const std::string& backend, Label label, const std::string& rationale = "");

/// Builds the JSON form of a mock script.
class ScriptBuilder {
 public:
  ScriptBuilder& add(TemplateId tpl, const std::string& instance, const std::string& reply,
                     const std::string& tag = "");
  ScriptBuilder& add_rounds(TemplateId tpl, const std::string& instance, const std::vector<std::string>& replies,
                            const std::string& tag = "");
  /// Stage 1-3 replies for one instance under `tag`.
  ScriptBuilder& annotation(const std::string& instance, Label label, const std::string& tag = "",
                            const std::string& rationale = "");

  const nlohmann::json& doc() const { return doc_; }
  std::shared_ptr<const MockScript> build() const;
  void save(const std::filesystem::path& path) const;

 private:
  nlohmann::json doc_ = {{"entries", nlohmann::json::array()}};
};

/// A request seen by a capturing script.
struct Captured {
  TemplateId tpl;
  std::string instance_id;
  std::string tag;
  std::vector<Message> messages;
};

/// Mock script answering every template with a valid reply (judgments use
/// `label`) and recording each request into `sink`.
std::shared_ptr<MockScript> capturing_script(std::shared_ptr<std::vector<Captured>> sink,
                                             Label label = Label::Misleading);

ModelBackend mock_backend(const std::string& id, std::shared_ptr<const MockScript> script);

/// Removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "omg-test");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// A complete offline project under `dir`: corpus.jsonl, two mock scripts and
/// config.json (annotators "alpha" and "beta"). Labels, disagreements,
/// literal previews and rewrite outcomes follow fixed arithmetic rules of the
/// instance index so every run sees the same world.
struct ScenarioSpec {
  std::size_t instances = 100;
  std::size_t literal_every = 10;   // every n-th preview is literal-descriptive
  std::size_t disagree_every = 7;   // every n-th instance: annotators disagree
  std::size_t off_topic_every = 0;  // 0 = none
};

std::filesystem::path write_scenario(const std::filesystem::path& dir, const ScenarioSpec& spec = {});

std::string scenario_id(std::size_t i);

}  // namespace omg::fixture
