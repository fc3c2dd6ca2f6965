#include "fixtures.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <random>
#include <unistd.h>

#include "omg/core/json_io.hpp"

namespace omg::fixture {

namespace fs = std::filesystem;
using nlohmann::json;

std::string reply_content(bool message_suggestive) {
  return json{{"label", message_suggestive ? "ms" : "ld"},
              {"reason", message_suggestive ? "Announces an event with consequences." : "Describes a venue."}}
      .dump();
}

std::string reply_preview(const std::string& surface, const std::string& implication) {
  return json{{"Image–Headline", {{"Surface_Interpretation", surface}, {"Event_Implication", implication}}}}.dump();
}

std::string reply_context(const std::string& surface, const std::string& implication) {
  return json{{"News_Context", {{"Surface_Interpretation", surface}, {"Event_Implication", implication}}}}.dump();
}

std::string reply_judgment(Label label, const std::string& rationale) {
  return json{{"Misleading", label == Label::Misleading ? "Yes" : "No"}, {"Reason", rationale}}.dump();
}

std::string reply_correction(const std::string& rewritten, const std::string& cause) {
  return json{{"Misleading_Cause", cause},
              {"Suggested_Improvement", "State the outcome explicitly."},
              {"Rewritten_Caption", rewritten}}
      .dump();
}

std::string reply_frames(const std::vector<std::string>& frames) {
  return json{{"reasoning", "The preview foregrounds these angles."}, {"frames", frames}}.dump();
}

std::string reply_attribution(const std::string& category) {
  return json{{"attribution_class", category}, {"attribution_reason", "The headline drops the conditions."}}.dump();
}

std::string reply_modality(bool text_fixable) {
  return json{{"label", text_fixable ? "Text-Fixable" : "Image-Driven"}, {"reason", "Depends on the image role."}}
      .dump();
}

std::string reply_prototype(const std::string& description) {
  return json{{"Image description", description}, {"Image Prompt", "photo, " + description}}.dump();
}

NewsInstance make_instance(const std::string& id, const std::string& headline, const std::string& body,
                           const std::string& topic) {
  NewsInstance inst;
  inst.instance_id = id;
  inst.preview.headline = headline;
  inst.preview.image_ref = "img/" + id + ".jpg";
  inst.article.article_id = "a-" + id;
  inst.article.body = body;
  inst.article.topic = topic;
  return inst;
}

AnnotationBundle make_bundle(const std::string& backend, Label label, const std::string& rationale) {
  AnnotationBundle b;
  b.backend_id = backend;
  b.u_p = {Basis::Preview, backend + " preview surface", backend + " preview implication"};
  b.u_c = {Basis::Context, backend + " context surface", backend + " context implication"};
  b.judgment = {label, rationale.empty() ? backend + " rationale" : rationale};
  return b;
}

ScriptBuilder& ScriptBuilder::add(TemplateId tpl, const std::string& instance, const std::string& reply,
                                  const std::string& tag) {
  return add_rounds(tpl, instance, {reply}, tag);
}

ScriptBuilder& ScriptBuilder::add_rounds(TemplateId tpl, const std::string& instance,
                                         const std::vector<std::string>& replies, const std::string& tag) {
  json e{{"template", std::string(to_string(tpl))}, {"instance", instance}, {"replies", replies}};
  if (!tag.empty()) e["tag"] = tag;
  doc_["entries"].push_back(std::move(e));
  return *this;
}

ScriptBuilder& ScriptBuilder::annotation(const std::string& instance, Label label, const std::string& tag,
                                         const std::string& rationale) {
  add(TemplateId::PreviewUnderstanding, instance,
      reply_preview("Preview surface of " + instance, "Preview implication of " + instance), tag);
  add(TemplateId::ContextUnderstanding, instance,
      reply_context("Context surface of " + instance, "Context implication of " + instance), tag);
  add(TemplateId::MisleadingJudgment, instance,
      reply_judgment(label, rationale.empty() ? "Rationale for " + instance : rationale), tag);
  return *this;
}

std::shared_ptr<const MockScript> ScriptBuilder::build() const {
  return std::make_shared<const MockScript>(MockScript::from_json(doc_));
}

void ScriptBuilder::save(const fs::path& path) const {
  std::ofstream out(path);
  out << doc_.dump(1) << '\n';
}

std::shared_ptr<MockScript> capturing_script(std::shared_ptr<std::vector<Captured>> sink, Label label) {
  auto script = std::make_shared<MockScript>();
  auto mu = std::make_shared<std::mutex>();
  script->set_responder([sink, mu, label](const MockRequest& r) -> std::optional<std::string> {
    if (!r.context) return std::nullopt;
    {
      std::lock_guard lock(*mu);
      sink->push_back({r.context->template_id, r.context->instance_id, r.context->tag, *r.messages});
    }
    switch (r.context->template_id) {
      case TemplateId::ContentFiltering: return reply_content(true);
      case TemplateId::PreviewUnderstanding: return reply_preview("p-surface", "p-implication");
      case TemplateId::ContextUnderstanding: return reply_context("c-surface", "c-implication");
      case TemplateId::MisleadingJudgment: return reply_judgment(label, "judged rationale");
      case TemplateId::HeadlineCorrection: return reply_correction("A corrected headline");
      case TemplateId::FrameIdentification: return reply_frames({"Economic", "Political", "Policy"});
      case TemplateId::FineGrainedAttribution: return reply_attribution("Others");
      case TemplateId::ModalityAttribution: return reply_modality(true);
      case TemplateId::VisualPrototyping: return reply_prototype("a street");
    }
    return std::nullopt;
  });
  return script;
}

ModelBackend mock_backend(const std::string& id, std::shared_ptr<const MockScript> script) {
  ModelBackend b;
  b.backend_id = id;
  b.provider = Provider::Mock;
  b.model_name = "scripted-" + id;
  b.script = std::move(script);
  return b;
}

TempDir::TempDir(const std::string& prefix) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          (prefix + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string scenario_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "n%03zu", i);
  return buf;
}

namespace {

std::string scenario_headline(std::size_t i) {
  return "Officials announce measure " + std::to_string(i) + " after long debate";
}

}  // namespace

fs::path write_scenario(const fs::path& dir, const ScenarioSpec& spec) {
  fs::create_directories(dir / "img");
  ScriptBuilder alpha;
  ScriptBuilder beta;

  std::ofstream corpus(dir / "corpus.jsonl");
  for (std::size_t i = 0; i < spec.instances; ++i) {
    auto id = scenario_id(i);
    const bool off_topic = spec.off_topic_every && i % spec.off_topic_every == spec.off_topic_every - 1;
    const bool literal = spec.literal_every && i % spec.literal_every == spec.literal_every - 1;
    const Label a = i % 2 == 0 ? Label::Misleading : Label::NonMisleading;
    Label b = a;
    if (spec.disagree_every && i % spec.disagree_every == 3) {
      b = a == Label::Misleading ? Label::NonMisleading : Label::Misleading;
    }
    auto headline = scenario_headline(i);

    // Every third preview has an image file next to the corpus.
    std::string image_ref = "img/" + id + ".jpg";
    if (i % 3 == 0) {
      std::ofstream img(dir / image_ref, std::ios::binary);
      img << "\xff\xd8 fake jpeg " << id;
    }
    json line{{"id", id},
              {"headline", headline},
              {"image_ref", image_ref},
              {"body", "Full report " + std::to_string(i) + ": the measure passed only after concessions. "
                       "Critics say the outcome was narrower than announced."},
              {"topic", off_topic ? "sports" : "politics"}};
    corpus << line.dump() << '\n';

    alpha.add(TemplateId::ContentFiltering, id, reply_content(!literal));
    alpha.annotation(id, a, "", "Alpha rationale for " + id + ": the preview omits the concessions.");
    beta.annotation(id, b, "", "Beta rationale for " + id + ".");

    // Detection disagrees with the annotation on every sixth instance.
    Label detected = i % 6 == 0 ? (a == Label::Misleading ? Label::NonMisleading : Label::Misleading) : a;
    alpha.add(TemplateId::MisleadingJudgment, id, reply_judgment(detected, "Detector rationale for " + id + "."),
              "detect");

    const std::size_t extra = i % 5 == 4 ? 5 : 2;
    std::string rewrite = headline + (extra == 5 ? " despite broad and loud protests" : " despite protests");
    alpha.add(TemplateId::HeadlineCorrection, id, reply_correction(rewrite));

    const Label verified = i % 3 == 2 ? Label::Misleading : Label::NonMisleading;
    alpha.add(TemplateId::MisleadingJudgment, id, reply_judgment(verified, "Verification of " + id + "."), "verify");
  }

  alpha.add(TemplateId::FrameIdentification, "*", reply_frames({"Political", "Policy", "Economic"}));
  alpha.add(TemplateId::FrameIdentification, "*", reply_frames({"Political", "Legality", "Public Opinion"}),
            "frames/context");
  alpha.add(TemplateId::FineGrainedAttribution, "*", reply_attribution("Missing Background and Conditions"));
  alpha.add(TemplateId::ModalityAttribution, "*", reply_modality(true));
  alpha.add(TemplateId::VisualPrototyping, "*", reply_prototype("a committee room after the vote"));

  alpha.save(dir / "alpha.json");
  beta.save(dir / "beta.json");

  json config{{"backends",
               {{{"id", "alpha"}, {"provider", "mock"}, {"model", "scripted-alpha"}, {"mock_script", "alpha.json"}},
                {{"id", "beta"}, {"provider", "mock"}, {"model", "scripted-beta"}, {"mock_script", "beta.json"}}}},
              {"annotators", {"alpha", "beta"}},
              {"seeds", {{"balance", 17}, {"split", 23}}},
              {"concurrency", 4},
              {"dataset_dir", "data/dataset"},
              {"blob_dir", "data/blobs"},
              {"reports_dir", "reports"}};
  std::ofstream(dir / "config.json") << config.dump(2) << '\n';
  return dir / "config.json";
}

}  // namespace omg::fixture
