#include "omg/core/json_io.hpp"

namespace omg {

void to_json(json& j, const Interpretation& v) {
  j = json{{"basis", to_string(v.basis)},
           {"surface_interpretation", v.surface_interpretation},
           {"event_implication", v.event_implication}};
}

void from_json(const json& j, Interpretation& v) {
  v.basis = parse_basis(j.at("basis").get<std::string>());
  v.surface_interpretation = j.at("surface_interpretation").get<std::string>();
  v.event_implication = j.at("event_implication").get<std::string>();
}

void to_json(json& j, const Judgment& v) {
  j = json{{"label", to_string(v.label)}, {"rationale", v.rationale}};
}

void from_json(const json& j, Judgment& v) {
  v.label = parse_label(j.at("label").get<std::string>());
  v.rationale = j.at("rationale").get<std::string>();
}

void to_json(json& j, const CorrectionProtocol& v) {
  j = json{{"kind", to_string(v.kind)}, {"word_budget", v.word_budget}};
}

void from_json(const json& j, CorrectionProtocol& v) {
  v.kind = parse_protocol_kind(j.at("kind").get<std::string>());
  v.word_budget = j.at("word_budget").get<int>();
}

void to_json(json& j, const CorrectionResult& v) {
  j = json{{"protocol", v.protocol},
           {"misleading_cause", v.misleading_cause},
           {"suggested_improvement", v.suggested_improvement},
           {"rewritten_headline", v.rewritten_headline},
           {"extra_words", v.extra_words},
           {"budget_ok", v.budget_ok},
           {"verification", nullptr}};
  if (v.verification) j["verification"] = *v.verification;
}

void from_json(const json& j, CorrectionResult& v) {
  v.protocol = j.at("protocol").get<CorrectionProtocol>();
  v.misleading_cause = j.at("misleading_cause").get<std::string>();
  v.suggested_improvement = j.at("suggested_improvement").get<std::string>();
  v.rewritten_headline = j.at("rewritten_headline").get<std::string>();
  v.extra_words = j.at("extra_words").get<int>();
  v.budget_ok = j.at("budget_ok").get<bool>();
  v.verification.reset();
  if (j.contains("verification") && !j["verification"].is_null()) {
    v.verification = j["verification"].get<Judgment>();
  }
}

void to_json(json& j, const AnnotationBundle& v) {
  j = json{{"backend_id", v.backend_id}, {"u_p", v.u_p}, {"u_c", v.u_c}, {"judgment", v.judgment}};
}

void from_json(const json& j, AnnotationBundle& v) {
  v.backend_id = j.at("backend_id").get<std::string>();
  v.u_p = j.at("u_p").get<Interpretation>();
  v.u_c = j.at("u_c").get<Interpretation>();
  v.judgment = j.at("judgment").get<Judgment>();
}

void to_json(json& j, const FrameSet& v) {
  j = json{{"frames", v.frames()}, {"reasoning", v.reasoning()}};
}

void from_json(const json& j, FrameSet& v) {
  v = FrameSet::make(j.at("frames").get<std::vector<std::string>>(),
                     j.at("reasoning").get<std::string>());
}

void to_json(json& j, const AttributionLabel& v) {
  j = json{{"class", to_string(v.cls)}, {"reason", v.reason}};
}

void from_json(const json& j, AttributionLabel& v) {
  v.cls = parse_attribution_class(j.at("class").get<std::string>());
  v.reason = j.at("reason").get<std::string>();
}

void to_json(json& j, const ModalityLabel& v) {
  j = json{{"class", to_string(v.cls)}, {"reason", v.reason}};
}

void from_json(const json& j, ModalityLabel& v) {
  v.cls = parse_modality_class(j.at("class").get<std::string>());
  v.reason = j.at("reason").get<std::string>();
}

void to_json(json& j, const ContentSignal& v) {
  j = json{{"label", to_string(v.label)}, {"reason", v.reason}};
}

void from_json(const json& j, ContentSignal& v) {
  v.label = parse_content_label(j.at("label").get<std::string>());
  v.reason = j.at("reason").get<std::string>();
}

void to_json(json& j, const InstanceAnalysis& v) {
  j = json::object();
  if (v.frames_preview) j["frames_preview"] = *v.frames_preview;
  if (v.frames_context) j["frames_context"] = *v.frames_context;
  if (!v.frames_rewritten.empty()) {
    json rw = json::object();
    for (const auto& [kind, fs] : v.frames_rewritten) rw[std::string(to_string(kind))] = fs;
    j["frames_rewritten"] = rw;
  }
  if (v.attribution) j["attribution"] = *v.attribution;
  if (v.modality) j["modality"] = *v.modality;
}

void from_json(const json& j, InstanceAnalysis& v) {
  v = InstanceAnalysis{};
  if (j.contains("frames_preview")) v.frames_preview = j["frames_preview"].get<FrameSet>();
  if (j.contains("frames_context")) v.frames_context = j["frames_context"].get<FrameSet>();
  if (j.contains("frames_rewritten")) {
    for (const auto& [key, fs] : j["frames_rewritten"].items()) {
      v.frames_rewritten.emplace(parse_protocol_kind(key), fs.get<FrameSet>());
    }
  }
  if (j.contains("attribution")) v.attribution = j["attribution"].get<AttributionLabel>();
  if (j.contains("modality")) v.modality = j["modality"].get<ModalityLabel>();
}

void to_json(json& j, const NewsInstance& v) {
  j = json{{"id", v.instance_id},
           {"preview", {{"headline", v.preview.headline}, {"image_ref", v.preview.image_ref}}},
           {"article",
            {{"article_id", v.article.article_id}, {"body", v.article.body}, {"topic", v.article.topic}}},
           {"split", to_string(v.split)},
           {"annotations", v.annotations}};
  if (v.content_signal) j["content_signal"] = *v.content_signal;
  if (v.final_label) j["final_label"] = to_string(*v.final_label);
  if (!v.gold_corrections.empty()) {
    json gold = json::object();
    for (const auto& [kind, headline] : v.gold_corrections) gold[std::string(to_string(kind))] = headline;
    j["gold_corrections"] = gold;
  }
  if (v.analysis) j["analysis"] = *v.analysis;
}

void from_json(const json& j, NewsInstance& v) {
  v = NewsInstance{};
  v.instance_id = j.at("id").get<std::string>();
  const auto& p = j.at("preview");
  v.preview.headline = p.at("headline").get<std::string>();
  v.preview.image_ref = p.at("image_ref").get<std::string>();
  const auto& a = j.at("article");
  v.article.article_id = a.at("article_id").get<std::string>();
  v.article.body = a.at("body").get<std::string>();
  v.article.topic = a.at("topic").get<std::string>();
  v.split = parse_split(j.value("split", std::string("unassigned")));
  if (j.contains("annotations")) v.annotations = j["annotations"].get<std::vector<AnnotationBundle>>();
  if (j.contains("content_signal")) v.content_signal = j["content_signal"].get<ContentSignal>();
  if (j.contains("final_label")) v.final_label = parse_label(j["final_label"].get<std::string>());
  if (j.contains("gold_corrections")) {
    for (const auto& [key, headline] : j["gold_corrections"].items()) {
      v.gold_corrections.emplace(parse_protocol_kind(key), headline.get<std::string>());
    }
  }
  if (j.contains("analysis")) v.analysis = j["analysis"].get<InstanceAnalysis>();
}

void to_json(json& j, const Confusion& v) {
  j = json{{"tp", v.tp}, {"fp", v.fp}, {"tn", v.tn}, {"fn", v.fn}};
}

void to_json(json& j, const ClassScores& v) {
  j = json{{"precision", v.precision}, {"recall", v.recall}, {"f1", v.f1}};
}

void to_json(json& j, const EvalReport& v) {
  j = json{{"confusion", v.confusion},
           {"accuracy", v.accuracy},
           {"misleading", v.misleading},
           {"non_misleading", v.non_misleading}};
}

}  // namespace omg
