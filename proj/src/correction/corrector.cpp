#include "omg/correction/corrector.hpp"

#include <algorithm>

#include "omg/core/parallel.hpp"
#include "omg/core/text.hpp"
#include "omg/error.hpp"
#include "omg/llm/prompts.hpp"

namespace omg {

int count_words(std::string_view text) { return static_cast<int>(text::split_whitespace(text).size()); }

int extra_words(std::string_view original, std::string_view rewrite) {
  return count_words(rewrite) - count_words(original);
}

std::string rewriting_requirements(const CorrectionProtocol& protocol) {
  auto block = protocol.kind == ProtocolKind::MinimalEdit ? kMinimalEditRequirements : kFreeFormRequirements;
  return substitute_slots(block, {{"LIMIT_WORDS", std::to_string(protocol.word_budget)}});
}

std::string_view to_string(RationaleSource s) {
  switch (s) {
    case RationaleSource::Oracle: return "oracle";
    case RationaleSource::SelfGenerated: return "self";
    case RationaleSource::LabelOnly: return "label-only";
  }
  return "oracle";
}

RationaleSource parse_rationale_source(std::string_view s) {
  if (text::iequals(s, "oracle")) return RationaleSource::Oracle;
  if (text::iequals(s, "self") || text::iequals(s, "self-generated")) return RationaleSource::SelfGenerated;
  if (text::iequals(s, "label-only") || text::iequals(s, "label_only")) return RationaleSource::LabelOnly;
  throw Error(ErrorCode::ParseError, "unknown rationale source '" + std::string(s) + "'");
}

std::string correction_tag(ProtocolKind kind, RationaleSource source) {
  return std::string(kind == ProtocolKind::MinimalEdit ? "minimal" : "free") + "/" + std::string(to_string(source));
}

namespace {

CorrectionResult rewrite(const PipelineEnv& env, const std::string& backend_id, const NewsInstance& instance,
                         const std::string& reason, const CorrectionProtocol& protocol, const std::string& tag) {
  if (protocol.word_budget < 0) throw Error(ErrorCode::InvalidInput, "word budget must be non-negative");
  Bindings bindings{{"REWRITING_REQUIREMENTS", rewriting_requirements(protocol)},
                    {"NEWS_HEADLINE", instance.preview.headline},
                    {"NEWS_CONTEXT", bounded_article(env, instance.article.body)},
                    {"MISLEADING_REASON", reason}};
  auto image = env.resolve_image ? env.resolve_image(instance.preview) : preview_image_blob(instance.preview);
  auto messages = render_prompt(TemplateId::HeadlineCorrection, bindings, image);
  RequestContext ctx{TemplateId::HeadlineCorrection, instance.instance_id, tag, 0};
  auto rec = env.gateway.complete_structured(backend_id, messages, SchemaId::Correction, &ctx);
  const auto& j = *rec.parsed;

  CorrectionResult result;
  result.protocol = protocol;
  result.misleading_cause = j.at("misleading_cause").get<std::string>();
  result.suggested_improvement = j.at("suggested_improvement").get<std::string>();
  result.rewritten_headline = j.at("rewritten_headline").get<std::string>();
  result.extra_words = extra_words(instance.preview.headline, result.rewritten_headline);
  result.budget_ok = within_budget(result.extra_words, protocol);
  return result;
}

}  // namespace

CorrectionResult correct_headline(const PipelineEnv& env, const std::string& backend_id,
                                  const NewsInstance& instance, const std::string& rationale,
                                  const CorrectionProtocol& protocol, const std::string& tag) {
  if (text::trim(rationale).empty()) {
    throw Error(ErrorCode::RationaleRequired, "correction of " + instance.instance_id + " needs a rationale");
  }
  return rewrite(env, backend_id, instance, rationale, protocol, tag);
}

CorrectionResult correct_headline_label_only(const PipelineEnv& env, const std::string& backend_id,
                                             const NewsInstance& instance, const CorrectionProtocol& protocol,
                                             const std::string& tag) {
  return rewrite(env, backend_id, instance, std::string(kLabelOnlyStatement), protocol, tag);
}

Judgment verify_correction(const PipelineEnv& env, const std::string& judge_backend, const NewsInstance& instance,
                           const std::string& rewritten_headline, const std::string& tag) {
  NewsInstance revised = instance;
  revised.preview.headline = rewritten_headline;
  return annotate(env, judge_backend, revised, tag).judgment;
}

std::size_t GoldBuildOutcome::succeeded(ProtocolKind kind) const {
  return static_cast<std::size_t>(std::count_if(traces.begin(), traces.end(), [&](const GoldTrace& t) {
    auto it = t.results.find(kind);
    return it != t.results.end() && correction_succeeded(it->second) && it->second.budget_ok;
  }));
}

GoldBuildOutcome build_gold_corrections(const PipelineEnv& env, const std::vector<NewsInstance>& misleading,
                                        const std::string& oracle_backend, const std::string& judge_backend,
                                        int word_budget, int concurrency) {
  std::vector<NewsInstance> work = misleading;
  std::sort(work.begin(), work.end(),
            [](const NewsInstance& a, const NewsInstance& b) { return a.instance_id < b.instance_id; });

  GoldBuildOutcome out;
  out.traces.resize(work.size());
  std::vector<bool> errored(work.size(), false);

  parallel_for(work.size(), concurrency, [&](std::size_t i) {
    const auto& inst = work[i];
    auto& trace = out.traces[i];
    trace.instance_id = inst.instance_id;
    const auto* oracle = inst.oracle_annotation();
    if (inst.final_label != Label::Misleading || !oracle) {
      trace.note = "skipped: needs final_label misleading and an annotation rationale";
      errored[i] = true;
      return;
    }
    bool keep = true;
    for (auto kind : {ProtocolKind::MinimalEdit, ProtocolKind::FreeForm}) {
      const std::string tag = "gold/" + std::string(kind == ProtocolKind::MinimalEdit ? "minimal" : "free");
      try {
        auto result =
            correct_headline(env, oracle_backend, inst, oracle->judgment.rationale, {kind, word_budget}, tag);
        result.verification = verify_correction(env, judge_backend, inst, result.rewritten_headline,
                                                verification_tag(tag));
        keep = keep && result.budget_ok && correction_succeeded(result);
        trace.results[kind] = std::move(result);
      } catch (const std::exception& ex) {
        trace.note = std::string(to_string(kind)) + ": " + ex.what();
        errored[i] = true;
        keep = false;
        return;
      }
    }
    trace.retained = keep;
    if (!keep) trace.note = "not corrected under both protocols within budget";
  });

  for (std::size_t i = 0; i < work.size(); ++i) {
    if (errored[i]) ++out.errored;
    if (!out.traces[i].retained) continue;
    NewsInstance inst = work[i];
    for (const auto& [kind, result] : out.traces[i].results) inst.gold_corrections[kind] = result.rewritten_headline;
    out.retained.push_back(std::move(inst));
  }
  return out;
}

}  // namespace omg
