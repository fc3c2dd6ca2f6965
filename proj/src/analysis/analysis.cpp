#include "omg/analysis/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>

#include "omg/core/parallel.hpp"
#include "omg/core/taxonomy.hpp"
#include "omg/error.hpp"
#include "omg/llm/prompts.hpp"

namespace omg {

using nlohmann::json;

namespace {

std::shared_ptr<const ImageBlob> image_for(const PipelineEnv& env, const NewsPreview& preview) {
  return env.resolve_image ? env.resolve_image(preview) : preview_image_blob(preview);
}

json structured(const PipelineEnv& env, const std::string& backend_id, TemplateId tpl, const Bindings& bindings,
                std::shared_ptr<const ImageBlob> image, const CallScope& scope) {
  auto messages = render_prompt(tpl, bindings, std::move(image));
  RequestContext ctx{tpl, scope.instance_id, scope.tag, 0};
  return std::move(*env.gateway.complete_structured(backend_id, messages, prompt_template(tpl).expected_schema, &ctx)
                        .parsed);
}

void require_misleading(const NewsInstance& instance, const char* what) {
  if (instance.final_label != Label::Misleading) {
    throw Error(ErrorCode::InvalidInput,
                std::string(what) + " applies to misleading instances only; " + instance.instance_id + " is not");
  }
}

}  // namespace

FrameInput preview_frame_input(const PipelineEnv& env, const NewsPreview& preview) {
  return {preview.headline, image_for(env, preview), false};
}

FrameInput article_frame_input(const PipelineEnv& env, const NewsArticle& article) {
  return {bounded_article(env, article.body), nullptr, true};
}

FrameSet identify_frames(const PipelineEnv& env, const std::string& backend_id, const FrameInput& input,
                         const CallScope& scope) {
  Bindings bindings{{"TAXONOMY", frame_taxonomy_listing()}, {"NEWS_TEXT", input.text}};
  if (input.is_article) {
    bindings["MATERIAL"] = "full news article";
    bindings["FOCUS"] = "Analyze the perspectives the article foregrounds.";
    bindings["IMAGE_LINE"] = "";
  }
  auto messages = render_prompt(TemplateId::FrameIdentification, bindings, input.image);
  RequestContext ctx{TemplateId::FrameIdentification, scope.instance_id, scope.tag, 0};

  for (int attempt = 0;; ++attempt) {
    auto rec = env.gateway.complete_structured(backend_id, messages, SchemaId::Frames, &ctx);
    const auto& j = *rec.parsed;
    try {
      return FrameSet::make(j.at("frames").get<std::vector<std::string>>(), j.at("reasoning").get<std::string>());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TaxonomyViolation || attempt >= 1) throw;
      messages.push_back({"assistant", {ContentPart::make_text(rec.reply)}});
      messages.push_back(
          {"user",
           {ContentPart::make_text(std::string("Your previous reply could not be used: ") + e.what() +
                                   ". Select exactly three different frames, each spelled exactly as in the "
                                   "taxonomy: " +
                                   frame_taxonomy_listing())}});
      ctx.repair_round += rec.repair_rounds + 1;
    }
  }
}

double frame_overlap(const FrameSet& a, const FrameSet& b) {
  std::set<std::string> sa(a.frames().begin(), a.frames().end());
  std::size_t shared = 0;
  for (const auto& f : std::set<std::string>(b.frames().begin(), b.frames().end())) shared += sa.count(f);
  return static_cast<double>(shared) / 3.0;
}

AttributionLabel attribute_cause(const PipelineEnv& env, const std::string& backend_id, const NewsInstance& instance,
                                 const std::string& rationale, const CallScope& scope) {
  require_misleading(instance, "cause attribution");
  auto j = structured(env, backend_id, TemplateId::FineGrainedAttribution,
                      {{"NEWS_HEADLINE", instance.preview.headline},
                       {"NEWS_CONTEXT", bounded_article(env, instance.article.body)},
                       {"REASON", rationale}},
                      image_for(env, instance.preview), scope);
  return {parse_attribution_class(j.at("class").get<std::string>()), j.at("reason").get<std::string>()};
}

namespace {

std::string interpretation_text(const Interpretation& u) {
  return "Surface interpretation: " + u.surface_interpretation + "\nEvent implication: " + u.event_implication;
}

}  // namespace

ModalityLabel attribute_modality(const PipelineEnv& env, const std::string& backend_id, const NewsInstance& instance,
                                 const std::string& rationale, const Interpretation& u_p, const Interpretation& u_c,
                                 const CallScope& scope) {
  require_misleading(instance, "modality attribution");
  auto j = structured(env, backend_id, TemplateId::ModalityAttribution,
                      {{"NEWS_HEADLINE", instance.preview.headline},
                       {"NEWS_CONTEXT", bounded_article(env, instance.article.body)},
                       {"READER_PREVIEW", interpretation_text(u_p)},
                       {"READER_CONTEXT", interpretation_text(u_c)},
                       {"MISLEADING_REASON", rationale}},
                      image_for(env, instance.preview), scope);
  return {parse_modality_class(j.at("class").get<std::string>()), j.at("reason").get<std::string>()};
}

VisualPrototype visual_prototype(const PipelineEnv& env, const std::string& backend_id, const NewsInstance& instance,
                                 const std::string& original_rationale, const CorrectionResult& failed_correction,
                                 const CallScope& scope) {
  if (!failed_correction.verification || failed_correction.verification->label != Label::Misleading) {
    throw Error(ErrorCode::PreconditionNotFailed,
                "visual prototyping needs a rewrite that still verified as misleading (" + instance.instance_id +
                    ")");
  }
  auto j = structured(env, backend_id, TemplateId::VisualPrototyping,
                      {{"HEADLINE", instance.preview.headline},
                       {"CONTEXT", bounded_article(env, instance.article.body)},
                       {"ORIGINAL_RATIONALE", original_rationale},
                       {"REWRITTEN_HEADLINE", failed_correction.rewritten_headline},
                       {"REWRITTEN_RATIONALE", failed_correction.verification->rationale}},
                      image_for(env, instance.preview), scope);
  return {j.at("image_description").get<std::string>(), j.at("image_prompt").get<std::string>()};
}

namespace {

template <typename Fn>
std::vector<AnalysisFailure> for_each_instance(std::vector<NewsInstance>& instances, int concurrency, Fn&& fn) {
  std::vector<std::string> errors(instances.size());
  parallel_for(instances.size(), concurrency, [&](std::size_t i) {
    try {
      fn(instances[i]);
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  });
  std::vector<AnalysisFailure> out;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!errors[i].empty()) out.push_back({instances[i].instance_id, errors[i]});
  }
  return out;
}

std::string protocol_short(ProtocolKind k) { return k == ProtocolKind::MinimalEdit ? "minimal" : "free"; }

}  // namespace

std::vector<AnalysisFailure> analyze_frames(const PipelineEnv& env, const std::string& backend_id,
                                            std::vector<NewsInstance>& instances, int concurrency) {
  return for_each_instance(instances, concurrency, [&](NewsInstance& inst) {
    InstanceAnalysis a = inst.analysis.value_or(InstanceAnalysis{});
    a.frames_preview =
        identify_frames(env, backend_id, preview_frame_input(env, inst.preview), {inst.instance_id, "frames/preview"});
    a.frames_context =
        identify_frames(env, backend_id, article_frame_input(env, inst.article), {inst.instance_id, "frames/context"});
    for (const auto& [kind, headline] : inst.gold_corrections) {
      NewsPreview rewritten = inst.preview;
      rewritten.headline = headline;
      a.frames_rewritten[kind] = identify_frames(env, backend_id, preview_frame_input(env, rewritten),
                                                 {inst.instance_id, "frames/rewritten/" + protocol_short(kind)});
    }
    inst.analysis = std::move(a);
  });
}

std::vector<AnalysisFailure> analyze_attribution(const PipelineEnv& env, const std::string& backend_id,
                                                 std::vector<NewsInstance>& instances, int concurrency) {
  return for_each_instance(instances, concurrency, [&](NewsInstance& inst) {
    if (inst.final_label != Label::Misleading) return;
    const auto* oracle = inst.oracle_annotation();
    if (!oracle) throw Error(ErrorCode::MissingAnnotation, "no rationale for " + inst.instance_id);
    InstanceAnalysis a = inst.analysis.value_or(InstanceAnalysis{});
    a.attribution = attribute_cause(env, backend_id, inst, oracle->judgment.rationale, {inst.instance_id, "attribution"});
    inst.analysis = std::move(a);
  });
}

std::vector<AnalysisFailure> analyze_modality(const PipelineEnv& env, const std::string& backend_id,
                                              std::vector<NewsInstance>& instances, int concurrency) {
  return for_each_instance(instances, concurrency, [&](NewsInstance& inst) {
    if (inst.final_label != Label::Misleading) return;
    const auto* oracle = inst.oracle_annotation();
    if (!oracle) throw Error(ErrorCode::MissingAnnotation, "no rationale for " + inst.instance_id);
    InstanceAnalysis a = inst.analysis.value_or(InstanceAnalysis{});
    a.modality = attribute_modality(env, backend_id, inst, oracle->judgment.rationale, oracle->u_p, oracle->u_c,
                                    {inst.instance_id, "modality"});
    inst.analysis = std::move(a);
  });
}

std::vector<PrototypeRecord> prototypes_for_failures(const PipelineEnv& env, const std::string& backend_id,
                                                     const std::vector<NewsInstance>& instances,
                                                     const SetupResult& setup, int concurrency) {
  std::map<std::string, const NewsInstance*> by_id;
  for (const auto& inst : instances) by_id[inst.instance_id] = &inst;
  std::vector<const SetupTrace*> failed;
  for (const auto& t : setup.traces) {
    if (t.correction && t.correction->verification && t.correction->verification->label == Label::Misleading) {
      failed.push_back(&t);
    }
  }
  const std::string tag =
      "prototype/" + correction_tag(setup.protocol.kind, setup_spec(setup.spec.kind).rationale_source);
  std::vector<PrototypeRecord> out(failed.size());
  parallel_for(failed.size(), concurrency, [&](std::size_t i) {
    const auto& t = *failed[i];
    auto& rec = out[i];
    rec.instance_id = t.instance_id;
    rec.rewritten_headline = t.correction->rewritten_headline;
    try {
      auto it = by_id.find(t.instance_id);
      if (it == by_id.end()) throw Error(ErrorCode::MissingAnnotation, "unknown instance " + t.instance_id);
      const auto* oracle = it->second->oracle_annotation();
      if (!oracle) throw Error(ErrorCode::MissingAnnotation, "no rationale for " + t.instance_id);
      rec.prototype =
          visual_prototype(env, backend_id, *it->second, oracle->judgment.rationale, *t.correction, {t.instance_id, tag});
    } catch (const std::exception& ex) {
      rec.error = ex.what();
    }
  });
  return out;
}

AnalysisSummary summarize_analysis(const std::vector<NewsInstance>& instances) {
  AnalysisSummary s;
  double mis_sum = 0, non_sum = 0;
  std::size_t mis_n = 0, non_n = 0;
  std::map<std::string, std::pair<double, std::size_t>> rewritten;
  for (const auto& inst : instances) {
    if (!inst.final_label) continue;
    ++s.instances;
    if (*inst.final_label == Label::Misleading) ++s.misleading;
    if (!inst.analysis) continue;
    const auto& a = *inst.analysis;
    if (a.attribution) ++s.attribution[std::string(to_string(a.attribution->cls))];
    if (a.modality) ++s.modality[std::string(to_string(a.modality->cls))];
    if (a.frames_preview) {
      for (const auto& f : a.frames_preview->frames()) ++s.preview_frames[f];
    }
    if (a.frames_context) {
      for (const auto& f : a.frames_context->frames()) ++s.context_frames[f];
    }
    if (a.frames_preview && a.frames_context) {
      double o = frame_overlap(*a.frames_preview, *a.frames_context);
      if (*inst.final_label == Label::Misleading) {
        mis_sum += o;
        ++mis_n;
      } else {
        non_sum += o;
        ++non_n;
      }
    }
    if (a.frames_context) {
      for (const auto& [kind, fs] : a.frames_rewritten) {
        auto& acc = rewritten[std::string(to_string(kind))];
        acc.first += frame_overlap(fs, *a.frames_context);
        ++acc.second;
      }
    }
  }
  if (mis_n) s.mean_overlap_misleading = mis_sum / static_cast<double>(mis_n);
  if (non_n) s.mean_overlap_non_misleading = non_sum / static_cast<double>(non_n);
  for (const auto& [k, acc] : rewritten) s.mean_overlap_rewritten[k] = acc.first / static_cast<double>(acc.second);
  return s;
}

json to_json(const AnalysisSummary& s) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(); };
  json rewritten = json::object();
  for (const auto& [k, v] : s.mean_overlap_rewritten) rewritten[k] = opt(v);
  return {{"instances", s.instances},
          {"misleading", s.misleading},
          {"attribution", s.attribution},
          {"modality", s.modality},
          {"preview_frames", s.preview_frames},
          {"context_frames", s.context_frames},
          {"mean_overlap_misleading", opt(s.mean_overlap_misleading)},
          {"mean_overlap_non_misleading", opt(s.mean_overlap_non_misleading)},
          {"mean_overlap_rewritten_vs_context", rewritten}};
}

std::string format_analysis_summary(const AnalysisSummary& s) {
  std::ostringstream os;
  auto fmt = [](const std::optional<double>& v) {
    if (!v) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return std::string(buf);
  };
  os << "Instances: " << s.instances << " (misleading " << s.misleading << ")\n";
  if (!s.attribution.empty()) {
    os << "Attribution\n";
    for (const auto& [k, n] : s.attribution) os << "  " << k << ": " << n << '\n';
  }
  if (!s.modality.empty()) {
    os << "Modality\n";
    for (const auto& [k, n] : s.modality) os << "  " << k << ": " << n << '\n';
  }
  os << "Frame overlap, preview vs context: misleading " << fmt(s.mean_overlap_misleading) << ", non-misleading "
     << fmt(s.mean_overlap_non_misleading) << '\n';
  for (const auto& [k, v] : s.mean_overlap_rewritten) os << "Frame overlap, " << k << " rewrite vs context: " << fmt(v) << '\n';
  return os.str();
}

}  // namespace omg
