#include "omg/pipeline/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "omg/core/parallel.hpp"
#include "omg/core/random.hpp"
#include "omg/core/taxonomy.hpp"
#include "omg/core/text.hpp"
#include "omg/error.hpp"
#include "omg/llm/prompts.hpp"

namespace omg {

using nlohmann::json;

std::shared_ptr<const ImageBlob> preview_image_blob(const NewsPreview& preview) {
  auto blob = std::make_shared<ImageBlob>();
  blob->ref = preview.image_ref;
  blob->bytes = preview.image_bytes;
  if (!blob->bytes.empty()) {
    auto mime = sniff_image_mime(blob->bytes);
    if (mime != "application/octet-stream") blob->mime_type = mime;
  }
  return blob;
}

std::string bounded_article(const PipelineEnv& env, const std::string& body) {
  if (!env.max_input_chars || body.size() <= *env.max_input_chars) return body;
  std::size_t cut = *env.max_input_chars;
  // Back off continuation bytes so the cut lands on a code point boundary.
  while (cut > 0 && (static_cast<unsigned char>(body[cut]) & 0xC0) == 0x80) --cut;
  return body.substr(0, cut);
}

namespace {

std::shared_ptr<const ImageBlob> image_for(const PipelineEnv& env, const NewsPreview& preview) {
  return env.resolve_image ? env.resolve_image(preview) : preview_image_blob(preview);
}

json structured(const PipelineEnv& env, const std::string& backend_id, TemplateId tpl, const Bindings& bindings,
                std::shared_ptr<const ImageBlob> image, const CallScope& scope) {
  auto messages = render_prompt(tpl, bindings, std::move(image));
  RequestContext ctx{tpl, scope.instance_id, scope.tag, 0};
  auto rec = env.gateway.complete_structured(backend_id, messages, prompt_template(tpl).expected_schema, &ctx);
  return std::move(*rec.parsed);
}

Interpretation interpretation_from(const json& j, Basis basis) {
  return {basis, j.at("surface_interpretation").get<std::string>(), j.at("event_implication").get<std::string>()};
}

template <typename F>
auto in_stage(int stage, const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), "stage " + std::to_string(stage) + " (" + name + "): " + e.what(), stage);
  }
}

}  // namespace

bool filter_by_topic(const NewsArticle& article) { return is_taxonomy_topic(article.topic); }

ContentSignal classify_content_signal(const PipelineEnv& env, const std::string& backend_id,
                                      const NewsPreview& preview, const CallScope& scope) {
  auto j = structured(env, backend_id, TemplateId::ContentFiltering, {{"NEWS_HEADLINE", preview.headline}},
                      image_for(env, preview), scope);
  return {parse_content_label(j.at("label").get<std::string>()), j.at("reason").get<std::string>()};
}

Interpretation simulate_preview_understanding(const PipelineEnv& env, const std::string& backend_id,
                                              const NewsPreview& preview, const CallScope& scope,
                                              bool with_image) {
  auto j = structured(env, backend_id, TemplateId::PreviewUnderstanding, {{"NEWS_HEADLINE", preview.headline}},
                      with_image ? image_for(env, preview) : nullptr, scope);
  return interpretation_from(j, Basis::Preview);
}

Interpretation simulate_context_understanding(const PipelineEnv& env, const std::string& backend_id,
                                              const NewsArticle& article, const CallScope& scope) {
  if (text::trim(article.body).empty()) {
    throw Error(ErrorCode::InvalidInput, "article.body: empty; context understanding needs the article text");
  }
  auto j = structured(env, backend_id, TemplateId::ContextUnderstanding,
                      {{"NEWS_CONTEXT", bounded_article(env, article.body)}}, nullptr, scope);
  return interpretation_from(j, Basis::Context);
}

std::string reader_interpretations_text(const Interpretation& u_p, const Interpretation& u_c) {
  json j{{"Image–Headline",
          {{"Surface_Interpretation", u_p.surface_interpretation}, {"Event_Implication", u_p.event_implication}}},
         {"News_Context",
          {{"Surface_Interpretation", u_c.surface_interpretation}, {"Event_Implication", u_c.event_implication}}}};
  return j.dump(2);
}

Judgment judge_misleading(const PipelineEnv& env, const std::string& backend_id, const NewsPreview& preview,
                          const NewsArticle& article, const Interpretation& u_p, const Interpretation& u_c,
                          const CallScope& scope, bool with_image) {
  if (u_p.basis != Basis::Preview || u_c.basis != Basis::Context) {
    throw Error(ErrorCode::InvalidInput, "judgment needs a preview interpretation and a context interpretation");
  }
  auto j = structured(env, backend_id, TemplateId::MisleadingJudgment,
                      {{"NEWS_HEADLINE", preview.headline},
                       {"NEWS_CONTEXT", bounded_article(env, article.body)},
                       {"READER_INFER", reader_interpretations_text(u_p, u_c)}},
                      with_image ? image_for(env, preview) : nullptr, scope);
  return {parse_label(j.at("label").get<std::string>()), j.at("rationale").get<std::string>()};
}

AnnotationBundle annotate(const PipelineEnv& env, const std::string& backend_id, const NewsInstance& instance,
                          const std::string& tag) {
  CallScope scope{instance.instance_id, tag};
  AnnotationBundle bundle;
  bundle.backend_id = backend_id;
  bundle.u_p = in_stage(1, "preview understanding",
                        [&] { return simulate_preview_understanding(env, backend_id, instance.preview, scope); });
  bundle.u_c = in_stage(2, "context understanding",
                        [&] { return simulate_context_understanding(env, backend_id, instance.article, scope); });
  bundle.judgment = in_stage(3, "misleading judgment", [&] {
    return judge_misleading(env, backend_id, instance.preview, instance.article, bundle.u_p, bundle.u_c, scope);
  });
  return bundle;
}

std::optional<Label> cross_model_filter(const AnnotationBundle& a, const AnnotationBundle& b) {
  if (a.backend_id == b.backend_id) {
    throw Error(ErrorCode::SameBackend, "agreement filtering needs two distinct annotators, got '" + a.backend_id +
                                            "' twice");
  }
  if (a.judgment.label != b.judgment.label) return std::nullopt;
  return a.judgment.label;
}

namespace {

bool by_id(const NewsInstance& x, const NewsInstance& y) { return x.instance_id < y.instance_id; }

// Independent stream per class so adding instances of one class never
// changes the draw for the other.
std::uint64_t class_seed(std::uint64_t seed, Label label) {
  return seed * 2 + (label == Label::Misleading ? 0 : 1);
}

}  // namespace

std::vector<NewsInstance> balance_dataset(const std::vector<NewsInstance>& instances, std::uint64_t seed) {
  std::vector<NewsInstance> mis, non;
  for (const auto& inst : instances) {
    if (!inst.final_label) {
      throw Error(ErrorCode::InvalidInput, "balance: instance " + inst.instance_id + " has no final_label");
    }
    (*inst.final_label == Label::Misleading ? mis : non).push_back(inst);
  }
  if (mis.empty() || non.empty()) {
    throw Error(ErrorCode::EmptyClass, std::string("balance: no ") + (mis.empty() ? "misleading" : "non-misleading") +
                                           " instances");
  }
  std::sort(mis.begin(), mis.end(), by_id);
  std::sort(non.begin(), non.end(), by_id);
  auto& major = mis.size() > non.size() ? mis : non;
  auto keep = std::min(mis.size(), non.size());
  if (major.size() > keep) {
    seeded_shuffle(major, class_seed(seed, *major.front().final_label));
    major.resize(keep);
  }
  std::vector<NewsInstance> out;
  out.reserve(keep * 2);
  out.insert(out.end(), std::make_move_iterator(mis.begin()), std::make_move_iterator(mis.end()));
  out.insert(out.end(), std::make_move_iterator(non.begin()), std::make_move_iterator(non.end()));
  std::sort(out.begin(), out.end(), by_id);
  return out;
}

void assign_splits(std::vector<NewsInstance>& instances, std::uint64_t seed, double test_fraction) {
  if (test_fraction < 0.0 || test_fraction > 1.0) {
    throw Error(ErrorCode::InvalidInput, "split: test_fraction must lie in [0, 1]");
  }
  for (Label label : {Label::Misleading, Label::NonMisleading}) {
    std::vector<std::string> ids;
    for (const auto& inst : instances) {
      if (inst.final_label == label) ids.push_back(inst.instance_id);
    }
    std::sort(ids.begin(), ids.end());
    seeded_shuffle(ids, class_seed(seed, label));
    auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(ids.size()) * test_fraction));
    std::map<std::string, Split> split;
    for (std::size_t i = 0; i < ids.size(); ++i) split[ids[i]] = i < n_test ? Split::Test : Split::Train;
    for (auto& inst : instances) {
      if (auto it = split.find(inst.instance_id); it != split.end() && inst.final_label == label) {
        inst.split = it->second;
      }
    }
  }
}

AnnotationOutcome run_annotation(const PipelineEnv& env, std::vector<NewsInstance> instances,
                                 const AnnotationConfig& config) {
  if (config.annotator_a == config.annotator_b) {
    throw Error(ErrorCode::SameBackend, "annotators must be two distinct backends");
  }
  const std::string filter = config.filter_backend.empty() ? config.annotator_a : config.filter_backend;

  AnnotationOutcome out;
  out.stats.input = instances.size();
  std::sort(instances.begin(), instances.end(), by_id);

  std::vector<NewsInstance> topical;
  for (auto& inst : instances) {
    if (filter_by_topic(inst.article)) {
      topical.push_back(std::move(inst));
    } else {
      ++out.stats.topic_rejected;
    }
  }

  std::mutex mu;
  auto record_failure = [&](const std::string& id, std::string step, const std::exception& ex) {
    StageFailure f{id, std::move(step), std::nullopt, "Error", ex.what()};
    if (const auto* e = dynamic_cast<const Error*>(&ex)) {
      f.stage = e->stage();
      f.code = std::string(to_string(e->code()));
    }
    std::lock_guard lock(mu);
    out.failures.push_back(std::move(f));
  };

  // Per instance: content signal, then both annotators.
  enum class Fate { Annotated, Literal, Errored };
  std::vector<Fate> fate(topical.size(), Fate::Errored);
  parallel_for(topical.size(), config.concurrency, [&](std::size_t i) {
    auto& inst = topical[i];
    try {
      inst.content_signal = classify_content_signal(env, filter, inst.preview, {inst.instance_id, ""});
    } catch (const std::exception& ex) {
      record_failure(inst.instance_id, "content_filter", ex);
      return;
    }
    if (inst.content_signal->label == ContentLabel::LiteralDescriptive) {
      fate[i] = Fate::Literal;
      return;
    }
    std::vector<AnnotationBundle> bundles;
    for (const auto& backend : {config.annotator_a, config.annotator_b}) {
      try {
        bundles.push_back(annotate(env, backend, inst));
      } catch (const std::exception& ex) {
        record_failure(inst.instance_id, "annotate:" + backend, ex);
        return;
      }
    }
    inst.annotations = std::move(bundles);
    inst.final_label = cross_model_filter(inst.annotations[0], inst.annotations[1]);
    inst.split = Split::Unassigned;
    fate[i] = Fate::Annotated;
  });

  std::vector<NewsInstance> annotated;
  for (std::size_t i = 0; i < topical.size(); ++i) {
    switch (fate[i]) {
      case Fate::Annotated: annotated.push_back(std::move(topical[i])); break;
      case Fate::Literal: ++out.stats.literal_rejected; break;
      case Fate::Errored: ++out.stats.errored; break;
    }
  }
  std::sort(out.failures.begin(), out.failures.end(), [](const StageFailure& a, const StageFailure& b) {
    return std::tie(a.instance_id, a.step) < std::tie(b.instance_id, b.step);
  });

  out.stats.annotated = annotated.size();
  std::vector<NewsInstance> agreed;
  for (const auto& inst : annotated) {
    if (!inst.final_label) {
      ++out.stats.disagreed;
      continue;
    }
    ++out.stats.agreed;
    ++(*inst.final_label == Label::Misleading ? out.stats.agreed_misleading : out.stats.agreed_non_misleading);
    agreed.push_back(inst);
  }

  std::map<std::string, Split> split_of;
  if (out.stats.agreed_misleading > 0 && out.stats.agreed_non_misleading > 0) {
    auto balanced = balance_dataset(agreed, config.balance_seed);
    assign_splits(balanced, config.split_seed, config.test_fraction);
    for (const auto& inst : balanced) split_of[inst.instance_id] = inst.split;
    out.stats.balanced_out = agreed.size() - balanced.size();
  } else {
    out.stats.balanced_out = agreed.size();
  }
  for (auto& inst : annotated) {
    if (auto it = split_of.find(inst.instance_id); it != split_of.end()) inst.split = it->second;
    if (inst.split == Split::Train) ++out.stats.train;
    if (inst.split == Split::Test) ++out.stats.test;
  }
  out.instances = std::move(annotated);
  return out;
}

}  // namespace omg
