#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "omg/core/types.hpp"
#include "omg/llm/gateway.hpp"

namespace omg {

using ImageResolver = std::function<std::shared_ptr<const ImageBlob>(const NewsPreview&)>;

/// Shared context for every model-backed step.
struct PipelineEnv {
  Gateway& gateway;
  ImageResolver resolve_image;               // defaults to preview_image_blob
  std::optional<std::size_t> max_input_chars;  // article truncation, unset = none
};

/// Identifies the calls made for one instance. `tag` distinguishes repeated
/// runs (verification, detection) for scripted backends.
struct CallScope {
  std::string instance_id;
  std::string tag;
};

/// Blob built from the preview's own bytes, or a reference-only blob.
std::shared_ptr<const ImageBlob> preview_image_blob(const NewsPreview& preview);

/// Article body cut to max_input_chars at a UTF-8 boundary.
std::string bounded_article(const PipelineEnv& env, const std::string& body);

bool filter_by_topic(const NewsArticle& article);

ContentSignal classify_content_signal(const PipelineEnv& env, const std::string& backend_id,
                                      const NewsPreview& preview, const CallScope& scope);

/// Stage 1. Sees the headline and (unless `with_image` is false) the image.
Interpretation simulate_preview_understanding(const PipelineEnv& env, const std::string& backend_id,
                                              const NewsPreview& preview, const CallScope& scope,
                                              bool with_image = true);

/// Stage 2. Sees the article body only. Throws Error{InvalidInput} on an
/// empty body.
Interpretation simulate_context_understanding(const PipelineEnv& env, const std::string& backend_id,
                                              const NewsArticle& article, const CallScope& scope);

/// Interpretations rendered for the judgment prompt's reader slot.
std::string reader_interpretations_text(const Interpretation& u_p, const Interpretation& u_c);

/// Stage 3.
Judgment judge_misleading(const PipelineEnv& env, const std::string& backend_id, const NewsPreview& preview,
                          const NewsArticle& article, const Interpretation& u_p, const Interpretation& u_c,
                          const CallScope& scope, bool with_image = true);

/// Stages 1-3 in order on one backend. Errors carry the failing stage.
AnnotationBundle annotate(const PipelineEnv& env, const std::string& backend_id, const NewsInstance& instance,
                          const std::string& tag = "");

/// Some(label) iff both annotators agree. Throws Error{SameBackend}.
std::optional<Label> cross_model_filter(const AnnotationBundle& a, const AnnotationBundle& b);

/// Subsamples the majority class to the minority size. Output is sorted by
/// instance_id. Throws Error{EmptyClass}, or Error{InvalidInput} for an
/// instance without final_label.
std::vector<NewsInstance> balance_dataset(const std::vector<NewsInstance>& instances, std::uint64_t seed);

inline constexpr double kDefaultTestFraction = 1.0 / 6.0;

/// Stratified seeded split: within each final label, round(n * test_fraction)
/// instances go to Test and the rest to Train.
void assign_splits(std::vector<NewsInstance>& instances, std::uint64_t seed,
                   double test_fraction = kDefaultTestFraction);

struct AnnotationConfig {
  std::string annotator_a;  // primary: oracle interpretations and rationale
  std::string annotator_b;
  std::string filter_backend;  // content-signal screening, defaults to annotator_a
  std::uint64_t balance_seed = 17;
  std::uint64_t split_seed = 23;
  double test_fraction = kDefaultTestFraction;
  int concurrency = 4;
};

struct StageFailure {
  std::string instance_id;
  std::string step;  // "content_filter", "annotate:<backend>"
  std::optional<int> stage;
  std::string code;
  std::string message;
};

struct AnnotationStats {
  std::size_t input = 0;
  std::size_t topic_rejected = 0;
  std::size_t literal_rejected = 0;
  std::size_t annotated = 0;
  std::size_t errored = 0;
  std::size_t agreed = 0;
  std::size_t disagreed = 0;
  std::size_t agreed_misleading = 0;
  std::size_t agreed_non_misleading = 0;
  std::size_t balanced_out = 0;
  std::size_t train = 0;
  std::size_t test = 0;

  double agreement_rate() const { return annotated ? static_cast<double>(agreed) / annotated : 0.0; }
};

struct AnnotationOutcome {
  std::vector<NewsInstance> instances;  // every annotated instance, sorted by id
  AnnotationStats stats;
  std::vector<StageFailure> failures;
};

/// Topic filter, content-signal filter, dual annotation, agreement filter,
/// balancing and split assignment. Disagreements and balancing leftovers stay
/// in the output with split Unassigned.
AnnotationOutcome run_annotation(const PipelineEnv& env, std::vector<NewsInstance> instances,
                                 const AnnotationConfig& config);

}  // namespace omg
