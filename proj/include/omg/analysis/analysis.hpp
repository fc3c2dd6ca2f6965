#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "omg/core/types.hpp"
#include "omg/eval/harness.hpp"
#include "omg/pipeline/annotation.hpp"

namespace omg {

/// What the frame prompt is shown.
struct FrameInput {
  std::string text;
  std::shared_ptr<const ImageBlob> image;  // null for article text
  bool is_article = false;
};

FrameInput preview_frame_input(const PipelineEnv& env, const NewsPreview& preview);
FrameInput article_frame_input(const PipelineEnv& env, const NewsArticle& article);

/// Three distinct taxonomy frames. A reply with the right shape but
/// off-taxonomy, duplicate or miscounted tags gets one repair round, then
/// Error{TaxonomyViolation}; malformed replies end in Error{SchemaViolation}.
FrameSet identify_frames(const PipelineEnv& env, const std::string& backend_id, const FrameInput& input,
                         const CallScope& scope);

/// |a ∩ b| / 3.
double frame_overlap(const FrameSet& a, const FrameSet& b);

/// Requires final_label Misleading (Error{InvalidInput} otherwise).
AttributionLabel attribute_cause(const PipelineEnv& env, const std::string& backend_id, const NewsInstance& instance,
                                 const std::string& rationale, const CallScope& scope);

ModalityLabel attribute_modality(const PipelineEnv& env, const std::string& backend_id, const NewsInstance& instance,
                                 const std::string& rationale, const Interpretation& u_p, const Interpretation& u_c,
                                 const CallScope& scope);

struct VisualPrototype {
  std::string image_description;
  std::string image_prompt;

  bool operator==(const VisualPrototype&) const = default;
};

/// Describes a replacement image for a rewrite that still verified as
/// misleading. Throws Error{PreconditionNotFailed} when the correction
/// succeeded or was never verified.
VisualPrototype visual_prototype(const PipelineEnv& env, const std::string& backend_id, const NewsInstance& instance,
                                 const std::string& original_rationale, const CorrectionResult& failed_correction,
                                 const CallScope& scope);

struct AnalysisFailure {
  std::string instance_id;
  std::string message;
};

/// Frames of the preview, the article and every gold rewrite, stored on the
/// instances (analysis.frames_*).
std::vector<AnalysisFailure> analyze_frames(const PipelineEnv& env, const std::string& backend_id,
                                            std::vector<NewsInstance>& instances, int concurrency = 4);

/// Cause and modality labels for every misleading instance, from its oracle
/// rationale and interpretations.
std::vector<AnalysisFailure> analyze_attribution(const PipelineEnv& env, const std::string& backend_id,
                                                 std::vector<NewsInstance>& instances, int concurrency = 4);
std::vector<AnalysisFailure> analyze_modality(const PipelineEnv& env, const std::string& backend_id,
                                              std::vector<NewsInstance>& instances, int concurrency = 4);

struct PrototypeRecord {
  std::string instance_id;
  std::string rewritten_headline;
  std::optional<VisualPrototype> prototype;
  std::string error;
};

/// Prototypes for every verified-but-failed rewrite in a setup result.
std::vector<PrototypeRecord> prototypes_for_failures(const PipelineEnv& env, const std::string& backend_id,
                                                     const std::vector<NewsInstance>& instances,
                                                     const SetupResult& setup, int concurrency = 4);

struct AnalysisSummary {
  std::size_t instances = 0;
  std::size_t misleading = 0;
  std::map<std::string, std::size_t> attribution;  // class tag -> count
  std::map<std::string, std::size_t> modality;
  std::map<std::string, std::size_t> preview_frames;  // frame -> count
  std::map<std::string, std::size_t> context_frames;
  std::optional<double> mean_overlap_misleading;      // preview vs context
  std::optional<double> mean_overlap_non_misleading;
  std::map<std::string, std::optional<double>> mean_overlap_rewritten;  // protocol -> rewrite vs context
};

AnalysisSummary summarize_analysis(const std::vector<NewsInstance>& instances);
nlohmann::json to_json(const AnalysisSummary& s);
std::string format_analysis_summary(const AnalysisSummary& s);

}  // namespace omg
