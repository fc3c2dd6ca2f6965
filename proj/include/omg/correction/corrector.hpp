#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "omg/core/types.hpp"
#include "omg/pipeline/annotation.hpp"

namespace omg {

/// Maximal runs of non-whitespace characters.
int count_words(std::string_view text);

/// count_words(rewrite) - count_words(original); may be negative.
int extra_words(std::string_view original, std::string_view rewrite);

inline bool within_budget(int extra, const CorrectionProtocol& protocol) { return extra <= protocol.word_budget; }

/// Requirement block for the protocol with the budget filled in.
std::string rewriting_requirements(const CorrectionProtocol& protocol);

/// Stand-in for the rationale when the rewrite is guided by the label only.
inline constexpr std::string_view kLabelOnlyStatement =
    "The image-headline pair has been labeled as misleading. No further explanation is available.";

enum class RationaleSource { Oracle, SelfGenerated, LabelOnly };
std::string_view to_string(RationaleSource s);  // "oracle", "self", "label-only"
RationaleSource parse_rationale_source(std::string_view s);

/// Mock tag for a rewrite: "<minimal|free>/<source>".
std::string correction_tag(ProtocolKind kind, RationaleSource source);

/// Verification tag for a rewrite made under `correction_tag`.
inline std::string verification_tag(const std::string& correction_tag) { return "verify/" + correction_tag; }

/// Rewrites the headline guided by `rationale`. A budget overrun is recorded
/// in budget_ok, never rejected. Throws Error{RationaleRequired} for a blank
/// rationale.
CorrectionResult correct_headline(const PipelineEnv& env, const std::string& backend_id,
                                  const NewsInstance& instance, const std::string& rationale,
                                  const CorrectionProtocol& protocol, const std::string& tag);

/// Same prompt with the reason slot holding kLabelOnlyStatement.
CorrectionResult correct_headline_label_only(const PipelineEnv& env, const std::string& backend_id,
                                             const NewsInstance& instance, const CorrectionProtocol& protocol,
                                             const std::string& tag);

/// Re-runs the three annotation stages on the rewritten preview.
Judgment verify_correction(const PipelineEnv& env, const std::string& judge_backend, const NewsInstance& instance,
                           const std::string& rewritten_headline, const std::string& tag);

inline bool correction_succeeded(const CorrectionResult& r) {
  return r.verification && r.verification->label == Label::NonMisleading;
}

struct GoldTrace {
  std::string instance_id;
  std::map<ProtocolKind, CorrectionResult> results;
  bool retained = false;
  std::string note;  // why the instance was excluded or failed
};

struct GoldBuildOutcome {
  std::vector<NewsInstance> retained;  // with gold_corrections filled, sorted by id
  std::vector<GoldTrace> traces;       // one per input instance, sorted by id
  std::size_t errored = 0;

  std::size_t succeeded(ProtocolKind kind) const;
};

/// Rewrites every misleading instance under both protocols with its oracle
/// rationale and keeps those where both rewrites verify non-misleading
/// within budget. Per-instance failures are traced and never abort the batch.
GoldBuildOutcome build_gold_corrections(const PipelineEnv& env, const std::vector<NewsInstance>& misleading,
                                        const std::string& oracle_backend, const std::string& judge_backend,
                                        int word_budget = kDefaultWordBudget, int concurrency = 4);

}  // namespace omg
