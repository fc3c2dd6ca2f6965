#pragma once

// Domain records shared by every stage of the toolkit. All of them are plain
// values: copy them freely across threads.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace omg {

enum class Label { Misleading, NonMisleading };
enum class Basis { Preview, Context };
enum class ProtocolKind { MinimalEdit, FreeForm };
enum class Split { Train, Test, Unassigned };
enum class AttributionClass {
  MissingBackground,
  ScaleRepresentativeness,
  OmittedPerspectives,
  CausalityTemporality,
  Others,
};
enum class ModalityClass { TextFixable, ImageDriven };
enum class ContentLabel { LiteralDescriptive, MessageSuggestive };

std::string_view to_string(Label v);
std::string_view to_string(Basis v);
std::string_view to_string(ProtocolKind v);
std::string_view to_string(Split v);
std::string_view to_string(AttributionClass v);
std::string_view to_string(ModalityClass v);
std::string_view to_string(ContentLabel v);

// Inverses of to_string; throw Error{ParseError} on unknown text.
Label parse_label(std::string_view s);
Basis parse_basis(std::string_view s);
ProtocolKind parse_protocol_kind(std::string_view s);
Split parse_split(std::string_view s);
AttributionClass parse_attribution_class(std::string_view s);
ModalityClass parse_modality_class(std::string_view s);
ContentLabel parse_content_label(std::string_view s);

struct NewsPreview {
  std::string headline;
  std::string image_ref;
  std::vector<std::uint8_t> image_bytes;  // empty when only referenced

  bool operator==(const NewsPreview&) const = default;
};

struct NewsArticle {
  std::string article_id;
  std::string body;
  std::string topic;

  bool operator==(const NewsArticle&) const = default;
};

/// A simulated reader understanding. Basis::Preview holds the preview-only
/// impression, Basis::Context the informed one.
struct Interpretation {
  Basis basis = Basis::Preview;
  std::string surface_interpretation;
  std::string event_implication;

  bool operator==(const Interpretation&) const = default;
};

struct Judgment {
  Label label = Label::NonMisleading;
  std::string rationale;

  bool operator==(const Judgment&) const = default;
};

inline constexpr int kDefaultWordBudget = 3;

struct CorrectionProtocol {
  ProtocolKind kind = ProtocolKind::FreeForm;
  int word_budget = kDefaultWordBudget;

  bool operator==(const CorrectionProtocol&) const = default;
};

struct CorrectionResult {
  CorrectionProtocol protocol;
  std::string misleading_cause;
  std::string suggested_improvement;
  std::string rewritten_headline;
  int extra_words = 0;
  bool budget_ok = true;
  std::optional<Judgment> verification;

  bool operator==(const CorrectionResult&) const = default;
};

struct AnnotationBundle {
  std::string backend_id;
  Interpretation u_p;
  Interpretation u_c;
  Judgment judgment;

  bool operator==(const AnnotationBundle&) const = default;
};

/// Three distinct frame tags from the generic news-frame taxonomy.
/// Build through make(), which enforces the invariants.
class FrameSet {
 public:
  FrameSet() = default;

  /// Tags are matched case-insensitively after trimming and stored in their
  /// canonical spelling. Throws Error{TaxonomyViolation}.
  static FrameSet make(const std::vector<std::string>& tags, std::string reasoning);

  const std::vector<std::string>& frames() const { return frames_; }
  const std::string& reasoning() const { return reasoning_; }

  bool operator==(const FrameSet&) const = default;

 private:
  std::vector<std::string> frames_;
  std::string reasoning_;
};

struct AttributionLabel {
  AttributionClass cls = AttributionClass::Others;
  std::string reason;

  bool operator==(const AttributionLabel&) const = default;
};

struct ModalityLabel {
  ModalityClass cls = ModalityClass::TextFixable;
  std::string reason;

  bool operator==(const ModalityLabel&) const = default;
};

struct ContentSignal {
  ContentLabel label = ContentLabel::MessageSuggestive;
  std::string reason;

  bool operator==(const ContentSignal&) const = default;
};

struct InstanceAnalysis {
  std::optional<FrameSet> frames_preview;
  std::optional<FrameSet> frames_context;
  std::map<ProtocolKind, FrameSet> frames_rewritten;
  std::optional<AttributionLabel> attribution;
  std::optional<ModalityLabel> modality;

  bool operator==(const InstanceAnalysis&) const = default;
};

struct NewsInstance {
  std::string instance_id;
  NewsPreview preview;
  NewsArticle article;
  Split split = Split::Unassigned;
  std::optional<ContentSignal> content_signal;
  std::vector<AnnotationBundle> annotations;  // primary annotator first
  std::optional<Label> final_label;
  std::map<ProtocolKind, std::string> gold_corrections;
  std::optional<InstanceAnalysis> analysis;

  bool operator==(const NewsInstance&) const = default;

  /// The primary annotator's bundle: source of oracle interpretations and
  /// the oracle rationale.
  const AnnotationBundle* oracle_annotation() const {
    return annotations.empty() ? nullptr : &annotations.front();
  }
};

struct Confusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const Confusion&) const = default;
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const ClassScores&) const = default;
};

/// Positive class is Misleading.
struct EvalReport {
  Confusion confusion;
  double accuracy = 0.0;
  ClassScores misleading;
  ClassScores non_misleading;

  bool operator==(const EvalReport&) const = default;
};

}  // namespace omg
