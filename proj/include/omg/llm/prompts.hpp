#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "omg/llm/message.hpp"

namespace omg {

enum class TemplateId {
  ContentFiltering,
  PreviewUnderstanding,
  ContextUnderstanding,
  MisleadingJudgment,
  HeadlineCorrection,
  FrameIdentification,
  FineGrainedAttribution,
  ModalityAttribution,
  VisualPrototyping,
};

enum class SchemaId {
  ContentSignal,
  PreviewInterpretation,
  ContextInterpretation,
  Judgment,
  Correction,
  Frames,
  Attribution,
  Modality,
  VisualPrototype,
};

std::string_view to_string(TemplateId id);
TemplateId parse_template_id(std::string_view s);
std::string_view to_string(SchemaId id);

struct SlotSpec {
  std::string name;
  std::optional<std::string> default_value;
};

struct PromptTemplate {
  TemplateId id;
  std::string_view text;
  std::vector<SlotSpec> slots;
  SchemaId expected_schema;
  bool accepts_image;
};

using Bindings = std::map<std::string, std::string>;

const PromptTemplate& prompt_template(TemplateId id);
const std::vector<TemplateId>& all_template_ids();

/// Placeholder names ({UPPER_SNAKE}) in order of first appearance.
std::vector<std::string> referenced_slots(std::string_view text);

/// Single-pass substitution: bound values are inserted verbatim and never
/// rescanned. Throws Error{MissingSlot} naming the first unbound placeholder.
std::string substitute_slots(std::string_view text, const Bindings& bindings);

/// Renders a template into one user message: the prompt text, followed by
/// the image part when one is given. Declared slots with defaults may be
/// omitted from `bindings`; undeclared bindings are rejected.
std::vector<Message> render_prompt(TemplateId id, const Bindings& bindings,
                                   std::shared_ptr<const ImageBlob> image = nullptr);

// Rewriting-requirement blocks for the headline-correction prompt; both
// reference {LIMIT_WORDS}.
extern const std::string_view kMinimalEditRequirements;
extern const std::string_view kFreeFormRequirements;

}  // namespace omg
