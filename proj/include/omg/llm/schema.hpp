#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "omg/llm/prompts.hpp"

namespace omg {

/// Pulls the structured payload out of a model reply. Code fences and
/// surrounding prose are tolerated; a bare `"Key": {...}` member list is
/// wrapped into an object. Returns nullopt when nothing parses.
std::optional<nlohmann::json> extract_json_payload(std::string_view reply);

struct SchemaProblem {
  std::string message;
};

/// Validates a reply against a schema and returns the normalized record:
///
///   ContentSignal          {label: "ld"|"ms", reason}
///   Preview/ContextInterpretation {surface_interpretation, event_implication}
///   Judgment               {label: "misleading"|"non-misleading", rationale}
///   Correction             {misleading_cause, suggested_improvement, rewritten_headline}
///   Frames                 {reasoning, frames: [string]}
///   Attribution            {class, reason}
///   Modality               {class, reason}
///   VisualPrototype        {image_description, image_prompt}
///
/// Keys are matched ignoring case and punctuation, so "Image–Headline" and
/// "image_headline" are the same key.
std::variant<nlohmann::json, SchemaProblem> validate_reply(SchemaId schema, std::string_view reply);

/// Output-format reminder used in repair instructions.
std::string_view schema_format_hint(SchemaId schema);

}  // namespace omg
