#include "omg/core/types.hpp"

#include <algorithm>
#include <set>

#include "omg/core/taxonomy.hpp"
#include "omg/core/text.hpp"
#include "omg/error.hpp"

namespace omg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::MissingSlot: return "MissingSlot";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::MockScriptMiss: return "MockScriptMiss";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::TaxonomyViolation: return "TaxonomyViolation";
    case ErrorCode::SameBackend: return "SameBackend";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RationaleRequired: return "RationaleRequired";
    case ErrorCode::MissingOracleInterpretations: return "MissingOracleInterpretations";
    case ErrorCode::MissingReference: return "MissingReference";
    case ErrorCode::MissingAnnotation: return "MissingAnnotation";
    case ErrorCode::MissingDependency: return "MissingDependency";
    case ErrorCode::PreconditionNotFailed: return "PreconditionNotFailed";
    case ErrorCode::ManifestMismatch: return "ManifestMismatch";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Locked: return "Locked";
    case ErrorCode::UnknownBackend: return "UnknownBackend";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

std::string_view to_string(Label v) {
  return v == Label::Misleading ? "misleading" : "non-misleading";
}

std::string_view to_string(Basis v) { return v == Basis::Preview ? "preview" : "context"; }

std::string_view to_string(ProtocolKind v) {
  return v == ProtocolKind::MinimalEdit ? "minimal-edit" : "free-form";
}

std::string_view to_string(Split v) {
  switch (v) {
    case Split::Train: return "train";
    case Split::Test: return "test";
    case Split::Unassigned: return "unassigned";
  }
  return "unassigned";
}

std::string_view to_string(AttributionClass v) {
  switch (v) {
    case AttributionClass::MissingBackground: return "missing_background";
    case AttributionClass::ScaleRepresentativeness: return "scale_representativeness";
    case AttributionClass::OmittedPerspectives: return "omitted_perspectives";
    case AttributionClass::CausalityTemporality: return "causality_temporality";
    case AttributionClass::Others: return "others";
  }
  return "others";
}

std::string_view to_string(ModalityClass v) {
  return v == ModalityClass::TextFixable ? "text-fixable" : "image-driven";
}

std::string_view to_string(ContentLabel v) {
  return v == ContentLabel::LiteralDescriptive ? "ld" : "ms";
}

namespace {

[[noreturn]] void bad_enum(std::string_view what, std::string_view s) {
  throw Error(ErrorCode::ParseError, "unknown " + std::string(what) + " '" + std::string(s) + "'");
}

}  // namespace

Label parse_label(std::string_view s) {
  auto t = text::trim(s);
  if (text::iequals(t, "misleading")) return Label::Misleading;
  if (text::iequals(t, "non-misleading")) return Label::NonMisleading;
  bad_enum("label", s);
}

Basis parse_basis(std::string_view s) {
  auto t = text::trim(s);
  if (text::iequals(t, "preview")) return Basis::Preview;
  if (text::iequals(t, "context")) return Basis::Context;
  bad_enum("basis", s);
}

ProtocolKind parse_protocol_kind(std::string_view s) {
  auto t = text::trim(s);
  if (text::iequals(t, "minimal-edit") || text::iequals(t, "minimal")) return ProtocolKind::MinimalEdit;
  if (text::iequals(t, "free-form") || text::iequals(t, "free")) return ProtocolKind::FreeForm;
  bad_enum("protocol", s);
}

Split parse_split(std::string_view s) {
  auto t = text::trim(s);
  if (text::iequals(t, "train")) return Split::Train;
  if (text::iequals(t, "test")) return Split::Test;
  if (text::iequals(t, "unassigned")) return Split::Unassigned;
  bad_enum("split", s);
}

AttributionClass parse_attribution_class(std::string_view s) {
  auto t = text::trim(s);
  for (auto c : {AttributionClass::MissingBackground, AttributionClass::ScaleRepresentativeness,
                 AttributionClass::OmittedPerspectives, AttributionClass::CausalityTemporality,
                 AttributionClass::Others}) {
    if (text::iequals(t, to_string(c))) return c;
  }
  bad_enum("attribution class", s);
}

ModalityClass parse_modality_class(std::string_view s) {
  auto t = text::trim(s);
  if (text::iequals(t, "text-fixable")) return ModalityClass::TextFixable;
  if (text::iequals(t, "image-driven")) return ModalityClass::ImageDriven;
  bad_enum("modality class", s);
}

ContentLabel parse_content_label(std::string_view s) {
  auto t = text::trim(s);
  if (text::iequals(t, "ld")) return ContentLabel::LiteralDescriptive;
  if (text::iequals(t, "ms")) return ContentLabel::MessageSuggestive;
  bad_enum("content label", s);
}

FrameSet FrameSet::make(const std::vector<std::string>& tags, std::string reasoning) {
  if (tags.size() != 3) {
    throw Error(ErrorCode::TaxonomyViolation,
                "frames: expected exactly 3 tags, got " + std::to_string(tags.size()));
  }
  FrameSet out;
  std::set<std::string> seen;
  for (const auto& tag : tags) {
    auto canon = canonical_frame(tag);
    if (!canon) throw Error(ErrorCode::TaxonomyViolation, "frames: '" + tag + "' is not a taxonomy frame");
    if (!seen.insert(*canon).second) {
      throw Error(ErrorCode::TaxonomyViolation, "frames: duplicate tag '" + *canon + "'");
    }
    out.frames_.push_back(*canon);
  }
  out.reasoning_ = std::move(reasoning);
  return out;
}

}  // namespace omg
