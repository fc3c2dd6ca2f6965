#pragma once

// JSON mapping for the domain records. Image payload bytes are never
// serialized: records carry references only.

#include <json.hpp>

#include "omg/core/types.hpp"

namespace omg {

using json = nlohmann::json;

void to_json(json& j, const Interpretation& v);
void from_json(const json& j, Interpretation& v);
void to_json(json& j, const Judgment& v);
void from_json(const json& j, Judgment& v);
void to_json(json& j, const CorrectionProtocol& v);
void from_json(const json& j, CorrectionProtocol& v);
void to_json(json& j, const CorrectionResult& v);
void from_json(const json& j, CorrectionResult& v);
void to_json(json& j, const AnnotationBundle& v);
void from_json(const json& j, AnnotationBundle& v);
void to_json(json& j, const FrameSet& v);
void from_json(const json& j, FrameSet& v);
void to_json(json& j, const AttributionLabel& v);
void from_json(const json& j, AttributionLabel& v);
void to_json(json& j, const ModalityLabel& v);
void from_json(const json& j, ModalityLabel& v);
void to_json(json& j, const ContentSignal& v);
void from_json(const json& j, ContentSignal& v);
void to_json(json& j, const InstanceAnalysis& v);
void from_json(const json& j, InstanceAnalysis& v);
void to_json(json& j, const NewsInstance& v);
void from_json(const json& j, NewsInstance& v);
void to_json(json& j, const Confusion& v);
void to_json(json& j, const ClassScores& v);
void to_json(json& j, const EvalReport& v);

}  // namespace omg
