#include "omg/llm/schema.hpp"

#include <array>
#include <cctype>

#include "omg/core/text.hpp"

namespace omg {

using nlohmann::json;

namespace {

std::string norm_key(std::string_view key) {
  std::string out;
  for (unsigned char c : key) {
    if (std::isalnum(c) && c < 0x80) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

const json* member(const json& obj, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) return nullptr;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    auto k = norm_key(it.key());
    for (auto want : keys) {
      if (k == want) return &it.value();
    }
  }
  return nullptr;
}

struct Failure {
  std::string message;
};

std::string required_text(const json& obj, std::initializer_list<std::string_view> keys,
                          std::string_view display, bool allow_empty = false) {
  const json* v = member(obj, keys);
  if (!v) throw Failure{"missing key \"" + std::string(display) + "\""};
  if (!v->is_string()) throw Failure{"\"" + std::string(display) + "\" must be a string"};
  auto s = v->get<std::string>();
  if (!allow_empty && text::trim(s).empty()) throw Failure{"\"" + std::string(display) + "\" is empty"};
  return s;
}

json parse_interpretation(const json& root, std::string_view wrapper) {
  const json* body = &root;
  if (!member(root, {"surfaceinterpretation"})) {
    body = member(root, {wrapper});
    if (!body && root.is_object() && root.size() == 1 && root.begin()->is_object()) body = &*root.begin();
    if (!body || !body->is_object()) throw Failure{"missing interpretation object"};
  }
  return json{{"surface_interpretation",
               required_text(*body, {"surfaceinterpretation"}, "Surface_Interpretation")},
              {"event_implication", required_text(*body, {"eventimplication"}, "Event_Implication")}};
}

json parse_judgment(const json& root) {
  const json* v = member(root, {"misleading"});
  if (!v) throw Failure{"missing key \"Misleading\""};
  std::string label;
  if (v->is_boolean()) {
    label = v->get<bool>() ? "misleading" : "non-misleading";
  } else if (v->is_string()) {
    auto s = norm_key(v->get<std::string>());
    if (s == "yes") label = "misleading";
    else if (s == "no") label = "non-misleading";
  }
  if (label.empty()) throw Failure{"\"Misleading\" must be \"Yes\" or \"No\""};
  return json{{"label", label}, {"rationale", required_text(root, {"reason", "rationale"}, "Reason")}};
}

json parse_content_signal(const json& root) {
  auto raw = norm_key(required_text(root, {"label"}, "label"));
  std::string label;
  if (raw == "ld" || raw == "literaldescriptive") label = "ld";
  if (raw == "ms" || raw == "messagesuggestive") label = "ms";
  if (label.empty()) throw Failure{"\"label\" must be \"ld\" or \"ms\""};
  return json{{"label", label}, {"reason", required_text(root, {"reason"}, "reason")}};
}

json parse_correction(const json& root) {
  return json{
      {"misleading_cause", required_text(root, {"misleadingcause"}, "Misleading_Cause", true)},
      {"suggested_improvement", required_text(root, {"suggestedimprovement"}, "Suggested_Improvement", true)},
      {"rewritten_headline",
       std::string(text::trim(required_text(root, {"rewrittencaption", "rewrittenheadline"}, "Rewritten_Caption")))}};
}

json parse_frames(const json& root) {
  const json* frames = member(root, {"frames"});
  if (!frames || !frames->is_array()) throw Failure{"\"frames\" must be a list of strings"};
  json out_frames = json::array();
  for (const auto& f : *frames) {
    if (!f.is_string()) throw Failure{"\"frames\" must be a list of strings"};
    out_frames.push_back(f.get<std::string>());
  }
  return json{{"reasoning", required_text(root, {"reasoning"}, "reasoning", true)}, {"frames", out_frames}};
}

constexpr std::array<std::array<std::string_view, 4>, 5> kAttributionNames = {{
    {"missingbackgroundandconditions", "missingbackground", "missingbackgroundconditions", ""},
    {"misleadingscaleandrepresentativeness", "scalerepresentativeness", "scaleandrepresentativeness",
     "misleadingscalerepresentativeness"},
    {"omissionofperspectivesandcontroversy", "omittedperspectives", "omissionofperspectives", ""},
    {"misleadingcausalityandtemporality", "causalitytemporality", "causalityandtemporality",
     "misleadingcausalitytemporality"},
    {"others", "other", "", ""},
}};

constexpr std::array<std::string_view, 5> kAttributionTags = {
    "missing_background", "scale_representativeness", "omitted_perspectives", "causality_temporality", "others"};

std::optional<std::size_t> match_attribution(std::string k) {
  auto by_name = [](std::string_view s) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < kAttributionNames.size(); ++i) {
      for (auto n : kAttributionNames[i]) {
        if (!n.empty() && s == n) return i;
      }
    }
    return std::nullopt;
  };
  if (auto i = by_name(k)) return i;
  if (k.rfind("category", 0) == 0) k = k.substr(8);
  if (!k.empty() && k[0] >= '1' && k[0] <= '5') {
    std::size_t idx = static_cast<std::size_t>(k[0] - '1');
    auto rest = k.substr(1);
    if (rest.empty()) return idx;
    if (auto i = by_name(rest); i && *i == idx) return idx;
  }
  return std::nullopt;
}

json parse_attribution(const json& root) {
  const json* v = member(root, {"attributionclass", "class"});
  if (!v) throw Failure{"missing key \"attribution_class\""};
  std::optional<std::size_t> idx;
  if (v->is_number_integer()) {
    auto n = v->get<long long>();
    if (n >= 1 && n <= 5) idx = static_cast<std::size_t>(n - 1);
  } else if (v->is_string()) {
    idx = match_attribution(norm_key(v->get<std::string>()));
  }
  if (!idx) throw Failure{"\"attribution_class\" must name one of the five categories"};
  return json{{"class", kAttributionTags[*idx]},
              {"reason", required_text(root, {"attributionreason", "reason"}, "attribution_reason")}};
}

json parse_modality(const json& root) {
  auto raw = norm_key(required_text(root, {"label", "class"}, "label"));
  std::string cls;
  if (raw == "textfixable") cls = "text-fixable";
  if (raw == "imagedriven") cls = "image-driven";
  if (cls.empty()) throw Failure{"\"label\" must be \"Text-Fixable\" or \"Image-Driven\""};
  return json{{"class", cls}, {"reason", required_text(root, {"reason"}, "reason")}};
}

json parse_prototype(const json& root) {
  return json{{"image_description", required_text(root, {"imagedescription"}, "Image description")},
              {"image_prompt", required_text(root, {"imageprompt"}, "Image Prompt")}};
}

std::optional<json> try_parse(std::string_view s) {
  auto j = json::parse(s.begin(), s.end(), nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

}  // namespace

std::optional<json> extract_json_payload(std::string_view reply) {
  std::string_view body = text::trim(reply);

  auto fence = body.find("```");
  if (fence != std::string_view::npos) {
    auto line_end = body.find('\n', fence);
    if (line_end != std::string_view::npos) {
      auto close = body.find("```", line_end);
      auto inner = body.substr(line_end + 1, close == std::string_view::npos ? std::string_view::npos
                                                                             : close - line_end - 1);
      if (auto j = extract_json_payload(inner)) return j;
    }
  }

  if (auto j = try_parse(body); j && j->is_object()) return j;

  auto open = body.find('{');
  auto close = body.rfind('}');
  if (open != std::string_view::npos && close != std::string_view::npos && close > open) {
    auto inner = body.substr(open, close - open + 1);
    if (auto j = try_parse(inner); j && j->is_object()) return j;
  }

  // `"Key": { ... }` without the enclosing braces.
  if (!body.empty() && body.front() == '"') {
    auto wrapped = "{" + std::string(body) + "}";
    if (auto j = try_parse(wrapped); j && j->is_object()) return j;
  }
  return std::nullopt;
}

std::variant<json, SchemaProblem> validate_reply(SchemaId schema, std::string_view reply) {
  auto payload = extract_json_payload(reply);
  if (!payload) return SchemaProblem{"reply does not contain a JSON object"};
  try {
    switch (schema) {
      case SchemaId::ContentSignal: return parse_content_signal(*payload);
      case SchemaId::PreviewInterpretation: return parse_interpretation(*payload, "imageheadline");
      case SchemaId::ContextInterpretation: return parse_interpretation(*payload, "newscontext");
      case SchemaId::Judgment: return parse_judgment(*payload);
      case SchemaId::Correction: return parse_correction(*payload);
      case SchemaId::Frames: return parse_frames(*payload);
      case SchemaId::Attribution: return parse_attribution(*payload);
      case SchemaId::Modality: return parse_modality(*payload);
      case SchemaId::VisualPrototype: return parse_prototype(*payload);
    }
  } catch (const Failure& f) {
    return SchemaProblem{f.message};
  }
  return SchemaProblem{"unknown schema"};
}

std::string_view schema_format_hint(SchemaId schema) {
  switch (schema) {
    case SchemaId::ContentSignal:
      return R"({"label": "ld" | "ms", "reason": "rationale citing the main textual cues"})";
    case SchemaId::PreviewInterpretation:
      return R"({"Image–Headline": {"Surface_Interpretation": "...", "Event_Implication": "..."}} with both fields non-empty)";
    case SchemaId::ContextInterpretation:
      return R"({"News_Context": {"Surface_Interpretation": "...", "Event_Implication": "..."}} with both fields non-empty)";
    case SchemaId::Judgment:
      return R"({"Misleading": "Yes" | "No", "Reason": "..."})";
    case SchemaId::Correction:
      return R"({"Misleading_Cause": "...", "Suggested_Improvement": "...", "Rewritten_Caption": "..."})";
    case SchemaId::Frames:
      return R"({"reasoning": "...", "frames": ["<frame>", "<frame>", "<frame>"]} using exactly three distinct frame names from the taxonomy)";
    case SchemaId::Attribution:
      return R"({"attribution_class": "<one of the five category names>", "attribution_reason": "..."})";
    case SchemaId::Modality:
      return R"({"label": "Text-Fixable" | "Image-Driven", "reason": "..."})";
    case SchemaId::VisualPrototype:
      return R"({"Image description": "...", "Image Prompt": "..."})";
  }
  return "{}";
}

}  // namespace omg
