#include "omg/llm/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "omg/error.hpp"

namespace omg {

namespace {

constexpr std::string_view kContentFiltering = R"PROMPT(You task is to annotate image–text pairs for news-signal screening.

Definitions:
- ld (Literal-Descriptive): venue/object/scene or general information (e.g., opening, decor, menu, discount). Does not convey any event information worth further inquiry; readers would not ask "what happened/why/what’s next."
- ms (Message-Suggestive): conveys or implies a real-world event/impact (e.g., conflict, explosion, bombing, disaster, accident, evacuation, casualties, law enforcement, arrest, protest, policy, curfew, sanctions), or uses causal/temporal language that invites "what happened/why/what’s next."

# Input
IMAGE: You will be provided with the image.
TEXT: {NEWS_HEADLINE}

# Output Requirements
Outputs must follow the JSON format below, consisting of three keys:

"label": "ld"| "ms",
"reason": "rationale citing the main textual cues")PROMPT";

constexpr std::string_view kPreviewUnderstanding = R"PROMPT(# Task Description

You are an average news reader. you will be provided with a piece of news that includes an image and a news headline.
From a reader’s perspective, describe your immediate impression of the news and make reasonable inferences at the detail level.

You need to complete the following parts:

   - Analyze **only** based on the image and the news headline.
   - Describe what you see (surface interpretation).
   - Infer what event might be happening based on visual cues and the headline (event implication).

# Input

News Headline: {NEWS_HEADLINE}

Image: (will be provided)

# Output Format (JSON)

    "Image–Headline": {
        "Surface_Interpretation": "What is the surface interpretation?",
        "Event_Implication": "What is the deep meaning, and what is the purpose?"
    })PROMPT";

constexpr std::string_view kContextUnderstanding = R"PROMPT(# Task Description

You are an average news reader. you will be provided with a full news article.
From a reader’s perspective, describe your immediate impression of the news and make reasonable inferences at the detail level.

You need to complete the following parts:

   - Analyze based on the news context.
   - Describe what you see (surface interpretation).
   - Infer what event might be happening based on the news context (event implication).

# Input
News Context: {NEWS_CONTEXT}

# Output Format (JSON)

 "News_Context": {
        "Surface_Interpretation": "What is the surface interpretation?",
        "Event_Implication": "What is the deep meaning, and what is the purpose?"
    })PROMPT";

constexpr std::string_view kMisleadingJudgment = R"PROMPT(# Task Description

You will receive an image, a news headline, a full news context, a reader’s surface interpretation and event implication for the image–headline pair, a reader’s surface interpretation and event implication for the full news context.

You need to complete the following parts:

- If a reader forms an impression about the nature, status, cause and effect, the responsible party, or severity of a news event when only exposed to images and titles, and this impression is significantly corrected, restricted, or overturned after reading the full news, it is considered misleading.

- On the contrary, if the full news only elaborates, extends, or supplements the content implied by the title (for example, by providing more details, reactions, or outcomes), without altering the reader's understanding of the basic direction or core judgment of the event, it is considered non-misleading.

# Input

Image: (will be provided)

News Headline: {NEWS_HEADLINE}

Full News Context: {NEWS_CONTEXT}

Reader Interpretations based on image-headline and context: {READER_INFER}

# Output Format (JSON)

{
    "Misleading": "Yes/No",
    "Reason": "Not less than 100 words, focus on the event level."
    })PROMPT";

constexpr std::string_view kHeadlineCorrection = R"PROMPT(# Task Description

You are a news rewriting expert. You will receive an news image, an news headline, and the full news context. Compared with the news context, the image-headline pair is considered misleading. You will also be provided with the corresponding reason why it is misleading.

Please follow the steps below to generate a non-misleading headline:

1. Analyze the Misleading Cause
   - Based on the provided data, identify the main reasons why the original headline is misleading, including any factual, contextual, or expressive distortions.

2. Suggestions on Improvement
   - Consider what kinds of information or phrasing should be included in the headline to prevent misleading readers and accurately convey the core message of the news.

3. Generate the Headline
   - Based on the above analysis, produce a non-misleading headline that is factually accurate, semantically clear, and maintains a neutral tone.

# Rewriting requirements:
{REWRITING_REQUIREMENTS}

# Input:
Image: You will be provided.

News Headline: {NEWS_HEADLINE}

Full News Context: {NEWS_CONTEXT}

Misleading reason of image-headline pair: {MISLEADING_REASON}

# Output(json):
{
"Misleading_Cause": xxx,
"Suggested_Improvement": xxx,
    "Rewritten_Caption": xxx
})PROMPT";

constexpr std::string_view kFrameIdentification = R"PROMPT(# Task Definition
You are an expert media analyst. Your task is to identify the relevant generic news frames presented by the {MATERIAL}.

# Instruction:
- {FOCUS} A news item often contains multiple angles (e.g., both "Political" and "Policy").

- Select the **Top-3 most relevant frames** that represent the dominant perspectives from the taxonomy: {TAXONOMY}

# Input
{IMAGE_LINE}TEXT: {NEWS_TEXT}

# Output
Output strictly in JSON format with two keys:
{
- "reasoning": Brief explanation of why these frames apply.
- "frames": A list of strings containing the exact names of the selected frames (e.g., ["Economic", "Political", "Policy"]). })PROMPT";

constexpr std::string_view kFineGrainedAttribution = R"PROMPT(# Task
You are a misleading attribution classifier, designed to evaluate the reasons why an image–headline pair may be misleading compared to the full news context.
Your task is to determine which category of misleading type the given reason belongs to.

# Input
- Image: You will be provided.
- News Headline: {NEWS_HEADLINE}
- Full NEWS Context: {NEWS_CONTEXT}
- Reason why an image–headline pair may be misleading compared to the full news context: {REASON}

# Categories
Choose exactly one of the following categories:

1. Missing background and conditions:
   - The reason mainly points out that the image–headline pair omits essential background or conditions needed to correctly understand the event (for example, prior context, policy constraints, key actors, follow-up developments, or outcomes). Because this context is missing, readers are likely to form an incomplete or distorted overall impression.

2. Misleading scale and representativeness:
   - The reason mainly emphasizes that the image–headline pair misleads about how large, frequent, or systemic the event is. It only shows isolated or local cases, or uses extreme examples in a way that underplays or exaggerates the true scale, prevalence, or impact described in the full news context.

3. Omission of perspectives and controversy:
   - The reason mainly highlights that the image–headline pair hides important viewpoints or controversy. It presents only one side (for example, an official or dominant narrative) while omitting affected groups, opposition voices, counter-arguments, or social conflict that are present in the full news context, leading to a one-sided understanding.

4. Misleading causality and temporality:
   - The reason mainly concerns incorrect or misleading suggestions about cause–effect relations, event sequence, or current status. The image–headline pair may imply that one action directly caused an outcome, that an event is still ongoing, or that a past event is current, in ways that are not supported by the full news context.

5. Others:
   - Use this category if the reason does not clearly fall into any of the four types above, or if you are not confident which category is most appropriate.

# Output

Return the output in standard JSON format with the following fields:

{
  "attribution_class": "Only the most possible class",
  "attribution_reason": "Explain in detail why it belongs to this category, referring to the given text for analysis" })PROMPT";

constexpr std::string_view kModalityAttribution = R"PROMPT(You will be provided with an image, the corresponding headline, the full news article, a reader interpretation based solely on the image–headline pair, a reader interpretation based on the full news article, and an explanation of why the image–headline pair is considered misleading compared to the complete news content.

# Task

In multimodal news data, there exist a large number of samples in which the image–headline pair does not align with the main theme of the article context, easily misleading readers. In practice, simply rewriting the headline (text) does not always eliminate this misleading effect. In some cases, the image strongly dominates the narrative focus, emotion, or scene, so even after the headline is maximally revised, readers may still form an understanding that does not match the true news context. Therefore, the goal of this task is to automatically identify and annotate which misleading samples are likely to become non-misleading solely through headline rewriting.

# Judgment Criteria

Text-Fixable:
- If the misleading effect mainly stems from information omission, missing outcome, or omitted controversy in the headline, and the image itself merely serves as scene or atmosphere rendering—without anchoring a narrative, identity, event type, or timeline that is fundamentally inconsistent with the main theme of the article—then the case is considered “headline amendable.” In such cases, the misleading impression can be eliminated by rewriting the headline.
Image-Driven:
- If the image content strongly dominates the reader’s interpretation, anchoring an event type, emotion, identity, causality, or historical timeline that is seriously inconsistent with the true news context—even when the headline is maximally revised—the misleading effect cannot be corrected. Such cases are considered “not amendable,” and require image replacement or other multimodal interventions.

# Input:
Image: You will be provided.
News Headline: {NEWS_HEADLINE}
Full News Context: {NEWS_CONTEXT}
reader interpretation based only on the image–headline pair: {READER_PREVIEW}

a reader interpretation based on the full news article, and an explanation of why the image–headline pair is considered misleading compared to the complete news context: {READER_CONTEXT}

Misleading reason of image-headline pair: {MISLEADING_REASON}

# Output(json):
{
   "label": Text-Fixable or Image-Driven,
   "reason": xxx })PROMPT";

constexpr std::string_view kVisualPrototyping = R"PROMPT(You will receive a news preview (including an image and a headline) and the corresponding news context. It is known that this news preview is misleading compared to the news context.

We have rewritten the headline based on the identified original misleading rationale. However, the rewritten headline is still misleading. We believe this is mainly because the image introduces misleading cues.

I will provide you with:

Image: (will be provided)

Headline: {HEADLINE}

Context: {CONTEXT}

Original Misleading Rationale: {ORIGINAL_RATIONALE}

Rewritten Headline: {REWRITTEN_HEADLINE}

Rewritten Misleading Rationale: {REWRITTEN_RATIONALE}

You need to perform visual prototyping: analyze what kind of contextual image the rewritten headline should be integrated with so that the new preview (New Image + Rewritten Headline) is no longer misleading. You should output a description of the recommended image and an image prompt for generating it.
Output (JSON):
{
  "Image description": "xxx",
  "Image Prompt": "xxx"})PROMPT";

std::vector<SlotSpec> required(std::initializer_list<const char*> names) {
  std::vector<SlotSpec> out;
  for (const char* n : names) out.push_back({n, std::nullopt});
  return out;
}

std::vector<PromptTemplate> build_registry() {
  std::vector<PromptTemplate> reg;
  reg.push_back({TemplateId::ContentFiltering, kContentFiltering, required({"NEWS_HEADLINE"}),
                 SchemaId::ContentSignal, true});
  reg.push_back({TemplateId::PreviewUnderstanding, kPreviewUnderstanding, required({"NEWS_HEADLINE"}),
                 SchemaId::PreviewInterpretation, true});
  reg.push_back({TemplateId::ContextUnderstanding, kContextUnderstanding, required({"NEWS_CONTEXT"}),
                 SchemaId::ContextInterpretation, false});
  reg.push_back({TemplateId::MisleadingJudgment, kMisleadingJudgment,
                 required({"NEWS_HEADLINE", "NEWS_CONTEXT", "READER_INFER"}), SchemaId::Judgment, true});
  reg.push_back({TemplateId::HeadlineCorrection, kHeadlineCorrection,
                 required({"REWRITING_REQUIREMENTS", "NEWS_HEADLINE", "NEWS_CONTEXT", "MISLEADING_REASON"}),
                 SchemaId::Correction, true});
  {
    auto slots = required({"TAXONOMY", "NEWS_TEXT"});
    slots.push_back({"MATERIAL", std::string("combination of the provided News Image and Headline")});
    slots.push_back({"FOCUS", std::string("Analyze how the image and headline interact.")});
    slots.push_back({"IMAGE_LINE", std::string("IMAGE: You will be provided with the image.\n")});
    reg.push_back({TemplateId::FrameIdentification, kFrameIdentification, std::move(slots), SchemaId::Frames,
                   true});
  }
  reg.push_back({TemplateId::FineGrainedAttribution, kFineGrainedAttribution,
                 required({"NEWS_HEADLINE", "NEWS_CONTEXT", "REASON"}), SchemaId::Attribution, true});
  reg.push_back({TemplateId::ModalityAttribution, kModalityAttribution,
                 required({"NEWS_HEADLINE", "NEWS_CONTEXT", "READER_PREVIEW", "READER_CONTEXT",
                           "MISLEADING_REASON"}),
                 SchemaId::Modality, true});
  reg.push_back({TemplateId::VisualPrototyping, kVisualPrototyping,
                 required({"HEADLINE", "CONTEXT", "ORIGINAL_RATIONALE", "REWRITTEN_HEADLINE",
                           "REWRITTEN_RATIONALE"}),
                 SchemaId::VisualPrototype, true});
  return reg;
}

const std::vector<PromptTemplate>& registry() {
  static const std::vector<PromptTemplate> reg = build_registry();
  return reg;
}

bool slot_char(char c) { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_'; }

// Length of a placeholder starting at text[pos] == '{', or 0.
std::size_t placeholder_len(std::string_view text, std::size_t pos) {
  std::size_t i = pos + 1;
  if (i >= text.size() || !(text[i] >= 'A' && text[i] <= 'Z')) return 0;
  while (i < text.size() && slot_char(text[i])) ++i;
  if (i >= text.size() || text[i] != '}') return 0;
  return i - pos + 1;
}

}  // namespace

const std::string_view kMinimalEditRequirements =
    "- The rewritten news headline may contain at most {LIMIT_WORDS} additional words compared to the "
    "original headline.\n"
    "- The rewritten headline must preserve the writing style, tone, and structure of the original headline.";

const std::string_view kFreeFormRequirements =
    "- The rewritten news headline may contain at most {LIMIT_WORDS} additional words compared to the "
    "original headline.";

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::ContentFiltering: return "ContentFiltering";
    case TemplateId::PreviewUnderstanding: return "PreviewUnderstanding";
    case TemplateId::ContextUnderstanding: return "ContextUnderstanding";
    case TemplateId::MisleadingJudgment: return "MisleadingJudgment";
    case TemplateId::HeadlineCorrection: return "HeadlineCorrection";
    case TemplateId::FrameIdentification: return "FrameIdentification";
    case TemplateId::FineGrainedAttribution: return "FineGrainedAttribution";
    case TemplateId::ModalityAttribution: return "ModalityAttribution";
    case TemplateId::VisualPrototyping: return "VisualPrototyping";
  }
  return "Unknown";
}

TemplateId parse_template_id(std::string_view s) {
  for (auto id : all_template_ids()) {
    if (to_string(id) == s) return id;
  }
  throw Error(ErrorCode::ParseError, "unknown template id '" + std::string(s) + "'");
}

std::string_view to_string(SchemaId id) {
  switch (id) {
    case SchemaId::ContentSignal: return "ContentSignal";
    case SchemaId::PreviewInterpretation: return "PreviewInterpretation";
    case SchemaId::ContextInterpretation: return "ContextInterpretation";
    case SchemaId::Judgment: return "Judgment";
    case SchemaId::Correction: return "Correction";
    case SchemaId::Frames: return "Frames";
    case SchemaId::Attribution: return "Attribution";
    case SchemaId::Modality: return "Modality";
    case SchemaId::VisualPrototype: return "VisualPrototype";
  }
  return "Unknown";
}

const PromptTemplate& prompt_template(TemplateId id) {
  for (const auto& t : registry()) {
    if (t.id == id) return t;
  }
  throw Error(ErrorCode::InvalidInput, "unregistered template");
}

const std::vector<TemplateId>& all_template_ids() {
  static const std::vector<TemplateId> ids = [] {
    std::vector<TemplateId> out;
    for (const auto& t : registry()) out.push_back(t.id);
    return out;
  }();
  return ids;
}

std::vector<std::string> referenced_slots(std::string_view text) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    if (auto len = placeholder_len(text, i)) {
      std::string name(text.substr(i + 1, len - 2));
      if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
      i += len - 1;
    }
  }
  return out;
}

std::string substitute_slots(std::string_view text, const Bindings& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      if (auto len = placeholder_len(text, i)) {
        std::string name(text.substr(i + 1, len - 2));
        auto it = bindings.find(name);
        if (it == bindings.end()) throw Error(ErrorCode::MissingSlot, name);
        out += it->second;
        i += len;
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::vector<Message> render_prompt(TemplateId id, const Bindings& bindings,
                                   std::shared_ptr<const ImageBlob> image) {
  const auto& tpl = prompt_template(id);
  Bindings full;
  for (const auto& slot : tpl.slots) {
    auto it = bindings.find(slot.name);
    if (it != bindings.end()) {
      full[slot.name] = it->second;
    } else if (slot.default_value) {
      full[slot.name] = *slot.default_value;
    } else {
      throw Error(ErrorCode::MissingSlot, slot.name);
    }
  }
  for (const auto& [name, value] : bindings) {
    if (!full.count(name)) {
      throw Error(ErrorCode::InvalidInput,
                  "slot '" + name + "' is not declared by template " + std::string(to_string(id)));
    }
  }
  if (image && !tpl.accepts_image) {
    throw Error(ErrorCode::InvalidInput, std::string(to_string(id)) + " does not take an image");
  }

  Message user{"user", {ContentPart::make_text(substitute_slots(tpl.text, full))}};
  if (image) user.parts.push_back(ContentPart::make_image(std::move(image)));
  return {std::move(user)};
}

}  // namespace omg
