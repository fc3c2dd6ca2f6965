#include "omg/core/validate.hpp"

#include <set>

#include "omg/core/taxonomy.hpp"
#include "omg/core/text.hpp"

namespace omg {

namespace {

bool blank(const std::string& s) { return text::trim(s).empty(); }

void check_interpretation(const Interpretation& in, Basis expected, const std::string& field,
                          std::vector<Violation>& out) {
  if (in.basis != expected) {
    out.push_back({field + ".basis", "must be " + std::string(to_string(expected))});
  }
  if (blank(in.surface_interpretation)) out.push_back({field + ".surface_interpretation", "empty"});
  if (blank(in.event_implication)) out.push_back({field + ".event_implication", "empty"});
}

void check_frames(const FrameSet& fs, const std::string& field, std::vector<Violation>& out) {
  try {
    auto rebuilt = FrameSet::make(fs.frames(), fs.reasoning());
    if (rebuilt.frames() != fs.frames()) out.push_back({field, "tags not in canonical spelling"});
  } catch (const std::exception& e) {
    out.push_back({field, e.what()});
  }
}

}  // namespace

std::vector<Violation> validate_instance(const NewsInstance& instance) {
  std::vector<Violation> out;
  if (blank(instance.instance_id)) out.push_back({"instance_id", "empty"});
  if (blank(instance.preview.headline)) out.push_back({"preview.headline", "empty"});
  if (instance.preview.image_ref.empty()) out.push_back({"preview.image_ref", "empty"});
  if (blank(instance.article.body)) out.push_back({"article.body", "empty"});
  if (!is_recognized_topic(instance.article.topic)) {
    out.push_back({"article.topic", "unrecognized tag '" + instance.article.topic + "'"});
  }

  for (std::size_t i = 0; i < instance.annotations.size(); ++i) {
    const auto& a = instance.annotations[i];
    const std::string base = "annotations[" + std::to_string(i) + "]";
    if (blank(a.backend_id)) out.push_back({base + ".backend_id", "empty"});
    check_interpretation(a.u_p, Basis::Preview, base + ".u_p", out);
    check_interpretation(a.u_c, Basis::Context, base + ".u_c", out);
    if (blank(a.judgment.rationale)) out.push_back({base + ".judgment.rationale", "empty"});
  }

  if (instance.final_label) {
    bool agree = instance.annotations.size() >= 2;
    for (const auto& a : instance.annotations) agree = agree && a.judgment.label == *instance.final_label;
    if (!agree) out.push_back({"final_label", "requires ≥2 agreeing annotations"});
  }

  for (const auto& [kind, headline] : instance.gold_corrections) {
    if (blank(headline)) out.push_back({"gold_corrections." + std::string(to_string(kind)), "empty"});
  }

  if (instance.analysis) {
    const auto& an = *instance.analysis;
    if (an.frames_preview) check_frames(*an.frames_preview, "analysis.frames_preview", out);
    if (an.frames_context) check_frames(*an.frames_context, "analysis.frames_context", out);
    for (const auto& [kind, fs] : an.frames_rewritten) {
      check_frames(fs, "analysis.frames_rewritten." + std::string(to_string(kind)), out);
    }
    bool misleading = instance.final_label == Label::Misleading;
    if (an.attribution && !misleading) {
      out.push_back({"analysis.attribution", "requires final_label misleading"});
    }
    if (an.modality && !misleading) {
      out.push_back({"analysis.modality", "requires final_label misleading"});
    }
  }
  return out;
}

std::vector<Violation> validate_dataset(const std::vector<NewsInstance>& instances) {
  std::vector<Violation> out;
  std::set<std::string> ids;
  for (const auto& inst : instances) {
    for (auto v : validate_instance(inst)) {
      v.field = inst.instance_id + "." + v.field;
      out.push_back(std::move(v));
    }
    if (!ids.insert(inst.instance_id).second) {
      out.push_back({inst.instance_id + ".instance_id", "duplicate within dataset"});
    }
  }
  return out;
}

bool rationale_below_minimum(const Judgment& judgment) {
  return text::split_whitespace(judgment.rationale).size() < static_cast<std::size_t>(kRationaleMinWords);
}

}  // namespace omg
