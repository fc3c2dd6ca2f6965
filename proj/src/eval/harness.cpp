#include "omg/eval/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "omg/core/json_io.hpp"
#include "omg/core/parallel.hpp"
#include "omg/core/text.hpp"
#include "omg/error.hpp"

namespace omg {

std::string_view to_string(InterpretationSource s) {
  return s == InterpretationSource::Oracle ? "oracle" : "self";
}

std::string_view to_string(InputMode m) { return m == InputMode::HeadlineOnly ? "headline-only" : "multimodal"; }

InterpretationSource parse_interpretation_source(std::string_view s) {
  if (text::iequals(s, "oracle")) return InterpretationSource::Oracle;
  if (text::iequals(s, "self")) return InterpretationSource::SelfGenerated;
  throw Error(ErrorCode::ParseError, "interpretations must be self or oracle, got '" + std::string(s) + "'");
}

InputMode parse_input_mode(std::string_view s) {
  if (text::iequals(s, "multimodal")) return InputMode::Multimodal;
  if (text::iequals(s, "headline-only")) return InputMode::HeadlineOnly;
  throw Error(ErrorCode::ParseError, "input must be multimodal or headline-only, got '" + std::string(s) + "'");
}

std::string detection_tag(InterpretationSource source, InputMode mode) {
  std::string tag = mode == InputMode::HeadlineOnly ? "detect/headline-only" : "detect";
  if (source == InterpretationSource::Oracle) tag += "/oracle";
  return tag;
}

namespace {

bool by_id(const NewsInstance& a, const NewsInstance& b) { return a.instance_id < b.instance_id; }

std::vector<NewsInstance> sorted(std::vector<NewsInstance> v) {
  std::sort(v.begin(), v.end(), by_id);
  return v;
}

}  // namespace

DetectionReport run_detection(const PipelineEnv& env, const std::string& detector,
                              const std::vector<NewsInstance>& test_set, InterpretationSource source,
                              InputMode mode, int concurrency) {
  auto work = sorted(test_set);
  for (const auto& inst : work) {
    if (!inst.final_label) {
      throw Error(ErrorCode::MissingAnnotation, "detection: instance " + inst.instance_id + " has no final label");
    }
    if (source == InterpretationSource::Oracle && !inst.oracle_annotation()) {
      throw Error(ErrorCode::MissingOracleInterpretations,
                  "detection: instance " + inst.instance_id + " has no stored interpretations");
    }
  }

  DetectionReport out;
  out.detector = detector;
  out.source = source;
  out.mode = mode;
  out.records.resize(work.size());
  const bool with_image = mode == InputMode::Multimodal;
  const std::string stage_tag = detection_tag(InterpretationSource::SelfGenerated, mode);
  const std::string judge_tag = detection_tag(source, mode);

  parallel_for(work.size(), concurrency, [&](std::size_t i) {
    const auto& inst = work[i];
    auto& rec = out.records[i];
    rec.instance_id = inst.instance_id;
    rec.gold = *inst.final_label;
    try {
      Interpretation u_p, u_c;
      if (source == InterpretationSource::Oracle) {
        u_p = inst.oracle_annotation()->u_p;
        u_c = inst.oracle_annotation()->u_c;
      } else {
        CallScope scope{inst.instance_id, stage_tag};
        u_p = simulate_preview_understanding(env, detector, inst.preview, scope, with_image);
        u_c = simulate_context_understanding(env, detector, inst.article, scope);
      }
      auto judgment = judge_misleading(env, detector, inst.preview, inst.article, u_p, u_c,
                                       {inst.instance_id, judge_tag}, with_image);
      rec.u_p = std::move(u_p);
      rec.u_c = std::move(u_c);
      rec.predicted = judgment.label;
      rec.rationale = std::move(judgment.rationale);
    } catch (const std::exception& ex) {
      rec.error = ex.what();
    }
  });

  std::vector<std::pair<Label, Label>> pairs;
  for (const auto& rec : out.records) {
    if (rec.predicted) {
      pairs.emplace_back(rec.gold, *rec.predicted);
    } else {
      ++out.errored;
    }
  }
  if (!pairs.empty()) out.report = classification_report(pairs);
  return out;
}

std::string_view to_string(SetupKind k) {
  switch (k) {
    case SetupKind::G1: return "g1";
    case SetupKind::G2: return "g2";
    case SetupKind::G3: return "g3";
    case SetupKind::G4: return "g4";
    case SetupKind::Ablation: return "ablation";
  }
  return "g1";
}

SetupKind parse_setup_kind(std::string_view s) {
  for (auto k : {SetupKind::G1, SetupKind::G2, SetupKind::G3, SetupKind::G4, SetupKind::Ablation}) {
    if (text::iequals(s, to_string(k))) return k;
  }
  throw Error(ErrorCode::ParseError, "setup must be g1, g2, g3, g4 or ablation, got '" + std::string(s) + "'");
}

std::string_view to_string(SampleScope s) {
  return s == SampleScope::AllGold ? "all-gold" : "predicted-misleading";
}

SetupSpec setup_spec(SetupKind kind) {
  switch (kind) {
    case SetupKind::G1: return {kind, RationaleSource::Oracle, SampleScope::AllGold, true};
    case SetupKind::G2: return {kind, RationaleSource::SelfGenerated, SampleScope::PredictedMisleading, false};
    case SetupKind::G3: return {kind, RationaleSource::Oracle, SampleScope::PredictedMisleading, false};
    case SetupKind::G4: return {kind, RationaleSource::SelfGenerated, SampleScope::PredictedMisleading, true};
    case SetupKind::Ablation: return {kind, RationaleSource::LabelOnly, SampleScope::AllGold, true};
  }
  return {kind, RationaleSource::Oracle, SampleScope::AllGold, true};
}

std::vector<std::string> SetupResult::scope_ids() const {
  std::vector<std::string> ids;
  for (const auto& t : traces) {
    if (t.in_scope) ids.push_back(t.instance_id);
  }
  return ids;
}

namespace {

SimilarityRow mean_row(const std::vector<SimilarityRow>& rows) {
  SimilarityRow m;
  if (rows.empty()) return m;
  for (const auto& r : rows) {
    m.bleu4 += r.bleu4;
    m.rouge_l += r.rouge_l;
    m.cosine += r.cosine;
  }
  auto n = static_cast<double>(rows.size());
  return {m.bleu4 / n, m.rouge_l / n, m.cosine / n};
}

void attach_similarity(SetupResult& result, const std::vector<NewsInstance>& gold, const Embedder& embedder) {
  std::map<std::string, const NewsInstance*> by_id_map;
  for (const auto& inst : gold) by_id_map[inst.instance_id] = &inst;
  std::vector<SimilarityRow> vs_orig, vs_ref;
  bool have_refs = true;
  for (const auto& t : result.traces) {
    if (!t.correction) continue;
    const auto& inst = *by_id_map.at(t.instance_id);
    vs_orig.push_back(similarity(t.correction->rewritten_headline, inst.preview.headline, embedder));
    auto ref = inst.gold_corrections.find(result.protocol.kind);
    if (ref == inst.gold_corrections.end() || text::trim(ref->second).empty()) {
      have_refs = false;
    } else {
      vs_ref.push_back(similarity(t.correction->rewritten_headline, ref->second, embedder));
    }
  }
  if (vs_orig.empty()) return;
  result.vs_original = mean_row(vs_orig);
  if (have_refs) result.vs_reference = mean_row(vs_ref);
}

}  // namespace

SetupResult run_correction_setup(const PipelineEnv& env, SetupKind kind, const CorrectionRoles& roles,
                                 const CorrectionProtocol& protocol, const std::vector<NewsInstance>& gold,
                                 const SetupResult* g2, const Embedder* embedder, int concurrency) {
  auto work = sorted(gold);
  SetupResult result;
  result.spec = setup_spec(kind);
  result.protocol = protocol;
  result.n_gold = work.size();

  std::set<std::string> g3_scope;
  if (kind == SetupKind::G3) {
    if (!g2 || g2->spec.kind != SetupKind::G2) {
      throw Error(ErrorCode::MissingDependency, "setup g3 rewrites the instances flagged in g2; run g2 first");
    }
    if (g2->protocol != protocol) {
      throw Error(ErrorCode::MissingDependency, "setup g3 needs the g2 result for the same protocol");
    }
    for (const auto& id : g2->scope_ids()) g3_scope.insert(id);
  }

  // Detection first for the self-rationale setups.
  std::optional<DetectionReport> detection;
  if (kind == SetupKind::G2 || kind == SetupKind::G4) {
    detection = run_detection(env, roles.detector, work, InterpretationSource::SelfGenerated, InputMode::Multimodal,
                              concurrency);
  }

  const std::string tag = correction_tag(protocol.kind, result.spec.rationale_source);
  result.traces.resize(work.size());
  parallel_for(work.size(), concurrency, [&](std::size_t i) {
    const auto& inst = work[i];
    auto& trace = result.traces[i];
    trace.instance_id = inst.instance_id;
    std::string rationale;
    switch (kind) {
      case SetupKind::G1:
      case SetupKind::Ablation: trace.in_scope = true; break;
      case SetupKind::G3: trace.in_scope = g3_scope.count(inst.instance_id) > 0; break;
      case SetupKind::G2:
      case SetupKind::G4: {
        const auto& rec = detection->records[i];
        if (!rec.error.empty()) {
          trace.error = "detection: " + rec.error;
          return;
        }
        trace.detected = rec.predicted;
        trace.in_scope = rec.predicted == Label::Misleading;
        rationale = rec.rationale;
        break;
      }
    }
    if (!trace.in_scope) return;
    try {
      CorrectionResult corr;
      if (kind == SetupKind::Ablation) {
        corr = correct_headline_label_only(env, roles.rewriter, inst, protocol, tag);
      } else {
        if (result.spec.rationale_source == RationaleSource::Oracle) {
          const auto* oracle = inst.oracle_annotation();
          if (!oracle) throw Error(ErrorCode::MissingAnnotation, "no oracle rationale for " + inst.instance_id);
          rationale = oracle->judgment.rationale;
        }
        corr = correct_headline(env, roles.rewriter, inst, rationale, protocol, tag);
      }
      corr.verification = verify_correction(env, roles.judge, inst, corr.rewritten_headline, verification_tag(tag));
      trace.success = correction_succeeded(corr);
      trace.correction = std::move(corr);
    } catch (const std::exception& ex) {
      trace.error = ex.what();
    }
  });

  for (const auto& t : result.traces) {
    if (!t.error.empty()) ++result.n_errored;
    if (t.in_scope) ++result.n_scope;
    if (t.success) ++result.n_success;
  }
  const std::size_t denom = result.spec.denominator_all_gold ? result.n_gold : result.n_scope;
  if (denom > 0) result.csr = static_cast<double>(result.n_success) / static_cast<double>(denom);
  if (embedder) attach_similarity(result, work, *embedder);
  return result;
}

SetupResult run_rationale_ablation(const PipelineEnv& env, const CorrectionRoles& roles,
                                   const CorrectionProtocol& protocol, const std::vector<NewsInstance>& gold,
                                   const Embedder* embedder, int concurrency) {
  return run_correction_setup(env, SetupKind::Ablation, roles, protocol, gold, nullptr, embedder, concurrency);
}

std::vector<SimilarityTableRow> headline_similarity_table(const std::vector<SetupResult>& results,
                                                          const std::vector<NewsInstance>& gold,
                                                          const Embedder& embedder) {
  std::map<std::string, const NewsInstance*> by_id_map;
  for (const auto& inst : gold) by_id_map[inst.instance_id] = &inst;

  std::vector<SimilarityTableRow> rows;
  for (const auto& r : results) {
    std::vector<SimilarityRow> rewrites, references;
    for (const auto& t : r.traces) {
      if (!t.correction) continue;
      auto it = by_id_map.find(t.instance_id);
      if (it == by_id_map.end()) {
        throw Error(ErrorCode::MissingReference, "instance " + t.instance_id + " is not in the gold set");
      }
      const auto& inst = *it->second;
      auto ref = inst.gold_corrections.find(r.protocol.kind);
      if (ref == inst.gold_corrections.end() || text::trim(ref->second).empty()) {
        throw Error(ErrorCode::MissingReference, "instance " + t.instance_id + " has no " +
                                                     std::string(to_string(r.protocol.kind)) + " gold headline");
      }
      rewrites.push_back(similarity(t.correction->rewritten_headline, inst.preview.headline, embedder));
      references.push_back(similarity(ref->second, inst.preview.headline, embedder));
    }
    SimilarityTableRow row;
    row.setup = std::string(to_string(r.spec.kind));
    row.rationale_source = std::string(to_string(r.spec.rationale_source));
    row.protocol = r.protocol.kind;
    row.n = rewrites.size();
    row.vs_original = mean_row(rewrites);
    row.reference_vs_original = mean_row(references);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

nlohmann::json row_json(const SimilarityRow& r) {
  return {{"bleu4", r.bleu4}, {"rouge_l", r.rouge_l}, {"cosine", r.cosine}};
}

nlohmann::json optional_row(const std::optional<SimilarityRow>& r) { return r ? row_json(*r) : nlohmann::json(); }

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

nlohmann::json to_json(const DetectionReport& r) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& rec : r.records) {
    nlohmann::json j{{"id", rec.instance_id}, {"gold", to_string(rec.gold)}};
    if (rec.predicted) {
      j["predicted"] = to_string(*rec.predicted);
      j["rationale"] = rec.rationale;
      j["u_p"] = *rec.u_p;
      j["u_c"] = *rec.u_c;
    } else {
      j["error"] = rec.error;
    }
    records.push_back(std::move(j));
  }
  return {{"detector", r.detector},
          {"interpretations", to_string(r.source)},
          {"input_mode", to_string(r.mode)},
          {"scored", r.records.size() - r.errored},
          {"errored", r.errored},
          {"report", r.report ? nlohmann::json(*r.report) : nlohmann::json()},
          {"records", std::move(records)}};
}

nlohmann::json to_json(const SetupResult& r) {
  nlohmann::json traces = nlohmann::json::array();
  for (const auto& t : r.traces) {
    nlohmann::json j{{"id", t.instance_id}, {"in_scope", t.in_scope}, {"success", t.success}};
    if (t.detected) j["detected"] = to_string(*t.detected);
    if (t.correction) j["correction"] = *t.correction;
    if (!t.error.empty()) j["error"] = t.error;
    traces.push_back(std::move(j));
  }
  return {{"setup", to_string(r.spec.kind)},
          {"rationale_source", to_string(r.spec.rationale_source)},
          {"sample_scope", to_string(r.spec.scope)},
          {"denominator", r.spec.denominator_all_gold ? "all-gold" : "scope"},
          {"protocol", r.protocol},
          {"csr", r.csr ? nlohmann::json(*r.csr) : nlohmann::json()},
          {"n_gold", r.n_gold},
          {"n_scope", r.n_scope},
          {"n_success", r.n_success},
          {"n_errored", r.n_errored},
          {"similarity_vs_original", optional_row(r.vs_original)},
          {"similarity_vs_reference", optional_row(r.vs_reference)},
          {"traces", std::move(traces)}};
}

SetupResult setup_result_from_json(const nlohmann::json& j) {
  auto row = [](const nlohmann::json& r) -> std::optional<SimilarityRow> {
    if (r.is_null()) return std::nullopt;
    return SimilarityRow{r.at("bleu4").get<double>(), r.at("rouge_l").get<double>(), r.at("cosine").get<double>()};
  };
  try {
    SetupResult r;
    r.spec = setup_spec(parse_setup_kind(j.at("setup").get<std::string>()));
    r.protocol = j.at("protocol").get<CorrectionProtocol>();
    if (!j.at("csr").is_null()) r.csr = j["csr"].get<double>();
    r.n_gold = j.at("n_gold").get<std::size_t>();
    r.n_scope = j.at("n_scope").get<std::size_t>();
    r.n_success = j.at("n_success").get<std::size_t>();
    r.n_errored = j.at("n_errored").get<std::size_t>();
    r.vs_original = row(j.at("similarity_vs_original"));
    r.vs_reference = row(j.at("similarity_vs_reference"));
    for (const auto& t : j.at("traces")) {
      SetupTrace trace;
      trace.instance_id = t.at("id").get<std::string>();
      trace.in_scope = t.at("in_scope").get<bool>();
      trace.success = t.at("success").get<bool>();
      if (t.contains("detected")) trace.detected = parse_label(t["detected"].get<std::string>());
      if (t.contains("correction")) trace.correction = t["correction"].get<CorrectionResult>();
      trace.error = t.value("error", std::string());
      r.traces.push_back(std::move(trace));
    }
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("setup result: ") + ex.what());
  }
}

nlohmann::json to_json(const std::vector<SimilarityTableRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"setup", r.setup},
                   {"rationale_source", r.rationale_source},
                   {"protocol", to_string(r.protocol)},
                   {"n", r.n},
                   {"rewrite_vs_original", row_json(r.vs_original)},
                   {"reference_vs_original", row_json(r.reference_vs_original)}});
  }
  return out;
}

std::string format_detection_table(const std::vector<DetectionReport>& reports) {
  std::ostringstream os;
  os << pad("Detector", 20) << pad("U", 8) << pad("Input", 15) << pad("Acc", 7) << pad("Mis P", 7)
     << pad("Mis R", 7) << pad("Mis F1", 8) << pad("Non P", 7) << pad("Non R", 7) << pad("Non F1", 8) << "Err\n";
  for (const auto& r : reports) {
    os << pad(r.detector, 20) << pad(std::string(to_string(r.source)), 8) << pad(std::string(to_string(r.mode)), 15);
    if (r.report) {
      const auto& e = *r.report;
      for (double v : {e.accuracy, e.misleading.precision, e.misleading.recall}) os << pad(fixed2(v), 7);
      os << pad(fixed2(e.misleading.f1), 8);
      for (double v : {e.non_misleading.precision, e.non_misleading.recall}) os << pad(fixed2(v), 7);
      os << pad(fixed2(e.non_misleading.f1), 8);
    } else {
      os << pad("n/a", 51);
    }
    os << r.errored << '\n';
  }
  return os.str();
}

std::string format_setup_table(const std::vector<SetupResult>& results) {
  std::ostringstream os;
  os << pad("Setup", 10) << pad("Rationale", 12) << pad("Protocol", 14) << pad("CSR", 7) << pad("Success", 9)
     << pad("Scope", 7) << "Gold\n";
  for (const auto& r : results) {
    os << pad(std::string(to_string(r.spec.kind)), 10) << pad(std::string(to_string(r.spec.rationale_source)), 12)
       << pad(std::string(to_string(r.protocol.kind)), 14) << pad(r.csr ? fixed2(*r.csr) : "n/a", 7)
       << pad(std::to_string(r.n_success), 9) << pad(std::to_string(r.n_scope), 7) << r.n_gold << '\n';
  }
  return os.str();
}

std::string format_similarity_table(const std::vector<SimilarityTableRow>& rows) {
  std::ostringstream os;
  os << pad("Setup", 10) << pad("Rationale", 12) << pad("Protocol", 14) << pad("N", 6) << pad("BLEU-4", 16)
     << pad("ROUGE-L", 16) << "Cosine   (reference in parentheses)\n";
  for (const auto& r : rows) {
    auto cell = [](double v, double ref) { return fixed2(v) + " (" + fixed2(ref) + ")"; };
    os << pad(r.setup, 10) << pad(r.rationale_source, 12) << pad(std::string(to_string(r.protocol)), 14)
       << pad(std::to_string(r.n), 6) << pad(cell(r.vs_original.bleu4, r.reference_vs_original.bleu4), 16)
       << pad(cell(r.vs_original.rouge_l, r.reference_vs_original.rouge_l), 16)
       << cell(r.vs_original.cosine, r.reference_vs_original.cosine) << '\n';
  }
  return os.str();
}

}  // namespace omg
