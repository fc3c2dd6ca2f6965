#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "omg/core/types.hpp"
#include "omg/correction/corrector.hpp"
#include "omg/metrics/metrics.hpp"
#include "omg/pipeline/annotation.hpp"

namespace omg {

enum class InterpretationSource { SelfGenerated, Oracle };
enum class InputMode { Multimodal, HeadlineOnly };

std::string_view to_string(InterpretationSource s);  // "self", "oracle"
std::string_view to_string(InputMode m);             // "multimodal", "headline-only"
InterpretationSource parse_interpretation_source(std::string_view s);
InputMode parse_input_mode(std::string_view s);

/// Mock tag used by detection runs: "detect", "detect/headline-only", with
/// "/oracle" appended for the judgment when oracle interpretations are used.
std::string detection_tag(InterpretationSource source, InputMode mode);

struct DetectionRecord {
  std::string instance_id;
  Label gold = Label::NonMisleading;
  std::optional<Label> predicted;
  std::optional<Interpretation> u_p;
  std::optional<Interpretation> u_c;
  std::string rationale;
  std::string error;  // set when the instance errored
};

struct DetectionReport {
  std::string detector;
  InterpretationSource source = InterpretationSource::SelfGenerated;
  InputMode mode = InputMode::Multimodal;
  std::optional<EvalReport> report;  // unset when nothing could be scored
  std::vector<DetectionRecord> records;  // sorted by id
  std::size_t errored = 0;
};

/// Scores the detector against final labels. Errored instances are kept in
/// the records, excluded from the report and counted. Throws
/// Error{MissingOracleInterpretations} in oracle mode when an instance has no
/// annotation, Error{MissingAnnotation} for an instance without final label.
DetectionReport run_detection(const PipelineEnv& env, const std::string& detector,
                              const std::vector<NewsInstance>& test_set, InterpretationSource source,
                              InputMode mode, int concurrency = 4);

enum class SetupKind { G1, G2, G3, G4, Ablation };
enum class SampleScope { AllGold, PredictedMisleading };

std::string_view to_string(SetupKind k);  // "g1" .. "g4", "ablation"
SetupKind parse_setup_kind(std::string_view s);
std::string_view to_string(SampleScope s);

struct SetupSpec {
  SetupKind kind;
  RationaleSource rationale_source;
  SampleScope scope;
  bool denominator_all_gold;
};

SetupSpec setup_spec(SetupKind kind);

struct CorrectionRoles {
  std::string detector;  // detection and self rationales
  std::string rewriter;
  std::string judge;     // verification, fixed across setups
};

struct SetupTrace {
  std::string instance_id;
  bool in_scope = false;
  std::optional<Label> detected;  // G2 / G4 only
  std::optional<CorrectionResult> correction;
  bool success = false;
  std::string error;
};

struct SetupResult {
  SetupSpec spec;
  CorrectionProtocol protocol;
  std::optional<double> csr;  // unset when n_scope = 0
  std::size_t n_gold = 0;
  std::size_t n_scope = 0;
  std::size_t n_success = 0;
  std::size_t n_errored = 0;
  std::vector<SetupTrace> traces;  // one per gold instance, sorted by id
  std::optional<SimilarityRow> vs_original;
  std::optional<SimilarityRow> vs_reference;

  std::vector<std::string> scope_ids() const;
};

/// Runs one setup over the gold set. G3 needs the G2 result for the same
/// protocol (Error{MissingDependency} otherwise). With an embedder, mean
/// similarity of the rewrites to the originals and to the gold references is
/// attached.
SetupResult run_correction_setup(const PipelineEnv& env, SetupKind kind, const CorrectionRoles& roles,
                                 const CorrectionProtocol& protocol, const std::vector<NewsInstance>& gold,
                                 const SetupResult* g2 = nullptr, const Embedder* embedder = nullptr,
                                 int concurrency = 4);

/// G1 with the rationale replaced by the bare label statement.
SetupResult run_rationale_ablation(const PipelineEnv& env, const CorrectionRoles& roles,
                                   const CorrectionProtocol& protocol, const std::vector<NewsInstance>& gold,
                                   const Embedder* embedder = nullptr, int concurrency = 4);

struct SimilarityTableRow {
  std::string setup;
  std::string rationale_source;
  ProtocolKind protocol = ProtocolKind::FreeForm;
  std::size_t n = 0;
  SimilarityRow vs_original;
  SimilarityRow reference_vs_original;  // the gold headlines against the originals
};

/// Mean similarity of each setup's rewrites to the original headlines,
/// alongside the gold references' own similarity to the originals. Throws
/// Error{MissingReference} naming the instance lacking a gold headline.
std::vector<SimilarityTableRow> headline_similarity_table(const std::vector<SetupResult>& results,
                                                          const std::vector<NewsInstance>& gold,
                                                          const Embedder& embedder);

nlohmann::json to_json(const DetectionReport& r);
nlohmann::json to_json(const SetupResult& r);
/// Inverse of to_json(SetupResult). Throws Error{ParseError}.
SetupResult setup_result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const std::vector<SimilarityTableRow>& rows);

/// Fixed-width plain-text tables.
std::string format_detection_table(const std::vector<DetectionReport>& reports);
std::string format_setup_table(const std::vector<SetupResult>& results);
std::string format_similarity_table(const std::vector<SimilarityTableRow>& rows);

}  // namespace omg
