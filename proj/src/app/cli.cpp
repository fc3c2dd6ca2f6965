#include "omg/app/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <ostream>

#include "omg/analysis/analysis.hpp"
#include "omg/app/config.hpp"
#include "omg/app/service.hpp"
#include "omg/core/json_io.hpp"
#include "omg/core/validate.hpp"
#include "omg/correction/corrector.hpp"
#include "omg/eval/harness.hpp"
#include "omg/pipeline/annotation.hpp"
#include "omg/store/store.hpp"

namespace omg {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::SameBackend:
    case ErrorCode::EmptyClass:
    case ErrorCode::EmptyInput:
    case ErrorCode::RationaleRequired:
    case ErrorCode::MissingOracleInterpretations:
    case ErrorCode::MissingReference:
    case ErrorCode::MissingAnnotation:
    case ErrorCode::MissingDependency:
    case ErrorCode::PreconditionNotFailed:
    case ErrorCode::ManifestMismatch:
    case ErrorCode::ParseError:
    case ErrorCode::UnknownBackend:
    case ErrorCode::Config: return kExitValidation;
    default: return kExitRuntime;
  }
}

namespace {

struct Options {
  std::string config_path;
  std::string corpus;
  std::string interpretations = "self";
  std::string input = "multimodal";
  std::string protocol = "free";
  std::string rationale = "oracle";
  std::string setup;
  std::string kind;
  std::string mode = "interpretation-aware";
  std::string split = "test";
  std::string out;
  std::string host = "127.0.0.1";
  int port = 8080;
};

// Everything a subcommand needs once the config is loaded.
struct Context {
  RunConfig config;
  std::unique_ptr<Gateway> gateway;
  std::unique_ptr<BlobStore> blobs;
  std::unique_ptr<PipelineEnv> env;
  std::ostream& out;

  Context(RunConfig cfg, std::ostream& o) : config(std::move(cfg)), out(o) {
    gateway = make_gateway(config);
    blobs = std::make_unique<BlobStore>(config.blob_dir);
    env = std::make_unique<PipelineEnv>(
        PipelineEnv{*gateway, make_image_resolver(blobs.get()), config.max_input_chars});
  }

  DatasetMeta meta() const {
    return {{{"balance", config.balance_seed}, {"split", config.split_seed}}, {config.annotator_a, config.annotator_b}};
  }

  Dataset load() const { return load_dataset(config.dataset_dir); }
  void save(const std::vector<NewsInstance>& instances) const { save_dataset(instances, config.dataset_dir, meta()); }

  void write_report(const std::string& name, json body, const std::string& command,
                    const std::string& table = "") const {
    json doc{{"stamp", reproducibility_stamp(config, command)}, {"result", std::move(body)}};
    write_file_atomic(config.reports_dir / (name + ".json"), doc.dump(2) + "\n");
    if (!table.empty()) write_file_atomic(config.reports_dir / (name + ".txt"), table);
    out << "wrote " << (config.reports_dir / (name + ".json")).string() << '\n';
  }
};

std::optional<Split> split_filter(const std::string& s) {
  if (s == "all") return std::nullopt;
  return parse_split(s);
}

std::vector<NewsInstance> select(const std::vector<NewsInstance>& all, const std::string& split, bool labeled_only,
                                 std::optional<Label> label = std::nullopt) {
  auto filter = split_filter(split);
  std::vector<NewsInstance> out;
  for (const auto& inst : all) {
    if (filter && inst.split != *filter) continue;
    if (labeled_only && !inst.final_label) continue;
    if (label && inst.final_label != label) continue;
    out.push_back(inst);
  }
  return out;
}

std::vector<NewsInstance> gold_set(const std::vector<NewsInstance>& all) {
  std::vector<NewsInstance> out;
  for (const auto& inst : all) {
    if (inst.gold_corrections.count(ProtocolKind::MinimalEdit) && inst.gold_corrections.count(ProtocolKind::FreeForm)) {
      out.push_back(inst);
    }
  }
  return out;
}

std::string protocol_short(ProtocolKind k) { return k == ProtocolKind::MinimalEdit ? "minimal" : "free"; }

json failures_json(const std::vector<StageFailure>& failures) {
  json arr = json::array();
  for (const auto& f : failures) {
    arr.push_back({{"id", f.instance_id},
                   {"step", f.step},
                   {"stage", f.stage ? json(*f.stage) : json()},
                   {"code", f.code},
                   {"message", f.message}});
  }
  return arr;
}

json analysis_failures_json(const std::vector<AnalysisFailure>& failures) {
  json arr = json::array();
  for (const auto& f : failures) arr.push_back({{"id", f.instance_id}, {"message", f.message}});
  return arr;
}

int cmd_ingest(Context& ctx, const Options& o) {
  if (o.corpus.empty()) throw Error(ErrorCode::InvalidInput, "ingest needs --corpus");
  auto result = ingest_corpus(o.corpus, ctx.blobs.get());
  ctx.save(result.instances);
  json errors = json::array();
  for (const auto& e : result.errors) errors.push_back({{"line", e.line}, {"message", e.message}});
  ctx.write_report("ingest",
                   {{"corpus", fs::path(o.corpus).filename().string()},
                    {"instances", result.instances.size()},
                    {"errors", errors},
                    {"warnings", result.warnings}},
                   "ingest");
  ctx.out << "ingested " << result.instances.size() << " instances, " << result.errors.size() << " bad lines\n";
  for (const auto& w : result.warnings) ctx.out << "warning: " << w << '\n';
  return kExitOk;
}

int cmd_annotate(Context& ctx, const Options&) {
  auto ds = ctx.load();
  AnnotationConfig ac;
  ac.annotator_a = ctx.config.annotator_a;
  ac.annotator_b = ctx.config.annotator_b;
  ac.filter_backend = ctx.config.content_filter;
  ac.balance_seed = ctx.config.balance_seed;
  ac.split_seed = ctx.config.split_seed;
  ac.test_fraction = ctx.config.test_fraction;
  ac.concurrency = ctx.config.concurrency;
  auto outcome = run_annotation(*ctx.env, ds.instances, ac);

  auto violations = validate_dataset(outcome.instances);
  if (!violations.empty()) {
    throw Error(ErrorCode::InvalidInput, "annotated dataset is inconsistent: " + violations.front().to_string());
  }
  ctx.save(outcome.instances);

  std::size_t short_rationales = 0;
  for (const auto& inst : outcome.instances) {
    for (const auto& a : inst.annotations) short_rationales += rationale_below_minimum(a.judgment) ? 1 : 0;
  }
  const auto& s = outcome.stats;
  json stats{{"input", s.input},
             {"topic_rejected", s.topic_rejected},
             {"literal_rejected", s.literal_rejected},
             {"annotated", s.annotated},
             {"errored", s.errored},
             {"agreed", s.agreed},
             {"disagreed", s.disagreed},
             {"agreement_rate", s.agreement_rate()},
             {"agreed_misleading", s.agreed_misleading},
             {"agreed_non_misleading", s.agreed_non_misleading},
             {"balanced_out", s.balanced_out},
             {"train", s.train},
             {"test", s.test},
             {"rationales_below_minimum", short_rationales}};
  ctx.write_report("annotate", {{"stats", stats}, {"failures", failures_json(outcome.failures)}}, "annotate");
  ctx.out << "annotated " << s.annotated << ", agreed " << s.agreed << ", train " << s.train << ", test " << s.test
          << ", errored " << s.errored << '\n';
  return kExitOk;
}

int cmd_detect(Context& ctx, const Options& o) {
  auto ds = ctx.load();
  auto source = parse_interpretation_source(o.interpretations);
  auto mode = parse_input_mode(o.input);
  auto test = select(ds.instances, o.split, true);
  if (test.empty()) throw Error(ErrorCode::EmptyInput, "no labeled instances in split " + o.split);
  auto report = run_detection(*ctx.env, ctx.config.detector, test, source, mode, ctx.config.concurrency);
  auto name = "detect-" + std::string(to_string(source)) + "-" + std::string(to_string(mode));
  ctx.write_report(name, to_json(report), "detect", format_detection_table({report}));
  ctx.out << format_detection_table({report});
  return kExitOk;
}

int cmd_correct(Context& ctx, const Options& o) {
  auto ds = ctx.load();
  auto kind = parse_protocol_kind(o.protocol);
  auto source = parse_rationale_source(o.rationale);
  auto set = select(ds.instances, o.split, true, Label::Misleading);
  if (set.empty()) throw Error(ErrorCode::EmptyInput, "no misleading instances in split " + o.split);
  SetupKind setup = source == RationaleSource::Oracle          ? SetupKind::G1
                    : source == RationaleSource::SelfGenerated ? SetupKind::G2
                                                               : SetupKind::Ablation;
  auto embedder = make_embedder(ctx.config);
  auto result = run_correction_setup(*ctx.env, setup, {ctx.config.detector, ctx.config.rewriter, ctx.config.judge},
                                     {kind, ctx.config.word_budget}, set, nullptr, embedder.get(),
                                     ctx.config.concurrency);
  auto name = "correct-" + protocol_short(kind) + "-" + std::string(to_string(source));
  ctx.write_report(name, to_json(result), "correct", format_setup_table({result}));
  ctx.out << format_setup_table({result});
  return kExitOk;
}

int cmd_build_gold(Context& ctx, const Options& o) {
  auto ds = ctx.load();
  auto misleading = select(ds.instances, o.split, true, Label::Misleading);
  if (misleading.empty()) throw Error(ErrorCode::EmptyInput, "no misleading instances in split " + o.split);
  auto outcome = build_gold_corrections(*ctx.env, misleading, ctx.config.oracle_rewriter, ctx.config.judge,
                                        ctx.config.word_budget, ctx.config.concurrency);
  std::map<std::string, const NewsInstance*> retained;
  for (const auto& inst : outcome.retained) retained[inst.instance_id] = &inst;
  auto filter = split_filter(o.split);
  for (auto& inst : ds.instances) {
    if (filter && inst.split != *filter) continue;
    if (inst.final_label != Label::Misleading) continue;
    auto it = retained.find(inst.instance_id);
    inst.gold_corrections = it == retained.end() ? std::map<ProtocolKind, std::string>{} : it->second->gold_corrections;
  }
  ctx.save(ds.instances);

  json traces = json::array();
  for (const auto& t : outcome.traces) {
    json results = json::object();
    for (const auto& [k, r] : t.results) results[std::string(to_string(k))] = r;
    traces.push_back({{"id", t.instance_id}, {"retained", t.retained}, {"note", t.note}, {"results", results}});
  }
  json body{{"input", misleading.size()},
            {"retained", outcome.retained.size()},
            {"errored", outcome.errored},
            {"succeeded_minimal_edit", outcome.succeeded(ProtocolKind::MinimalEdit)},
            {"succeeded_free_form", outcome.succeeded(ProtocolKind::FreeForm)},
            {"traces", traces}};
  ctx.write_report("gold", body, "build-gold");
  ctx.out << "gold set: " << outcome.retained.size() << " of " << misleading.size() << " retained\n";
  return kExitOk;
}

int cmd_evaluate(Context& ctx, const Options& o) {
  if (o.setup.empty()) throw Error(ErrorCode::InvalidInput, "evaluate needs --setup");
  auto ds = ctx.load();
  auto kind = parse_setup_kind(o.setup);
  auto protocol_kind = parse_protocol_kind(o.protocol);
  CorrectionProtocol protocol{protocol_kind, ctx.config.word_budget};
  auto gold = gold_set(ds.instances);
  if (gold.empty()) throw Error(ErrorCode::MissingDependency, "the dataset has no gold corrections; run build-gold first");

  std::optional<SetupResult> g2;
  if (kind == SetupKind::G3) {
    auto path = ctx.config.reports_dir / ("evaluate-g2-" + protocol_short(protocol_kind) + ".json");
    if (!fs::exists(path)) {
      throw Error(ErrorCode::MissingDependency, "g3 rewrites exactly the instances flagged by g2; run `evaluate "
                                                "--setup g2 --protocol " +
                                                    protocol_short(protocol_kind) + "` first");
    }
    auto doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.contains("result")) throw Error(ErrorCode::ParseError, path.string() + " is corrupt");
    g2 = setup_result_from_json(doc["result"]);
  }

  auto embedder = make_embedder(ctx.config);
  CorrectionRoles roles{ctx.config.detector, ctx.config.rewriter, ctx.config.judge};
  auto result = run_correction_setup(*ctx.env, kind, roles, protocol, gold, g2 ? &*g2 : nullptr, embedder.get(),
                                     ctx.config.concurrency);
  auto table = headline_similarity_table({result}, gold, *embedder);
  json body = to_json(result);
  body["similarity_table"] = to_json(table);
  auto name = "evaluate-" + std::string(to_string(kind)) + "-" + protocol_short(protocol_kind);
  auto text = format_setup_table({result}) + "\n" + format_similarity_table(table);
  ctx.write_report(name, body, "evaluate", text);
  ctx.out << text;
  return kExitOk;
}

int cmd_analyze(Context& ctx, const Options& o) {
  if (o.kind.empty()) throw Error(ErrorCode::InvalidInput, "analyze needs --kind");
  auto ds = ctx.load();
  auto filter = split_filter(o.split);
  std::vector<NewsInstance> work;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    const auto& inst = ds.instances[i];
    if (!inst.final_label || (filter && inst.split != *filter)) continue;
    work.push_back(inst);
    index.push_back(i);
  }
  const auto& backend = ctx.config.analyst;
  const int conc = ctx.config.concurrency;

  if (o.kind == "prototype") {
    auto setup = o.setup.empty() ? std::string("g1") : o.setup;
    auto path = ctx.config.reports_dir / ("evaluate-" + setup + "-" + o.protocol + ".json");
    if (!fs::exists(path)) {
      throw Error(ErrorCode::MissingDependency, "prototyping reads " + path.string() + "; run evaluate first");
    }
    auto doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.contains("result")) throw Error(ErrorCode::ParseError, path.string() + " is corrupt");
    auto result = setup_result_from_json(doc["result"]);
    auto records = prototypes_for_failures(*ctx.env, backend, ds.instances, result, conc);
    json arr = json::array();
    for (const auto& r : records) {
      json j{{"id", r.instance_id}, {"rewritten_headline", r.rewritten_headline}};
      if (r.prototype) {
        j["image_description"] = r.prototype->image_description;
        j["image_prompt"] = r.prototype->image_prompt;
      } else {
        j["error"] = r.error;
      }
      arr.push_back(std::move(j));
    }
    ctx.write_report("analyze-prototype-" + setup + "-" + o.protocol, {{"prototypes", arr}}, "analyze");
    ctx.out << records.size() << " prototypes\n";
    return kExitOk;
  }

  std::vector<AnalysisFailure> failures;
  if (o.kind == "frames") {
    failures = analyze_frames(*ctx.env, backend, work, conc);
  } else if (o.kind == "attribution") {
    failures = analyze_attribution(*ctx.env, backend, work, conc);
  } else if (o.kind == "modality") {
    failures = analyze_modality(*ctx.env, backend, work, conc);
  } else {
    throw Error(ErrorCode::InvalidInput, "analyze --kind must be frames, attribution, modality or prototype");
  }
  for (std::size_t i = 0; i < work.size(); ++i) ds.instances[index[i]] = std::move(work[i]);
  ctx.save(ds.instances);

  auto summary = summarize_analysis(select(ds.instances, o.split, true));
  ctx.write_report("analyze-" + o.kind, {{"summary", to_json(summary)}, {"failures", analysis_failures_json(failures)}},
                   "analyze", format_analysis_summary(summary));
  ctx.out << format_analysis_summary(summary);
  return kExitOk;
}

int cmd_export(Context& ctx, const Options& o) {
  auto ds = ctx.load();
  auto mode = parse_export_mode(o.mode);
  fs::path out = o.out.empty() ? ctx.config.reports_dir / ("export-" + std::string(to_string(mode)) + "-" + o.split + ".jsonl")
                               : fs::path(o.out);
  auto n = export_finetune(ds.instances, split_filter(o.split), mode, out, reproducibility_stamp(ctx.config, "export"));
  ctx.out << "exported " << n << " records to " << out.string() << '\n';
  return kExitOk;
}

int cmd_serve(Context& ctx, const Options& o) {
  Service service(ctx.config, *ctx.gateway, ctx.blobs.get());
  ctx.out << "serving on " << o.host << ":" << o.port << std::endl;
  serve_http(service, o.host, o.port, ctx.config.max_upload_bytes + 64 * 1024);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Misleading news preview toolkit: annotation, detection, correction and analysis", "omg"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "Run configuration (default: $OMG_CONFIG)");

  auto* ingest = app.add_subcommand("ingest", "Read a corpus file into the dataset");
  ingest->add_option("--corpus", o.corpus, "JSON-lines corpus")->required();

  app.add_subcommand("annotate", "Content filter, dual annotation, agreement filter, balance and split");

  auto* detect = app.add_subcommand("detect", "Evaluate the detector");
  detect->add_option("--interpretations", o.interpretations)->check(CLI::IsMember({"self", "oracle"}));
  detect->add_option("--input", o.input)->check(CLI::IsMember({"multimodal", "headline-only"}));
  detect->add_option("--split", o.split)->check(CLI::IsMember({"train", "test", "all"}));

  auto* correct = app.add_subcommand("correct", "Rewrite misleading headlines and verify them");
  correct->add_option("--protocol", o.protocol)->check(CLI::IsMember({"minimal", "free"}));
  correct->add_option("--rationale", o.rationale)->check(CLI::IsMember({"oracle", "self", "label-only"}));
  correct->add_option("--split", o.split)->check(CLI::IsMember({"train", "test", "all"}));

  auto* gold = app.add_subcommand("build-gold", "Build verified gold corrections for both protocols");
  gold->add_option("--split", o.split)->check(CLI::IsMember({"train", "test", "all"}));

  auto* evaluate = app.add_subcommand("evaluate", "Run a correction setup on the gold set");
  evaluate->add_option("--setup", o.setup)->required()->check(CLI::IsMember({"g1", "g2", "g3", "g4", "ablation"}));
  evaluate->add_option("--protocol", o.protocol)->check(CLI::IsMember({"minimal", "free"}));

  auto* analyze = app.add_subcommand("analyze", "Frames, cause attribution, modality attribution, prototypes");
  analyze->add_option("--kind", o.kind)->required()->check(
      CLI::IsMember({"frames", "attribution", "modality", "prototype"}));
  analyze->add_option("--split", o.split)->check(CLI::IsMember({"train", "test", "all"}));
  analyze->add_option("--setup", o.setup, "Setup whose failed rewrites get prototypes (default g1)")
      ->check(CLI::IsMember({"g1", "g2", "g3", "g4", "ablation"}));
  analyze->add_option("--protocol", o.protocol)->check(CLI::IsMember({"minimal", "free"}));

  auto* exp = app.add_subcommand("export", "Write fine-tuning records");
  exp->add_option("--mode", o.mode)->check(CLI::IsMember({"interpretation-aware", "label-only"}));
  exp->add_option("--split", o.split)->check(CLI::IsMember({"train", "test", "all"}));
  exp->add_option("--out", o.out, "Output file (default: reports dir)");

  auto* serve = app.add_subcommand("serve", "Start the HTTP service");
  serve->add_option("--host", o.host);
  serve->add_option("--port", o.port);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }
  if (*exp && exp->count("--split") == 0) o.split = "train";
  if (*analyze && analyze->count("--split") == 0) o.split = "all";

  try {
    if (o.config_path.empty()) {
      const char* env = std::getenv("OMG_CONFIG");
      if (!env || !*env) throw Error(ErrorCode::Config, "no configuration: pass --config or set OMG_CONFIG");
      o.config_path = env;
    }
    Context ctx(load_config(o.config_path), out);
    auto* sub = app.get_subcommands().front();
    const auto& name = sub->get_name();
    if (name == "ingest") return cmd_ingest(ctx, o);
    if (name == "annotate") return cmd_annotate(ctx, o);
    if (name == "detect") return cmd_detect(ctx, o);
    if (name == "correct") return cmd_correct(ctx, o);
    if (name == "build-gold") return cmd_build_gold(ctx, o);
    if (name == "evaluate") return cmd_evaluate(ctx, o);
    if (name == "analyze") return cmd_analyze(ctx, o);
    if (name == "export") return cmd_export(ctx, o);
    if (name == "serve") return cmd_serve(ctx, o);
    err << app.help();
    return kExitValidation;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace omg
