#include "omg/store/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include "omg/core/json_io.hpp"
#include "omg/core/taxonomy.hpp"
#include "omg/core/text.hpp"
#include "omg/core/validate.hpp"
#include "omg/error.hpp"
#include "omg/llm/digest.hpp"

namespace omg {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot replace " + path.string());
  }
}

BlobStore::BlobStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create blob directory " + dir_.string());
}

std::optional<std::string> BlobStore::digest_of(const std::string& ref) {
  static const std::regex kRef("^sha256:([0-9a-f]{64})$");
  std::smatch m;
  if (!std::regex_match(ref, m, kRef)) return std::nullopt;
  return m[1].str();
}

std::string BlobStore::put(const std::vector<std::uint8_t>& bytes) {
  auto hex = sha256_hex(std::span<const std::uint8_t>(bytes));
  auto path = path_for(hex);
  if (!fs::exists(path)) write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
  return "sha256:" + hex;
}

std::optional<std::vector<std::uint8_t>> BlobStore::get(const std::string& ref) const {
  auto hex = digest_of(ref);
  if (!hex) return std::nullopt;
  std::ifstream in(path_for(*hex), std::ios::binary);
  if (!in) return std::nullopt;
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

ImageResolver make_image_resolver(const BlobStore* blobs, fs::path base_dir) {
  return [blobs, base_dir](const NewsPreview& preview) -> std::shared_ptr<const ImageBlob> {
    auto blob = std::make_shared<ImageBlob>();
    blob->ref = preview.image_ref;
    blob->bytes = preview.image_bytes;
    if (blob->bytes.empty() && blobs) {
      if (auto b = blobs->get(preview.image_ref)) blob->bytes = std::move(*b);
    }
    if (blob->bytes.empty() && !base_dir.empty() && !BlobStore::digest_of(preview.image_ref) &&
        preview.image_ref.find("://") == std::string::npos) {
      std::error_code ec;
      auto path = base_dir / preview.image_ref;
      if (fs::is_regular_file(path, ec)) {
        auto data = read_file(path);
        blob->bytes.assign(data.begin(), data.end());
      }
    }
    if (!blob->bytes.empty()) {
      auto mime = sniff_image_mime(blob->bytes);
      if (mime != "application/octet-stream") blob->mime_type = mime;
    }
    return blob;
  };
}

IngestResult ingest_corpus(const fs::path& path, BlobStore* blobs) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open corpus " + path.string());
  IngestResult out;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      out.errors.push_back({line_no, "not a JSON object"});
      continue;
    }
    NewsInstance inst;
    try {
      inst.instance_id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      inst.preview.headline = j.at("headline").get<std::string>();
      inst.preview.image_ref = j.at("image_ref").get<std::string>();
      inst.article.body = j.at("body").get<std::string>();
      inst.article.topic = text::to_lower_ascii(text::trim(j.value("topic", std::string())));
      inst.article.article_id = j.value("article_id", inst.instance_id);
    } catch (const nlohmann::json::exception& ex) {
      out.errors.push_back({line_no, std::string("missing or mistyped field: ") + ex.what()});
      continue;
    }
    if (!is_recognized_topic(inst.article.topic)) {
      if (!inst.article.topic.empty()) {
        out.warnings.push_back("line " + std::to_string(line_no) + ": topic '" + inst.article.topic +
                               "' mapped to other");
      }
      inst.article.topic = std::string(kOtherTopic);
    }
    if (blobs && !BlobStore::digest_of(inst.preview.image_ref) &&
        inst.preview.image_ref.find("://") == std::string::npos) {
      std::error_code ec;
      auto img = path.parent_path() / inst.preview.image_ref;
      if (fs::is_regular_file(img, ec)) {
        auto data = read_file(img);
        inst.preview.image_ref = blobs->put(std::vector<std::uint8_t>(data.begin(), data.end()));
      }
    }
    auto violations = validate_instance(inst);
    if (!violations.empty()) {
      std::string msg;
      for (const auto& v : violations) msg += (msg.empty() ? "" : "; ") + v.to_string();
      out.errors.push_back({line_no, msg});
      continue;
    }
    if (auto it = seen.find(inst.instance_id); it != seen.end()) {
      out.errors.push_back(
          {line_no, "duplicate id '" + inst.instance_id + "' (first on line " + std::to_string(it->second) + ")"});
      continue;
    }
    seen[inst.instance_id] = line_no;
    out.instances.push_back(std::move(inst));
  }
  if (line_no == 0) out.warnings.push_back("corpus " + path.string() + " is empty");
  std::sort(out.instances.begin(), out.instances.end(),
            [](const NewsInstance& a, const NewsInstance& b) { return a.instance_id < b.instance_id; });
  return out;
}

namespace {

nlohmann::json count_block(const std::vector<NewsInstance>& instances) {
  std::map<std::string, std::size_t> splits{{"train", 0}, {"test", 0}, {"unassigned", 0}};
  std::map<std::string, std::size_t> labels{{"misleading", 0}, {"non-misleading", 0}, {"unlabeled", 0}};
  std::size_t gold = 0;
  for (const auto& inst : instances) {
    ++splits[std::string(to_string(inst.split))];
    ++labels[inst.final_label ? std::string(to_string(*inst.final_label)) : "unlabeled"];
    gold += inst.gold_corrections.empty() ? 0 : 1;
  }
  return {{"total", instances.size()}, {"splits", splits}, {"labels", labels}, {"gold", gold}};
}

class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      if (errno == EEXIST) throw Error(ErrorCode::Locked, "dataset " + dir.string() + " is locked by another writer");
      throw Error(ErrorCode::IoError, "cannot lock " + dir.string() + ": " + std::strerror(errno));
    }
  }
  ~DirLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

}  // namespace

nlohmann::json dataset_manifest(const std::vector<NewsInstance>& instances, const DatasetMeta& meta) {
  return {{"version", kDatasetVersion},
          {"counts", count_block(instances)},
          {"seeds", meta.seeds},
          {"annotators", meta.annotators}};
}

void save_dataset(const std::vector<NewsInstance>& instances, const fs::path& dir, const DatasetMeta& meta) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create dataset directory " + dir.string());
  DirLock lock(dir);

  std::vector<const NewsInstance*> order;
  for (const auto& inst : instances) order.push_back(&inst);
  std::sort(order.begin(), order.end(),
            [](const NewsInstance* a, const NewsInstance* b) { return a->instance_id < b->instance_id; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i]->instance_id == order[i - 1]->instance_id) {
      throw Error(ErrorCode::InvalidInput, "duplicate instance id '" + order[i]->instance_id + "'");
    }
  }
  std::string body;
  for (const auto* inst : order) body += nlohmann::json(*inst).dump() + "\n";
  write_file_atomic(dir / "instances.jsonl", body);
  write_file_atomic(dir / "manifest.json", dataset_manifest(instances, meta).dump(2) + "\n");
}

Dataset load_dataset(const fs::path& dir) {
  Dataset ds;
  auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"), nullptr, false);
  if (manifest.is_discarded()) throw Error(ErrorCode::ParseError, "manifest.json is not valid JSON");

  std::istringstream lines(read_file(dir / "instances.jsonl"));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      ds.instances.push_back(nlohmann::json::parse(line).get<NewsInstance>());
    } catch (const std::exception& ex) {
      throw Error(ErrorCode::ParseError,
                  "instances.jsonl line " + std::to_string(line_no) + ": " + std::string(ex.what()));
    }
  }
  std::sort(ds.instances.begin(), ds.instances.end(),
            [](const NewsInstance& a, const NewsInstance& b) { return a.instance_id < b.instance_id; });

  auto actual = count_block(ds.instances);
  if (!manifest.contains("counts") || manifest["counts"] != actual) {
    throw Error(ErrorCode::ManifestMismatch, "manifest counts " +
                                                 (manifest.contains("counts") ? manifest["counts"].dump() : "<none>") +
                                                 " disagree with records " + actual.dump());
  }
  try {
    if (manifest.contains("seeds")) ds.meta.seeds = manifest["seeds"].get<std::map<std::string, std::uint64_t>>();
    if (manifest.contains("annotators")) ds.meta.annotators = manifest["annotators"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("manifest.json: ") + ex.what());
  }
  ds.manifest = std::move(manifest);
  return ds;
}

std::string_view to_string(ExportMode m) {
  return m == ExportMode::LabelOnly ? "label-only" : "interpretation-aware";
}

ExportMode parse_export_mode(std::string_view s) {
  if (text::iequals(s, "label-only")) return ExportMode::LabelOnly;
  if (text::iequals(s, "interpretation-aware")) return ExportMode::InterpretationAware;
  throw Error(ErrorCode::ParseError, "export mode must be interpretation-aware or label-only");
}

namespace {

const AnnotationBundle& require_oracle(const NewsInstance& inst) {
  const auto* oracle = inst.oracle_annotation();
  if (!inst.final_label) throw Error(ErrorCode::MissingAnnotation, inst.instance_id + ": no final label");
  if (!oracle) throw Error(ErrorCode::MissingAnnotation, inst.instance_id + ": no annotation");
  auto blank = [](const std::string& s) { return text::trim(s).empty(); };
  if (blank(oracle->u_p.surface_interpretation) || blank(oracle->u_p.event_implication)) {
    throw Error(ErrorCode::MissingAnnotation, inst.instance_id + ": preview interpretation missing");
  }
  if (blank(oracle->u_c.surface_interpretation) || blank(oracle->u_c.event_implication)) {
    throw Error(ErrorCode::MissingAnnotation, inst.instance_id + ": context interpretation missing");
  }
  if (blank(oracle->judgment.rationale)) throw Error(ErrorCode::MissingAnnotation, inst.instance_id + ": no rationale");
  return *oracle;
}

std::string export_image(const std::string& ref) {
  if (auto hex = BlobStore::digest_of(ref)) return "blobs/" + *hex;
  return ref;
}

}  // namespace

std::string finetune_input_text(const NewsInstance& instance) {
  const auto& oracle = require_oracle(instance);
  std::string s;
  s += "News Headline: " + instance.preview.headline + "\n";
  s += "Full News Context: " + instance.article.body + "\n";
  s += "Reader interpretation (image-headline):\n";
  s += "  Surface interpretation: " + oracle.u_p.surface_interpretation + "\n";
  s += "  Event implication: " + oracle.u_p.event_implication + "\n";
  s += "Reader interpretation (full context):\n";
  s += "  Surface interpretation: " + oracle.u_c.surface_interpretation + "\n";
  s += "  Event implication: " + oracle.u_c.event_implication;
  return s;
}

std::string finetune_target_text(const NewsInstance& instance, ExportMode mode) {
  const auto& oracle = require_oracle(instance);
  std::string label = std::string(kLabelSentinel) + std::string(to_string(*instance.final_label));
  if (mode == ExportMode::LabelOnly) return label;
  return oracle.judgment.rationale + "\n" + label;
}

std::vector<FinetuneRecord> finetune_records(const std::vector<NewsInstance>& instances, std::optional<Split> split,
                                             ExportMode mode) {
  std::vector<const NewsInstance*> chosen;
  for (const auto& inst : instances) {
    if (split && inst.split != *split) continue;
    if (!split && !inst.final_label) continue;
    chosen.push_back(&inst);
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const NewsInstance* a, const NewsInstance* b) { return a->instance_id < b->instance_id; });
  std::vector<FinetuneRecord> out;
  for (const auto* inst : chosen) {
    out.push_back({inst->instance_id, export_image(inst->preview.image_ref), finetune_input_text(*inst),
                   finetune_target_text(*inst, mode), mode});
  }
  return out;
}

std::size_t export_finetune(const std::vector<NewsInstance>& instances, std::optional<Split> split, ExportMode mode,
                            const fs::path& out, const nlohmann::json& stamp) {
  auto records = finetune_records(instances, split, mode);
  std::string body;
  for (const auto& r : records) {
    nlohmann::json j{{"id", r.id},
                     {"image", r.image},
                     {"input_text", r.input_text},
                     {"target_text", r.target_text},
                     {"mode", to_string(r.mode)}};
    body += j.dump() + "\n";
  }
  write_file_atomic(out, body);
  if (!stamp.is_null()) {
    fs::path stamp_path = out;
    stamp_path += ".stamp.json";
    nlohmann::json s{{"stamp", stamp},
                     {"mode", to_string(mode)},
                     {"split", split ? std::string(to_string(*split)) : std::string("all")},
                     {"count", records.size()}};
    write_file_atomic(stamp_path, s.dump(2) + "\n");
  }
  return records.size();
}

}  // namespace omg
