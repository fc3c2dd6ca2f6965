#include "omg/metrics/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

#include <json.hpp>

#include "omg/core/text.hpp"
#include "omg/error.hpp"

namespace omg {

namespace {

double ratio(std::int64_t num, std::int64_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }

ClassScores scores(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  ClassScores s;
  s.precision = ratio(tp, tp + fp);
  s.recall = ratio(tp, tp + fn);
  s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

}  // namespace

EvalReport report_from_confusion(const Confusion& c) {
  if (c.total() == 0) throw Error(ErrorCode::EmptyInput, "classification report over zero instances");
  EvalReport r;
  r.confusion = c;
  r.accuracy = ratio(c.tp + c.tn, c.total());
  r.misleading = scores(c.tp, c.fp, c.fn);
  r.non_misleading = scores(c.tn, c.fn, c.fp);
  return r;
}

EvalReport classification_report(const std::vector<std::pair<Label, Label>>& gold_predicted) {
  Confusion c;
  for (const auto& [gold, pred] : gold_predicted) {
    if (gold == Label::Misleading) {
      ++(pred == Label::Misleading ? c.tp : c.fn);
    } else {
      ++(pred == Label::Misleading ? c.fp : c.tn);
    }
  }
  return report_from_confusion(c);
}

std::vector<std::string> tokenize_for_metrics(std::string_view text) {
  std::vector<std::string> out;
  for (auto tok : text::split_whitespace(text)) {
    std::size_t b = 0, e = tok.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(tok[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(tok[e - 1]))) --e;
    if (b < e) out.push_back(text::to_lower_ascii(tok.substr(b, e - b)));
  }
  return out;
}

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, int> ngram_counts(const std::vector<std::string>& toks, std::size_t n) {
  std::map<Ngram, int> counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) ++counts[Ngram(toks.begin() + i, toks.begin() + i + n)];
  return counts;
}

}  // namespace

double bleu4(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
  if (candidate.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    auto cand = ngram_counts(candidate, n);
    auto ref = ngram_counts(reference, n);
    double matches = 0.0;
    double total = 0.0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = ref.find(gram);
      if (it != ref.end()) matches += std::min(count, it->second);
    }
    if (matches == 0.0 || total == 0.0) {
      matches += kBleuEpsilon;
      total += kBleuEpsilon;
    }
    log_sum += std::log(matches / total);
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * bp * std::exp(log_sum / 4.0);
}

double bleu4(std::string_view candidate, std::string_view reference) {
  return bleu4(tokenize_for_metrics(candidate), tokenize_for_metrics(reference));
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  auto lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return 0.0;
  double p = lcs / static_cast<double>(candidate.size());
  double r = lcs / static_cast<double>(reference.size());
  return 100.0 * 2 * p * r / (p + r);
}

double rouge_l(std::string_view candidate, std::string_view reference) {
  return rouge_l(tokenize_for_metrics(candidate), tokenize_for_metrics(reference));
}

namespace {

std::vector<double> normalized(std::vector<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) throw Error(ErrorCode::ZeroVector, "cannot normalize a zero vector");
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

std::uint64_t HashingEmbedder::fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<double> HashingEmbedder::embed(std::string_view text) const {
  std::vector<double> v(dims_, 0.0);
  auto toks = tokenize_for_metrics(text);
  for (const auto& t : toks) v[fnv1a("u:" + t) % dims_] += 1.0;
  if (bigrams_) {
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) v[fnv1a("b:" + toks[i] + " " + toks[i + 1]) % dims_] += 1.0;
  }
  return normalized(std::move(v));
}

std::string HashingEmbedder::id() const {
  return "hashing-" + std::to_string(dims_) + (bigrams_ ? "-uni-bi" : "-uni");
}

RemoteEmbedder::RemoteEmbedder(std::shared_ptr<HttpTransport> transport, std::string endpoint, std::string model,
                               std::string credential_ref)
    : transport_(std::move(transport)),
      endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      credential_ref_(std::move(credential_ref)) {}

std::vector<double> RemoteEmbedder::embed(std::string_view text) const {
  const char* key = std::getenv(credential_ref_.c_str());
  if (!key || !*key) throw Error(ErrorCode::Config, "credential variable " + credential_ref_ + " is not set");
  nlohmann::json body{{"model", model_}, {"input", std::string(text)}};
  auto res = transport_->post_json(endpoint_, {{"Authorization", std::string("Bearer ") + key}}, body.dump(),
                                   std::chrono::milliseconds(60000));
  if (res.status == 429) throw Error(ErrorCode::RateLimited, "embedding endpoint answered 429");
  if (res.status < 200 || res.status >= 300) {
    throw Error(ErrorCode::TransportError,
                "embedding endpoint: " + (res.status == 0 ? res.error : "HTTP " + std::to_string(res.status)));
  }
  auto j = nlohmann::json::parse(res.body, nullptr, false);
  try {
    return normalized(j.at("data").at(0).at("embedding").get<std::vector<double>>());
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::TransportError, "embedding reply has no data[0].embedding");
  }
}

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cosine of vectors with " + std::to_string(u.size()) + " and " + std::to_string(v.size()) + " dims");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorCode::ZeroVector, "cosine with a zero vector");
  double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0, 1.0);
}

SimilarityRow similarity(std::string_view candidate, std::string_view reference, const Embedder& embedder) {
  return {bleu4(candidate, reference), rouge_l(candidate, reference),
          cosine(embedder.embed(candidate), embedder.embed(reference))};
}

double csr(const std::vector<Judgment>& verifications) {
  if (verifications.empty()) throw Error(ErrorCode::EmptyInput, "CSR over zero corrections");
  std::size_t ok = 0;
  for (const auto& j : verifications) ok += j.label == Label::NonMisleading;
  return static_cast<double>(ok) / static_cast<double>(verifications.size());
}

double delta(double acc_oracle_u, double acc_self_u) {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(acc_oracle_u) || !in_unit(acc_self_u)) {
    throw Error(ErrorCode::InvalidInput, "delta: accuracies must lie in [0, 1]");
  }
  return acc_oracle_u - acc_self_u;
}

}  // namespace omg
