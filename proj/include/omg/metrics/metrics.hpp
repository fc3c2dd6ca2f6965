#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "omg/core/types.hpp"
#include "omg/llm/transport.hpp"

namespace omg {

/// Positive class is Misleading. Throws Error{EmptyInput}.
EvalReport classification_report(const std::vector<std::pair<Label, Label>>& gold_predicted);
EvalReport report_from_confusion(const Confusion& c);

/// Lowercases ASCII, strips leading/trailing ASCII punctuation from each
/// whitespace token and drops tokens left empty.
std::vector<std::string> tokenize_for_metrics(std::string_view text);

inline constexpr double kBleuEpsilon = 1e-9;

/// Sentence-level BLEU-4 in [0, 100]. Orders with zero matches or zero
/// candidate n-grams get kBleuEpsilon added to numerator and denominator.
double bleu4(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);
double bleu4(std::string_view candidate, std::string_view reference);

/// LCS F-measure (beta = 1) in [0, 100].
double rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);
double rouge_l(std::string_view candidate, std::string_view reference);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

class Embedder {
 public:
  virtual ~Embedder() = default;
  /// Unit-length vector. Throws Error{ZeroVector} when nothing can be embedded.
  virtual std::vector<double> embed(std::string_view text) const = 0;
  virtual std::string id() const = 0;
};

/// Feature-hashed unigram (+ bigram) counts, L2-normalized.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dims = 256, bool bigrams = true) : dims_(dims), bigrams_(bigrams) {}
  std::vector<double> embed(std::string_view text) const override;
  std::string id() const override;

  static std::uint64_t fnv1a(std::string_view s);

 private:
  std::size_t dims_;
  bool bigrams_;
};

/// OpenAI-compatible embeddings endpoint.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(std::shared_ptr<HttpTransport> transport, std::string endpoint, std::string model,
                 std::string credential_ref);
  std::vector<double> embed(std::string_view text) const override;
  std::string id() const override { return "remote:" + model_; }

 private:
  std::shared_ptr<HttpTransport> transport_;
  std::string endpoint_;
  std::string model_;
  std::string credential_ref_;
};

/// Throws Error{ZeroVector} or Error{DimensionMismatch}.
double cosine(const std::vector<double>& u, const std::vector<double>& v);

struct SimilarityRow {
  double bleu4 = 0.0;
  double rouge_l = 0.0;
  double cosine = 0.0;

  bool operator==(const SimilarityRow&) const = default;
};

SimilarityRow similarity(std::string_view candidate, std::string_view reference, const Embedder& embedder);

/// Fraction of verifications labeled non-misleading. Throws Error{EmptyInput}.
double csr(const std::vector<Judgment>& verifications);

/// Acc(oracle U) - Acc(self U). Throws Error{InvalidInput} outside [0, 1].
double delta(double acc_oracle_u, double acc_self_u);

}  // namespace omg
