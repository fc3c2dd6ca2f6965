#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "omg/error.hpp"
#include "omg/metrics/metrics.hpp"
#include "oracles.hpp"

using namespace omg;

namespace {

std::vector<std::pair<Label, Label>> pairs_from(const Confusion& c) {
  std::vector<std::pair<Label, Label>> v;
  v.insert(v.end(), c.tp, {Label::Misleading, Label::Misleading});
  v.insert(v.end(), c.fn, {Label::Misleading, Label::NonMisleading});
  v.insert(v.end(), c.tn, {Label::NonMisleading, Label::NonMisleading});
  v.insert(v.end(), c.fp, {Label::NonMisleading, Label::Misleading});
  return v;
}

}  // namespace

TEST(Tokenize, RulesFromTheSpecExamples) {
  EXPECT_EQ(tokenize_for_metrics("Police Raid Market."), (std::vector<std::string>{"police", "raid", "market"}));
  EXPECT_TRUE(tokenize_for_metrics("").empty());
  EXPECT_EQ(tokenize_for_metrics("U.S.-led raid"), (std::vector<std::string>{"u.s.-led", "raid"}));
  EXPECT_EQ(tokenize_for_metrics("-- ... \"Quoted\""), (std::vector<std::string>{"quoted"}));
}

TEST(ClassificationReport, AllNegativePredictor) {
  auto r = report_from_confusion({0, 0, 500, 500});
  EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(r.non_misleading.precision, 0.5);
  EXPECT_DOUBLE_EQ(r.non_misleading.recall, 1.0);
  EXPECT_NEAR(r.non_misleading.f1, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(r.misleading.precision, 0.0);
  EXPECT_EQ(r.misleading.recall, 0.0);
  EXPECT_EQ(r.misleading.f1, 0.0);
}

TEST(ClassificationReport, DerivedConfusion) {
  Confusion c{380, 20, 480, 120};
  auto r = classification_report(pairs_from(c));
  EXPECT_EQ(r.confusion, c);
  EXPECT_NEAR(r.accuracy, 0.86, 1e-12);
  EXPECT_NEAR(r.misleading.precision, 0.95, 1e-12);
  EXPECT_NEAR(r.misleading.recall, 0.76, 1e-12);
  EXPECT_NEAR(r.misleading.f1, 2 * 0.95 * 0.76 / (0.95 + 0.76), 1e-12);
  EXPECT_NEAR(r.non_misleading.precision, 0.80, 1e-12);
  EXPECT_NEAR(r.non_misleading.recall, 0.96, 1e-12);
  EXPECT_NEAR(r.non_misleading.f1, 2 * 0.8 * 0.96 / 1.76, 1e-12);
}

TEST(ClassificationReport, PerfectAndEmpty) {
  auto r = report_from_confusion({10, 0, 7, 0});
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.misleading.f1, 1.0);
  EXPECT_EQ(r.non_misleading.f1, 1.0);
  try {
    classification_report({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(Bleu, FrozenOracleValue) {
  // 5/6, 3/5, 1/4 and a smoothed empty 4-gram order, BP = 1.
  EXPECT_NEAR(bleu4("the cat sat on the mat", "the cat is on the mat"), 0.2540663740561352, 1e-9);
  EXPECT_NEAR(bleu4("the cat sat on the mat", "the cat is on the mat"),
              oracle::bleu4(tokenize_for_metrics("the cat sat on the mat"),
                            tokenize_for_metrics("the cat is on the mat")),
              1e-9);
}

TEST(Bleu, IdentityDisjointEmpty) {
  EXPECT_NEAR(bleu4("one two three four five", "one two three four five"), 100.0, 1e-9);
  EXPECT_LT(bleu4("alpha beta gamma delta", "one two three four"), 1e-6);
  EXPECT_EQ(bleu4("", "one two"), 0.0);
}

TEST(Bleu, BrevityPenalty) {
  // Prefix of the reference: all precisions 1, BP = exp(1 - 8/4).
  EXPECT_NEAR(bleu4("a b c d", "a b c d e f g h"), 100.0 * std::exp(-1.0), 1e-9);
}

TEST(Bleu, MatchesOracleOnRandomPairs) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    auto c = oracle::random_tokens(rng);
    auto r = oracle::random_tokens(rng);
    ASSERT_NEAR(bleu4(c, r), oracle::bleu4(c, r), 1e-9) << i;
  }
}

TEST(RougeL, Examples) {
  EXPECT_EQ(lcs_length({"a", "b", "c"}, {"a", "x", "c"}), 2u);
  EXPECT_NEAR(rouge_l(std::vector<std::string>{"a", "b", "c"}, {"a", "x", "c"}), 200.0 / 3.0, 1e-9);
  EXPECT_NEAR(rouge_l("same words here", "same words here"), 100.0, 1e-12);
  EXPECT_EQ(rouge_l("a b", "c d"), 0.0);
  EXPECT_EQ(rouge_l("", "c d"), 0.0);
}

TEST(RougeL, MatchesOracleOnRandomPairs) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    auto c = oracle::random_tokens(rng);
    auto r = oracle::random_tokens(rng);
    ASSERT_EQ(lcs_length(c, r), oracle::lcs(c, r));
    ASSERT_NEAR(rouge_l(c, r), oracle::rouge_l(c, r), 1e-9);
  }
}

TEST(HashingEmbedder, HandComputedBuckets) {
  // fnv1a-64 mod 256: "u:a" -> 11, "u:b" -> 190, "b:a b" -> 136, "b:b a" -> 16.
  EXPECT_EQ(HashingEmbedder::fnv1a("u:a") % 256, 11u);
  EXPECT_EQ(HashingEmbedder::fnv1a("u:b") % 256, 190u);

  HashingEmbedder uni(256, false);
  auto ab = uni.embed("a b");
  EXPECT_EQ(ab, uni.embed("b a"));
  EXPECT_NEAR(ab[11], 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(ab[190], 1.0 / std::sqrt(2.0), 1e-12);

  HashingEmbedder bi;
  auto v = bi.embed("a b");
  EXPECT_NEAR(v[136], 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_EQ(v[16], 0.0);
  EXPECT_NE(v, bi.embed("b a"));
  EXPECT_EQ(bi.id(), "hashing-256-uni-bi");
}

TEST(HashingEmbedder, UnitNormAndDeterminism) {
  HashingEmbedder e;
  for (const char* s : {"x", "Police raid market", "a a a a b", "one two three four five six"}) {
    auto v = e.embed(s);
    double n = 0;
    for (double x : v) n += x * x;
    EXPECT_NEAR(std::sqrt(n), 1.0, 1e-9);
    EXPECT_EQ(v, e.embed(s));
  }
  try {
    e.embed("...");
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::ZeroVector);
  }
}

TEST(Cosine, Examples) {
  EXPECT_NEAR(cosine({1, 2}, {2, 1}), 0.8, 1e-12);
  EXPECT_NEAR(cosine({1, 0}, {0, 3}), 0.0, 1e-12);
  EXPECT_NEAR(cosine({0.3, 0.4}, {0.3, 0.4}), 1.0, 1e-12);
  EXPECT_THROW(cosine({0, 0}, {1, 1}), Error);
  try {
    cosine({1, 2, 3}, {1, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(Csr, Definition) {
  Judgment ok{Label::NonMisleading, "fixed"};
  Judgment bad{Label::Misleading, "still"};
  EXPECT_DOUBLE_EQ(csr({ok, ok, ok, bad}), 0.75);
  EXPECT_EQ(csr({bad, bad}), 0.0);
  EXPECT_THROW(csr({}), Error);
}

TEST(Delta, PublishedValues) {
  EXPECT_NEAR(delta(0.86, 0.82), 0.04, 1e-12);
  EXPECT_NEAR(delta(0.95, 0.82), 0.13, 1e-12);
  EXPECT_EQ(delta(0.7, 0.7), 0.0);
  EXPECT_LT(delta(0.5, 0.6), 0.0);
  EXPECT_THROW(delta(1.2, 0.5), Error);
}
