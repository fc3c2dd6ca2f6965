#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "omg/correction/corrector.hpp"
#include "omg/error.hpp"

using namespace omg;
using fixture::Captured;

namespace {

struct Env {
  Gateway gateway;
  PipelineEnv env{gateway, nullptr, std::nullopt};
};

std::string random_headline(std::mt19937_64& rng) {
  static const char* words[] = {"city", "vote", "fire", "plan", "rain", "talks", "union", "court"};
  std::uniform_int_distribution<int> len(0, 14), pick(0, 7), gap(1, 3);
  std::string s;
  int n = len(rng);
  for (int i = 0; i < n; ++i) {
    s += std::string(gap(rng), i % 2 ? '\t' : ' ');
    s += words[pick(rng)];
  }
  return s;
}

NewsInstance misleading_instance(const std::string& id, const std::string& headline) {
  auto inst = fixture::make_instance(id, headline, "Body of " + id);
  inst.annotations = {fixture::make_bundle("oracle", Label::Misleading, "Oracle rationale for " + id),
                      fixture::make_bundle("other", Label::Misleading)};
  inst.final_label = Label::Misleading;
  return inst;
}

}  // namespace

TEST(Words, Count) {
  EXPECT_EQ(count_words(""), 0);
  EXPECT_EQ(count_words("   \t\n"), 0);
  EXPECT_EQ(count_words("one"), 1);
  EXPECT_EQ(count_words("  two\twords\n"), 2);
  EXPECT_EQ(count_words("state-of-the-art idea"), 2);
  EXPECT_EQ(extra_words("a b c", "a b c d e"), 2);
  EXPECT_EQ(extra_words("a b c d", "a"), -3);
}

TEST(Words, BudgetLawOnRandomPairs) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    auto h = random_headline(rng);
    auto r = random_headline(rng);
    int e = extra_words(h, r);
    EXPECT_EQ(e, count_words(r) - count_words(h));
    for (int budget : {0, 3, 5}) {
      EXPECT_EQ(within_budget(e, {ProtocolKind::MinimalEdit, budget}), e <= budget);
    }
  }
}

TEST(Requirements, CarryTheBudget) {
  auto m = rewriting_requirements({ProtocolKind::MinimalEdit, 3});
  auto f = rewriting_requirements({ProtocolKind::FreeForm, 7});
  EXPECT_NE(m.find("at most 3 additional words"), std::string::npos);
  EXPECT_NE(m.find("preserve the writing style"), std::string::npos);
  EXPECT_NE(f.find("at most 7 additional words"), std::string::npos);
  EXPECT_EQ(f.find("preserve the writing style"), std::string::npos);
}

TEST(RationaleSource, Names) {
  for (auto s : {RationaleSource::Oracle, RationaleSource::SelfGenerated, RationaleSource::LabelOnly}) {
    EXPECT_EQ(parse_rationale_source(to_string(s)), s);
  }
  EXPECT_EQ(correction_tag(ProtocolKind::MinimalEdit, RationaleSource::LabelOnly), "minimal/label-only");
  EXPECT_EQ(verification_tag("free/self"), "verify/free/self");
  EXPECT_THROW(parse_rationale_source("guess"), Error);
}

TEST(Correct, PromptCarriesRationaleAndRecordsBudget) {
  auto sink = std::make_shared<std::vector<Captured>>();
  Env e;
  e.gateway.add_backend(fixture::mock_backend("m", fixture::capturing_script(sink)));
  auto inst = fixture::make_instance("i1", "Plan passes", "The plan passed after UNIQUEBODY edits.");
  auto r = correct_headline(e.env, "m", inst, "RATIONALE-XYZ omits the concessions", {ProtocolKind::FreeForm, 3},
                            "free/oracle");
  EXPECT_EQ(r.rewritten_headline, "A corrected headline");
  EXPECT_EQ(r.extra_words, 1);
  EXPECT_TRUE(r.budget_ok);
  EXPECT_FALSE(r.verification);
  ASSERT_EQ(sink->size(), 1u);
  EXPECT_EQ((*sink)[0].tpl, TemplateId::HeadlineCorrection);
  EXPECT_EQ((*sink)[0].tag, "free/oracle");
  auto prompt = all_text((*sink)[0].messages);
  EXPECT_NE(prompt.find("RATIONALE-XYZ"), std::string::npos);
  EXPECT_NE(prompt.find("UNIQUEBODY"), std::string::npos);
  EXPECT_NE(prompt.find("at most 3 additional words"), std::string::npos);
  EXPECT_TRUE(has_image_part((*sink)[0].messages));

  auto tight = correct_headline(e.env, "m", inst, "r", {ProtocolKind::FreeForm, 0}, "t");
  EXPECT_EQ(tight.extra_words, 1);
  EXPECT_FALSE(tight.budget_ok);
}

TEST(Correct, BlankRationaleIsRejected) {
  Env e;
  e.gateway.add_backend(fixture::mock_backend("m", fixture::capturing_script(std::make_shared<std::vector<Captured>>())));
  auto inst = fixture::make_instance("i1", "H", "B");
  try {
    correct_headline(e.env, "m", inst, "  \n", {}, "t");
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::RationaleRequired);
  }
}

TEST(Correct, LabelOnlyPromptHasNoRationale) {
  auto sink = std::make_shared<std::vector<Captured>>();
  Env e;
  e.gateway.add_backend(fixture::mock_backend("m", fixture::capturing_script(sink)));
  auto inst = misleading_instance("i1", "Plan passes");
  correct_headline_label_only(e.env, "m", inst, {ProtocolKind::MinimalEdit, 3}, "minimal/label-only");
  ASSERT_EQ(sink->size(), 1u);
  auto prompt = all_text((*sink)[0].messages);
  EXPECT_NE(prompt.find(kLabelOnlyStatement), std::string::npos);
  EXPECT_EQ(prompt.find("Oracle rationale"), std::string::npos);
  EXPECT_EQ(prompt.find("rationale"), std::string::npos);
}

TEST(Verify, ReannotatesTheRewrittenPreview) {
  auto sink = std::make_shared<std::vector<Captured>>();
  Env e;
  e.gateway.add_backend(fixture::mock_backend("j", fixture::capturing_script(sink, Label::NonMisleading)));
  auto inst = fixture::make_instance("i1", "Old headline", "B");
  auto j = verify_correction(e.env, "j", inst, "New calmer headline", "verify/free/oracle");
  EXPECT_EQ(j.label, Label::NonMisleading);
  ASSERT_EQ(sink->size(), 3u);
  auto stage1 = all_text((*sink)[0].messages);
  EXPECT_NE(stage1.find("New calmer headline"), std::string::npos);
  EXPECT_EQ(stage1.find("Old headline"), std::string::npos);
  for (const auto& c : *sink) EXPECT_EQ(c.tag, "verify/free/oracle");
}

TEST(GoldBuild, RetainsOnlyDoubleSuccessesWithinBudget) {
  fixture::ScriptBuilder oracle, judge;
  std::vector<NewsInstance> input;
  const std::string h = "Officials approve new budget";  // 4 words
  auto add_case = [&](const std::string& id, const std::string& minimal, const std::string& free, Label vm,
                      Label vf) {
    input.push_back(misleading_instance(id, h));
    oracle.add(TemplateId::HeadlineCorrection, id, fixture::reply_correction(minimal), "gold/minimal");
    oracle.add(TemplateId::HeadlineCorrection, id, fixture::reply_correction(free), "gold/free");
    judge.annotation(id, vm, "verify/gold/minimal");
    judge.annotation(id, vf, "verify/gold/free");
  };
  add_case("g0", h + " after cuts", "Budget approved after deep cuts", Label::NonMisleading, Label::NonMisleading);
  add_case("g1", h + " after four deep cuts", "Budget approved after cuts", Label::NonMisleading,
           Label::NonMisleading);
  add_case("g2", h + " after cuts", "Budget approved", Label::NonMisleading, Label::Misleading);
  add_case("g5", "Budget approved", "Budget approved", Label::NonMisleading, Label::NonMisleading);

  auto g3 = misleading_instance("g3", h);
  g3.final_label = Label::NonMisleading;
  input.push_back(g3);

  input.push_back(misleading_instance("g4", h));
  oracle.add(TemplateId::HeadlineCorrection, "g4", "not json", "gold/minimal");

  Env e;
  e.gateway.add_backend(fixture::mock_backend("oracle", oracle.build()));
  e.gateway.add_backend(fixture::mock_backend("judge", judge.build()));
  std::reverse(input.begin(), input.end());
  auto out = build_gold_corrections(e.env, input, "oracle", "judge", 3, 3);

  ASSERT_EQ(out.traces.size(), 6u);
  for (std::size_t i = 1; i < out.traces.size(); ++i) {
    EXPECT_LT(out.traces[i - 1].instance_id, out.traces[i].instance_id);
  }
  EXPECT_EQ(out.errored, 2u);
  ASSERT_EQ(out.retained.size(), 2u);
  EXPECT_EQ(out.retained[0].instance_id, "g0");
  EXPECT_EQ(out.retained[1].instance_id, "g5");
  EXPECT_EQ(out.retained[0].gold_corrections.at(ProtocolKind::MinimalEdit), h + " after cuts");
  EXPECT_EQ(out.retained[0].gold_corrections.at(ProtocolKind::FreeForm), "Budget approved after deep cuts");
  EXPECT_EQ(out.retained[1].gold_corrections.at(ProtocolKind::FreeForm), "Budget approved");

  for (const auto& inst : out.retained) {
    for (const auto& [kind, text] : inst.gold_corrections) {
      EXPECT_LE(extra_words(inst.preview.headline, text), 3);
    }
  }
  const auto& g1 = out.traces[1];
  EXPECT_EQ(g1.instance_id, "g1");
  EXPECT_FALSE(g1.retained);
  EXPECT_FALSE(g1.results.at(ProtocolKind::MinimalEdit).budget_ok);
  EXPECT_EQ(g1.results.at(ProtocolKind::MinimalEdit).extra_words, 4);
  EXPECT_FALSE(out.traces[2].retained);
  EXPECT_FALSE(out.traces[3].note.empty());
  EXPECT_FALSE(out.traces[4].note.empty());

  // g0 and g5 succeed under both, g1 only free-form, g2 only minimal.
  EXPECT_EQ(out.succeeded(ProtocolKind::MinimalEdit), 3u);
  EXPECT_EQ(out.succeeded(ProtocolKind::FreeForm), 3u);
}
