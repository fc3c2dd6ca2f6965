#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "omg/core/random.hpp"
#include "omg/error.hpp"
#include "omg/pipeline/annotation.hpp"

using namespace omg;
using fixture::Captured;

namespace {

struct Env {
  Gateway gateway;
  PipelineEnv env{gateway, nullptr, std::nullopt};
};

std::vector<NewsInstance> labeled(std::size_t mis, std::size_t non) {
  std::vector<NewsInstance> out;
  for (std::size_t i = 0; i < mis + non; ++i) {
    auto inst = fixture::make_instance("id" + std::to_string(1000 + i), "H", "B");
    inst.final_label = i < mis ? Label::Misleading : Label::NonMisleading;
    out.push_back(inst);
  }
  return out;
}

}  // namespace

TEST(Topic, Filter) {
  EXPECT_TRUE(filter_by_topic({"a", "b", "politics"}));
  EXPECT_TRUE(filter_by_topic({"a", "b", "conflict_attack"}));
  EXPECT_FALSE(filter_by_topic({"a", "b", "sports"}));
  EXPECT_FALSE(filter_by_topic({"a", "b", "other"}));
}

TEST(BoundedArticle, CutsOnCodePointBoundary) {
  Env e;
  EXPECT_EQ(bounded_article(e.env, "héllo"), "héllo");
  e.env.max_input_chars = 2;  // 'h' + first byte of 'é'
  EXPECT_EQ(bounded_article(e.env, "héllo"), "h");
  e.env.max_input_chars = 3;
  EXPECT_EQ(bounded_article(e.env, "héllo"), "hé");
}

TEST(Annotate, ThreeStagesInOrderWithHygiene) {
  auto sink = std::make_shared<std::vector<Captured>>();
  Env e;
  e.gateway.add_backend(fixture::mock_backend("m", fixture::capturing_script(sink)));
  auto inst = fixture::make_instance("i1", "Mayor unveils sweeping plan", "ARTICLEBODY the council rejected it.");
  auto b = annotate(e.env, "m", inst, "t");
  EXPECT_EQ(b.backend_id, "m");
  EXPECT_EQ(b.u_p.basis, Basis::Preview);
  EXPECT_EQ(b.u_c.basis, Basis::Context);
  EXPECT_EQ(b.judgment.label, Label::Misleading);
  ASSERT_EQ(sink->size(), 3u);
  EXPECT_EQ((*sink)[0].tpl, TemplateId::PreviewUnderstanding);
  EXPECT_EQ((*sink)[1].tpl, TemplateId::ContextUnderstanding);
  EXPECT_EQ((*sink)[2].tpl, TemplateId::MisleadingJudgment);
  for (const auto& c : *sink) EXPECT_EQ(c.tag, "t");

  auto stage1 = all_text((*sink)[0].messages);
  EXPECT_NE(stage1.find("Mayor unveils sweeping plan"), std::string::npos);
  EXPECT_EQ(stage1.find("ARTICLEBODY"), std::string::npos);
  EXPECT_TRUE(has_image_part((*sink)[0].messages));

  auto stage2 = all_text((*sink)[1].messages);
  EXPECT_NE(stage2.find("ARTICLEBODY"), std::string::npos);
  EXPECT_EQ(stage2.find("Mayor unveils sweeping plan"), std::string::npos);
  EXPECT_FALSE(has_image_part((*sink)[1].messages));

  auto stage3 = all_text((*sink)[2].messages);
  EXPECT_NE(stage3.find("p-surface"), std::string::npos);
  EXPECT_NE(stage3.find("c-implication"), std::string::npos);
}

TEST(Annotate, ErrorsCarryTheStage) {
  Env e;
  e.gateway.add_backend(fixture::mock_backend(
      "m", fixture::ScriptBuilder()
               .add(TemplateId::PreviewUnderstanding, "i1", fixture::reply_preview("s", "e"))
               .add(TemplateId::ContextUnderstanding, "i1", fixture::reply_context("s", "e"))
               .add(TemplateId::MisleadingJudgment, "i1", "I think it is misleading")
               .build()));
  auto inst = fixture::make_instance("i1", "H", "B");
  try {
    annotate(e.env, "m", inst);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::SchemaViolation);
    EXPECT_EQ(err.stage(), 3);
    EXPECT_EQ(std::string(err.what()).rfind("stage 3 (misleading judgment)", 0), 0u);
  }

  inst.article.body = "  ";
  try {
    annotate(e.env, "m", inst);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::InvalidInput);
    EXPECT_EQ(err.stage(), 2);
  }
}

TEST(ContentSignal, Classifies) {
  Env e;
  e.gateway.add_backend(fixture::mock_backend(
      "m", fixture::ScriptBuilder()
               .add(TemplateId::ContentFiltering, "a", fixture::reply_content(false))
               .add(TemplateId::ContentFiltering, "b", fixture::reply_content(true))
               .build()));
  EXPECT_EQ(classify_content_signal(e.env, "m", {"Cafe opens downtown", "x", {}}, {"a", ""}).label,
            ContentLabel::LiteralDescriptive);
  EXPECT_EQ(classify_content_signal(e.env, "m", {"Explosion forces evacuation", "x", {}}, {"b", ""}).label,
            ContentLabel::MessageSuggestive);
}

TEST(CrossModelFilter, AllCombinations) {
  for (auto la : {Label::Misleading, Label::NonMisleading}) {
    for (auto lb : {Label::Misleading, Label::NonMisleading}) {
      auto r = cross_model_filter(fixture::make_bundle("a", la), fixture::make_bundle("b", lb));
      EXPECT_EQ(r.has_value(), la == lb);
      if (r) EXPECT_EQ(*r, la);
    }
  }
  try {
    cross_model_filter(fixture::make_bundle("a", Label::Misleading), fixture::make_bundle("a", Label::Misleading));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::SameBackend);
  }
}

TEST(Random, UniformBelowAndShuffle) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(uniform_below(rng, 7), 7u);
  std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
  auto a = v, b = v;
  seeded_shuffle(a, 42);
  seeded_shuffle(b, 42);
  EXPECT_EQ(a, b);
  std::sort(a.begin(), a.end());
  EXPECT_EQ(a, v);
}

TEST(Balance, SubsamplesMajorityDeterministically) {
  auto data = labeled(30, 12);
  auto a = balance_dataset(data, 17);
  auto b = balance_dataset(data, 17);
  ASSERT_EQ(a.size(), 24u);
  EXPECT_EQ(a, b);
  std::size_t mis = 0;
  for (const auto& x : a) mis += x.final_label == Label::Misleading;
  EXPECT_EQ(mis, 12u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end(),
                             [](const auto& x, const auto& y) { return x.instance_id < y.instance_id; }));
  EXPECT_NE(balance_dataset(data, 18), a);

  // Input order never matters.
  std::reverse(data.begin(), data.end());
  EXPECT_EQ(balance_dataset(data, 17), a);
}

TEST(Balance, Errors) {
  try {
    balance_dataset(labeled(5, 0), 1);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::EmptyClass);
  }
  auto data = labeled(2, 2);
  data[0].final_label.reset();
  EXPECT_THROW(balance_dataset(data, 1), Error);
}

TEST(Splits, StratifiedCounts) {
  auto data = labeled(30, 30);
  assign_splits(data, 23);
  std::size_t test_mis = 0, test_non = 0;
  for (const auto& x : data) {
    EXPECT_NE(x.split, Split::Unassigned);
    if (x.split == Split::Test) ++(x.final_label == Label::Misleading ? test_mis : test_non);
  }
  EXPECT_EQ(test_mis, 5u);
  EXPECT_EQ(test_non, 5u);
  auto again = labeled(30, 30);
  assign_splits(again, 23);
  EXPECT_EQ(again, data);
  EXPECT_THROW(assign_splits(data, 1, 1.5), Error);
}

TEST(RunAnnotation, FiltersAgreesBalancesSplits) {
  fixture::ScriptBuilder a, b;
  std::vector<NewsInstance> corpus;
  // i0..i9: i8 off-topic, i9 literal, i7 disagrees, i6 errors at stage 2 for annotator b.
  for (int i = 0; i < 10; ++i) {
    auto id = "i" + std::to_string(i);
    corpus.push_back(fixture::make_instance(id, "Headline " + id, "Body " + id, i == 8 ? "sports" : "politics"));
    Label la = i % 2 == 0 ? Label::Misleading : Label::NonMisleading;
    Label lb = i == 7 ? Label::Misleading : la;
    a.add(TemplateId::ContentFiltering, id, fixture::reply_content(i != 9));
    a.annotation(id, la);
    if (i == 6) {
      b.add(TemplateId::PreviewUnderstanding, id, fixture::reply_preview("s", "e"));
      b.add(TemplateId::ContextUnderstanding, id, "garbage");
    } else {
      b.annotation(id, lb);
    }
  }
  Env e;
  e.gateway.add_backend(fixture::mock_backend("a", a.build()));
  e.gateway.add_backend(fixture::mock_backend("b", b.build()));
  AnnotationConfig cfg;
  cfg.annotator_a = "a";
  cfg.annotator_b = "b";
  cfg.test_fraction = 0.25;
  auto out = run_annotation(e.env, corpus, cfg);

  EXPECT_EQ(out.stats.input, 10u);
  EXPECT_EQ(out.stats.topic_rejected, 1u);
  EXPECT_EQ(out.stats.literal_rejected, 1u);
  EXPECT_EQ(out.stats.errored, 1u);
  EXPECT_EQ(out.stats.annotated, 7u);
  EXPECT_EQ(out.stats.disagreed, 1u);
  EXPECT_EQ(out.stats.agreed, 6u);
  EXPECT_EQ(out.stats.agreed_misleading, 3u);
  EXPECT_EQ(out.stats.agreed_non_misleading, 3u);
  EXPECT_EQ(out.stats.balanced_out, 0u);
  EXPECT_EQ(out.stats.test, 2u);  // round(3 * 0.25) per class
  EXPECT_EQ(out.stats.train, 4u);

  ASSERT_EQ(out.failures.size(), 1u);
  EXPECT_EQ(out.failures[0].instance_id, "i6");
  EXPECT_EQ(out.failures[0].step, "annotate:b");
  EXPECT_EQ(out.failures[0].stage, 2);
  EXPECT_EQ(out.failures[0].code, "SchemaViolation");

  ASSERT_EQ(out.instances.size(), 7u);
  for (const auto& inst : out.instances) {
    ASSERT_EQ(inst.annotations.size(), 2u);
    EXPECT_EQ(inst.annotations[0].backend_id, "a");
    if (inst.instance_id == "i7") {
      EXPECT_FALSE(inst.final_label);
      EXPECT_EQ(inst.split, Split::Unassigned);
    }
  }
}

TEST(RunAnnotation, OneSidedAgreementLeavesEverythingUnassigned) {
  fixture::ScriptBuilder s;
  std::vector<NewsInstance> corpus;
  for (int i = 0; i < 3; ++i) {
    auto id = "i" + std::to_string(i);
    corpus.push_back(fixture::make_instance(id, "H", "B"));
    s.add(TemplateId::ContentFiltering, id, fixture::reply_content(true));
    s.annotation(id, Label::Misleading);
  }
  Env e;
  auto script = s.build();
  e.gateway.add_backend(fixture::mock_backend("a", script));
  e.gateway.add_backend(fixture::mock_backend("b", script));
  AnnotationConfig cfg;
  cfg.annotator_a = "a";
  cfg.annotator_b = "b";
  auto out = run_annotation(e.env, corpus, cfg);
  EXPECT_EQ(out.stats.agreed_misleading, 3u);
  EXPECT_EQ(out.stats.train + out.stats.test, 0u);
  for (const auto& inst : out.instances) EXPECT_EQ(inst.split, Split::Unassigned);

  cfg.annotator_b = "a";
  EXPECT_THROW(run_annotation(e.env, corpus, cfg), Error);
}
