#include <gtest/gtest.h>

#include <cstdlib>
#include <deque>
#include <thread>

#include "fixtures.hpp"
#include "omg/core/taxonomy.hpp"
#include "omg/error.hpp"
#include "omg/llm/digest.hpp"
#include "omg/llm/gateway.hpp"
#include "omg/llm/prompts.hpp"
#include "omg/llm/schema.hpp"

using namespace omg;
using nlohmann::json;

namespace {

int image_parts(const std::vector<Message>& messages) {
  int n = 0;
  for (const auto& m : messages) {
    for (const auto& p : m.parts) n += p.kind == ContentPart::Kind::Image;
  }
  return n;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no omg::Error thrown";
  return ErrorCode::InvalidInput;
}

// Replays canned responses and records every request.
class FakeTransport : public HttpTransport {
 public:
  std::deque<HttpResponse> responses;
  std::vector<std::string> bodies;
  std::vector<HeaderList> headers;
  std::atomic<int> calls{0};
  std::atomic<int> active{0};
  std::atomic<int> peak{0};
  std::chrono::milliseconds delay{0};

  HttpResponse post_json(const std::string&, const HeaderList& h, const std::string& body,
                         std::chrono::milliseconds) override {
    ++calls;
    int now = ++active;
    for (int p = peak.load(); now > p && !peak.compare_exchange_weak(p, now);) {
    }
    if (delay.count()) std::this_thread::sleep_for(delay);
    --active;
    std::lock_guard lock(mu_);
    bodies.push_back(body);
    headers.push_back(h);
    if (responses.empty()) return {200, ok_body("default"), {}};
    auto r = responses.front();
    if (responses.size() > 1) responses.pop_front();
    return r;
  }

  static std::string ok_body(const std::string& text) {
    return json{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}}.dump();
  }

 private:
  std::mutex mu_;
};

ModelBackend remote_backend(const std::string& id) {
  ModelBackend b;
  b.backend_id = id;
  b.provider = Provider::RemoteHTTP;
  b.model_name = "remote-model";
  b.endpoint = "http://127.0.0.1:9/v1/chat/completions";
  b.credential_ref = "OMG_TEST_KEY";
  return b;
}

GatewayOptions fast_options(std::shared_ptr<HttpTransport> t) {
  GatewayOptions o;
  o.transport = std::move(t);
  o.backoff_base = std::chrono::milliseconds(1);
  return o;
}

}  // namespace

TEST(Prompts, EveryDeclaredSlotIsReferenced) {
  for (auto id : all_template_ids()) {
    const auto& t = prompt_template(id);
    auto refs = referenced_slots(t.text);
    for (const auto& r : refs) {
      bool declared = false;
      for (const auto& s : t.slots) declared = declared || s.name == r;
      EXPECT_TRUE(declared) << to_string(id) << " references undeclared " << r;
    }
  }
}

TEST(Prompts, PreviewUnderstandingText) {
  auto img = std::make_shared<ImageBlob>();
  img->ref = "img/x.jpg";
  auto msgs = render_prompt(TemplateId::PreviewUnderstanding, {{"NEWS_HEADLINE", "X marks the spot"}}, img);
  ASSERT_EQ(msgs.size(), 1u);
  EXPECT_EQ(msgs[0].role, "user");
  EXPECT_NE(all_text(msgs).find("You are an average news reader"), std::string::npos);
  EXPECT_NE(all_text(msgs).find("X marks the spot"), std::string::npos);
  EXPECT_EQ(image_parts(msgs), 1);
}

TEST(Prompts, MissingSlot) {
  try {
    render_prompt(TemplateId::MisleadingJudgment, {{"NEWS_HEADLINE", "H"}, {"READER_INFER", "r"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingSlot);
    EXPECT_NE(std::string(e.what()).find("NEWS_CONTEXT"), std::string::npos);
  }
}

TEST(Prompts, FrameIdentification) {
  auto msgs = render_prompt(TemplateId::FrameIdentification,
                            {{"TAXONOMY", frame_taxonomy_listing()}, {"NEWS_TEXT", "H"}});
  auto text = all_text(msgs);
  EXPECT_NE(text.find("Top-3 most relevant frames"), std::string::npos);
  for (auto f : kFrameTaxonomy) EXPECT_NE(text.find(std::string(f)), std::string::npos) << f;
}

TEST(Prompts, SubstitutionIsSinglePass) {
  EXPECT_EQ(substitute_slots("a {X} b", {{"X", "{Y}"}, {"Y", "no"}}), "a {Y} b");
}

TEST(Schema, Judgment) {
  auto r = validate_reply(SchemaId::Judgment, R"({"Misleading":"Yes","Reason":"omits the outcome"})");
  ASSERT_TRUE(std::holds_alternative<json>(r));
  EXPECT_EQ(std::get<json>(r)["label"], "misleading");
  EXPECT_EQ(std::get<json>(r)["rationale"], "omits the outcome");
  auto no = validate_reply(SchemaId::Judgment, "```json\n{\"Misleading\": \"No\", \"Reason\": \"fine\"}\n```");
  ASSERT_TRUE(std::holds_alternative<json>(no));
  EXPECT_EQ(std::get<json>(no)["label"], "non-misleading");
  EXPECT_TRUE(std::holds_alternative<SchemaProblem>(validate_reply(SchemaId::Judgment, "Misleading: yes")));
}

TEST(Schema, Interpretations) {
  auto r = validate_reply(SchemaId::PreviewInterpretation,
                          fixture::reply_preview("surface", "implication"));
  ASSERT_TRUE(std::holds_alternative<json>(r));
  EXPECT_EQ(std::get<json>(r)["surface_interpretation"], "surface");
  auto bare = validate_reply(SchemaId::ContextInterpretation,
                             R"("News_Context": {"Surface_Interpretation": "s", "Event_Implication": "e"})");
  EXPECT_TRUE(std::holds_alternative<json>(bare));
  auto empty = validate_reply(SchemaId::PreviewInterpretation, fixture::reply_preview("", "x"));
  EXPECT_TRUE(std::holds_alternative<SchemaProblem>(empty));
}

TEST(Schema, AttributionAcceptsNumberedNames) {
  for (const char* v : {"Missing Background and Conditions", "1. Missing Background and Conditions", "1"}) {
    auto r = validate_reply(SchemaId::Attribution, fixture::reply_attribution(v));
    ASSERT_TRUE(std::holds_alternative<json>(r)) << v;
    EXPECT_EQ(std::get<json>(r)["class"], "missing_background");
  }
  EXPECT_TRUE(std::holds_alternative<SchemaProblem>(
      validate_reply(SchemaId::Attribution, fixture::reply_attribution("Vibes"))));
}

TEST(Schema, CorrectionModalityPrototypeContent) {
  auto c = validate_reply(SchemaId::Correction, fixture::reply_correction("New headline"));
  ASSERT_TRUE(std::holds_alternative<json>(c));
  EXPECT_EQ(std::get<json>(c)["rewritten_headline"], "New headline");
  auto m = validate_reply(SchemaId::Modality, fixture::reply_modality(false));
  ASSERT_TRUE(std::holds_alternative<json>(m));
  EXPECT_EQ(std::get<json>(m)["class"], "image-driven");
  auto p = validate_reply(SchemaId::VisualPrototype, fixture::reply_prototype("a quiet street"));
  ASSERT_TRUE(std::holds_alternative<json>(p));
  auto s = validate_reply(SchemaId::ContentSignal, fixture::reply_content(false));
  ASSERT_TRUE(std::holds_alternative<json>(s));
  EXPECT_EQ(std::get<json>(s)["label"], "ld");
}

TEST(Digest, KnownVectors) {
  EXPECT_EQ(sha256_hex(std::string_view("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::vector<std::uint8_t> bytes{'h', 'i', 0, 255};
  EXPECT_EQ(base64_encode(bytes), "aGkA/w==");
  EXPECT_EQ(base64_decode("aGkA/w=="), bytes);
}

TEST(MockScript, TagWalkAndWildcard) {
  MockScript s;
  s.add(TemplateId::MisleadingJudgment, "i1", {"base"});
  s.add(TemplateId::MisleadingJudgment, "i1", {"verify"}, "verify");
  s.add(TemplateId::MisleadingJudgment, "*", {"any"}, "detect");
  auto ask = [&](const std::string& id, const std::string& tag) {
    RequestContext ctx{TemplateId::MisleadingJudgment, id, tag, 0};
    MockRequest req{&ctx, "d", nullptr};
    return s.lookup(req);
  };
  EXPECT_EQ(ask("i1", "verify/free/oracle"), "verify");
  EXPECT_EQ(ask("i1", "detect"), "base");  // instance entries win over the wildcard
  EXPECT_EQ(ask("i2", "detect/oracle"), "any");
  EXPECT_FALSE(ask("i2", ""));
}

TEST(MockScript, FromJsonWithRounds) {
  auto s = MockScript::from_json(json::parse(R"({
    "digests": {"abc": "by digest"},
    "entries": [{"template": "ContentFiltering", "instance": "i", "replies": ["bad", {"label": "ms", "reason": "r"}]}]
  })"));
  RequestContext ctx{TemplateId::ContentFiltering, "i", "", 1};
  EXPECT_EQ(s.lookup({&ctx, "zzz", nullptr}), R"({"label":"ms","reason":"r"})");
  ctx.repair_round = 5;
  EXPECT_EQ(s.lookup({&ctx, "zzz", nullptr}), R"({"label":"ms","reason":"r"})");
  EXPECT_EQ(s.lookup({nullptr, "abc", nullptr}), "by digest");
  EXPECT_EQ(code_of([] { MockScript::from_json(json::parse(R"({"entries": [{"template": "Nope", "instance": "i", "reply": "x"}]})")); }),
            ErrorCode::ParseError);
}

TEST(Gateway, MockMissAndUnknownBackend) {
  Gateway g;
  g.add_backend(fixture::mock_backend("m", fixture::ScriptBuilder().build()));
  RequestContext ctx{TemplateId::ContentFiltering, "i", "", 0};
  auto msgs = render_prompt(TemplateId::ContentFiltering, {{"NEWS_HEADLINE", "H"}});
  EXPECT_EQ(code_of([&] { g.complete("m", msgs, &ctx); }), ErrorCode::MockScriptMiss);
  EXPECT_EQ(code_of([&] { g.complete("nope", msgs, &ctx); }), ErrorCode::UnknownBackend);
}

TEST(Gateway, RepairRounds) {
  auto msgs = render_prompt(TemplateId::ContentFiltering, {{"NEWS_HEADLINE", "H"}});
  RequestContext ctx{TemplateId::ContentFiltering, "i", "", 0};
  {
    Gateway g;
    g.add_backend(fixture::mock_backend(
        "m", fixture::ScriptBuilder()
                 .add_rounds(TemplateId::ContentFiltering, "i", {"label: ms", fixture::reply_content(true)})
                 .build()));
    auto rec = g.complete_structured("m", msgs, SchemaId::ContentSignal, &ctx);
    EXPECT_EQ(rec.repair_rounds, 1);
    EXPECT_EQ((*rec.parsed)["label"], "ms");
  }
  {
    Gateway g;
    g.add_backend(fixture::mock_backend(
        "m", fixture::ScriptBuilder().add_rounds(TemplateId::ContentFiltering, "i", {"x", "y", "z", "ok"}).build()));
    EXPECT_EQ(code_of([&] { g.complete_structured("m", msgs, SchemaId::ContentSignal, &ctx); }),
              ErrorCode::SchemaViolation);
    EXPECT_EQ(g.stats().mock_calls, 3u);  // first try plus two repairs
  }
}

TEST(Gateway, RepairMessageRestatesSchema) {
  std::vector<std::vector<Message>> seen;
  auto script = std::make_shared<MockScript>();
  script->set_responder([&](const MockRequest& r) -> std::optional<std::string> {
    seen.push_back(*r.messages);
    return seen.size() == 1 ? "nonsense" : fixture::reply_judgment(Label::Misleading, "r");
  });
  Gateway g;
  g.add_backend(fixture::mock_backend("m", script));
  auto msgs = render_prompt(TemplateId::ContentFiltering, {{"NEWS_HEADLINE", "H"}});
  g.complete_structured("m", msgs, SchemaId::Judgment, nullptr);
  ASSERT_EQ(seen.size(), 2u);
  ASSERT_EQ(seen[1].size(), 3u);
  EXPECT_EQ(seen[1][1].role, "assistant");
  EXPECT_NE(all_text(std::vector<Message>{seen[1][2]}).find(std::string(schema_format_hint(SchemaId::Judgment))), std::string::npos);
}

TEST(Gateway, CacheKeyStability) {
  auto a = remote_backend("r");
  auto msgs = render_prompt(TemplateId::PreviewUnderstanding, {{"NEWS_HEADLINE", "H"}});
  auto k = Gateway::cache_key(a, msgs);
  EXPECT_EQ(k, Gateway::cache_key(a, msgs));
  auto b = a;
  b.model_name = "other";
  EXPECT_NE(k, Gateway::cache_key(b, msgs));
  auto c = a;
  c.decoding.temperature = 0.7;
  EXPECT_NE(k, Gateway::cache_key(c, msgs));
  auto img = std::make_shared<ImageBlob>();
  img->bytes = {1, 2, 3};
  EXPECT_NE(k, Gateway::cache_key(a, render_prompt(TemplateId::PreviewUnderstanding, {{"NEWS_HEADLINE", "H"}}, img)));
  EXPECT_NE(k, Gateway::cache_key(a, render_prompt(TemplateId::PreviewUnderstanding, {{"NEWS_HEADLINE", "H2"}})));
}

TEST(Gateway, RemoteRetriesThenSucceeds) {
  ::setenv("OMG_TEST_KEY", "secret", 1);
  auto t = std::make_shared<FakeTransport>();
  t->responses = {{503, "busy", {}}, {0, {}, "refused"}, {200, FakeTransport::ok_body("hello"), {}}};
  Gateway g(fast_options(t));
  g.add_backend(remote_backend("r"));
  auto rec = g.complete("r", render_prompt(TemplateId::ContentFiltering, {{"NEWS_HEADLINE", "H"}}));
  EXPECT_EQ(rec.reply, "hello");
  EXPECT_EQ(rec.retries, 2);
  EXPECT_EQ(t->calls.load(), 3);
  bool auth = false;
  for (const auto& [k, v] : t->headers[0]) auth = auth || (k == "Authorization" && v == "Bearer secret");
  EXPECT_TRUE(auth);
  auto body = json::parse(t->bodies[0]);
  EXPECT_EQ(body["model"], "remote-model");
  EXPECT_EQ(body["temperature"], 0.0);
}

TEST(Gateway, RemoteFailureCodes) {
  ::setenv("OMG_TEST_KEY", "secret", 1);
  auto msgs = render_prompt(TemplateId::ContentFiltering, {{"NEWS_HEADLINE", "H"}});
  {
    auto t = std::make_shared<FakeTransport>();
    t->responses = {{429, "slow down", {}}};
    Gateway g(fast_options(t));
    g.add_backend(remote_backend("r"));
    EXPECT_EQ(code_of([&] { g.complete("r", msgs); }), ErrorCode::RateLimited);
    EXPECT_EQ(t->calls.load(), 3);
  }
  {
    auto t = std::make_shared<FakeTransport>();
    t->responses = {{400, "bad", {}}};
    Gateway g(fast_options(t));
    g.add_backend(remote_backend("r"));
    EXPECT_EQ(code_of([&] { g.complete("r", msgs); }), ErrorCode::TransportError);
    EXPECT_EQ(t->calls.load(), 1);  // not transient
  }
  {
    ::unsetenv("OMG_TEST_KEY_MISSING");
    auto t = std::make_shared<FakeTransport>();
    Gateway g(fast_options(t));
    auto b = remote_backend("r");
    b.credential_ref = "OMG_TEST_KEY_MISSING";
    g.add_backend(b);
    EXPECT_EQ(code_of([&] { g.complete("r", msgs); }), ErrorCode::Config);
    EXPECT_EQ(t->calls.load(), 0);
  }
}

TEST(Gateway, RemoteCacheOnDisk) {
  ::setenv("OMG_TEST_KEY", "secret", 1);
  fixture::TempDir dir;
  auto msgs = render_prompt(TemplateId::ContentFiltering, {{"NEWS_HEADLINE", "H"}});
  auto t = std::make_shared<FakeTransport>();
  t->responses = {{200, FakeTransport::ok_body("cached reply"), {}}};
  {
    auto o = fast_options(t);
    o.cache_dir = dir.path();
    Gateway g(o);
    g.add_backend(remote_backend("r"));
    EXPECT_FALSE(g.complete("r", msgs).from_cache);
    auto second = g.complete("r", msgs);
    EXPECT_TRUE(second.from_cache);
    EXPECT_EQ(second.reply, "cached reply");
    EXPECT_EQ(g.stats().network_calls, 1u);
  }
  {
    auto o = fast_options(t);
    o.cache_dir = dir.path();
    Gateway g(o);
    g.add_backend(remote_backend("r"));
    EXPECT_EQ(g.complete("r", msgs).reply, "cached reply");
    EXPECT_EQ(g.stats().network_calls, 0u);
  }
  EXPECT_EQ(t->calls.load(), 1);
  auto key = Gateway::cache_key(remote_backend("r"), msgs);
  EXPECT_TRUE(std::filesystem::exists(dir / (key + ".json")));
}

TEST(Gateway, ConcurrentIdenticalRequestsCoalesce) {
  ::setenv("OMG_TEST_KEY", "secret", 1);
  auto t = std::make_shared<FakeTransport>();
  t->delay = std::chrono::milliseconds(50);
  t->responses = {{200, FakeTransport::ok_body("once"), {}}};
  Gateway g(fast_options(t));
  g.add_backend(remote_backend("r"));
  auto msgs = render_prompt(TemplateId::ContentFiltering, {{"NEWS_HEADLINE", "H"}});
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&] { ok += g.complete("r", msgs).reply == "once"; });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(ok.load(), 6);
  EXPECT_EQ(t->calls.load(), 1);
}

TEST(Gateway, InFlightLimit) {
  ::setenv("OMG_TEST_KEY", "secret", 1);
  auto t = std::make_shared<FakeTransport>();
  t->delay = std::chrono::milliseconds(20);
  Gateway g(fast_options(t));
  auto b = remote_backend("r");
  b.max_in_flight = 2;
  g.add_backend(b);
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&, i] {
      g.complete("r", render_prompt(TemplateId::ContentFiltering, {{"NEWS_HEADLINE", "H" + std::to_string(i)}}));
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(t->calls.load(), 6);
  EXPECT_LE(t->peak.load(), 2);
}

TEST(RateLimiter, InFlightPeak) {
  InFlightLimiter lim(2);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      InFlightLimiter::Slot s(lim);
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_LE(lim.peak(), 2);
  EXPECT_GE(lim.peak(), 1);
}

TEST(RateLimiter, TokenBucketPaces) {
  TokenBucket b(100.0, 1);
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 6; ++i) b.acquire();
  auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_GE(elapsed, std::chrono::milliseconds(40));
  TokenBucket unlimited(0.0, 1);
  for (int i = 0; i < 1000; ++i) unlimited.acquire();
}

TEST(Backend, Validation) {
  auto b = remote_backend("r");
  b.endpoint.reset();
  EXPECT_EQ(code_of([&] { b.validate(); }), ErrorCode::Config);
  ModelBackend m;
  m.backend_id = "m";
  EXPECT_EQ(code_of([&] { m.validate(); }), ErrorCode::Config);
  EXPECT_EQ(default_credential_ref("gpt-4.1"), "OMG_BACKEND_GPT_4_1_KEY");
}
