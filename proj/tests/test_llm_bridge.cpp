#include <doctest.h>

#include <random>

#include "http_stub.hpp"
#include "rog/error.hpp"
#include "rog/llm_bridge.hpp"
#include "rog/retrieval.hpp"
#include "test_support.hpp"

using namespace rog;
using namespace rog::test;
using namespace std::chrono_literals;

namespace {

Step project(std::uint32_t r, SlotRef src, std::uint32_t out = 0) {
  return Step{ProjectStep{RelationId{r}, std::move(src)}, SlotId{out}};
}

HttpBackendConfig stub_config(const StubServer& s) {
  HttpBackendConfig c;
  c.api_base = s.base();
  c.api_key = "test-key";
  c.model = "stub-model";
  c.retry.base_delay = 1ms;
  c.timeout = 300ms;
  c.jitter_seed = 1;
  return c;
}

}  // namespace

TEST_CASE("entity list rendering") {
  CHECK(render_entity_list(ids({2, 4})) == "e:2, e:4");
  CHECK(render_entity_list({}) == "none");
}

TEST_CASE("prompt rendering") {
  const auto t = PromptTemplate::default_template();
  CHECK(t.defect().empty());
  SlotCache cache{{SlotId{0}, ids({2, 4})}};
  const Step step = project(11, SlotId{0}, 1);
  const ChatRequest a = render_prompt(t, step, "ctx", cache);
  CHECK(a.user.find("e:2, e:4") != std::string::npos);
  CHECK(a.user.find("r:11") != std::string::npos);
  CHECK(a.user.find("comma-separated list of entity IDs like e:12, or 'none'") != std::string::npos);
  CHECK(render_prompt(t, step, "ctx", cache) == a);
  CHECK(a.temperature == 0.0);
  CHECK_THROWS_AS(render_prompt(t, project(11, SlotId{3}, 4), "ctx", cache), ExecutionError);

  PromptTemplate broken = t;
  broken.step_text_by_op["project"] += " {SETS}";
  CHECK_FALSE(broken.defect().empty());
  CHECK_THROWS_AS(render_prompt(broken, step, "ctx", cache), ValidationError);
}

TEST_CASE("answer parsing") {
  const EntitySet known = ids({1, 2, 3, 4, 5});
  CHECK(parse_answer("e:3, e:5", known) == ids({3, 5}));
  CHECK(parse_answer("The answers are 2 and 4.\n2", known) == ids({2, 4}));
  CHECK(parse_answer("none found", known).empty());
  CHECK(parse_answer("e:5, e:99, e:1", known) == AnswerSet{EntityId{5}, EntityId{1}});
  CHECK_FALSE(is_unparsed("none", {}));
  CHECK(is_unparsed("I cannot tell", {}));
}

TEST_CASE("scripted backend") {
  ScriptedBackend b(std::unordered_map<std::string, std::string>{{"Q1", "e:2"}});
  CHECK(b.complete(ChatRequest{"", "", "Q1"}).text == "e:2");
  CHECK_THROWS_AS(b.complete(ChatRequest{"", "", "Q2"}), ProtocolError);
  ScriptedBackend fb({}, std::string("none"));
  CHECK(fb.complete(ChatRequest{"", "", "anything"}).text == "none");
}

TEST_CASE("oracle mock answers a rendered K5 projection") {
  const auto g = k5();
  const auto n = neighborhood(g, QuerySignature{ids({1}), rels({10})}, 1);
  OracleMockBackend mock;
  const auto req = render_prompt(PromptTemplate::default_template(), project(10, AnchorSet{ids({1})}),
                                 serialize_context(n), {});
  CHECK(parse_answer(mock.complete(req).text, g.entities()) == ids({2, 4}));
}

TEST_CASE("mock round trip reproduces eval_step on every operator") {
  std::mt19937_64 rng(31);
  OracleMockBackend mock;
  const auto tmpl = PromptTemplate::default_template();
  for (int round = 0; round < 100; ++round) {
    const auto rg = random_graph(rng);
    Neighborhood whole;
    whole.induced_triples.assign(rg.graph.triples().begin(), rg.graph.triples().end());
    const std::string ctx = serialize_context(whole);
    std::uniform_int_distribution<std::uint32_t> ent(0, rg.entities - 1);
    std::uniform_int_distribution<std::uint32_t> rel(0, rg.relations - 1);
    // Cached sets may hold IDs that occur in no triple.
    EntitySet every_id;
    for (std::uint32_t e = 0; e < rg.entities; ++e) every_id.push_back(EntityId{e});
    auto random_set = [&] {
      std::vector<EntityId> s;
      for (int i = 0; i < 4; ++i) s.push_back(EntityId{ent(rng)});
      return sorted(s);
    };
    SlotCache cache{{SlotId{0}, random_set()}, {SlotId{1}, random_set()}};
    const std::vector<Step> steps{
        project(rel(rng), AnchorSet{random_set()}, 2),
        project(rel(rng), SlotId{0}, 2),
        Step{IntersectStep{{SlotId{0}, SlotId{1}}, {false, true}}, SlotId{2}},
        Step{IntersectStep{{SlotId{0}, SlotId{1}}, {false, false}}, SlotId{2}},
        Step{UnionStep{{SlotId{0}, SlotId{1}}}, SlotId{2}},
    };
    for (const Step& s : steps) {
      const auto text = mock.complete(render_prompt(tmpl, s, ctx, cache)).text;
      const auto expected = eval_step(rg.graph, s, cache);
      REQUIRE(sorted(parse_answer(text, every_id)) == expected);
    }
  }
}

TEST_CASE("retry policy bounds") {
  RetryPolicy p;
  CHECK(p.max_attempts == 5);
  std::chrono::milliseconds total{0};
  for (int i = 0; i + 1 < p.max_attempts; ++i) total += p.ceiling(i);
  CHECK(total <= 31s);
  CHECK(is_transient_status(429));
  CHECK(is_transient_status(503));
  CHECK_FALSE(is_transient_status(404));
}

TEST_CASE("HTTP backend request shape and retries") {
  StubServer stub;
  std::vector<std::chrono::milliseconds> sleeps;
  HttpBackend b(stub_config(stub), [&](std::chrono::milliseconds d) { sleeps.push_back(d); });

  SUBCASE("body and auth") {
    stub.set_reply("e:7");
    const auto r = b.complete(ChatRequest{"", "sys", "hello"});
    CHECK(r.text == "e:7");
    const auto j = nlohmann::json::parse(stub.last_body());
    CHECK(j["model"] == "stub-model");
    CHECK(j["messages"][0]["role"] == "system");
    CHECK(j["messages"][1]["content"] == "hello");
    CHECK(j["max_tokens"] == 512);
    CHECK(stub.last_auth() == "Bearer test-key");
  }
  SUBCASE("three 429s then success") {
    for (int i = 0; i < 3; ++i) stub.push({429});
    CHECK(b.complete(ChatRequest{"", "", "q"}).text == "e:1");
    CHECK(stub.requests() == 4);
    CHECK(sleeps.size() == 3);
  }
  SUBCASE("five failures exhaust the policy") {
    for (int i = 0; i < 5; ++i) stub.push({503});
    CHECK_THROWS_AS(b.complete(ChatRequest{"", "", "q"}), TransportError);
    CHECK(stub.requests() == 5);
  }
  SUBCASE("terminal status") {
    stub.push({400, 0ms, R"({"error":"bad request"})"});
    try {
      b.complete(ChatRequest{"", "", "q"});
      FAIL("expected an API error");
    } catch (const ApiError& e) {
      CHECK(e.status() == 400);
      CHECK(std::string(e.what()).find("bad request") != std::string::npos);
    }
    CHECK(stub.requests() == 1);
  }
  SUBCASE("malformed body") {
    stub.push({200, 0ms, "not json"});
    CHECK_THROWS_AS(b.complete(ChatRequest{"", "", "q"}), ProtocolError);
  }
}

TEST_CASE("HTTP backend configuration errors") {
  HttpBackendConfig c;
  c.api_base = "not a url";
  CHECK_THROWS_AS(HttpBackend{c}, ConfigError);
}
