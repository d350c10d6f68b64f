#include <doctest.h>

#include <random>

#include "rog/error.hpp"
#include "rog/oracle.hpp"
#include "test_support.hpp"

using namespace rog;
using namespace rog::test;

namespace {

// Hand enumeration over K5's six triples, written out per query.
AnswerSet hand(const char* text) { return brute_force_eval(k5(), parse_query(text)); }

}  // namespace

TEST_CASE("K5 query answers") {
  const auto g = k5();
  struct Case {
    const char* query;
    EntitySet expected;
  };
  const Case cases[] = {
      {"p(r:11,p(r:10,e:1))", ids({3, 5})},
      {"and(p(r:10,e:1),not(p(r:10,e:3)))", ids({2})},
      {"and(p(r:11,p(r:10,e:1)),p(r:11,e:6))", ids({3})},
      {"or(p(r:10,e:1),p(r:11,e:6))", ids({2, 3, 4})},
      {"p(r:10,p(r:11,p(r:10,e:1)))", ids({4})},
      {"p(r:11,and(p(r:10,e:1),p(r:10,e:3)))", ids({5})},
  };
  for (const Case& c : cases) {
    CAPTURE(c.query);
    CHECK(eval_query(g, parse_query(c.query)) == c.expected);
    CHECK(hand(c.query) == c.expected);
  }
}

TEST_CASE("eval_step examples") {
  const auto g = k5();
  SlotCache cache;
  CHECK(eval_step(g, Step{ProjectStep{RelationId{11}, AnchorSet{ids({4})}}, SlotId{0}}, cache) == ids({5}));

  cache[SlotId{0}] = ids({2, 4});
  cache[SlotId{1}] = ids({4});
  CHECK(eval_step(g, Step{IntersectStep{{SlotId{0}, SlotId{1}}, {false, true}}, SlotId{2}}, cache) == ids({2}));

  cache[SlotId{1}] = ids({3});
  CHECK(eval_step(g, Step{UnionStep{{SlotId{0}, SlotId{1}}}, SlotId{2}}, cache) == ids({2, 3, 4}));

  try {
    eval_step(g, Step{ProjectStep{RelationId{10}, SlotId{7}}, SlotId{8}}, cache);
    FAIL("expected an execution error");
  } catch (const ExecutionError& e) {
    CHECK(std::string(e.what()).find("7") != std::string::npos);
  }
}

TEST_CASE("set algebra helpers") {
  const std::vector<AnswerSet> sets{ids({1, 3, 5}), ids({3, 4, 5})};
  CHECK(set_union(sets) == ids({1, 3, 4, 5}));
  CHECK(set_intersection(sets) == ids({3, 5}));
  CHECK(set_difference(ids({1, 3, 5}), ids({3})) == ids({1, 5}));
}

TEST_CASE("eval_query agrees with brute force on random graphs") {
  std::mt19937_64 rng(5);
  for (int g = 0; g < 10; ++g) {
    const auto rg = random_graph(rng);
    for (QueryType t : kAllQueryTypes) {
      for (int i = 0; i < 20; ++i) {
        const Query q = random_query(rng, t, rg);
        REQUIRE(eval_query(rg.graph, q) == brute_force_eval(rg.graph, q));
      }
    }
  }
}

TEST_CASE("monotone algebra") {
  std::mt19937_64 rng(9);
  for (int round = 0; round < 200; ++round) {
    const auto rg = random_graph(rng);
    const Query a = random_query(rng, QueryType::P1, rg);
    const Query b = random_query(rng, QueryType::P2, rg);
    const auto ea = eval_query(rg.graph, a);
    const auto eor = eval_query(rg.graph, Query::make_union({a, b}));
    const auto eand = eval_query(rg.graph, Query::make_intersection({a, b}));
    const auto eneg = eval_query(rg.graph, Query::make_intersection({a, Query::make_negation(b)}));
    REQUIRE(std::includes(eor.begin(), eor.end(), ea.begin(), ea.end()));
    REQUIRE(std::includes(ea.begin(), ea.end(), eand.begin(), eand.end()));
    REQUIRE(std::includes(ea.begin(), ea.end(), eneg.begin(), eneg.end()));
  }
}

TEST_CASE("batch kernel matches serial reference") {
  std::mt19937_64 rng(3);
  const auto rg = random_graph(rng);
  std::vector<Query> qs;
  for (int i = 0; i < 300; ++i) qs.push_back(random_query(rng, kAllQueryTypes[i % 14], rg));
  CHECK(eval_batch(rg.graph, qs) == eval_batch_serial(rg.graph, qs));
}
