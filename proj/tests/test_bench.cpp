#include <doctest.h>

#include <random>

#include "rog/bench.hpp"
#include "rog/error.hpp"
#include "test_support.hpp"

using namespace rog;
using namespace rog::test;

namespace {

BenchQuery single(EntityId hard) {
  BenchQuery q;
  q.query = parse_query("p(r:1,e:0)");
  q.hard_answers = {hard};
  return q;
}

KnowledgeGraph k5_train() {
  auto t = k5_triples();
  t.erase(std::find(t.begin(), t.end(), tri(4, 11, 5)));
  return KnowledgeGraph(t, k5().abstraction());
}

}  // namespace

TEST_CASE("filtered rank examples") {
  CHECK(filtered_rank(ids({4, 3, 5}), EntityId{3}, ids({3, 5})) == 2u);
  CHECK(filtered_rank(ids({3}), EntityId{3}, ids({3})) == 1u);
  CHECK_FALSE(filtered_rank(ids({4}), EntityId{3}, ids({3})).has_value());
  const std::vector<EntityId> pred{EntityId{5}, EntityId{4}, EntityId{3}};
  CHECK(filtered_rank(pred, EntityId{3}, ids({3, 5})) == 2u);
}

TEST_CASE("MRR arithmetic") {
  const std::vector<BenchQuery> one{single(EntityId{9})};
  const std::vector<RankedPrediction> at4{{EntityId{1}, EntityId{2}, EntityId{3}, EntityId{9}}};
  CHECK(mrr(one, at4).by_type.at(QueryType::P1).mrr == doctest::Approx(0.25).epsilon(1e-12));

  std::vector<BenchQuery> three{single(EntityId{9}), single(EntityId{9}), single(EntityId{9})};
  std::vector<RankedPrediction> preds{{EntityId{9}}, {EntityId{1}, EntityId{9}},
                                      {EntityId{1}, EntityId{2}, EntityId{3}, EntityId{9}}};
  const auto m = mrr(three, preds).by_type.at(QueryType::P1);
  CHECK(std::abs(m.mrr - 0.58333333333333) < 1e-9);
  CHECK(m.hits1 == doctest::Approx(1.0 / 3));
  CHECK(m.hits3 == doctest::Approx(2.0 / 3));
  CHECK(m.hits10 == doctest::Approx(1.0));
  CHECK(m.hits1 <= m.mrr);

  CHECK_THROWS_AS(mrr(three, std::vector<RankedPrediction>(2)), ValidationError);
  CHECK(mrr(three, preds).by_type.at(QueryType::P1).mrr == mrr_serial(three, preds).by_type.at(QueryType::P1).mrr);
}

TEST_CASE("multi-answer queries average within the query") {
  BenchQuery q;
  q.query = parse_query("p(r:1,e:0)");
  q.hard_answers = ids({3, 5});
  q.easy_answers = ids({7});
  // 3 ranks 2 (7 is filtered, 4 stays); 5 is absent.
  const auto s = score_query(q, {EntityId{7}, EntityId{4}, EntityId{3}});
  CHECK(s.reciprocal_rank == doctest::Approx(0.25));
}

TEST_CASE("K5 easy/hard split") {
  const auto full = k5();
  const auto train = k5_train();
  const auto qs = generate_queries(train, full, QueryType::P2, 3, 1);
  for (const BenchQuery& q : qs) CHECK(check_bench_query(q, train, full).empty());
  const Query q = parse_query("p(r:11,p(r:10,e:1))");
  CHECK(eval_query(train, q) == ids({3}));
  CHECK(eval_query(full, q) == ids({3, 5}));
}

TEST_CASE("generation") {
  std::mt19937_64 rng(51);
  const auto rg = random_graph(rng, 50, 4, 300);
  std::vector<Triple> kept;
  std::bernoulli_distribution keep(0.9);
  for (const Triple& t : rg.graph.triples()) {
    if (keep(rng)) kept.push_back(t);
  }
  const KnowledgeGraph train(kept, rg.graph.abstraction());

  SUBCASE("seeded determinism and soundness") {
    for (QueryType t : {QueryType::P1, QueryType::P2, QueryType::PI, QueryType::IN2, QueryType::UP}) {
      const auto a = generate_queries(train, rg.graph, t, 10, 77);
      const auto b = generate_queries(train, rg.graph, t, 10, 77);
      CHECK(a == b);
      for (const BenchQuery& q : a) {
        REQUIRE(check_bench_query(q, train, rg.graph).empty());
        REQUIRE(q.qtype == t);
        REQUIRE_FALSE(q.hard_answers.empty());
      }
    }
  }
  SUBCASE("train equal to full has no hard answers") {
    CHECK_THROWS_AS(generate_queries(rg.graph, rg.graph, QueryType::P1, 5, 1), GenerationError);
  }
}

TEST_CASE("JSONL round trip") {
  BenchQuery q;
  q.qtype = QueryType::P2;
  q.query = parse_query("p(r:11,p(r:10,e:1))");
  q.easy_answers = ids({3});
  q.hard_answers = ids({5});
  const std::string line = to_jsonl(q);
  CHECK(line == R"J({"type":"2p","query":"p(r:11,p(r:10,e:1))","easy":[3],"hard":[5]})J");
  CHECK(bench_query_from_json(line) == q);
  CHECK_THROWS_AS(bench_query_from_json(R"J({"type":"1p","query":"p(r:11,p(r:10,e:1))","easy":[],"hard":[5]})J"),
                  ValidationError);
}

TEST_CASE("report emission") {
  const auto ref = ReferenceTable::load(ROG_REFERENCE_CSV);
  EvalReport empty;
  empty.metadata.dataset = "K5";
  empty.metadata.answerer = "mock";
  CHECK(emit_report(empty, nullptr, ReportFormat::Csv, TableLayout::Typical) ==
        "dataset,model,1p,2p,3p,2i,3i,ip,pi,2u,up\n");

  const std::string typical = emit_report(empty, &ref, ReportFormat::Csv, TableLayout::Typical);
  CHECK(typical.find("\nFB15k,ROG,81.4,67.7,49.2,75.6,72.3,62.0,65.1,69.4,45.6\n") != std::string::npos);

  EvalReport r = empty;
  r.by_type[QueryType::P1] = TypeMetrics{3, 0.5, 0, 0, 0};
  const std::string own = emit_report(r, nullptr, ReportFormat::Csv, TableLayout::Typical);
  CHECK(own == "dataset,model,1p,2p,3p,2i,3i,ip,pi,2u,up\nK5,mock,50.0,,,,,,,,\n");
  CHECK(emit_report(r, nullptr, ReportFormat::Csv, TableLayout::Complex) == "dataset,model,2in,3in,inp,pin,pni\n");

  const std::string md = emit_report(r, nullptr, ReportFormat::Markdown, TableLayout::Typical);
  CHECK(md.rfind("| dataset | model | 1p |", 0) == 0);
  const auto j = nlohmann::json::parse(emit_report(r, &ref, ReportFormat::Json));
  CHECK(j["metadata"]["dataset"] == "K5");
  CHECK(j["tables"].size() == 2);

  CHECK(parse_report_format("md") == ReportFormat::Markdown);
  CHECK_FALSE(parse_report_format("xml").has_value());
}
