// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include <random>

#include "rog/bench.hpp"
#include "rog/oracle.hpp"
#include "rog/query.hpp"

namespace {

using namespace rog;

struct Workload {
  KnowledgeGraph graph;
  std::vector<Query> queries;
  std::vector<BenchQuery> bench;
  std::vector<RankedPrediction> preds;
};

const Workload& workload() {
  static const Workload w = [] {
    Workload out;
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::uint32_t> ent(0, 1999);
    std::uniform_int_distribution<std::uint32_t> rel(0, 9);
    std::vector<Triple> triples;
    for (int i = 0; i < 20000; ++i) triples.push_back({EntityId{ent(rng)}, RelationId{rel(rng)}, EntityId{ent(rng)}});
    out.graph = KnowledgeGraph::from_triples(triples);

    for (int i = 0; i < 2000; ++i) {
      const QueryType t = kAllQueryTypes[i % kAllQueryTypes.size()];
      const TemplateArity a = arity(t);
      std::vector<EntityId> es;
      std::vector<RelationId> rs;
      for (std::size_t j = 0; j < a.anchors; ++j) es.push_back(EntityId{ent(rng)});
      for (std::size_t j = 0; j < a.relations; ++j) rs.push_back(RelationId{rel(rng)});
      out.queries.push_back(instantiate_template(t, es, rs));
    }

    const auto answers = eval_batch_serial(out.graph, out.queries);
    for (std::size_t i = 0; i < out.queries.size(); ++i) {
      if (answers[i].empty()) continue;
      BenchQuery q{*classify(out.queries[i]), out.queries[i], {}, answers[i]};
      RankedPrediction p;
      for (int j = 0; j < 50; ++j) p.push_back(EntityId{ent(rng)});
      p.insert(p.end(), answers[i].rbegin(), answers[i].rend());
      out.bench.push_back(std::move(q));
      out.preds.push_back(std::move(p));
    }
    return out;
  }();
  return w;
}

void BM_EvalBatch(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(eval_batch(w.graph, w.queries));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.queries.size()));
}

void BM_EvalBatchSerial(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(eval_batch_serial(w.graph, w.queries));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.queries.size()));
}

void BM_Mrr(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(mrr(w.bench, w.preds));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.bench.size()));
}

void BM_MrrSerial(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(mrr_serial(w.bench, w.preds));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.bench.size()));
}

RankedPrediction oracle_answer(const BenchQuery& q) { return eval_query(workload().graph, q.query); }

void BM_AnswerAll(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(answer_all(w.bench, oracle_answer));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.bench.size()));
}

void BM_AnswerAllSerial(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(answer_all_serial(w.bench, oracle_answer));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.bench.size()));
}

BENCHMARK(BM_EvalBatch)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EvalBatchSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Mrr)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MrrSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AnswerAll)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AnswerAllSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
