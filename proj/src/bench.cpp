#include "rog/bench.hpp"

#include <algorithm>
#include <exception>
#include <random>
#include <sstream>

#include "rog/error.hpp"

namespace rog {
namespace {

class Grounder {
 public:
  Grounder(const KnowledgeGraph& g, std::mt19937_64& rng) : g_(g), rng_(rng) {}

  EntityId random_entity() {
    const auto& es = g_.entities();
    return es[pick(es.size())];
  }

  // Rewrites the IDs of `node` so that `target` is among its answers (for
  // positive subtrees). Returns false when `target` has no usable in-edge.
  bool ground(Query& node, EntityId target) {
    using K = Query::Kind;
    switch (node.kind) {
      case K::Anchor:
        node.anchor = target;
        return true;
      case K::Projection: {
        const auto in = g_.in_triples(target);
        if (in.empty()) return false;
        const Triple& t = g_.triples()[in[pick(in.size())]];
        node.relation = t.relation;
        return ground(node.children.front(), t.head);
      }
      case K::Intersection:
        for (Query& c : node.children) {
          if (c.kind == K::Negation) {
            if (!ground(c.children.front(), random_entity())) return false;
          } else if (!ground(c, target)) {
            return false;
          }
        }
        return true;
      case K::Union:
        for (std::size_t i = 0; i < node.children.size(); ++i) {
          if (!ground(node.children[i], i == 0 ? target : random_entity())) return false;
        }
        return true;
      case K::Negation:
        return ground(node.children.front(), random_entity());
    }
    return false;
  }

 private:
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  const KnowledgeGraph& g_;
  std::mt19937_64& rng_;
};

bool is_subgraph(const KnowledgeGraph& train, const KnowledgeGraph& full) {
  for (const Triple& t : train.triples()) {
    if (!full.adjacency(t.head, t.relation, t.tail)) return false;
  }
  return true;
}

template <typename Kernel>
std::vector<QueryScore> per_query_scores(std::span<const BenchQuery> queries,
                                         std::span<const RankedPrediction> preds, Kernel&& kernel) {
  if (queries.size() != preds.size()) {
    throw ValidationError("bench", "got " + std::to_string(preds.size()) + " predictions for " +
                                       std::to_string(queries.size()) + " queries");
  }
  std::vector<QueryScore> scores(queries.size());
  kernel(scores);
  return scores;
}

EvalReport reduce(std::span<const BenchQuery> queries, const std::vector<QueryScore>& scores,
                  ReportMetadata metadata) {
  EvalReport report;
  report.metadata = std::move(metadata);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    TypeMetrics& m = report.by_type[queries[i].qtype];
    ++m.count;
    m.mrr += scores[i].reciprocal_rank;
    m.hits1 += scores[i].hits1;
    m.hits3 += scores[i].hits3;
    m.hits10 += scores[i].hits10;
  }
  for (auto& [type, m] : report.by_type) {
    const double n = static_cast<double>(m.count);
    m.mrr /= n;
    m.hits1 /= n;
    m.hits3 /= n;
    m.hits10 /= n;
  }
  return report;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(rog_bench_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<BenchQuery> generate_queries(const KnowledgeGraph& train, const KnowledgeGraph& full,
                                         QueryType t, std::size_t count, std::uint64_t seed,
                                         const GenerationOptions& options) {
  if (!is_subgraph(train, full)) throw ValidationError("bench", "train triples are not a subset of full triples");
  if (train.triples().size() == full.triples().size()) {
    throw GenerationError(std::string(code(t)) + ": train graph equals full graph, no hard answers possible "
                                                  "(acceptance rate 0)",
                          0.0);
  }

  const TemplateArity a = arity(t);
  const std::vector<EntityId> anchors(a.anchors);
  const std::vector<RelationId> relations(a.relations);
  const Query skeleton = instantiate_template(t, anchors, relations);

  std::mt19937_64 rng(seed);
  Grounder grounder(full, rng);
  std::vector<BenchQuery> out;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (attempts >= options.max_attempts || full.entities().empty()) {
      const double rate = attempts ? static_cast<double>(out.size()) / static_cast<double>(attempts) : 0.0;
      std::ostringstream msg;
      msg << code(t) << ": sampling exhausted after " << attempts << " attempts with " << out.size() << " of "
          << count << " queries accepted (acceptance rate " << rate << ")";
      throw GenerationError(msg.str(), rate);
    }
    ++attempts;

    Query q = skeleton;
    if (!grounder.ground(q, grounder.random_entity())) continue;
    AnswerSet all = eval_query(full, q);
    if (all.empty() || all.size() > options.max_answers) continue;
    AnswerSet easy = eval_query(train, q);
    AnswerSet hard = set_difference(all, easy);
    if (hard.empty()) continue;
    out.push_back(BenchQuery{t, std::move(q), std::move(easy), std::move(hard)});
  }
  return out;
}

std::string check_bench_query(const BenchQuery& q, const KnowledgeGraph& train, const KnowledgeGraph& full) {
  if (classify(q.query) != q.qtype) return "query shape does not match type " + std::string(code(q.qtype));
  if (!set_intersection(std::vector<AnswerSet>{q.easy_answers, q.hard_answers}).empty()) {
    return "easy and hard answers overlap";
  }
  if (brute_force_eval(train, q.query) != q.easy_answers) return "easy answers differ from the train graph";
  if (brute_force_eval(full, q.query) != set_union(std::vector<AnswerSet>{q.easy_answers, q.hard_answers})) {
    return "easy + hard answers differ from the full graph";
  }
  if (q.hard_answers.empty()) return "no hard answers";
  return {};
}

std::optional<std::size_t> filtered_rank(std::span<const EntityId> pred, EntityId target,
                                         const EntitySet& all_correct) {
  std::size_t rank = 0;
  for (EntityId e : pred) {
    if (e == target) return rank + 1;
    if (!std::binary_search(all_correct.begin(), all_correct.end(), e)) ++rank;
  }
  return std::nullopt;
}

QueryScore score_query(const BenchQuery& q, const RankedPrediction& pred) {
  QueryScore s;
  if (q.hard_answers.empty()) return s;
  const EntitySet all = set_union(std::vector<AnswerSet>{q.easy_answers, q.hard_answers});
  for (EntityId target : q.hard_answers) {
    const auto rank = filtered_rank(pred, target, all);
    if (!rank) continue;
    s.reciprocal_rank += 1.0 / static_cast<double>(*rank);
    s.hits1 += *rank <= 1 ? 1.0 : 0.0;
    s.hits3 += *rank <= 3 ? 1.0 : 0.0;
    s.hits10 += *rank <= 10 ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(q.hard_answers.size());
  s.reciprocal_rank /= n;
  s.hits1 /= n;
  s.hits3 /= n;
  s.hits10 /= n;
  return s;
}

EvalReport mrr(std::span<const BenchQuery> queries, std::span<const RankedPrediction> preds,
               ReportMetadata metadata) {
  auto scores = per_query_scores(queries, preds, [&](std::vector<QueryScore>& out) {
    parallel_for(queries.size(), [&](std::size_t i) { out[i] = score_query(queries[i], preds[i]); });
  });
  return reduce(queries, scores, std::move(metadata));
}

EvalReport mrr_serial(std::span<const BenchQuery> queries, std::span<const RankedPrediction> preds,
                      ReportMetadata metadata) {
  auto scores = per_query_scores(queries, preds, [&](std::vector<QueryScore>& out) {
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = score_query(queries[i], preds[i]);
  });
  return reduce(queries, scores, std::move(metadata));
}

std::vector<RankedPrediction> answer_all(std::span<const BenchQuery> queries, const Answerer& answer) {
  std::vector<RankedPrediction> out(queries.size());
  parallel_for(queries.size(), [&](std::size_t i) { out[i] = answer(queries[i]); });
  return out;
}

std::vector<RankedPrediction> answer_all_serial(std::span<const BenchQuery> queries, const Answerer& answer) {
  std::vector<RankedPrediction> out;
  out.reserve(queries.size());
  for (const BenchQuery& q : queries) out.push_back(answer(q));
  return out;
}

}  // namespace rog
