#include "rog/retrieval.hpp"

#include <algorithm>
#include <numeric>

#include "rog/error.hpp"

namespace rog {
namespace {

template <typename T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

std::vector<std::pair<EntityId, RelationId>> Neighborhood::entity_relation_pairs() const {
  std::vector<std::pair<EntityId, RelationId>> out;
  out.reserve(frontier_entities.size() * seen_relations.size());
  for (EntityId e : frontier_entities) {
    for (RelationId r : seen_relations) out.emplace_back(e, r);
  }
  return out;
}

bool Neighborhood::contains_pair(EntityId e, RelationId r) const {
  return std::binary_search(frontier_entities.begin(), frontier_entities.end(), e) &&
         std::binary_search(seen_relations.begin(), seen_relations.end(), r);
}

ContextBudget::ContextBudget(std::size_t max_triples) : max_triples_(max_triples) {
  if (max_triples_ == 0) throw ValidationError("retrieval", "context budget must be at least 1 triple");
}

Neighborhood neighborhood(const KnowledgeGraph& g, const QuerySignature& sig, std::size_t k) {
  if (k == 0) throw ValidationError("retrieval", "k must be at least 1");

  Neighborhood n;
  n.k = k;
  n.seed_entities = sig.anchors;
  n.seed_relations = sig.relations;

  const auto triples = g.triples();
  std::vector<std::size_t> hop_of(triples.size(), 0);  // 0 = not collected
  EntitySet frontier = sig.anchors;
  EntitySet entities = sig.anchors;
  std::vector<RelationId> relations = sig.relations;

  for (std::size_t hop = 1; hop <= k && !frontier.empty(); ++hop) {
    EntitySet discovered;
    for (EntityId e : frontier) {
      for (auto span : {g.out_triples(e), g.in_triples(e)}) {
        for (std::uint32_t idx : span) {
          if (hop_of[idx] != 0) continue;
          hop_of[idx] = hop;
          const Triple& t = triples[idx];
          relations.push_back(t.relation);
          discovered.push_back(t.head);
          discovered.push_back(t.tail);
        }
      }
    }
    sort_unique(discovered);
    sort_unique(relations);
    EntitySet fresh;
    std::set_difference(discovered.begin(), discovered.end(), entities.begin(), entities.end(),
                        std::back_inserter(fresh));
    EntitySet merged;
    std::set_union(entities.begin(), entities.end(), fresh.begin(), fresh.end(), std::back_inserter(merged));
    entities = std::move(merged);
    frontier = std::move(fresh);
  }

  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (hop_of[i] != 0) {
      n.induced_triples.push_back(triples[i]);
      n.triple_hops.push_back(hop_of[i]);
    }
  }
  n.frontier_entities = std::move(entities);
  n.seen_relations = std::move(relations);
  return n;
}

Neighborhood trim(const Neighborhood& n, const QuerySignature& sig, const ContextBudget& budget) {
  if (n.induced_triples.size() <= budget.max_triples()) return n;

  std::vector<std::size_t> order(n.induced_triples.size());
  std::iota(order.begin(), order.end(), 0);
  auto in_query = [&](RelationId r) {
    return std::binary_search(sig.relations.begin(), sig.relations.end(), r);
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto key = [&](std::size_t i) {
      return std::make_tuple(n.triple_hops[i], !in_query(n.induced_triples[i].relation), n.induced_triples[i]);
    };
    return key(a) < key(b);
  });
  order.resize(budget.max_triples());
  std::sort(order.begin(), order.end());

  Neighborhood out;
  out.k = n.k;
  out.seed_entities = n.seed_entities;
  out.seed_relations = n.seed_relations;
  out.frontier_entities = n.seed_entities;
  out.seen_relations = n.seed_relations;
  for (std::size_t i : order) {
    const Triple& t = n.induced_triples[i];
    out.induced_triples.push_back(t);
    out.triple_hops.push_back(n.triple_hops[i]);
    out.frontier_entities.push_back(t.head);
    out.frontier_entities.push_back(t.tail);
    out.seen_relations.push_back(t.relation);
  }
  sort_unique(out.frontier_entities);
  sort_unique(out.seen_relations);
  return out;
}

std::string serialize_context(const Neighborhood& n) {
  std::string out;
  for (std::size_t i = 0; i < n.induced_triples.size(); ++i) {
    const Triple& t = n.induced_triples[i];
    if (i) out += '\n';
    out += to_string(t.head);
    out += ' ';
    out += to_string(t.relation);
    out += ' ';
    out += to_string(t.tail);
  }
  return out;
}

}  // namespace rog
