#pragma once

#include <algorithm>
#include <initializer_list>
#include <random>
#include <set>
#include <vector>

#include "rog/kg_store.hpp"
#include "rog/query.hpp"

namespace rog::test {

inline EntitySet ids(std::initializer_list<std::uint32_t> values) {
  EntitySet out;
  for (auto v : values) out.push_back(EntityId{v});
  return out;
}

inline std::vector<RelationId> rels(std::initializer_list<std::uint32_t> values) {
  std::vector<RelationId> out;
  for (auto v : values) out.push_back(RelationId{v});
  return out;
}

inline Triple tri(std::uint32_t h, std::uint32_t r, std::uint32_t t) {
  return Triple{EntityId{h}, RelationId{r}, EntityId{t}};
}

// Entities {1..6}, relations {10, 11}.
inline std::vector<Triple> k5_triples() {
  return {tri(1, 10, 2), tri(1, 10, 4), tri(2, 11, 3), tri(4, 11, 5), tri(3, 10, 4), tri(6, 11, 3)};
}

inline KnowledgeGraph k5() { return KnowledgeGraph::from_triples(k5_triples()); }

inline std::vector<EntityId> sorted(std::vector<EntityId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Linear scans over a raw triple list; no index involved.
inline EntitySet scan_successors(const std::vector<Triple>& triples, EntityId e, RelationId r) {
  std::set<EntityId> out;
  for (const Triple& t : triples) {
    if (t.head == e && t.relation == r) out.insert(t.tail);
  }
  return {out.begin(), out.end()};
}

inline EntitySet scan_predecessors(const std::vector<Triple>& triples, EntityId e, RelationId r) {
  std::set<EntityId> out;
  for (const Triple& t : triples) {
    if (t.tail == e && t.relation == r) out.insert(t.head);
  }
  return {out.begin(), out.end()};
}

struct RandomGraph {
  std::vector<Triple> triples;
  std::uint32_t entities = 0;
  std::uint32_t relations = 0;
  KnowledgeGraph graph;
};

// Up to 50 entities, 4 relations, 300 triples.
inline RandomGraph random_graph(std::mt19937_64& rng, std::uint32_t max_entities = 50,
                                std::uint32_t max_relations = 4, std::size_t max_triples = 300) {
  RandomGraph g;
  g.entities = std::uniform_int_distribution<std::uint32_t>(5, max_entities)(rng);
  g.relations = std::uniform_int_distribution<std::uint32_t>(1, max_relations)(rng);
  const std::size_t m = std::uniform_int_distribution<std::size_t>(g.entities, max_triples)(rng);
  std::uniform_int_distribution<std::uint32_t> ent(0, g.entities - 1);
  std::uniform_int_distribution<std::uint32_t> rel(0, g.relations - 1);
  for (std::size_t i = 0; i < m; ++i) g.triples.push_back(tri(ent(rng), rel(rng), ent(rng)));
  g.graph = KnowledgeGraph::from_triples(g.triples);
  return g;
}

inline Query random_query(std::mt19937_64& rng, QueryType t, const RandomGraph& g) {
  const TemplateArity a = arity(t);
  std::uniform_int_distribution<std::uint32_t> ent(0, g.entities - 1);
  std::uniform_int_distribution<std::uint32_t> rel(0, g.relations - 1);
  std::vector<EntityId> anchors;
  std::vector<RelationId> relations;
  for (std::size_t i = 0; i < a.anchors; ++i) anchors.push_back(EntityId{ent(rng)});
  for (std::size_t i = 0; i < a.relations; ++i) relations.push_back(RelationId{rel(rng)});
  return instantiate_template(t, anchors, relations);
}

}  // namespace rog::test
