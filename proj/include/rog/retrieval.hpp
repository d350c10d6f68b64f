#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rog/kg_store.hpp"
#include "rog/query.hpp"

namespace rog {

// Query-relevant k-hop subgraph. Expansion is undirected: hop j collects every
// triple with head or tail in the hop-(j-1) entity set.
struct Neighborhood {
  std::size_t k = 1;
  std::vector<Triple> induced_triples;   // ascending (head, relation, tail)
  std::vector<std::size_t> triple_hops;  // parallel: hop (1..k) at which each triple was collected
  EntitySet frontier_entities;           // E^k, ascending
  std::vector<RelationId> seen_relations;  // R^k, ascending
  EntitySet seed_entities;               // E_q
  std::vector<RelationId> seed_relations;  // R_q

  // {(e, r) : e in E^k, r in R^k}; materialized on demand.
  std::vector<std::pair<EntityId, RelationId>> entity_relation_pairs() const;
  bool contains_pair(EntityId e, RelationId r) const;

  friend bool operator==(const Neighborhood&, const Neighborhood&) = default;
};

class ContextBudget {
 public:
  static constexpr std::size_t kDefaultMaxTriples = 512;

  // Throws ValidationError when max_triples == 0.
  explicit ContextBudget(std::size_t max_triples = kDefaultMaxTriples);

  std::size_t max_triples() const { return max_triples_; }

 private:
  std::size_t max_triples_;
};

// Throws ValidationError when k == 0.
Neighborhood neighborhood(const KnowledgeGraph& g, const QuerySignature& sig, std::size_t k);

// Keeps at most budget.max_triples() triples, ordered by (hop, relation in R_q
// first, lexicographic triple).
Neighborhood trim(const Neighborhood& n, const QuerySignature& sig, const ContextBudget& budget);

// "e:<h> r:<r> e:<t>" per triple, LF-separated, no trailing newline.
std::string serialize_context(const Neighborhood& n);

}  // namespace rog
