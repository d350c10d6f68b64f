#include "rog/oracle.hpp"

namespace rog {
namespace {

// members[i] says whether entities[i] satisfies the subformula rooted at q.
std::vector<char> satisfies(const KnowledgeGraph& g, const std::vector<EntityId>& entities, const Query& q) {
  const std::size_t n = entities.size();
  std::vector<char> members(n, 0);
  switch (q.kind) {
    case Query::Kind::Anchor:
      for (std::size_t v = 0; v < n; ++v) members[v] = entities[v] == q.anchor;
      break;
    case Query::Kind::Projection: {
      // v is a member iff some member u of the source has r(u, v).
      const std::vector<char> source = satisfies(g, entities, q.children[0]);
      for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t u = 0; u < n && !members[v]; ++u) {
          members[v] = source[u] && g.adjacency(entities[u], q.relation, entities[v]);
        }
      }
      break;
    }
    case Query::Kind::Intersection: {
      std::fill(members.begin(), members.end(), 1);
      for (const Query& branch : q.children) {
        const bool negated = branch.kind == Query::Kind::Negation;
        const std::vector<char> b = satisfies(g, entities, negated ? branch.children[0] : branch);
        for (std::size_t v = 0; v < n; ++v) members[v] = members[v] && (negated ? !b[v] : b[v]);
      }
      break;
    }
    case Query::Kind::Union:
      for (const Query& branch : q.children) {
        const std::vector<char> b = satisfies(g, entities, branch);
        for (std::size_t v = 0; v < n; ++v) members[v] = members[v] || b[v];
      }
      break;
    case Query::Kind::Negation: {
      const std::vector<char> b = satisfies(g, entities, q.children[0]);
      for (std::size_t v = 0; v < n; ++v) members[v] = !b[v];
      break;
    }
  }
  return members;
}

}  // namespace

AnswerSet brute_force_eval(const KnowledgeGraph& g, const Query& q) {
  const std::vector<EntityId>& entities = g.entities();
  const std::vector<char> members = satisfies(g, entities, q);
  AnswerSet out;
  for (std::size_t v = 0; v < entities.size(); ++v) {
    if (members[v]) out.push_back(entities[v]);
  }
  return out;
}

}  // namespace rog
