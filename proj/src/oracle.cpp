#include "rog/oracle.hpp"

#include <algorithm>
#include <exception>
#include <iterator>

#include "rog/error.hpp"

namespace rog {
namespace {

AnswerSet project(const KnowledgeGraph& g, const AnswerSet& sources, RelationId r) {
  AnswerSet out;
  for (EntityId e : sources) {
    auto succ = g.successors(e, r);
    out.insert(out.end(), succ.begin(), succ.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

AnswerSet combine_intersection(std::vector<AnswerSet> sets, const std::vector<bool>& negated) {
  std::vector<AnswerSet> kept;
  std::vector<AnswerSet> removed;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    (negated[i] ? removed : kept).push_back(std::move(sets[i]));
  }
  AnswerSet out = set_intersection(kept);
  if (!removed.empty()) out = set_difference(out, set_union(removed));
  return out;
}

const AnswerSet& resolve(const SlotRef& ref, const SlotCache& cache, AnswerSet& scratch) {
  if (const auto* anchors = std::get_if<AnchorSet>(&ref)) {
    scratch = anchors->entities;
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    return scratch;
  }
  const SlotId slot = std::get<SlotId>(ref);
  auto it = cache.find(slot);
  if (it == cache.end()) {
    throw ExecutionError("oracle", "slot " + std::to_string(slot.value) + " missing from cache");
  }
  return it->second;
}

AnswerSet sorted_copy(AnswerSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

}  // namespace

AnswerSet set_union(std::span<const AnswerSet> sets) {
  AnswerSet out;
  for (const AnswerSet& s : sets) {
    AnswerSet merged;
    merged.reserve(out.size() + s.size());
    std::set_union(out.begin(), out.end(), s.begin(), s.end(), std::back_inserter(merged));
    out = std::move(merged);
  }
  return out;
}

AnswerSet set_intersection(std::span<const AnswerSet> sets) {
  if (sets.empty()) return {};
  AnswerSet out = sets.front();
  for (std::size_t i = 1; i < sets.size() && !out.empty(); ++i) {
    AnswerSet next;
    std::set_intersection(out.begin(), out.end(), sets[i].begin(), sets[i].end(),
                          std::back_inserter(next));
    out = std::move(next);
  }
  return out;
}

AnswerSet set_difference(const AnswerSet& a, const AnswerSet& b) {
  AnswerSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

AnswerSet eval_query(const KnowledgeGraph& g, const Query& q) {
  using K = Query::Kind;
  switch (q.kind) {
    case K::Anchor:
      return {q.anchor};
    case K::Projection:
      return project(g, eval_query(g, q.children.front()), q.relation);
    case K::Union: {
      std::vector<AnswerSet> sets;
      for (const Query& c : q.children) sets.push_back(eval_query(g, c));
      return set_union(sets);
    }
    case K::Intersection: {
      std::vector<AnswerSet> sets;
      std::vector<bool> negated;
      for (const Query& c : q.children) {
        const bool neg = c.kind == K::Negation;
        sets.push_back(eval_query(g, neg ? c.children.front() : c));
        negated.push_back(neg);
      }
      return combine_intersection(std::move(sets), negated);
    }
    case K::Negation:
      throw ExecutionError("oracle", "negation outside an intersection");
  }
  return {};
}

AnswerSet eval_step(const KnowledgeGraph& g, const Step& step, const SlotCache& cache) {
  AnswerSet scratch;
  if (const auto* proj = std::get_if<ProjectStep>(&step.op)) {
    return project(g, resolve(proj->source, cache, scratch), proj->relation);
  }
  if (const auto* inter = std::get_if<IntersectStep>(&step.op)) {
    std::vector<AnswerSet> sets;
    for (const SlotRef& ref : inter->sources) sets.push_back(sorted_copy(resolve(ref, cache, scratch)));
    return combine_intersection(std::move(sets), inter->negated_mask);
  }
  std::vector<AnswerSet> sets;
  for (const SlotRef& ref : std::get<UnionStep>(step.op).sources) {
    sets.push_back(sorted_copy(resolve(ref, cache, scratch)));
  }
  return set_union(sets);
}

AnswerSet execute_plan(const KnowledgeGraph& g, const Plan& plan) {
  SlotCache cache;
  for (const Step& step : plan.steps) cache[step.output] = eval_step(g, step, cache);
  return cache.at(plan.answer_slot);
}

std::vector<AnswerSet> eval_batch_serial(const KnowledgeGraph& g, std::span<const Query> queries) {
  std::vector<AnswerSet> out;
  out.reserve(queries.size());
  for (const Query& q : queries) out.push_back(eval_query(g, q));
  return out;
}

std::vector<AnswerSet> eval_batch(const KnowledgeGraph& g, std::span<const Query> queries) {
  const auto n = static_cast<std::ptrdiff_t>(queries.size());
  std::vector<AnswerSet> out(queries.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = eval_query(g, queries[i]);
    } catch (...) {
#pragma omp critical(rog_eval_batch_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace rog
