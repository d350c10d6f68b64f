#pragma once

#include <map>
#include <span>
#include <vector>

#include "rog/kg_store.hpp"
#include "rog/planner.hpp"
#include "rog/query.hpp"

namespace rog {

// Ordered, duplicate-free entity list. The oracle always yields ascending IDs;
// model-backed answerers may carry a ranking order instead.
using AnswerSet = std::vector<EntityId>;

using SlotCache = std::map<SlotId, AnswerSet>;

// Exact set semantics over the indices.
AnswerSet eval_query(const KnowledgeGraph& g, const Query& q);

// Throws ExecutionError naming the slot when a Slot source is missing from
// `cache`.
AnswerSet eval_step(const KnowledgeGraph& g, const Step& step, const SlotCache& cache);

// Runs every step of `plan` through eval_step and returns the answer slot.
AnswerSet execute_plan(const KnowledgeGraph& g, const Plan& plan);

// Membership test per candidate entity using adjacency() only. Shares no code
// with eval_query; intended for graphs with up to ~10^3 entities.
AnswerSet brute_force_eval(const KnowledgeGraph& g, const Query& q);

// Batch kernels: answers[i] = eval_query(g, queries[i]). The parallel version
// spreads queries across OpenMP threads; the serial one is the reference.
std::vector<AnswerSet> eval_batch(const KnowledgeGraph& g, std::span<const Query> queries);
std::vector<AnswerSet> eval_batch_serial(const KnowledgeGraph& g, std::span<const Query> queries);

// Ascending-ID set algebra shared by the oracle and the reasoner.
AnswerSet set_union(std::span<const AnswerSet> sets);
AnswerSet set_intersection(std::span<const AnswerSet> sets);
AnswerSet set_difference(const AnswerSet& a, const AnswerSet& b);

}  // namespace rog
