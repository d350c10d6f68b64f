#include "rog/reasoner.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <unordered_map>

#include <json.hpp>

namespace rog {
namespace {

const AnswerSet& cached(const SlotRef& ref, const SlotCache& cache, AnswerSet& scratch) {
  if (const auto* anchors = std::get_if<AnchorSet>(&ref)) {
    scratch = anchors->entities;
    return scratch;
  }
  const SlotId slot = std::get<SlotId>(ref);
  auto it = cache.find(slot);
  if (it == cache.end()) {
    throw ExecutionError("reasoner", "slot " + std::to_string(slot.value) + " read before written");
  }
  return it->second;
}

AnswerSet sorted_unique(AnswerSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

// Exact set operation over cached lists; result ordered by the best position
// an entity holds in any non-negated source, then by ID.
AnswerSet local_set_op(const Step& step, const SlotCache& cache) {
  std::vector<const AnswerSet*> ranked;
  std::vector<AnswerSet> included;
  std::vector<AnswerSet> excluded;
  std::vector<AnswerSet> scratch;
  const auto& sources = step.op.index() == 1 ? std::get<IntersectStep>(step.op).sources
                                             : std::get<UnionStep>(step.op).sources;
  scratch.resize(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const AnswerSet& list = cached(sources[i], cache, scratch[i]);
    const bool negated = step.op.index() == 1 && std::get<IntersectStep>(step.op).negated_mask[i];
    if (negated) {
      excluded.push_back(sorted_unique(list));
    } else {
      included.push_back(sorted_unique(list));
      ranked.push_back(&list);
    }
  }

  AnswerSet result = step.op.index() == 1 ? set_intersection(included) : set_union(included);
  if (!excluded.empty()) result = set_difference(result, set_union(excluded));

  std::unordered_map<EntityId, std::size_t> best;
  for (const AnswerSet* list : ranked) {
    for (std::size_t pos = 0; pos < list->size(); ++pos) {
      auto [it, inserted] = best.emplace((*list)[pos], pos);
      if (!inserted) it->second = std::min(it->second, pos);
    }
  }
  std::stable_sort(result.begin(), result.end(), [&](EntityId a, EntityId b) {
    return std::make_pair(best.at(a), a) < std::make_pair(best.at(b), b);
  });
  return result;
}

nlohmann::ordered_json answers_json(const AnswerSet& s) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (EntityId e : s) out.push_back(e.value);
  return out;
}

}  // namespace

std::string to_jsonl(const ChainTrace& trace, const std::string& agent_label) {
  std::string out;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const StepRecord& r = trace.records[i];
    nlohmann::ordered_json j;
    if (!agent_label.empty()) j["agent"] = agent_label;
    j["index"] = i;
    j["step"] = to_json(r.step);
    j["prompted"] = r.prompted;
    j["prompt"] = r.request.user;
    j["response"] = r.response;
    j["answers"] = answers_json(r.answers);
    j["unparsed"] = r.unparsed;
    j["final"] = r.step.output == trace.answer_slot;
    out += j.dump();
    out += '\n';
  }
  return out;
}

ChainResult run_chain(const Plan& plan, const Neighborhood& nbhd, const Agent& agent,
                      const ChainOptions& options) {
  if (auto err = validate_plan(plan); !err.empty()) throw ValidationError("reasoner", "invalid plan: " + err);
  if (!agent.backend) throw ValidationError("reasoner", "agent '" + agent.label + "' has no backend");

  const std::string context = serialize_context(nbhd);
  ChainTrace trace;
  trace.answer_slot = plan.answer_slot;
  SlotCache cache;

  for (const Step& step : plan.steps) {
    StepRecord record;
    record.step = step;
    const bool is_projection = std::holds_alternative<ProjectStep>(step.op);
    if (is_projection || options.prompt_setops) {
      record.prompted = true;
      record.request = render_prompt(agent.prompt, step, context, cache, options.model_name);
      record.request.max_output_tokens = options.max_output_tokens;
      try {
        record.response = agent.backend->complete(record.request).text;
      } catch (const std::exception& e) {
        trace.records.push_back(std::move(record));
        throw ChainError("agent '" + agent.label + "' failed at step " + std::to_string(step.output.value) +
                             ": " + e.what(),
                         std::move(trace));
      }
      record.answers = parse_answer(record.response, nbhd.frontier_entities);
      record.unparsed = is_unparsed(record.response, record.answers);
    } else {
      record.answers = local_set_op(step, cache);
    }
    cache[step.output] = record.answers;
    trace.records.push_back(std::move(record));
  }

  return {cache.at(plan.answer_slot), std::move(trace)};
}

ConsensusConfig::ConsensusConfig(std::vector<Agent> agents, std::optional<int> vote_threshold)
    : agents_(std::move(agents)) {
  if (agents_.empty()) throw ValidationError("reasoner", "consensus needs at least one agent");
  std::set<std::string> labels;
  for (const Agent& a : agents_) {
    if (!labels.insert(a.label).second) throw ValidationError("reasoner", "duplicate agent label '" + a.label + "'");
  }
  const int n = static_cast<int>(agents_.size());
  threshold_ = vote_threshold.value_or(n / 2 + 1);
  if (threshold_ < 1 || threshold_ > n) {
    throw ValidationError("reasoner", "vote threshold " + std::to_string(threshold_) + " outside [1, " +
                                          std::to_string(n) + "]");
  }
}

AnswerSet tally_votes(const std::vector<std::optional<AnswerSet>>& finals, int threshold) {
  struct Tally {
    int votes = 0;
    std::size_t rank_sum = 0;
  };
  std::unordered_map<EntityId, Tally> tallies;
  for (const auto& final_set : finals) {
    if (!final_set) continue;
    std::set<EntityId> seen;
    for (std::size_t pos = 0; pos < final_set->size(); ++pos) {
      const EntityId e = (*final_set)[pos];
      if (!seen.insert(e).second) continue;
      Tally& t = tallies[e];
      ++t.votes;
      t.rank_sum += pos + 1;
    }
  }
  AnswerSet out;
  for (const auto& [e, t] : tallies) {
    if (t.votes >= threshold) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [&](EntityId a, EntityId b) {
    const Tally& x = tallies.at(a);
    const Tally& y = tallies.at(b);
    if (x.votes != y.votes) return x.votes > y.votes;
    // Compare mean ranks without division: x.sum/x.votes < y.sum/y.votes.
    const auto lhs = x.rank_sum * static_cast<std::size_t>(y.votes);
    const auto rhs = y.rank_sum * static_cast<std::size_t>(x.votes);
    if (lhs != rhs) return lhs < rhs;
    return a < b;
  });
  return out;
}

ConsensusResult run_consensus(const Plan& plan, const Neighborhood& nbhd, const ConsensusConfig& cfg,
                              const ChainOptions& options) {
  const auto& agents = cfg.agents();
  std::vector<std::future<ChainResult>> futures;
  futures.reserve(agents.size());
  for (const Agent& agent : agents) {
    futures.push_back(std::async(std::launch::async, [&plan, &nbhd, &agent, &options] {
      return run_chain(plan, nbhd, agent, options);
    }));
  }

  ConsensusResult result;
  std::vector<std::optional<AnswerSet>> finals;
  int succeeded = 0;
  for (auto& f : futures) {
    try {
      ChainResult r = f.get();
      finals.emplace_back(std::move(r.answers));
      result.traces.push_back(std::move(r.trace));
      result.errors.emplace_back();
      ++succeeded;
    } catch (const ChainError& e) {
      finals.emplace_back(std::nullopt);
      result.traces.push_back(e.partial_trace());
      result.errors.emplace_back(e.what());
    } catch (const std::exception& e) {
      finals.emplace_back(std::nullopt);
      result.traces.emplace_back();
      result.errors.emplace_back(e.what());
    }
  }

  if (succeeded < cfg.vote_threshold()) {
    std::string detail;
    for (const auto& err : result.errors) {
      if (!err.empty()) detail += "\n  " + err;
    }
    throw EnsembleError(std::to_string(agents.size() - succeeded) + " of " +
                                         std::to_string(agents.size()) + " agents failed, " +
                                         std::to_string(succeeded) + " succeeded but the vote threshold is " +
                                         std::to_string(cfg.vote_threshold()) + detail,
                        std::move(result.traces), std::move(result.errors));
  }
  result.answers = tally_votes(finals, cfg.vote_threshold());
  return result;
}

}  // namespace rog
