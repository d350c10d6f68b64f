#include "rog/planner.hpp"

#include <algorithm>

namespace rog {
namespace {

class Emitter {
 public:
  // Returns a reference to the set produced by `q`.
  SlotRef emit(const Query& q) {
    using K = Query::Kind;
    switch (q.kind) {
      case K::Anchor:
        return AnchorSet{{q.anchor}};
      case K::Projection: {
        SlotRef src = emit(q.children.front());
        return push(ProjectStep{q.relation, std::move(src)});
      }
      case K::Intersection: {
        IntersectStep step;
        for (const Query& c : q.children) {
          const bool negated = c.kind == K::Negation;
          step.sources.push_back(emit(negated ? c.children.front() : c));
          step.negated_mask.push_back(negated);
        }
        return push(std::move(step));
      }
      case K::Union: {
        UnionStep step;
        for (const Query& c : q.children) step.sources.push_back(emit(c));
        return push(std::move(step));
      }
      case K::Negation:
        // Unreachable for validated queries; treated as its operand.
        return emit(q.children.front());
    }
    return AnchorSet{};
  }

  Plan finish(SlotRef root) && {
    Plan plan;
    plan.answer_slot = std::get<SlotId>(root);
    plan.steps = std::move(steps_);
    return plan;
  }

 private:
  template <typename Op>
  SlotRef push(Op op) {
    const SlotId out{static_cast<std::uint32_t>(steps_.size())};
    steps_.push_back(Step{std::move(op), out});
    return out;
  }

  std::vector<Step> steps_;
};

std::string check_ref(const SlotRef& ref, SlotId output) {
  if (const auto* slot = std::get_if<SlotId>(&ref)) {
    if (*slot >= output) return "slot " + std::to_string(slot->value) + " used before defined";
  }
  return {};
}

nlohmann::ordered_json ref_json(const SlotRef& ref) {
  if (const auto* slot = std::get_if<SlotId>(&ref)) return {{"slot", slot->value}};
  nlohmann::ordered_json anchors = nlohmann::ordered_json::array();
  for (EntityId e : std::get<AnchorSet>(ref).entities) anchors.push_back(e.value);
  return {{"anchors", anchors}};
}

}  // namespace

Plan decompose(const Query& q) {
  Emitter emitter;
  SlotRef root = emitter.emit(q);
  return std::move(emitter).finish(std::move(root));
}

std::string validate_plan(const Plan& p) {
  if (p.steps.empty()) return "plan has no steps";
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    const Step& s = p.steps[i];
    const std::string where = "step " + std::to_string(i) + ": ";
    if (s.output.value != i) return where + "output slot not dense in step order";
    std::string err;
    if (const auto* proj = std::get_if<ProjectStep>(&s.op)) {
      err = check_ref(proj->source, s.output);
    } else if (const auto* inter = std::get_if<IntersectStep>(&s.op)) {
      if (inter->sources.size() < 2) return where + "intersection needs at least two sources";
      if (inter->negated_mask.size() != inter->sources.size()) return where + "negated_mask length mismatch";
      if (std::all_of(inter->negated_mask.begin(), inter->negated_mask.end(), [](bool b) { return b; })) {
        return where + "negated_mask is all-true";
      }
      for (const auto& ref : inter->sources) {
        if (err = check_ref(ref, s.output); !err.empty()) break;
      }
    } else {
      const auto& uni = std::get<UnionStep>(s.op);
      if (uni.sources.size() < 2) return where + "union needs at least two sources";
      for (const auto& ref : uni.sources) {
        if (err = check_ref(ref, s.output); !err.empty()) break;
      }
    }
    if (!err.empty()) return where + err;
  }
  if (p.answer_slot != p.steps.back().output) return "answer slot is not the last step's output";
  return {};
}

std::string_view op_name(const Step& s) {
  switch (s.op.index()) {
    case 0: return "project";
    case 1: return "intersect";
    default: return "union";
  }
}

nlohmann::ordered_json to_json(const Step& s) {
  nlohmann::ordered_json j;
  j["op"] = op_name(s);
  if (const auto* proj = std::get_if<ProjectStep>(&s.op)) {
    j["relation"] = proj->relation.value;
    j["source"] = ref_json(proj->source);
  } else if (const auto* inter = std::get_if<IntersectStep>(&s.op)) {
    nlohmann::ordered_json sources = nlohmann::ordered_json::array();
    for (const auto& ref : inter->sources) sources.push_back(ref_json(ref));
    j["sources"] = sources;
    j["negated"] = inter->negated_mask;
  } else {
    nlohmann::ordered_json sources = nlohmann::ordered_json::array();
    for (const auto& ref : std::get<UnionStep>(s.op).sources) sources.push_back(ref_json(ref));
    j["sources"] = sources;
  }
  j["out"] = s.output.value;
  return j;
}

nlohmann::ordered_json to_json(const Plan& p) {
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const Step& s : p.steps) steps.push_back(to_json(s));
  return steps;
}

}  // namespace rog
