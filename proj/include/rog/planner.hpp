#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rog/query.hpp"

namespace rog {

struct SlotId {
  std::uint32_t value = 0;
  friend auto operator<=>(const SlotId&, const SlotId&) = default;
};

struct AnchorSet {
  EntitySet entities;
  friend bool operator==(const AnchorSet&, const AnchorSet&) = default;
};

using SlotRef = std::variant<AnchorSet, SlotId>;

struct ProjectStep {
  RelationId relation;
  SlotRef source;
  friend bool operator==(const ProjectStep&, const ProjectStep&) = default;
};

struct IntersectStep {
  std::vector<SlotRef> sources;
  std::vector<bool> negated_mask;  // parallel to sources
  friend bool operator==(const IntersectStep&, const IntersectStep&) = default;
};

struct UnionStep {
  std::vector<SlotRef> sources;
  friend bool operator==(const UnionStep&, const UnionStep&) = default;
};

struct Step {
  std::variant<ProjectStep, IntersectStep, UnionStep> op;
  SlotId output;
  friend bool operator==(const Step&, const Step&) = default;
};

struct Plan {
  std::vector<Step> steps;
  SlotId answer_slot;
  friend bool operator==(const Plan&, const Plan&) = default;
};

// Post-order, left-to-right; negations fold into the enclosing IntersectStep.
Plan decompose(const Query& q);

// Empty string when every Step/Plan invariant holds, otherwise a description
// of the first violation.
std::string validate_plan(const Plan& p);

std::string_view op_name(const Step& s);  // "project" | "intersect" | "union"

// [{"op":"project","relation":10,"source":{"anchors":[1]},"out":0}, ...]
nlohmann::ordered_json to_json(const Plan& p);
nlohmann::ordered_json to_json(const Step& s);

}  // namespace rog
