#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rog/kg_store.hpp"

namespace rog {

// First-order query AST. One struct for every node kind keeps the tree a plain
// value type; which fields are meaningful depends on `kind`.
struct Query {
  enum class Kind { Anchor, Projection, Intersection, Union, Negation };

  Kind kind = Kind::Anchor;
  EntityId anchor{};       // Anchor
  RelationId relation{};   // Projection
  std::vector<Query> children;  // Projection: 1 source; Negation: 1 inner; and/or: >= 2

  static Query make_anchor(EntityId e);
  static Query make_projection(RelationId r, Query source);
  static Query make_intersection(std::vector<Query> branches);
  static Query make_union(std::vector<Query> branches);
  static Query make_negation(Query inner);

  friend bool operator==(const Query&, const Query&) = default;
};

enum class QueryType { P1, P2, P3, I2, I3, IP, PI, U2, UP, IN2, IN3, INP, PIN, PNI };

inline constexpr std::array<QueryType, 14> kAllQueryTypes = {
    QueryType::P1, QueryType::P2,  QueryType::P3,  QueryType::I2,  QueryType::I3,
    QueryType::IP, QueryType::PI,  QueryType::U2,  QueryType::UP,  QueryType::IN2,
    QueryType::IN3, QueryType::INP, QueryType::PIN, QueryType::PNI};

std::string_view code(QueryType t);
std::optional<QueryType> parse_query_type(std::string_view code);

struct TemplateArity {
  std::size_t anchors;
  std::size_t relations;
};
TemplateArity arity(QueryType t);

// Number of nested projections on the longest root-to-anchor path.
std::size_t template_depth(QueryType t);

struct QuerySignature {
  EntitySet anchors;                 // ascending
  std::vector<RelationId> relations; // ascending
  friend bool operator==(const QuerySignature&, const QuerySignature&) = default;
};

// Throws ParseError (byte offset) on syntax errors and ValidationError when
// the parsed tree breaks an AST invariant.
Query parse_query(std::string_view text);

// Canonical form, e.g. "and(p(r:10,e:1),not(p(r:10,e:3)))".
std::string to_string(const Query& q);

// Returns an empty string when `q` is valid, otherwise the violated rule.
std::string validation_error(const Query& q);
void validate(const Query& q);

Query instantiate_template(QueryType t, std::span<const EntityId> anchors,
                           std::span<const RelationId> relations);

// Recovers the template code from the AST's shape alone.
std::optional<QueryType> classify(const Query& q);

QuerySignature signature(const Query& q);

// |E_q| + |R_q|
std::size_t query_cost(const Query& q);

std::size_t projection_depth(const Query& q);

}  // namespace rog
