#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace rog {

struct EntityId {
  std::uint32_t value = 0;
  friend auto operator<=>(const EntityId&, const EntityId&) = default;
};

struct RelationId {
  std::uint32_t value = 0;
  friend auto operator<=>(const RelationId&, const RelationId&) = default;
};

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

using EntitySet = std::vector<EntityId>;  // ascending, duplicate-free unless noted

// Bidirectional name <-> ID mapping for entities and relations. The two ID
// spaces are independent.
class AbstractionMap {
 public:
  // Returns the existing ID for `name` or assigns max(ID)+1 (0 on empty).
  EntityId intern_entity(std::string_view name);
  RelationId intern_relation(std::string_view name);

  // Registers an explicit (name, ID) pair. Throws ValidationError when it
  // would break bijectivity.
  void register_entity(std::string_view name, EntityId id);
  void register_relation(std::string_view name, RelationId id);

  std::optional<EntityId> entity_id(std::string_view name) const;
  std::optional<RelationId> relation_id(std::string_view name) const;
  const std::string* entity_name(EntityId id) const;
  const std::string* relation_name(RelationId id) const;

  std::size_t entity_count() const { return entity_by_name_.size(); }
  std::size_t relation_count() const { return relation_by_name_.size(); }

  // Sorted ascending.
  std::vector<EntityId> entity_ids() const;
  std::vector<RelationId> relation_ids() const;

  // {"entities": {name: id}, "relations": {name: id}}
  nlohmann::json to_json() const;
  static AbstractionMap from_json(const nlohmann::json& j);
  static AbstractionMap load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  friend bool operator==(const AbstractionMap&, const AbstractionMap&) = default;

 private:
  std::unordered_map<std::string, std::uint32_t> entity_by_name_;
  std::unordered_map<std::uint32_t, std::string> entity_by_id_;
  std::unordered_map<std::string, std::uint32_t> relation_by_name_;
  std::unordered_map<std::uint32_t, std::string> relation_by_id_;
  std::uint32_t next_entity_ = 0;
  std::uint32_t next_relation_ = 0;
};

// Immutable triple store. Triples are kept sorted by (head, relation, tail);
// forward and backward adjacency live in CSR arrays indexed by entity ID.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  // Deduplicates `triples` and registers any ID missing from `map` under its
  // decimal name.
  KnowledgeGraph(std::vector<Triple> triples, AbstractionMap map);

  static KnowledgeGraph from_triples(std::vector<Triple> triples);

  bool adjacency(EntityId head, RelationId relation, EntityId tail) const;

  // Ascending; empty for unknown IDs.
  std::span<const EntityId> successors(EntityId head, RelationId relation) const;
  std::span<const EntityId> predecessors(EntityId tail, RelationId relation) const;

  // Indices into triples() of every triple with `e` as head or tail.
  std::span<const std::uint32_t> out_triples(EntityId e) const;
  std::span<const std::uint32_t> in_triples(EntityId e) const;

  std::span<const Triple> triples() const { return triples_; }
  const std::vector<EntityId>& entities() const { return entities_; }
  const std::vector<RelationId>& relations() const { return relations_; }
  const AbstractionMap& abstraction() const { return map_; }

  bool has_entity(EntityId e) const;

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    return a.triples_ == b.triples_ && a.map_ == b.map_;
  }

 private:
  void build_indices();

  std::vector<Triple> triples_;
  AbstractionMap map_;
  std::vector<EntityId> entities_;
  std::vector<RelationId> relations_;

  // CSR over heads: out_offsets_[h]..out_offsets_[h+1] index out_rel_/out_tail_,
  // sorted by (relation, tail).
  std::vector<std::uint32_t> out_offsets_;
  std::vector<RelationId> out_rel_;
  std::vector<EntityId> out_tail_;
  std::vector<std::uint32_t> out_triple_;

  std::vector<std::uint32_t> in_offsets_;
  std::vector<RelationId> in_rel_;
  std::vector<EntityId> in_head_;
  std::vector<std::uint32_t> in_triple_;
};

// Reads `head<TAB>relation<TAB>tail` lines. Unknown names are interned into a
// copy of `existing_map`.
KnowledgeGraph load_tsv(const std::filesystem::path& path,
                        const AbstractionMap& existing_map = {});

// Same as load_tsv, over an in-memory buffer. `source` names the input in
// error messages.
KnowledgeGraph parse_tsv(std::string_view text, const AbstractionMap& existing_map = {},
                         std::string_view source = "<memory>");

std::string to_string(EntityId e);    // "e:<id>"
std::string to_string(RelationId r);  // "r:<id>"

}  // namespace rog

template <>
struct std::hash<rog::EntityId> {
  std::size_t operator()(rog::EntityId e) const noexcept { return std::hash<std::uint32_t>{}(e.value); }
};

template <>
struct std::hash<rog::RelationId> {
  std::size_t operator()(rog::RelationId r) const noexcept { return std::hash<std::uint32_t>{}(r.value); }
};
