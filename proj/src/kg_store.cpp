#include "rog/kg_store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rog/error.hpp"

namespace rog {
namespace {

constexpr const char* kModule = "kg_store";

template <typename Id>
std::vector<Id> sorted_keys(const std::unordered_map<std::uint32_t, std::string>& by_id) {
  std::vector<Id> out;
  out.reserve(by_id.size());
  for (const auto& [id, name] : by_id) out.push_back(Id{id});
  std::sort(out.begin(), out.end());
  return out;
}

void register_pair(std::unordered_map<std::string, std::uint32_t>& by_name,
                   std::unordered_map<std::uint32_t, std::string>& by_id, std::uint32_t& next,
                   std::string_view name, std::uint32_t id, const char* kind) {
  const std::string key(name);
  auto by_name_it = by_name.find(key);
  auto by_id_it = by_id.find(id);
  if (by_name_it != by_name.end() && by_name_it->second == id) return;
  if (by_name_it != by_name.end()) {
    throw ValidationError(kModule, std::string(kind) + " name '" + key + "' already mapped to " +
                                       std::to_string(by_name_it->second));
  }
  if (by_id_it != by_id.end()) {
    throw ValidationError(kModule, std::string(kind) + " ID " + std::to_string(id) +
                                       " already mapped to '" + by_id_it->second + "'");
  }
  by_name.emplace(key, id);
  by_id.emplace(id, key);
  next = std::max(next, id + 1);
}

}  // namespace

EntityId AbstractionMap::intern_entity(std::string_view name) {
  if (auto id = entity_id(name)) return *id;
  const EntityId id{next_entity_};
  register_entity(name, id);
  return id;
}

RelationId AbstractionMap::intern_relation(std::string_view name) {
  if (auto id = relation_id(name)) return *id;
  const RelationId id{next_relation_};
  register_relation(name, id);
  return id;
}

void AbstractionMap::register_entity(std::string_view name, EntityId id) {
  register_pair(entity_by_name_, entity_by_id_, next_entity_, name, id.value, "entity");
}

void AbstractionMap::register_relation(std::string_view name, RelationId id) {
  register_pair(relation_by_name_, relation_by_id_, next_relation_, name, id.value, "relation");
}

std::optional<EntityId> AbstractionMap::entity_id(std::string_view name) const {
  auto it = entity_by_name_.find(std::string(name));
  if (it == entity_by_name_.end()) return std::nullopt;
  return EntityId{it->second};
}

std::optional<RelationId> AbstractionMap::relation_id(std::string_view name) const {
  auto it = relation_by_name_.find(std::string(name));
  if (it == relation_by_name_.end()) return std::nullopt;
  return RelationId{it->second};
}

const std::string* AbstractionMap::entity_name(EntityId id) const {
  auto it = entity_by_id_.find(id.value);
  return it == entity_by_id_.end() ? nullptr : &it->second;
}

const std::string* AbstractionMap::relation_name(RelationId id) const {
  auto it = relation_by_id_.find(id.value);
  return it == relation_by_id_.end() ? nullptr : &it->second;
}

std::vector<EntityId> AbstractionMap::entity_ids() const { return sorted_keys<EntityId>(entity_by_id_); }

std::vector<RelationId> AbstractionMap::relation_ids() const {
  return sorted_keys<RelationId>(relation_by_id_);
}

nlohmann::json AbstractionMap::to_json() const {
  nlohmann::json entities = nlohmann::json::object();
  for (const auto& [name, id] : entity_by_name_) entities[name] = id;
  nlohmann::json relations = nlohmann::json::object();
  for (const auto& [name, id] : relation_by_name_) relations[name] = id;
  return {{"entities", entities}, {"relations", relations}};
}

AbstractionMap AbstractionMap::from_json(const nlohmann::json& j) {
  AbstractionMap map;
  try {
    for (const auto& [name, id] : j.at("entities").items()) {
      map.register_entity(name, EntityId{id.get<std::uint32_t>()});
    }
    for (const auto& [name, id] : j.at("relations").items()) {
      map.register_relation(name, RelationId{id.get<std::uint32_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(kModule, 0, std::string("malformed abstraction map: ") + e.what());
  }
  return map;
}

AbstractionMap AbstractionMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(kModule, "cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(kModule, 0, path.string() + ": " + e.what());
  }
  return from_json(j);
}

void AbstractionMap::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError(kModule, "cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

KnowledgeGraph::KnowledgeGraph(std::vector<Triple> triples, AbstractionMap map)
    : triples_(std::move(triples)), map_(std::move(map)) {
  std::sort(triples_.begin(), triples_.end());
  triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());
  for (const Triple& t : triples_) {
    for (EntityId e : {t.head, t.tail}) {
      if (!map_.entity_name(e)) map_.register_entity(std::to_string(e.value), e);
    }
    if (!map_.relation_name(t.relation)) {
      map_.register_relation(std::to_string(t.relation.value), t.relation);
    }
  }
  entities_ = map_.entity_ids();
  relations_ = map_.relation_ids();
  build_indices();
}

KnowledgeGraph KnowledgeGraph::from_triples(std::vector<Triple> triples) {
  return KnowledgeGraph(std::move(triples), AbstractionMap{});
}

void KnowledgeGraph::build_indices() {
  const std::size_t n = entities_.empty() ? 0 : entities_.back().value + 1;
  const std::size_t m = triples_.size();

  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (const Triple& t : triples_) {
    ++out_offsets_[t.head.value + 1];
    ++in_offsets_[t.tail.value + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    out_offsets_[i + 1] += out_offsets_[i];
    in_offsets_[i + 1] += in_offsets_[i];
  }

  // triples_ is sorted by (head, relation, tail), so the forward CSR is the
  // triple array itself.
  out_rel_.resize(m);
  out_tail_.resize(m);
  out_triple_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    out_rel_[i] = triples_[i].relation;
    out_tail_[i] = triples_[i].tail;
    out_triple_[i] = static_cast<std::uint32_t>(i);
  }

  std::vector<std::uint32_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = static_cast<std::uint32_t>(i);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const Triple& x = triples_[a];
    const Triple& y = triples_[b];
    return std::tie(x.tail, x.relation, x.head) < std::tie(y.tail, y.relation, y.head);
  });
  in_rel_.resize(m);
  in_head_.resize(m);
  in_triple_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    in_rel_[i] = triples_[order[i]].relation;
    in_head_[i] = triples_[order[i]].head;
    in_triple_[i] = order[i];
  }
}

bool KnowledgeGraph::has_entity(EntityId e) const {
  return std::binary_search(entities_.begin(), entities_.end(), e);
}

bool KnowledgeGraph::adjacency(EntityId head, RelationId relation, EntityId tail) const {
  auto succ = successors(head, relation);
  return std::binary_search(succ.begin(), succ.end(), tail);
}

namespace {

std::span<const EntityId> csr_lookup(const std::vector<std::uint32_t>& offsets,
                                     const std::vector<RelationId>& rel,
                                     const std::vector<EntityId>& other, EntityId e, RelationId r) {
  if (e.value + 1 >= offsets.size()) return {};
  const auto lo = rel.begin() + offsets[e.value];
  const auto hi = rel.begin() + offsets[e.value + 1];
  auto [first, last] = std::equal_range(lo, hi, r);
  return std::span<const EntityId>(other.data() + (first - rel.begin()),
                                   static_cast<std::size_t>(last - first));
}

std::span<const std::uint32_t> csr_slice(const std::vector<std::uint32_t>& offsets,
                                         const std::vector<std::uint32_t>& items, EntityId e) {
  if (e.value + 1 >= offsets.size()) return {};
  return std::span<const std::uint32_t>(items.data() + offsets[e.value],
                                        offsets[e.value + 1] - offsets[e.value]);
}

}  // namespace

std::span<const EntityId> KnowledgeGraph::successors(EntityId head, RelationId relation) const {
  return csr_lookup(out_offsets_, out_rel_, out_tail_, head, relation);
}

std::span<const EntityId> KnowledgeGraph::predecessors(EntityId tail, RelationId relation) const {
  return csr_lookup(in_offsets_, in_rel_, in_head_, tail, relation);
}

std::span<const std::uint32_t> KnowledgeGraph::out_triples(EntityId e) const {
  return csr_slice(out_offsets_, out_triple_, e);
}

std::span<const std::uint32_t> KnowledgeGraph::in_triples(EntityId e) const {
  return csr_slice(in_offsets_, in_triple_, e);
}

KnowledgeGraph parse_tsv(std::string_view text, const AbstractionMap& existing_map,
                         std::string_view source) {
  AbstractionMap map = existing_map;
  std::vector<Triple> triples;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::string_view fields[3];
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      const std::string_view field =
          line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start);
      if (count < 3) fields[count] = field;
      ++count;
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (count != 3) {
      throw ParseError(kModule, line_no,
                       std::string(source) + ":" + std::to_string(line_no) + ": expected 3 tab-separated fields, got " +
                           std::to_string(count));
    }
    for (const auto& f : fields) {
      if (f.empty()) {
        throw ParseError(kModule, line_no,
                         std::string(source) + ":" + std::to_string(line_no) + ": empty field");
      }
    }
    const EntityId head = map.intern_entity(fields[0]);
    const RelationId rel = map.intern_relation(fields[1]);
    const EntityId tail = map.intern_entity(fields[2]);
    triples.push_back({head, rel, tail});
  }
  return KnowledgeGraph(std::move(triples), std::move(map));
}

KnowledgeGraph load_tsv(const std::filesystem::path& path, const AbstractionMap& existing_map) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(kModule, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError(kModule, "read failure on " + path.string());
  return parse_tsv(buf.str(), existing_map, path.string());
}

std::string to_string(EntityId e) { return "e:" + std::to_string(e.value); }
std::string to_string(RelationId r) { return "r:" + std::to_string(r.value); }

}  // namespace rog
