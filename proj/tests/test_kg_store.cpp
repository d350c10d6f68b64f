#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "rog/error.hpp"
#include "rog/kg_store.hpp"
#include "test_support.hpp"

using namespace rog;
using namespace rog::test;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path, std::ios::binary) << body;
  return path;
}

EntitySet as_set(std::span<const EntityId> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("first-appearance ID assignment") {
  const auto g = parse_tsv("Alice\tknows\tBob\n");
  REQUIRE(g.triples().size() == 1);
  CHECK(g.triples()[0] == tri(0, 0, 1));
  CHECK(*g.abstraction().entity_name(EntityId{1}) == "Bob");
  CHECK(*g.abstraction().relation_name(RelationId{0}) == "knows");
}

TEST_CASE("K5 fixture file loads with the shipped map") {
  const auto map = AbstractionMap::load(ROG_TEST_DATA "/k5_map.json");
  const auto g = load_tsv(ROG_TEST_DATA "/k5.tsv", map);
  CHECK(g.entities().size() == 6);
  CHECK(g.relations().size() == 2);
  CHECK(g.triples().size() == 6);
  CHECK(g == k5());
}

TEST_CASE("loading twice with the same map is idempotent") {
  const auto path = write_temp("rog_idem.tsv", "a\tr\tb\nb\tr\tc\na\tr\tb\n");
  const auto first = load_tsv(path);
  const auto second = load_tsv(path, first.abstraction());
  CHECK(first == second);
  CHECK(first.triples().size() == 2);  // duplicate line collapsed
}

TEST_CASE("malformed lines report their line number") {
  try {
    parse_tsv("a\tr\tb\nonly\ttwo\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 2);
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_tsv("a\tb\tc\td\n"), ParseError);
  CHECK_THROWS_AS(load_tsv("/nonexistent/rog.tsv"), IoError);
}

TEST_CASE("adjacency on K5") {
  const auto g = k5();
  CHECK(g.adjacency(EntityId{1}, RelationId{10}, EntityId{2}));
  CHECK_FALSE(g.adjacency(EntityId{2}, RelationId{10}, EntityId{1}));
  CHECK_FALSE(g.adjacency(EntityId{1}, RelationId{11}, EntityId{2}));
  CHECK_FALSE(g.adjacency(EntityId{99}, RelationId{10}, EntityId{2}));
}

TEST_CASE("successors and predecessors on K5 match a raw scan") {
  const auto g = k5();
  const auto raw = k5_triples();
  CHECK(as_set(g.successors(EntityId{1}, RelationId{10})) == ids({2, 4}));
  CHECK(scan_successors(raw, EntityId{1}, RelationId{10}) == ids({2, 4}));
  CHECK(g.successors(EntityId{5}, RelationId{10}).empty());
  CHECK(as_set(g.successors(EntityId{3}, RelationId{10})) == ids({4}));
  CHECK(as_set(g.predecessors(EntityId{3}, RelationId{11})) == ids({2, 6}));
  CHECK(g.predecessors(EntityId{1}, RelationId{10}).empty());
  CHECK(as_set(g.predecessors(EntityId{4}, RelationId{10})) == ids({1, 3}));
  CHECK(scan_predecessors(raw, EntityId{4}, RelationId{10}) == ids({1, 3}));
}

TEST_CASE("index soundness on random triple sets") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 20; ++round) {
    const auto rg = random_graph(rng, 200, 8, 10'000);
    for (std::uint32_t e = 0; e < rg.entities; ++e) {
      for (std::uint32_t r = 0; r < rg.relations; ++r) {
        REQUIRE(as_set(rg.graph.successors(EntityId{e}, RelationId{r})) ==
                scan_successors(rg.triples, EntityId{e}, RelationId{r}));
        REQUIRE(as_set(rg.graph.predecessors(EntityId{e}, RelationId{r})) ==
                scan_predecessors(rg.triples, EntityId{e}, RelationId{r}));
      }
    }
  }
}

TEST_CASE("abstraction map round trip and bijectivity") {
  const auto g = parse_tsv("x\tp\ty\ny\tq\tz\nz\tp\tx\n");
  const auto& map = g.abstraction();
  for (EntityId id : map.entity_ids()) CHECK(*map.entity_id(*map.entity_name(id)) == id);
  for (const char* name : {"x", "y", "z"}) CHECK(*map.entity_name(*map.entity_id(name)) == name);

  const auto reloaded = AbstractionMap::from_json(map.to_json());
  CHECK(reloaded == map);

  AbstractionMap m;
  m.register_entity("a", EntityId{3});
  CHECK_THROWS_AS(m.register_entity("a", EntityId{4}), ValidationError);
  CHECK_THROWS_AS(m.register_entity("b", EntityId{3}), ValidationError);
  CHECK(m.intern_entity("b") == EntityId{4});
}

TEST_CASE("isolated registered entities belong to the entity set") {
  AbstractionMap m;
  m.register_entity("lonely", EntityId{9});
  const auto g = parse_tsv("a\tr\tb\n", m);
  CHECK(g.has_entity(EntityId{9}));
  CHECK(g.entities().size() == 3);
  CHECK(g.successors(EntityId{9}, RelationId{0}).empty());
}
