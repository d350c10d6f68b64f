#include "rog/query.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "rog/error.hpp"

namespace rog {
namespace {

constexpr const char* kModule = "query_model";

struct TypeInfo {
  QueryType type;
  std::string_view code;
  TemplateArity arity;
  std::size_t depth;
};

constexpr std::array<TypeInfo, 14> kTypeInfo = {{
    {QueryType::P1, "1p", {1, 1}, 1},
    {QueryType::P2, "2p", {1, 2}, 2},
    {QueryType::P3, "3p", {1, 3}, 3},
    {QueryType::I2, "2i", {2, 2}, 1},
    {QueryType::I3, "3i", {3, 3}, 1},
    {QueryType::IP, "ip", {2, 3}, 2},
    {QueryType::PI, "pi", {2, 3}, 2},
    {QueryType::U2, "2u", {2, 2}, 1},
    {QueryType::UP, "up", {2, 3}, 2},
    {QueryType::IN2, "2in", {2, 2}, 1},
    {QueryType::IN3, "3in", {3, 3}, 1},
    {QueryType::INP, "inp", {2, 3}, 2},
    {QueryType::PIN, "pin", {2, 3}, 2},
    {QueryType::PNI, "pni", {2, 3}, 2},
}};

const TypeInfo& info(QueryType t) { return kTypeInfo[static_cast<std::size_t>(t)]; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Query parse() {
    Query q = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return q;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(kModule, pos_, "syntax error at byte " + std::to_string(pos_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool try_consume(std::string_view token) {
    skip_ws();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  // Keyword followed by '(' with optional whitespace in between.
  bool try_open(std::string_view keyword) {
    const std::size_t saved = pos_;
    if (try_consume(keyword)) {
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        ++pos_;
        return true;
      }
    }
    pos_ = saved;
    return false;
  }

  std::uint32_t number(std::string_view prefix) {
    skip_ws();
    if (text_.substr(pos_, prefix.size()) != prefix) fail("expected '" + std::string(prefix) + "'");
    pos_ += prefix.size();
    std::uint32_t value = 0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) fail("expected unsigned integer");
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  Query expr() {
    skip_ws();
    if (try_open("p")) {
      const RelationId r{number("r:")};
      expect(',');
      skip_ws();
      Query src = text_.substr(pos_, 2) == "e:" ? Query::make_anchor(EntityId{number("e:")}) : expr();
      expect(')');
      return Query::make_projection(r, std::move(src));
    }
    if (try_open("and")) return Query::make_intersection(branches());
    if (try_open("or")) return Query::make_union(branches());
    if (try_open("not")) {
      Query inner = expr();
      expect(')');
      return Query::make_negation(std::move(inner));
    }
    fail("expected p(, and(, or( or not(");
  }

  std::vector<Query> branches() {
    std::vector<Query> out;
    out.push_back(expr());
    while (try_consume(",")) out.push_back(expr());
    expect(')');
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print(const Query& q, std::string& out) {
  switch (q.kind) {
    case Query::Kind::Anchor:
      out += to_string(q.anchor);
      return;
    case Query::Kind::Projection:
      out += "p(";
      out += to_string(q.relation);
      out += ',';
      print(q.children.front(), out);
      out += ')';
      return;
    case Query::Kind::Negation:
      out += "not(";
      print(q.children.front(), out);
      out += ')';
      return;
    case Query::Kind::Intersection:
    case Query::Kind::Union:
      out += q.kind == Query::Kind::Intersection ? "and(" : "or(";
      for (std::size_t i = 0; i < q.children.size(); ++i) {
        if (i) out += ',';
        print(q.children[i], out);
      }
      out += ')';
      return;
  }
}

// Checks `q` as a non-root node whose parent has kind `parent`.
std::string check(const Query& q, std::optional<Query::Kind> parent) {
  using K = Query::Kind;
  switch (q.kind) {
    case K::Anchor:
      if (parent != K::Projection) return "anchor only as projection source";
      if (!q.children.empty()) return "anchor has no children";
      return {};
    case K::Negation:
      if (parent != K::Intersection) return "negation only inside intersection";
      if (q.children.size() != 1) return "negation takes exactly one operand";
      return check(q.children.front(), K::Negation);
    case K::Projection:
      if (q.children.size() != 1) return "projection takes exactly one source";
      return check(q.children.front(), K::Projection);
    case K::Intersection:
    case K::Union: {
      if (q.children.size() < 2) {
        return q.kind == K::Intersection ? "intersection needs at least two branches"
                                         : "union needs at least two branches";
      }
      if (q.kind == K::Intersection &&
          std::all_of(q.children.begin(), q.children.end(),
                      [](const Query& c) { return c.kind == K::Negation; })) {
        return "intersection needs a non-negated branch";
      }
      for (const Query& c : q.children) {
        if (auto err = check(c, q.kind); !err.empty()) return err;
      }
      return {};
    }
  }
  return "unknown node kind";
}

void collect(const Query& q, EntitySet& anchors, std::vector<RelationId>& relations) {
  if (q.kind == Query::Kind::Anchor) anchors.push_back(q.anchor);
  if (q.kind == Query::Kind::Projection) relations.push_back(q.relation);
  for (const Query& c : q.children) collect(c, anchors, relations);
}

std::string shape_of(const Query& q) {
  std::string s = to_string(q);
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }),
          s.end());
  return s;
}

}  // namespace

Query Query::make_anchor(EntityId e) {
  Query q;
  q.kind = Kind::Anchor;
  q.anchor = e;
  return q;
}

Query Query::make_projection(RelationId r, Query source) {
  Query q;
  q.kind = Kind::Projection;
  q.relation = r;
  q.children.push_back(std::move(source));
  return q;
}

Query Query::make_intersection(std::vector<Query> branches) {
  Query q;
  q.kind = Kind::Intersection;
  q.children = std::move(branches);
  return q;
}

Query Query::make_union(std::vector<Query> branches) {
  Query q;
  q.kind = Kind::Union;
  q.children = std::move(branches);
  return q;
}

Query Query::make_negation(Query inner) {
  Query q;
  q.kind = Kind::Negation;
  q.children.push_back(std::move(inner));
  return q;
}

std::string_view code(QueryType t) { return info(t).code; }

std::optional<QueryType> parse_query_type(std::string_view c) {
  for (const auto& i : kTypeInfo) {
    if (i.code == c) return i.type;
  }
  return std::nullopt;
}

TemplateArity arity(QueryType t) { return info(t).arity; }

std::size_t template_depth(QueryType t) { return info(t).depth; }

Query parse_query(std::string_view text) {
  Query q = Parser(text).parse();
  validate(q);
  return q;
}

std::string to_string(const Query& q) {
  std::string out;
  print(q, out);
  return out;
}

std::string validation_error(const Query& q) {
  using K = Query::Kind;
  if (q.kind == K::Anchor) return "root must not be a bare anchor";
  if (q.kind == K::Negation) return "negation only inside intersection";
  return check(q, std::nullopt);
}

void validate(const Query& q) {
  if (auto err = validation_error(q); !err.empty()) throw ValidationError(kModule, err);
}

Query instantiate_template(QueryType t, std::span<const EntityId> anchors,
                           std::span<const RelationId> relations) {
  const TemplateArity a = arity(t);
  if (anchors.size() != a.anchors || relations.size() != a.relations) {
    throw ValidationError(kModule, "template " + std::string(code(t)) + " expects " +
                                       std::to_string(a.anchors) + " anchors and " +
                                       std::to_string(a.relations) + " relations, got " +
                                       std::to_string(anchors.size()) + " and " +
                                       std::to_string(relations.size()));
  }
  auto e = [&](std::size_t i) { return Query::make_anchor(anchors[i]); };
  auto p = [&](std::size_t i, Query src) { return Query::make_projection(relations[i], std::move(src)); };
  auto neg = [](Query q) { return Query::make_negation(std::move(q)); };
  auto all = [](auto... qs) {
    std::vector<Query> v;
    (v.push_back(std::move(qs)), ...);
    return Query::make_intersection(std::move(v));
  };
  auto any = [](auto... qs) {
    std::vector<Query> v;
    (v.push_back(std::move(qs)), ...);
    return Query::make_union(std::move(v));
  };

  switch (t) {
    case QueryType::P1: return p(0, e(0));
    case QueryType::P2: return p(1, p(0, e(0)));
    case QueryType::P3: return p(2, p(1, p(0, e(0))));
    case QueryType::I2: return all(p(0, e(0)), p(1, e(1)));
    case QueryType::I3: return all(p(0, e(0)), p(1, e(1)), p(2, e(2)));
    case QueryType::IP: return p(2, all(p(0, e(0)), p(1, e(1))));
    case QueryType::PI: return all(p(1, p(0, e(0))), p(2, e(1)));
    case QueryType::U2: return any(p(0, e(0)), p(1, e(1)));
    case QueryType::UP: return p(2, any(p(0, e(0)), p(1, e(1))));
    case QueryType::IN2: return all(p(0, e(0)), neg(p(1, e(1))));
    case QueryType::IN3: return all(p(0, e(0)), p(1, e(1)), neg(p(2, e(2))));
    case QueryType::INP: return p(2, all(p(0, e(0)), neg(p(1, e(1)))));
    case QueryType::PIN: return all(p(1, p(0, e(0))), neg(p(2, e(1))));
    case QueryType::PNI: return all(neg(p(1, p(0, e(0)))), p(2, e(1)));
  }
  throw ValidationError(kModule, "unknown query type");
}

std::optional<QueryType> classify(const Query& q) {
  static const std::vector<std::pair<std::string, QueryType>> shapes = [] {
    std::vector<std::pair<std::string, QueryType>> out;
    const std::array<EntityId, 3> es{};
    const std::array<RelationId, 3> rs{};
    for (QueryType t : kAllQueryTypes) {
      const TemplateArity a = arity(t);
      out.emplace_back(shape_of(instantiate_template(t, std::span(es).first(a.anchors),
                                                     std::span(rs).first(a.relations))),
                       t);
    }
    return out;
  }();
  const std::string s = shape_of(q);
  for (const auto& [shape, t] : shapes) {
    if (shape == s) return t;
  }
  return std::nullopt;
}

QuerySignature signature(const Query& q) {
  QuerySignature sig;
  collect(q, sig.anchors, sig.relations);
  std::sort(sig.anchors.begin(), sig.anchors.end());
  sig.anchors.erase(std::unique(sig.anchors.begin(), sig.anchors.end()), sig.anchors.end());
  std::sort(sig.relations.begin(), sig.relations.end());
  sig.relations.erase(std::unique(sig.relations.begin(), sig.relations.end()), sig.relations.end());
  return sig;
}

std::size_t query_cost(const Query& q) {
  const QuerySignature sig = signature(q);
  return sig.anchors.size() + sig.relations.size();
}

std::size_t projection_depth(const Query& q) {
  std::size_t deepest = 0;
  for (const Query& c : q.children) deepest = std::max(deepest, projection_depth(c));
  return deepest + (q.kind == Query::Kind::Projection ? 1 : 0);
}

}  // namespace rog
