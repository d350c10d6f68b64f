#include "rog/llm_bridge.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "rog/error.hpp"

namespace rog {
namespace {

constexpr const char* kModule = "llm_bridge";

constexpr const char* kAnswerFormat =
    "Reply with a comma-separated list of entity IDs like e:12, or 'none'.";

const std::map<std::string, std::vector<std::string>> kPlaceholdersByOp = {
    {"project", {"CONTEXT", "SOURCE_SET", "RELATION"}},
    {"intersect", {"CONTEXT", "SETS"}},
    {"union", {"CONTEXT", "SETS"}},
};

// Single left-to-right pass so substituted text is never rescanned.
std::string substitute(const std::string& text, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find('{', pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    out.append(text, pos, open - pos);
    const std::size_t close = text.find('}', open);
    if (close == std::string::npos) {
      out.append(text, open, std::string::npos);
      break;
    }
    const std::string name = text.substr(open + 1, close - open - 1);
    const bool looks_like_placeholder =
        !name.empty() && std::all_of(name.begin(), name.end(), [](char c) { return std::isupper(static_cast<unsigned char>(c)) || c == '_'; });
    if (!looks_like_placeholder) {
      out += '{';
      pos = open + 1;
      continue;
    }
    auto it = values.find(name);
    if (it == values.end()) throw ValidationError(kModule, "unresolved placeholder {" + name + "}");
    out += it->second;
    pos = close + 1;
  }
  return out;
}

AnswerSet sorted_unique(AnswerSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

AnswerSet resolve(const SlotRef& ref, const SlotCache& cache) {
  if (const auto* anchors = std::get_if<AnchorSet>(&ref)) return sorted_unique(anchors->entities);
  const SlotId slot = std::get<SlotId>(ref);
  auto it = cache.find(slot);
  if (it == cache.end()) {
    throw ExecutionError(kModule, "slot " + std::to_string(slot.value) + " missing from cache");
  }
  return sorted_unique(it->second);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

std::optional<std::uint32_t> parse_uint(std::string_view s) {
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

// All "e:<n>" tokens in `s`, in order.
AnswerSet entity_tokens(std::string_view s) {
  AnswerSet out;
  std::size_t pos = 0;
  while ((pos = s.find("e:", pos)) != std::string_view::npos) {
    std::size_t end = pos + 2;
    while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
    if (auto v = parse_uint(s.substr(pos + 2, end - pos - 2))) out.push_back(EntityId{*v});
    pos = end;
  }
  return out;
}

std::optional<Triple> context_triple(std::string_view line) {
  static const std::regex pattern(R"(^e:(\d+) r:(\d+) e:(\d+)$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(line.begin(), line.end(), m, pattern)) return std::nullopt;
  auto num = [&](int i) { return static_cast<std::uint32_t>(std::stoul(m[i].str())); };
  return Triple{EntityId{num(1)}, RelationId{num(2)}, EntityId{num(3)}};
}

}  // namespace

PromptTemplate PromptTemplate::default_template() {
  PromptTemplate t;
  t.system_text = std::string(
                      "You answer logical queries over a knowledge graph. Entities and relations are "
                      "opaque IDs; use only the triples provided, never outside knowledge. ") +
                  kAnswerFormat;
  const std::string header = "Triples (head relation tail):\n{CONTEXT}\n\n";
  t.step_text_by_op["project"] = header +
                                 "Operation: project\n"
                                 "Source entities: {SOURCE_SET}\n"
                                 "Relation: {RELATION}\n"
                                 "Question: which entities t appear in a triple (s {RELATION} t) for some source entity s?\n" +
                                 kAnswerFormat;
  t.step_text_by_op["intersect"] = header +
                                   "Operation: intersect\n"
                                   "Sets:\n{SETS}\n"
                                   "Question: which entities are in every include set and in no exclude set?\n" +
                                   kAnswerFormat;
  t.step_text_by_op["union"] = header +
                               "Operation: union\n"
                               "Sets:\n{SETS}\n"
                               "Question: which entities are in at least one set?\n" +
                               kAnswerFormat;
  return t;
}

std::string PromptTemplate::defect() const {
  for (const auto& [op, allowed] : kPlaceholdersByOp) {
    auto it = step_text_by_op.find(op);
    if (it == step_text_by_op.end()) return "no template for op '" + op + "'";
    std::map<std::string, std::string> values;
    for (const auto& name : allowed) values[name] = "";
    try {
      substitute(it->second, values);
    } catch (const ValidationError& e) {
      return "template for '" + op + "': " + e.what();
    }
  }
  return {};
}

std::string render_entity_list(const AnswerSet& s) {
  if (s.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += to_string(s[i]);
  }
  return out;
}

ChatRequest render_prompt(const PromptTemplate& t, const Step& step, const std::string& context,
                          const SlotCache& cache, const std::string& model_name) {
  const std::string op(op_name(step));
  auto it = t.step_text_by_op.find(op);
  if (it == t.step_text_by_op.end()) throw ValidationError(kModule, "no prompt template for op '" + op + "'");

  std::map<std::string, std::string> values{{"CONTEXT", context}};
  if (const auto* proj = std::get_if<ProjectStep>(&step.op)) {
    values["SOURCE_SET"] = render_entity_list(resolve(proj->source, cache));
    values["RELATION"] = to_string(proj->relation);
  } else if (const auto* inter = std::get_if<IntersectStep>(&step.op)) {
    std::string sets;
    for (std::size_t i = 0; i < inter->sources.size(); ++i) {
      if (i) sets += '\n';
      sets += inter->negated_mask[i] ? "exclude: " : "include: ";
      sets += render_entity_list(resolve(inter->sources[i], cache));
    }
    values["SETS"] = sets;
  } else {
    const auto& uni = std::get<UnionStep>(step.op);
    std::string sets;
    for (std::size_t i = 0; i < uni.sources.size(); ++i) {
      if (i) sets += '\n';
      sets += "include: " + render_entity_list(resolve(uni.sources[i], cache));
    }
    values["SETS"] = sets;
  }

  ChatRequest req;
  req.model_name = model_name;
  req.system = t.system_text;
  req.user = substitute(it->second, values);
  return req;
}

AnswerSet parse_answer(std::string_view text, const EntitySet& known_entities) {
  AnswerSet out;
  auto keep = [&](std::uint32_t v) {
    const EntityId e{v};
    if (!std::binary_search(known_entities.begin(), known_entities.end(), e)) return;
    if (std::find(out.begin(), out.end(), e) != out.end()) return;
    out.push_back(e);
  };
  auto is_token_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == ':'; };
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && !is_token_char(text[pos])) ++pos;
    std::size_t end = pos;
    while (end < text.size() && is_token_char(text[end])) ++end;
    std::string_view token = text.substr(pos, end - pos);
    pos = end;
    if (starts_with(token, "e:")) token.remove_prefix(2);
    if (auto v = parse_uint(token)) keep(*v);
  }
  return out;
}

bool is_unparsed(std::string_view text, const AnswerSet& parsed) {
  if (!parsed.empty()) return false;
  std::string lower(trim(text));
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower.find("none") == std::string::npos;
}

ScriptedBackend::ScriptedBackend(std::unordered_map<std::string, std::string> script,
                                 std::optional<std::string> fallback, std::string id)
    : script_(std::move(script)), fallback_(std::move(fallback)), id_(std::move(id)) {}

ScriptedBackend ScriptedBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(kModule, "cannot read script " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(kModule, 0, path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(kModule, 0, path.string() + ": expected a JSON object");
  std::unordered_map<std::string, std::string> script;
  std::optional<std::string> fallback;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_string()) throw ParseError(kModule, 0, path.string() + ": response for a prompt must be a string");
    if (key == "*") {
      fallback = value.get<std::string>();
    } else {
      script.emplace(key, value.get<std::string>());
    }
  }
  return ScriptedBackend(std::move(script), std::move(fallback), "scripted:" + path.filename().string());
}

ChatResponse ScriptedBackend::complete(const ChatRequest& req) {
  if (auto it = script_.find(req.user); it != script_.end()) return {it->second, id_};
  if (fallback_) return {*fallback_, id_};
  throw ProtocolError(kModule, "scripted backend has no response for this prompt");
}

ChatResponse OracleMockBackend::complete(const ChatRequest& req) {
  std::vector<Triple> triples;
  std::string op;
  AnswerSet source;
  std::optional<RelationId> relation;
  std::vector<AnswerSet> sets;
  std::vector<bool> negated;

  std::istringstream lines(req.user);
  std::string raw;
  while (std::getline(lines, raw)) {
    const std::string_view line = trim(raw);
    if (auto t = context_triple(line)) {
      triples.push_back(*t);
    } else if (starts_with(line, "Operation: ")) {
      op = std::string(trim(line.substr(11)));
    } else if (starts_with(line, "Source entities: ")) {
      source = entity_tokens(line.substr(17));
    } else if (starts_with(line, "Relation: r:")) {
      if (auto v = parse_uint(trim(line.substr(12)))) relation = RelationId{*v};
    } else if (starts_with(line, "include: ") || starts_with(line, "exclude: ")) {
      negated.push_back(starts_with(line, "exclude: "));
      sets.push_back(entity_tokens(line.substr(9)));
    }
  }

  Step step;
  if (op == "project") {
    if (!relation) throw ProtocolError(kModule, "mock-oracle: project prompt without a relation");
    step.op = ProjectStep{*relation, AnchorSet{source}};
  } else if (op == "intersect" || op == "union") {
    std::vector<SlotRef> refs;
    for (auto& s : sets) refs.emplace_back(AnchorSet{std::move(s)});
    if (op == "intersect") {
      step.op = IntersectStep{std::move(refs), std::move(negated)};
    } else {
      step.op = UnionStep{std::move(refs)};
    }
  } else {
    throw ProtocolError(kModule, "mock-oracle: cannot find the operation in the prompt");
  }

  const KnowledgeGraph context = KnowledgeGraph::from_triples(std::move(triples));
  return {render_entity_list(eval_step(context, step, {})), id_};
}

}  // namespace rog
