#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rog/bench.hpp"
#include "rog/error.hpp"

namespace rog {
namespace {

constexpr std::array<QueryType, 9> kTypical = {QueryType::P1, QueryType::P2, QueryType::P3,
                                               QueryType::I2, QueryType::I3, QueryType::IP,
                                               QueryType::PI, QueryType::U2, QueryType::UP};
constexpr std::array<QueryType, 5> kComplex = {QueryType::IN2, QueryType::IN3, QueryType::INP,
                                               QueryType::PIN, QueryType::PNI};

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

struct Row {
  std::string dataset;
  std::string model;
  std::vector<std::optional<double>> cells;  // percentages, one per layout column
};

std::vector<Row> collect_rows(const EvalReport& r, const ReferenceTable* reference, TableLayout layout) {
  const auto types = layout_types(layout);
  std::vector<Row> rows;
  if (reference) {
    if (auto it = reference->sections.find(layout); it != reference->sections.end()) {
      for (const ReferenceRow& ref : it->second) {
        Row row{ref.dataset, ref.model, {}};
        for (QueryType t : types) {
          auto v = ref.mrr_percent.find(t);
          row.cells.push_back(v == ref.mrr_percent.end() ? std::nullopt : std::optional<double>(v->second));
        }
        rows.push_back(std::move(row));
      }
    }
  }
  Row own{r.metadata.dataset, r.metadata.answerer, {}};
  bool any = false;
  for (QueryType t : types) {
    auto m = r.by_type.find(t);
    if (m != r.by_type.end() && m->second.count > 0) {
      own.cells.push_back(m->second.mrr * 100.0);
      any = true;
    } else {
      own.cells.push_back(std::nullopt);
    }
  }
  if (any) rows.push_back(std::move(own));
  return rows;
}

std::string emit_delimited(const std::vector<Row>& rows, std::span<const QueryType> types, bool markdown) {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    if (markdown) {
      out << '|';
      for (const auto& c : cells) out << ' ' << c << " |";
    } else {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    }
    out << '\n';
  };
  std::vector<std::string> header{"dataset", "model"};
  for (QueryType t : types) header.emplace_back(code(t));
  line(header);
  if (markdown) line(std::vector<std::string>(header.size(), "---"));
  for (const Row& row : rows) {
    std::vector<std::string> cells{row.dataset, row.model};
    for (const auto& v : row.cells) cells.push_back(v ? percent(*v) : "");
    line(cells);
  }
  return out.str();
}

nlohmann::ordered_json rows_json(const std::vector<Row>& rows, std::span<const QueryType> types) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const Row& row : rows) {
    nlohmann::ordered_json values = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < types.size(); ++i) {
      // Round-trip through the printed form so JSON shows the table values.
      values[std::string(code(types[i]))] =
          row.cells[i] ? nlohmann::ordered_json(std::stod(percent(*row.cells[i]))) : nlohmann::ordered_json();
    }
    out.push_back({{"dataset", row.dataset}, {"model", row.model}, {"mrr_percent", values}});
  }
  return out;
}

nlohmann::ordered_json report_json(const EvalReport& r, const ReferenceTable* reference,
                                   std::span<const TableLayout> layouts) {
  nlohmann::ordered_json j;
  j["metadata"] = {{"dataset", r.metadata.dataset},
                   {"answerer", r.metadata.answerer},
                   {"seed", r.metadata.seed},
                   {"timestamp", r.metadata.timestamp}};
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (const auto& [t, m] : r.by_type) {
    metrics[std::string(code(t))] = {
        {"count", m.count}, {"mrr", m.mrr}, {"hits@1", m.hits1}, {"hits@3", m.hits3}, {"hits@10", m.hits10}};
  }
  j["metrics"] = metrics;
  nlohmann::ordered_json tables = nlohmann::ordered_json::array();
  for (TableLayout layout : layouts) {
    const auto types = layout_types(layout);
    nlohmann::ordered_json columns = nlohmann::ordered_json::array();
    for (QueryType t : types) columns.push_back(code(t));
    tables.push_back({{"layout", layout == TableLayout::Typical ? "typical" : "complex"},
                      {"columns", columns},
                      {"rows", rows_json(collect_rows(r, reference, layout), types)}});
  }
  j["tables"] = tables;
  return j;
}

EntitySet ids_from_json(const nlohmann::json& j) {
  EntitySet out;
  for (const auto& v : j) out.push_back(EntityId{v.get<std::uint32_t>()});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

nlohmann::ordered_json ids_json(const EntitySet& s) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (EntityId e : s) out.push_back(e.value);
  return out;
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::span<const QueryType> layout_types(TableLayout layout) {
  if (layout == TableLayout::Typical) return kTypical;
  return kComplex;
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  return std::nullopt;
}

ReferenceTable ReferenceTable::parse(std::string_view text) {
  ReferenceTable table;
  std::optional<TableLayout> layout;
  std::vector<QueryType> columns;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# table:", 0) == 0) {
      std::string name = line.substr(8);
      name.erase(0, name.find_first_not_of(' '));
      if (name == "typical") {
        layout = TableLayout::Typical;
      } else if (name == "complex") {
        layout = TableLayout::Complex;
      } else {
        throw ParseError("bench", line_no, "reference line " + std::to_string(line_no) + ": unknown table '" + name + "'");
      }
      columns.clear();
      continue;
    }
    if (line.front() == '#') continue;
    if (!layout) throw ParseError("bench", line_no, "reference line " + std::to_string(line_no) + ": row before '# table:'");
    const auto cells = split_csv(line);
    if (cells.size() < 2) throw ParseError("bench", line_no, "reference line " + std::to_string(line_no) + ": too few cells");
    if (cells[0] == "dataset") {
      columns.clear();
      for (std::size_t i = 2; i < cells.size(); ++i) {
        auto t = parse_query_type(cells[i]);
        if (!t) throw ParseError("bench", line_no, "reference line " + std::to_string(line_no) + ": unknown type '" + cells[i] + "'");
        columns.push_back(*t);
      }
      continue;
    }
    if (cells.size() != columns.size() + 2) {
      throw ParseError("bench", line_no, "reference line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(columns.size() + 2) + " cells");
    }
    ReferenceRow row{cells[0], cells[1], {}};
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (cells[i + 2].empty()) continue;
      try {
        row.mrr_percent[columns[i]] = std::stod(cells[i + 2]);
      } catch (const std::exception&) {
        throw ParseError("bench", line_no, "reference line " + std::to_string(line_no) + ": bad number '" + cells[i + 2] + "'");
      }
    }
    table.sections[*layout].push_back(std::move(row));
  }
  return table;
}

ReferenceTable ReferenceTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("bench", "cannot read reference table " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string emit_report(const EvalReport& r, const ReferenceTable* reference, ReportFormat format,
                        TableLayout layout) {
  const auto types = layout_types(layout);
  switch (format) {
    case ReportFormat::Csv:
      return emit_delimited(collect_rows(r, reference, layout), types, false);
    case ReportFormat::Markdown:
      return emit_delimited(collect_rows(r, reference, layout), types, true);
    case ReportFormat::Json: {
      const std::array<TableLayout, 1> one{layout};
      return report_json(r, reference, one).dump(2) + "\n";
    }
  }
  throw ValidationError("bench", "unknown report format");
}

std::string emit_report(const EvalReport& r, const ReferenceTable* reference, ReportFormat format) {
  if (format == ReportFormat::Json) {
    const std::array<TableLayout, 2> both{TableLayout::Typical, TableLayout::Complex};
    return report_json(r, reference, both).dump(2) + "\n";
  }
  return emit_report(r, reference, format, TableLayout::Typical) + "\n" +
         emit_report(r, reference, format, TableLayout::Complex);
}

std::string to_jsonl(const BenchQuery& q) {
  nlohmann::ordered_json j;
  j["type"] = code(q.qtype);
  j["query"] = to_string(q.query);
  j["easy"] = ids_json(q.easy_answers);
  j["hard"] = ids_json(q.hard_answers);
  return j.dump();
}

BenchQuery bench_query_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    auto t = parse_query_type(type);
    if (!t) throw ValidationError("bench", "unknown query type '" + type + "'");
    BenchQuery q;
    q.qtype = *t;
    q.query = parse_query(j.at("query").get<std::string>());
    if (classify(q.query) != q.qtype) {
      throw ValidationError("bench", "query '" + to_string(q.query) + "' is not of type " + type);
    }
    q.easy_answers = ids_from_json(j.at("easy"));
    q.hard_answers = ids_from_json(j.at("hard"));
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bench", 0, std::string("malformed query record: ") + e.what());
  }
}

std::vector<BenchQuery> read_queries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("bench", "cannot read " + path.string());
  std::vector<BenchQuery> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(bench_query_from_json(line));
    } catch (const Error& e) {
      throw ParseError("bench", line_no, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_queries(const std::filesystem::path& path, std::span<const BenchQuery> queries) {
  std::ofstream out(path);
  if (!out) throw IoError("bench", "cannot write " + path.string());
  for (const BenchQuery& q : queries) out << to_jsonl(q) << '\n';
}

}  // namespace rog
