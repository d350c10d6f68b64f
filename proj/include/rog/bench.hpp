#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rog/oracle.hpp"
#include "rog/query.hpp"

namespace rog {

struct BenchQuery {
  QueryType qtype = QueryType::P1;
  Query query;
  EntitySet easy_answers;  // ascending
  EntitySet hard_answers;  // ascending
  friend bool operator==(const BenchQuery&, const BenchQuery&) = default;
};

// An answerer's ranked output for one query, best first, duplicate-free.
using RankedPrediction = std::vector<EntityId>;

struct GenerationOptions {
  std::size_t max_attempts = 1'000'000;
  std::size_t max_answers = 100;
};

// Seeded rejection sampling. Templates are grounded backward from a random
// target entity of `full`, then kept iff the full answer set is non-empty,
// the hard set is non-empty and |easy u hard| <= max_answers.
std::vector<BenchQuery> generate_queries(const KnowledgeGraph& train, const KnowledgeGraph& full,
                                         QueryType t, std::size_t count, std::uint64_t seed,
                                         const GenerationOptions& options = {});

// Empty string when `q` satisfies the BenchQuery invariants against the graphs.
std::string check_bench_query(const BenchQuery& q, const KnowledgeGraph& train, const KnowledgeGraph& full);

// 1-based rank of `target` in `pred` after removing every other member of
// `all_correct`; nullopt when `target` is absent.
std::optional<std::size_t> filtered_rank(std::span<const EntityId> pred, EntityId target,
                                         const EntitySet& all_correct);

struct QueryScore {
  double reciprocal_rank = 0;
  double hits1 = 0;
  double hits3 = 0;
  double hits10 = 0;
};

// Per-hard-answer values averaged within the query; absent answers score 0.
QueryScore score_query(const BenchQuery& q, const RankedPrediction& pred);

struct TypeMetrics {
  std::size_t count = 0;
  double mrr = 0;
  double hits1 = 0;
  double hits3 = 0;
  double hits10 = 0;
};

struct ReportMetadata {
  std::string dataset;
  std::string answerer;
  std::uint64_t seed = 0;
  std::string timestamp;
};

struct EvalReport {
  ReportMetadata metadata;
  std::map<QueryType, TypeMetrics> by_type;
};

// Throws ValidationError when the lists differ in length. Per-query scores are
// computed in parallel and reduced in query order, so the result matches
// mrr_serial exactly.
EvalReport mrr(std::span<const BenchQuery> queries, std::span<const RankedPrediction> preds,
               ReportMetadata metadata = {});
EvalReport mrr_serial(std::span<const BenchQuery> queries, std::span<const RankedPrediction> preds,
                      ReportMetadata metadata = {});

using Answerer = std::function<RankedPrediction(const BenchQuery&)>;

// preds[i] = answer(queries[i]); OpenMP across queries, serial reference.
std::vector<RankedPrediction> answer_all(std::span<const BenchQuery> queries, const Answerer& answer);
std::vector<RankedPrediction> answer_all_serial(std::span<const BenchQuery> queries, const Answerer& answer);

enum class TableLayout { Typical, Complex };
std::span<const QueryType> layout_types(TableLayout layout);

struct ReferenceRow {
  std::string dataset;
  std::string model;
  std::map<QueryType, double> mrr_percent;
};

// Stored baseline MRR tables, one section per layout.
struct ReferenceTable {
  std::map<TableLayout, std::vector<ReferenceRow>> sections;

  // "# table: typical|complex" starts a section; each section has a
  // "dataset,model,<codes>" header followed by rows of percentages.
  static ReferenceTable parse(std::string_view text);
  static ReferenceTable load(const std::filesystem::path& path);
};

enum class ReportFormat { Csv, Json, Markdown };
std::optional<ReportFormat> parse_report_format(std::string_view name);

// Reference rows first, then the report's own row; values are MRR x 100 with
// one decimal, blank where a type has no queries. An empty report yields only
// the header (plus any reference rows).
std::string emit_report(const EvalReport& r, const ReferenceTable* reference, ReportFormat format,
                        TableLayout layout);

// Convenience: both layouts (CSV/markdown separated by a blank line; JSON as
// one document).
std::string emit_report(const EvalReport& r, const ReferenceTable* reference, ReportFormat format);

// {"type":"2p","query":"p(r:11,p(r:10,e:1))","easy":[3],"hard":[5]}
std::string to_jsonl(const BenchQuery& q);
BenchQuery bench_query_from_json(std::string_view line);
std::vector<BenchQuery> read_queries(const std::filesystem::path& path);
void write_queries(const std::filesystem::path& path, std::span<const BenchQuery> queries);

}  // namespace rog
