// rog: command-line front end for ingestion, query generation, planning,
// retrieval, answering and benchmarking.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "rog/bench.hpp"
#include "rog/error.hpp"
#include "rog/kg_store.hpp"
#include "rog/llm_bridge.hpp"
#include "rog/oracle.hpp"
#include "rog/planner.hpp"
#include "rog/query.hpp"
#include "rog/reasoner.hpp"
#include "rog/retrieval.hpp"

namespace {

using namespace rog;

// Options shared by every subcommand; flags > env > config file > defaults.
struct RunConfig {
  std::string graph;  // graph the answerer sees (also the "full" graph for genqueries)
  std::string train;
  std::string map;
  std::size_t k = 0;  // 0 = template depth of the query
  std::size_t budget = ContextBudget::kDefaultMaxTriples;
  std::string backend = "oracle";
  std::string api_base;
  std::string model;
  int agents = 1;
  int threshold = 0;  // 0 = majority
  std::uint64_t seed = 0;
  bool prompt_setops = false;
  std::string out;
};

void check(const RunConfig& cfg) {
  if (cfg.budget < 1) throw ConfigError("cli", "budget must be >= 1");
  if (cfg.agents < 1) throw ConfigError("cli", "agents must be >= 1");
  if (cfg.threshold < 0 || cfg.threshold > cfg.agents) {
    throw ConfigError("cli", "threshold must be in [1, agents]");
  }
}

AbstractionMap load_map(const RunConfig& cfg) {
  return cfg.map.empty() ? AbstractionMap{} : AbstractionMap::load(cfg.map);
}

KnowledgeGraph load_graph(const std::string& path, const AbstractionMap& map, const char* what) {
  if (path.empty()) throw ConfigError("cli", std::string("missing --") + what);
  return load_tsv(path, map);
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw IoError("cli", "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::shared_ptr<CompletionBackend> make_backend(const RunConfig& cfg) {
  if (cfg.backend == "mock-oracle") return std::make_shared<OracleMockBackend>();
  if (cfg.backend.rfind("scripted:", 0) == 0) {
    return std::make_shared<ScriptedBackend>(ScriptedBackend::load(cfg.backend.substr(9)));
  }
  if (cfg.backend == "http") {
    HttpBackendConfig http = HttpBackendConfig::from_env();
    if (!cfg.api_base.empty()) http.api_base = cfg.api_base;
    if (!cfg.model.empty()) http.model = cfg.model;
    return std::make_shared<HttpBackend>(std::move(http));
  }
  throw ConfigError("cli", "unknown backend '" + cfg.backend + "' (oracle | mock-oracle | http | scripted:<path>)");
}

// Model-backed answering of one query over its retrieved neighborhood.
class ModelAnswerer {
 public:
  ModelAnswerer(const KnowledgeGraph& g, const RunConfig& cfg)
      : g_(g), cfg_(cfg), budget_(cfg.budget), consensus_(make_agents(cfg), threshold(cfg)) {
    options_.prompt_setops = cfg.prompt_setops;
    options_.model_name = cfg.model;
  }

  ConsensusResult answer(const Query& q) const {
    const QuerySignature sig = signature(q);
    const std::size_t k = cfg_.k ? cfg_.k : std::max<std::size_t>(1, projection_depth(q));
    const Neighborhood n = trim(neighborhood(g_, sig, k), sig, budget_);
    return run_consensus(decompose(q), n, consensus_, options_);
  }

 private:
  static std::vector<Agent> make_agents(const RunConfig& cfg) {
    auto backend = make_backend(cfg);
    std::vector<Agent> agents;
    for (int i = 0; i < cfg.agents; ++i) {
      Agent a;
      a.backend = backend;
      a.label = "agent" + std::to_string(i);
      agents.push_back(std::move(a));
    }
    return agents;
  }

  static std::optional<int> threshold(const RunConfig& cfg) {
    return cfg.threshold ? std::optional<int>(cfg.threshold) : std::nullopt;
  }

  const KnowledgeGraph& g_;
  const RunConfig& cfg_;
  ContextBudget budget_;
  ConsensusConfig consensus_;
  ChainOptions options_;
};

int cmd_ingest(const RunConfig& cfg, const std::string& triples, const std::string& out_map) {
  const KnowledgeGraph g = load_graph(triples, load_map(cfg), "triples");
  if (!out_map.empty()) g.abstraction().save(out_map);
  std::cout << "entities " << g.entities().size() << "\nrelations " << g.relations().size() << "\ntriples "
            << g.triples().size() << "\n";
  return 0;
}

int cmd_genqueries(const RunConfig& cfg, const std::vector<std::string>& types, std::size_t count) {
  const KnowledgeGraph full = load_graph(cfg.graph, load_map(cfg), "graph");
  const KnowledgeGraph train = load_graph(cfg.train, full.abstraction(), "train");
  std::vector<QueryType> selected;
  for (const std::string& t : types) {
    if (t == "all") {
      selected.assign(kAllQueryTypes.begin(), kAllQueryTypes.end());
      continue;
    }
    auto parsed = parse_query_type(t);
    if (!parsed) throw ConfigError("cli", "unknown query type '" + t + "'");
    selected.push_back(*parsed);
  }
  Output out(cfg.out);
  for (std::size_t i = 0; i < selected.size(); ++i) {
    // Distinct, reproducible stream per type.
    for (const BenchQuery& q : generate_queries(train, full, selected[i], count, cfg.seed + i)) {
      out.stream() << to_jsonl(q) << '\n';
    }
  }
  return 0;
}

int cmd_decompose(const std::string& query) {
  std::cout << to_json(decompose(parse_query(query))).dump() << '\n';
  return 0;
}

int cmd_retrieve(const RunConfig& cfg, const std::string& query) {
  const KnowledgeGraph g = load_graph(cfg.graph, load_map(cfg), "graph");
  const Query q = parse_query(query);
  const QuerySignature sig = signature(q);
  const std::size_t k = cfg.k ? cfg.k : std::max<std::size_t>(1, projection_depth(q));
  const std::string context = serialize_context(trim(neighborhood(g, sig, k), sig, ContextBudget(cfg.budget)));
  std::cout << context;
  if (!context.empty()) std::cout << '\n';
  return 0;
}

int cmd_ask(const RunConfig& cfg, const std::string& query, const std::string& trace_path) {
  const KnowledgeGraph g = load_graph(cfg.graph, load_map(cfg), "graph");
  const Query q = parse_query(query);
  if (cfg.backend == "oracle") {
    std::cout << render_entity_list(eval_query(g, q)) << '\n';
    return 0;
  }
  const ConsensusResult result = ModelAnswerer(g, cfg).answer(q);
  if (!trace_path.empty()) {
    std::ofstream trace(trace_path);
    if (!trace) throw IoError("cli", "cannot write " + trace_path);
    for (std::size_t i = 0; i < result.traces.size(); ++i) {
      trace << to_jsonl(result.traces[i], cfg.agents > 1 ? "agent" + std::to_string(i) : "");
    }
  }
  std::cout << render_entity_list(result.answers) << '\n';
  return 0;
}

int cmd_bench(const RunConfig& cfg, const std::string& queries_path, const std::string& format_name,
              const std::string& reference_path, const std::string& dataset, const std::string& stamp) {
  const auto format = parse_report_format(format_name);
  if (!format) throw ConfigError("cli", "unknown report format '" + format_name + "' (csv | json | markdown)");
  const KnowledgeGraph g = load_graph(cfg.graph, load_map(cfg), "graph");
  const std::vector<BenchQuery> queries = read_queries(queries_path);

  std::vector<RankedPrediction> preds;
  if (cfg.backend == "oracle") {
    preds = answer_all(queries, [&](const BenchQuery& q) { return eval_query(g, q.query); });
  } else {
    const ModelAnswerer answerer(g, cfg);
    preds = answer_all(queries, [&](const BenchQuery& q) { return answerer.answer(q.query).answers; });
  }

  ReportMetadata meta{dataset, cfg.backend, cfg.seed, stamp};
  const EvalReport report = mrr(queries, preds, std::move(meta));
  std::optional<ReferenceTable> reference;
  if (!reference_path.empty()) reference = ReferenceTable::load(reference_path);
  Output out(cfg.out);
  out.stream() << emit_report(report, reference ? &*reference : nullptr, *format);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neuro-symbolic first-order query answering over knowledge graphs"};
  app.set_config("--config", "", "key=value configuration file");
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  app.add_option("--graph,--full", cfg.graph, "Triple file the answerer sees (full graph)");
  app.add_option("--train", cfg.train, "Observed (train) triple file");
  app.add_option("--map", cfg.map, "Abstraction map JSON to seed name -> ID assignment");
  app.add_option("--k", cfg.k, "Retrieval hops (default: template depth)");
  app.add_option("--budget", cfg.budget, "Context budget in triples")->check(CLI::PositiveNumber);
  app.add_option("--backend", cfg.backend, "oracle | mock-oracle | http | scripted:<path>");
  app.add_option("--api-base", cfg.api_base, "Chat-completions endpoint root")->envname("ROG_API_BASE");
  app.add_option("--model", cfg.model, "Model name")->envname("ROG_MODEL");
  app.add_option("--agents", cfg.agents, "Agents in the consensus ensemble")->check(CLI::PositiveNumber);
  app.add_option("--threshold", cfg.threshold, "Consensus vote threshold (default: majority)");
  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_flag("--prompt-setops", cfg.prompt_setops, "Prompt the model for intersections and unions too");
  app.add_option("--out", cfg.out, "Output file (default: stdout)");

  std::string triples, out_map;
  auto* ingest = app.add_subcommand("ingest", "Load triples and export the abstraction map");
  ingest->add_option("--triples", triples, "Tab-separated triple file")->required();
  ingest->add_option("--out-map", out_map, "Write the abstraction map JSON here");

  std::vector<std::string> types;
  std::size_t count = 0;
  auto* genq = app.add_subcommand("genqueries", "Sample benchmark queries with easy/hard answers");
  genq->add_option("--type", types, "Query type code(s) or 'all'")->required()->delimiter(',');
  genq->add_option("--count", count, "Queries per type")->required()->check(CLI::PositiveNumber);

  std::string query;
  auto* decomp = app.add_subcommand("decompose", "Print the single-operator plan as JSON");
  decomp->add_option("--query", query, "Query in the p/and/or/not DSL")->required();

  auto* retrieve = app.add_subcommand("retrieve", "Print the k-hop context for a query");
  retrieve->add_option("--query", query, "Query in the p/and/or/not DSL")->required();

  std::string trace_path;
  auto* ask = app.add_subcommand("ask", "Answer one query");
  ask->add_option("--query", query, "Query in the p/and/or/not DSL")->required();
  ask->add_option("--trace", trace_path, "Write the step trace as JSON lines");

  std::string queries_path, format = "csv", reference_path, dataset = "dataset", stamp;
  auto* bench = app.add_subcommand("bench", "Score an answerer on a query file");
  bench->add_option("--queries", queries_path, "Query JSONL file")->required();
  bench->add_option("--report-format", format, "csv | json | markdown");
  bench->add_option("--reference", reference_path, "Stored reference table to print alongside");
  bench->add_option("--dataset", dataset, "Dataset label for the report row");
  bench->add_option("--stamp", stamp, "Timestamp recorded in the report metadata");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    check(cfg);
    if (*ingest) return cmd_ingest(cfg, triples, out_map);
    if (*genq) return cmd_genqueries(cfg, types, count);
    if (*decomp) return cmd_decompose(query);
    if (*retrieve) return cmd_retrieve(cfg, query);
    if (*ask) return cmd_ask(cfg, query, trace_path);
    if (*bench) return cmd_bench(cfg, queries_path, format, reference_path, dataset, stamp);
  } catch (const rog::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
