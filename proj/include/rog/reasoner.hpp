#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rog/error.hpp"
#include "rog/llm_bridge.hpp"
#include "rog/retrieval.hpp"

namespace rog {

struct StepRecord {
  Step step;
  bool prompted = false;  // false for set operations computed locally
  ChatRequest request;
  std::string response;
  AnswerSet answers;
  bool unparsed = false;
};

struct ChainTrace {
  std::vector<StepRecord> records;
  SlotId answer_slot;
};

// One JSON object per step record, LF-terminated.
std::string to_jsonl(const ChainTrace& trace, const std::string& agent_label = "");

struct Agent {
  std::shared_ptr<CompletionBackend> backend;
  PromptTemplate prompt = PromptTemplate::default_template();
  std::string label = "agent";
};

struct ChainOptions {
  bool prompt_setops = false;
  std::string model_name;
  int max_output_tokens = 512;
};

struct ChainResult {
  AnswerSet answers;  // model ranking order
  ChainTrace trace;
};

// Backend failure mid-chain; carries the records completed so far.
class ChainError : public Error {
 public:
  ChainError(const std::string& what, ChainTrace partial)
      : Error("reasoner", what), partial_(std::move(partial)) {}

  const ChainTrace& partial_trace() const noexcept { return partial_; }

 private:
  ChainTrace partial_;
};

ChainResult run_chain(const Plan& plan, const Neighborhood& nbhd, const Agent& agent,
                      const ChainOptions& options = {});

class ConsensusConfig {
 public:
  // Threshold defaults to the majority floor(n/2)+1. Throws ValidationError on
  // an empty ensemble, duplicate labels or an out-of-range threshold.
  explicit ConsensusConfig(std::vector<Agent> agents, std::optional<int> vote_threshold = std::nullopt);

  const std::vector<Agent>& agents() const { return agents_; }
  int vote_threshold() const { return threshold_; }

 private:
  std::vector<Agent> agents_;
  int threshold_;
};

// Fewer agents succeeded than the vote threshold requires.
class EnsembleError : public Error {
 public:
  EnsembleError(const std::string& what, std::vector<ChainTrace> traces, std::vector<std::string> errors)
      : Error("reasoner", what), traces_(std::move(traces)), errors_(std::move(errors)) {}

  const std::vector<ChainTrace>& partial_traces() const noexcept { return traces_; }
  const std::vector<std::string>& agent_errors() const noexcept { return errors_; }

 private:
  std::vector<ChainTrace> traces_;
  std::vector<std::string> errors_;
};

struct ConsensusResult {
  AnswerSet answers;
  std::vector<ChainTrace> traces;   // one per agent; partial for failed agents
  std::vector<std::string> errors;  // one per agent; empty when the agent succeeded
};

// Votes over the agents' final sets given in `finals` (nullopt = failed agent).
// Ordering: more votes first, then lower mean rank, then lower ID.
AnswerSet tally_votes(const std::vector<std::optional<AnswerSet>>& finals, int threshold);

ConsensusResult run_consensus(const Plan& plan, const Neighborhood& nbhd, const ConsensusConfig& cfg,
                              const ChainOptions& options = {});

}  // namespace rog
