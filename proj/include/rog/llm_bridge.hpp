#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <semaphore>
#include <string>
#include <unordered_map>

#include "rog/oracle.hpp"
#include "rog/planner.hpp"

namespace rog {

// Prompt text per operator kind. Placeholders: {CONTEXT}, {SOURCE_SET},
// {RELATION} (project) and {CONTEXT}, {SETS} (intersect, union).
struct PromptTemplate {
  std::string system_text;
  std::map<std::string, std::string> step_text_by_op;  // keyed by op_name()

  static PromptTemplate default_template();

  // Empty when every op has a template and each uses only its own
  // placeholders; otherwise the defect.
  std::string defect() const;
};

struct ChatRequest {
  std::string model_name;
  std::string system;
  std::string user;
  double temperature = 0.0;
  int max_output_tokens = 512;
  friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

struct ChatResponse {
  std::string text;
  std::string backend_id;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual ChatResponse complete(const ChatRequest& req) = 0;
  virtual std::string identity() const = 0;
};

// "e:2, e:4" (ascending as given), "none" when empty.
std::string render_entity_list(const AnswerSet& s);

// Renders the step's user prompt. Throws ExecutionError when a slot is missing
// from `cache` and ValidationError when a placeholder stays unresolved.
ChatRequest render_prompt(const PromptTemplate& t, const Step& step, const std::string& context,
                          const SlotCache& cache, const std::string& model_name = "");

// Extracts "e:<n>" tokens and bare integers, keeps those in `known_entities`
// (ascending), drops duplicates after their first occurrence.
AnswerSet parse_answer(std::string_view text, const EntitySet& known_entities);

// True when parse_answer yields nothing for text that does not say "none".
bool is_unparsed(std::string_view text, const AnswerSet& parsed);

// Fixed request -> response table keyed by user text.
class ScriptedBackend : public CompletionBackend {
 public:
  explicit ScriptedBackend(std::unordered_map<std::string, std::string> script,
                           std::optional<std::string> fallback = std::nullopt, std::string id = "scripted");

  // JSON object {"<user text>": "<response>", ...}; an optional "*" key is the
  // fallback.
  static ScriptedBackend load(const std::filesystem::path& path);

  ChatResponse complete(const ChatRequest& req) override;
  std::string identity() const override { return id_; }

 private:
  std::unordered_map<std::string, std::string> script_;
  std::optional<std::string> fallback_;
  std::string id_;
};

// Reads the step back out of a prompt rendered with the default template,
// rebuilds the graph from the context lines and answers with eval_step.
class OracleMockBackend : public CompletionBackend {
 public:
  explicit OracleMockBackend(std::string id = "mock-oracle") : id_(std::move(id)) {}

  ChatResponse complete(const ChatRequest& req) override;
  std::string identity() const override { return id_; }

 private:
  std::string id_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;

  // Upper bound of the full-jitter window before attempt `retry` (0-based).
  std::chrono::milliseconds ceiling(int retry) const;
};

// True for status codes worth retrying: 429 and 5xx.
bool is_transient_status(int status);

struct HttpBackendConfig {
  std::string api_base;  // e.g. "https://api.example.com/v1"
  std::string api_key;
  std::string model;
  RetryPolicy retry;
  std::chrono::milliseconds timeout{60000};
  int max_in_flight = 4;
  std::uint64_t jitter_seed = std::random_device{}();

  // ROG_API_BASE, ROG_API_KEY, ROG_MODEL; missing variables keep defaults.
  static HttpBackendConfig from_env();
};

// OpenAI-compatible POST {base}/chat/completions with retries and a bound on
// concurrent in-flight requests.
class HttpBackend : public CompletionBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpBackend(HttpBackendConfig config, Sleeper sleeper = {});
  ~HttpBackend() override;

  ChatResponse complete(const ChatRequest& req) override;
  std::string identity() const override { return "http:" + config_.model; }

  // Request body for `req` (model falls back to the configured one).
  std::string request_body(const ChatRequest& req) const;

 private:
  struct Attempt;
  Attempt attempt_once(const std::string& body);

  HttpBackendConfig config_;
  Sleeper sleeper_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::counting_semaphore<1024> in_flight_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

}  // namespace rog
