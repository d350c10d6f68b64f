#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "rog/error.hpp"
#include "rog/llm_bridge.hpp"

namespace rog {
namespace {

constexpr const char* kModule = "llm_bridge";
constexpr std::size_t kExcerptBytes = 200;

std::string excerpt(const std::string& body) {
  if (body.size() <= kExcerptBytes) return body;
  return body.substr(0, kExcerptBytes) + "...";
}

}  // namespace

struct HttpBackend::Attempt {
  enum class Outcome { Ok, Transient, Fatal };
  Outcome outcome = Outcome::Fatal;
  int status = 0;
  std::string body;
  std::string error;
};

std::chrono::milliseconds RetryPolicy::ceiling(int retry) const {
  double ms = static_cast<double>(base_delay.count());
  for (int i = 0; i < retry; ++i) ms *= factor;
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

bool is_transient_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

HttpBackendConfig HttpBackendConfig::from_env() {
  HttpBackendConfig c;
  if (const char* v = std::getenv("ROG_API_BASE")) c.api_base = v;
  if (const char* v = std::getenv("ROG_API_KEY")) c.api_key = v;
  if (const char* v = std::getenv("ROG_MODEL")) c.model = v;
  return c;
}

HttpBackend::HttpBackend(HttpBackendConfig config, Sleeper sleeper)
    : config_(std::move(config)),
      sleeper_(std::move(sleeper)),
      in_flight_(std::max(1, config_.max_in_flight)),
      rng_(config_.jitter_seed) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (config_.retry.max_attempts < 1) throw ConfigError(kModule, "retry policy needs at least one attempt");
  if (config_.max_in_flight < 1 || config_.max_in_flight > 1024) {
    throw ConfigError(kModule, "max in-flight requests must be in [1, 1024]");
  }

  const std::string& base = config_.api_base;
  const auto scheme_end = base.find("://");
  if (base.empty() || scheme_end == std::string::npos) {
    throw ConfigError(kModule, "API base must look like http(s)://host[:port][/path], got '" + base + "'");
  }
  const auto path_start = base.find('/', scheme_end + 3);
  scheme_host_port_ = base.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : base.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();

  httplib::Client probe(scheme_host_port_);
  if (!probe.is_valid()) {
    throw ConfigError(kModule, "unsupported API base '" + base + "' (HTTPS needs a build with OpenSSL)");
  }
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::request_body(const ChatRequest& req) const {
  nlohmann::ordered_json body;
  body["model"] = req.model_name.empty() ? config_.model : req.model_name;
  body["messages"] = nlohmann::ordered_json::array({
      {{"role", "system"}, {"content", req.system}},
      {{"role", "user"}, {"content", req.user}},
  });
  body["temperature"] = req.temperature;
  body["max_tokens"] = req.max_output_tokens;
  return body.dump();
}

HttpBackend::Attempt HttpBackend::attempt_once(const std::string& body) {
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  Attempt a;
  auto res = client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
  if (!res) {
    a.outcome = Attempt::Outcome::Transient;
    a.error = httplib::to_string(res.error());
    return a;
  }
  a.status = res->status;
  a.body = res->body;
  if (a.status >= 200 && a.status < 300) {
    a.outcome = Attempt::Outcome::Ok;
  } else if (is_transient_status(a.status)) {
    a.outcome = Attempt::Outcome::Transient;
    a.error = "HTTP " + std::to_string(a.status);
  } else {
    a.outcome = Attempt::Outcome::Fatal;
  }
  return a;
}

ChatResponse HttpBackend::complete(const ChatRequest& req) {
  if (req.temperature < 0) throw ValidationError(kModule, "temperature must be >= 0");
  const std::string body = request_body(req);

  for (int attempt = 0;; ++attempt) {
    Attempt a = attempt_once(body);
    if (a.outcome == Attempt::Outcome::Ok) {
      try {
        const auto j = nlohmann::json::parse(a.body);
        return {j.at("choices").at(0).at("message").at("content").get<std::string>(), identity()};
      } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(kModule, std::string("malformed chat-completions response: ") + e.what());
      }
    }
    if (a.outcome == Attempt::Outcome::Fatal) {
      throw ApiError(a.status, "HTTP " + std::to_string(a.status) + ": " + excerpt(a.body));
    }
    if (attempt + 1 >= config_.retry.max_attempts) {
      throw TransportError(kModule, "giving up after " + std::to_string(attempt + 1) +
                                        " attempts, last failure: " + a.error);
    }
    const auto ceiling = config_.retry.ceiling(attempt);
    std::chrono::milliseconds delay{0};
    {
      std::lock_guard lock(rng_mutex_);
      delay = std::chrono::milliseconds(
          std::uniform_int_distribution<std::int64_t>(0, ceiling.count())(rng_));
    }
    sleeper_(delay);
  }
}

}  // namespace rog
