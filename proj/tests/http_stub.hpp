#pragma once

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <deque>
#include <mutex>
#include <string>
#include <thread>

namespace rog::test {

// Local chat-completions endpoint. Each request consumes the next scripted
// fault; once the script is empty it answers 200 with `reply`.
class StubServer {
 public:
  struct Fault {
    int status = 200;                          // returned status when no delay
    std::chrono::milliseconds delay{0};        // sleep before answering
    std::string body;                          // overrides the default body
  };

  StubServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int now = ++in_flight_;
      int seen = max_in_flight_.load();
      while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
      }
      ++requests_;
      {
        std::lock_guard lock(mu_);
        last_body_ = req.body;
        last_auth_ = req.get_header_value("Authorization");
      }
      Fault f;
      bool scripted = false;
      {
        std::lock_guard lock(mu_);
        if (!faults_.empty()) {
          f = faults_.front();
          faults_.pop_front();
          scripted = true;
        }
      }
      std::this_thread::sleep_for(scripted ? f.delay : hold_);
      res.status = f.status;
      if (!f.body.empty()) {
        res.set_content(f.body, "application/json");
      } else if (f.status == 200) {
        nlohmann::json j;
        j["choices"] = nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", reply_}}}}});
        res.set_content(j.dump(), "application/json");
      } else {
        res.set_content(R"({"error":"injected"})", "application/json");
      }
      --in_flight_;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  void push(Fault f) {
    std::lock_guard lock(mu_);
    faults_.push_back(std::move(f));
  }
  void set_reply(std::string r) { reply_ = std::move(r); }
  // Time every unscripted request is held before answering.
  void set_hold(std::chrono::milliseconds d) { hold_ = d; }

  int requests() const { return requests_; }
  int max_in_flight() const { return max_in_flight_; }
  void reset_counters() {
    requests_ = 0;
    max_in_flight_ = 0;
  }
  std::string last_body() {
    std::lock_guard lock(mu_);
    return last_body_;
  }
  std::string last_auth() {
    std::lock_guard lock(mu_);
    return last_auth_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::deque<Fault> faults_;
  std::string reply_ = "e:1";
  std::string last_body_;
  std::string last_auth_;
  std::chrono::milliseconds hold_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
  std::atomic<int> requests_{0};
};

}  // namespace rog::test
