#pragma once

// In-process scripted endpoint. Deterministic; records every request.
//
// Script JSON:
//   {"rules": [
//     {"match": {"prompt_contains": "..." | ["...", ...], "system_contains": "...",
//                "image_id": "...", "want_logprobs": true},
//      "respond": [{"text": "A"}, {"fail": "503"}, {"refusal": true},
//                  {"logits": {"bad": 0, "poor": 0, "fair": 0, "good": 0, "excellent": 0}}],
//      "repeat": "last" | "cycle"}
//   ]}
// The first rule whose matcher accepts a request answers it. Each rule walks
// its `respond` list one entry per request; once exhausted it repeats the
// last entry or cycles. An empty `match` accepts everything; a list of
// prompt substrings must all occur.

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "aesth/client/endpoint.hpp"
#include "aesth/core/jsonl.hpp"

namespace aesth::client {

struct MockAction {
  std::string text;
  bool refusal = false;
  std::optional<RatingLogits> logits;
  /// When set, the attempt fails transiently with this message.
  std::optional<std::string> fail;
  int delay_ms = 0;
};

using MockHandler = std::function<MockAction(const ChatRequest&)>;

inline MockAction mock_action_from_json(const json& j) {
  MockAction a;
  if (j.is_string()) {
    a.text = j.get<std::string>();
    return a;
  }
  if (!j.is_object()) throw ConfigError("mock script: response must be a string or object");
  a.text = j.value("text", std::string());
  a.refusal = j.value("refusal", false);
  a.delay_ms = j.value("delay_ms", 0);
  if (j.contains("fail")) a.fail = j["fail"].is_string() ? j["fail"].get<std::string>() : "scripted failure";
  if (j.contains("logits")) {
    try {
      a.logits = rating_logits_from_json(j["logits"]);
    } catch (const schema::FieldError& e) {
      throw ConfigError(std::string("mock script: ") + e.what());
    }
  }
  return a;
}

struct MockRule {
  std::vector<std::string> prompt_contains;
  std::optional<std::string> system_contains;
  std::optional<std::string> image_id;
  std::optional<bool> want_logprobs;
  std::vector<MockAction> responses;
  bool cycle = false;
  std::size_t cursor = 0;

  bool matches(const ChatRequest& r) const {
    for (const auto& p : prompt_contains)
      if (r.prompt.find(p) == std::string::npos) return false;
    if (system_contains && (!r.system || r.system->find(*system_contains) == std::string::npos))
      return false;
    if (image_id && (!r.image || r.image->id != *image_id)) return false;
    if (want_logprobs && r.want_logprobs != *want_logprobs) return false;
    return true;
  }

  MockAction next() {
    const MockAction& a = responses[cycle ? cursor % responses.size()
                                          : std::min(cursor, responses.size() - 1)];
    ++cursor;
    return a;
  }
};

/// Builds a handler from script rules. Rule cursors are guarded by a mutex so
/// the handler is safe to call concurrently.
inline MockHandler script_handler(std::vector<MockRule> rules) {
  struct State {
    std::mutex mu;
    std::vector<MockRule> rules;
  };
  auto state = std::make_shared<State>();
  state->rules = std::move(rules);
  return [state](const ChatRequest& req) -> MockAction {
    std::lock_guard lock(state->mu);
    for (auto& rule : state->rules)
      if (rule.matches(req)) return rule.next();
    std::string img = req.image ? req.image->id : "<none>";
    std::string head = req.prompt.substr(0, 80);
    throw ScriptMissError("mock endpoint has no scripted response for request (image " + img +
                          ", prompt \"" + head + (req.prompt.size() > 80 ? "..." : "") + "\")");
  };
}

inline std::vector<MockRule> parse_mock_script(const json& script) {
  if (!script.is_object() || !script.contains("rules") || !script["rules"].is_array())
    throw ConfigError("mock script: expected {\"rules\": [...]}");
  std::vector<MockRule> rules;
  for (const auto& r : script["rules"]) {
    MockRule rule;
    if (r.contains("match")) {
      const json& m = r["match"];
      if (m.contains("prompt_contains")) {
        const json& p = m["prompt_contains"];
        if (p.is_string()) rule.prompt_contains.push_back(p.get<std::string>());
        else rule.prompt_contains = p.get<std::vector<std::string>>();
      }
      if (m.contains("system_contains")) rule.system_contains = m["system_contains"].get<std::string>();
      if (m.contains("image_id")) rule.image_id = m["image_id"].get<std::string>();
      if (m.contains("want_logprobs")) rule.want_logprobs = m["want_logprobs"].get<bool>();
    }
    if (!r.contains("respond")) throw ConfigError("mock script: rule without respond");
    const json& resp = r["respond"];
    if (resp.is_array()) {
      for (const auto& a : resp) rule.responses.push_back(mock_action_from_json(a));
    } else {
      rule.responses.push_back(mock_action_from_json(resp));
    }
    if (rule.responses.empty()) throw ConfigError("mock script: rule with empty respond list");
    rule.cycle = r.value("repeat", std::string("last")) == "cycle";
    rules.push_back(std::move(rule));
  }
  return rules;
}

class MockEndpoint : public ChatClient {
 public:
  MockEndpoint(EndpointConfig config, MockHandler handler)
      : ChatClient(with_mock_kind(std::move(config))), handler_(std::move(handler)) {}

  /// Every request that reached the transport, in arrival order. Retried
  /// attempts appear once per attempt.
  std::vector<ChatRequest> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

  std::size_t request_count() const {
    std::lock_guard lock(mu_);
    return requests_.size();
  }

  /// Highest number of simultaneously running requests observed.
  int max_in_flight() const { return max_in_flight_.load(); }

 protected:
  ModelResponse do_send(const ChatRequest& request, std::chrono::milliseconds) override {
    {
      std::lock_guard lock(mu_);
      requests_.push_back(request);
    }
    int now = ++in_flight_;
    int prev = max_in_flight_.load();
    while (now > prev && !max_in_flight_.compare_exchange_weak(prev, now)) {
    }
    struct Leave {
      std::atomic<int>& n;
      ~Leave() { --n; }
    } leave{in_flight_};

    MockAction a = handler_(request);
    if (a.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(a.delay_ms));
    if (a.fail) throw TransientError(*a.fail);
    ModelResponse r;
    r.text = a.text;
    r.refusal = a.refusal;
    r.logits = a.logits;
    return r;
  }

 private:
  static EndpointConfig with_mock_kind(EndpointConfig c) {
    c.kind = "mock";
    return c;
  }

  MockHandler handler_;
  mutable std::mutex mu_;
  std::vector<ChatRequest> requests_;
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
};

inline std::shared_ptr<MockEndpoint> mock_endpoint(EndpointConfig config, MockHandler handler) {
  return std::make_shared<MockEndpoint>(std::move(config), std::move(handler));
}

inline std::shared_ptr<MockEndpoint> mock_endpoint(EndpointConfig config, const json& script) {
  return mock_endpoint(std::move(config), script_handler(parse_mock_script(script)));
}

/// Handler that answers every request with the same text.
inline MockHandler always(std::string text) {
  return [text = std::move(text)](const ChatRequest&) {
    MockAction a;
    a.text = text;
    return a;
  };
}

}  // namespace aesth::client
