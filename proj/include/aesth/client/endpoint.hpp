#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>

#include "aesth/core/error.hpp"
#include "aesth/core/schema.hpp"
#include "aesth/core/types.hpp"

namespace aesth::client {

struct EndpointConfig {
  /// Role of the endpoint in a run (candidate, matcher, judge, ...). Part of
  /// the transcript cache key.
  std::string name = "candidate";
  /// "http" or "mock".
  std::string kind = "http";
  std::string base_url;
  std::string model;
  /// Environment variable holding the bearer token. Empty = no auth.
  std::string api_key_env;
  double timeout_s = 60.0;
  int max_retries = 3;
  int parallel_limit = 4;
  int retry_backoff_ms = 0;
  bool supports_logits = false;
  int top_logprobs = 20;
  std::optional<double> temperature;
  /// How an assistant prefix is sent: "continue_final_message" (vLLM style),
  /// "message" (plain trailing assistant turn) or "inline" (appended to the
  /// user prompt).
  std::string prefill_mode = "continue_final_message";
  /// Mock script path, for kind == "mock".
  std::string script;

  void validate() const {
    if (!(timeout_s > 0)) throw ConfigError("endpoint " + name + ": timeout_s must be > 0");
    if (max_retries < 0) throw ConfigError("endpoint " + name + ": max_retries must be >= 0");
    if (parallel_limit < 1) throw ConfigError("endpoint " + name + ": parallel_limit must be >= 1");
    if (retry_backoff_ms < 0) throw ConfigError("endpoint " + name + ": retry_backoff_ms must be >= 0");
    if (kind != "http" && kind != "mock")
      throw ConfigError("endpoint " + name + ": unknown kind \"" + kind + "\"");
    if (kind == "http" && base_url.empty()) throw ConfigError("endpoint " + name + ": missing base_url");
    if (prefill_mode != "continue_final_message" && prefill_mode != "message" &&
        prefill_mode != "inline")
      throw ConfigError("endpoint " + name + ": unknown prefill_mode \"" + prefill_mode + "\"");
  }
};

/// Paths inside `j` (mock scripts) resolve against `base_dir`.
inline EndpointConfig endpoint_from_json(const json& j, const std::string& name,
                                         const std::filesystem::path& base_dir = {}) {
  if (!j.is_object()) throw ConfigError("endpoint " + name + ": expected JSON object");
  EndpointConfig c;
  c.name = j.value("name", name);
  try {
    c.kind = j.value("kind", std::string("http"));
    c.base_url = j.value("base_url", std::string());
    c.model = j.value("model", std::string());
    c.api_key_env = j.value("api_key_env", std::string());
    c.timeout_s = j.value("timeout_s", 60.0);
    c.max_retries = j.value("max_retries", 3);
    c.parallel_limit = j.value("parallel_limit", 4);
    c.retry_backoff_ms = j.value("retry_backoff_ms", 0);
    c.supports_logits = j.value("supports_logits", false);
    c.top_logprobs = j.value("top_logprobs", 20);
    if (j.contains("temperature") && !j["temperature"].is_null())
      c.temperature = j["temperature"].get<double>();
    c.prefill_mode = j.value("prefill_mode", std::string("continue_final_message"));
    c.script = j.value("script", std::string());
  } catch (const json::type_error& e) {
    throw ConfigError("endpoint " + name + ": " + e.what());
  }
  if (!c.script.empty() && !base_dir.empty() && std::filesystem::path(c.script).is_relative())
    c.script = (base_dir / c.script).string();
  c.validate();
  return c;
}

inline json to_json(const EndpointConfig& c) {
  json j = {{"name", c.name},
            {"kind", c.kind},
            {"base_url", c.base_url},
            {"model", c.model},
            {"api_key_env", c.api_key_env},
            {"timeout_s", c.timeout_s},
            {"max_retries", c.max_retries},
            {"parallel_limit", c.parallel_limit},
            {"retry_backoff_ms", c.retry_backoff_ms},
            {"supports_logits", c.supports_logits},
            {"top_logprobs", c.top_logprobs},
            {"prefill_mode", c.prefill_mode}};
  if (c.temperature) j["temperature"] = *c.temperature;
  if (!c.script.empty()) j["script"] = c.script;
  return j;
}

/// Natural-log logits of the five rating words, indexed bad..excellent.
struct RatingLogits {
  std::array<double, 5> values{};

  double at(RatingLevel r) const { return values[enum_index(r)]; }
  double& at(RatingLevel r) { return values[enum_index(r)]; }

  bool all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
  }

  bool operator==(const RatingLogits&) const = default;
};

inline json to_json(const RatingLogits& l) {
  json j = json::object();
  for (auto r : all_values<RatingLevel>()) j[std::string(to_string(r))] = l.at(r);
  return j;
}

inline RatingLogits rating_logits_from_json(const json& j) {
  if (!j.is_object()) throw schema::FieldError("logits: expected object");
  RatingLogits l;
  for (auto r : all_values<RatingLevel>()) l.at(r) = schema::get_number(j, to_string(r));
  if (j.size() != 5) throw schema::FieldError("logits: expected exactly the five rating words");
  return l;
}

struct ChatRequest {
  std::optional<std::string> system;
  std::string prompt;
  std::optional<ImageRef> image;
  /// Fixed start of the assistant turn; the model continues from here.
  std::optional<std::string> assistant_prefix;
  bool want_logprobs = false;
  std::optional<double> temperature;
  /// Distinguishes deliberate repeats of one prompt (judge rounds) in the
  /// transcript cache. Never sent over the wire.
  std::string cache_tag;
};

inline json to_json(const ChatRequest& r) {
  json j = {{"prompt", r.prompt}, {"want_logprobs", r.want_logprobs}};
  if (r.system) j["system"] = *r.system;
  if (r.image) j["image"] = schema::to_json(*r.image);
  if (r.assistant_prefix) j["assistant_prefix"] = *r.assistant_prefix;
  if (r.temperature) j["temperature"] = *r.temperature;
  if (!r.cache_tag.empty()) j["cache_tag"] = r.cache_tag;
  return j;
}

struct ModelResponse {
  std::string text;
  bool refusal = false;
  std::optional<RatingLogits> logits;
  double latency_ms = 0.0;
  int attempts = 1;
  json raw;
};

inline json to_json(const ModelResponse& r) {
  json j = {{"text", r.text},
            {"refusal", r.refusal},
            {"latency_ms", r.latency_ms},
            {"attempts", r.attempts}};
  if (r.logits) j["logits"] = to_json(*r.logits);
  if (!r.raw.is_null()) j["raw"] = r.raw;
  return j;
}

inline ModelResponse response_from_json(const json& j) {
  ModelResponse r;
  r.text = j.value("text", std::string());
  r.refusal = j.value("refusal", false);
  r.latency_ms = j.value("latency_ms", 0.0);
  r.attempts = j.value("attempts", 1);
  if (j.contains("logits") && !j["logits"].is_null()) r.logits = rating_logits_from_json(j["logits"]);
  if (j.contains("raw")) r.raw = j["raw"];
  return r;
}

/// A chat endpoint. `send` bounds in-flight requests by the configured
/// parallel limit and retries transient failures; transports implement
/// `do_send` for a single attempt.
class ChatClient {
 public:
  explicit ChatClient(EndpointConfig config)
      : config_(std::move(config)), gate_(std::max(1, config_.parallel_limit)) {
    config_.validate();
  }
  virtual ~ChatClient() = default;
  ChatClient(const ChatClient&) = delete;
  ChatClient& operator=(const ChatClient&) = delete;

  const EndpointConfig& config() const { return config_; }

  virtual ModelResponse send(const ChatRequest& request) {
    using clock = std::chrono::steady_clock;
    const auto per_attempt = std::chrono::milliseconds(
        static_cast<long long>(std::ceil(config_.timeout_s * 1000.0)));
    const int max_attempts = config_.max_retries + 1;

    gate_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{gate_};

    const auto start = clock::now();
    const auto deadline = start + per_attempt * max_attempts;
    std::string last_error;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
      auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
      if (remaining.count() <= 0) throw EndpointError(config_.name + ": deadline exceeded: " + last_error, attempt - 1);
      try {
        ModelResponse r = do_send(request, std::min(per_attempt, remaining));
        r.attempts = attempt;
        r.latency_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
        return r;
      } catch (const TransientError& e) {
        last_error = e.what();
        if (attempt == max_attempts) break;
        auto backoff = std::chrono::milliseconds(config_.retry_backoff_ms) * (1 << std::min(attempt - 1, 10));
        auto left = deadline - clock::now();
        if (backoff > left) break;
        if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
      } catch (const RejectedError& e) {
        throw EndpointError(config_.name + ": " + e.what(), attempt);
      }
    }
    throw EndpointError(config_.name + ": " + last_error, max_attempts);
  }

 protected:
  virtual ModelResponse do_send(const ChatRequest& request, std::chrono::milliseconds timeout) = 0;

 private:
  EndpointConfig config_;
  std::counting_semaphore<> gate_;
};

// ---------------------------------------------------------------------------
// Fixed prompts for scoring.
// ---------------------------------------------------------------------------

inline constexpr std::string_view kRatePrompt = "Rate this image from an aesthetic perspective.";
inline constexpr std::string_view kRatePrefix = "The aesthetic quality is";

inline ModelResponse chat(ChatClient& client, const ImageRef& image, const std::string& prompt) {
  ChatRequest req;
  req.prompt = prompt;
  req.image = image;
  return client.send(req);
}

inline ChatRequest rating_request(const ImageRef& image, bool want_logprobs) {
  ChatRequest req;
  req.prompt = std::string(kRatePrompt);
  req.assistant_prefix = std::string(kRatePrefix);
  req.image = image;
  req.want_logprobs = want_logprobs;
  return req;
}

/// Logits of the five rating words at the first token after the fixed
/// assistant prefix.
inline RatingLogits score_logits(ChatClient& client, const ImageRef& image) {
  if (!client.config().supports_logits) {
    throw CapabilityError("endpoint " + client.config().name +
                          " does not provide token logprobs; use the text-rating fallback mode "
                          "(--mode text)");
  }
  ModelResponse r = client.send(rating_request(image, true));
  if (r.refusal) throw IncompleteResponseError("image " + image.id + ": model refused to rate");
  if (!r.logits)
    throw IncompleteResponseError("image " + image.id +
                                  ": response lacks logprobs for all five rating words");
  if (!r.logits->all_finite())
    throw IncompleteResponseError("image " + image.id + ": non-finite rating-word logprob");
  return *r.logits;
}

}  // namespace aesth::client
