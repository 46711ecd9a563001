#pragma once

// Chat-completions transport over cpp-httplib. Define
// CPPHTTPLIB_OPENSSL_SUPPORT before including to enable https endpoints.

#include <httplib.h>

#include <cstdlib>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>

#include "aesth/client/endpoint.hpp"
#include "aesth/core/jsonl.hpp"
#include "aesth/core/text.hpp"

namespace aesth::client {

namespace detail {

inline std::string base64_encode(std::string_view in) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    unsigned v = (static_cast<unsigned char>(in[i]) << 16) |
                 (static_cast<unsigned char>(in[i + 1]) << 8) | static_cast<unsigned char>(in[i + 2]);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i + 1 == in.size()) {
    unsigned v = static_cast<unsigned char>(in[i]) << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == in.size()) {
    unsigned v = (static_cast<unsigned char>(in[i]) << 16) | (static_cast<unsigned char>(in[i + 1]) << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

inline std::string mime_for(const std::filesystem::path& p) {
  auto ext = text::to_lower(p.extension().string());
  if (ext == ".png") return "image/png";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  if (ext == ".bmp") return "image/bmp";
  return "image/jpeg";
}

/// Remote references pass through; local files become data URLs.
inline std::string image_url(const ImageRef& image) {
  const std::string& p = image.path;
  if (p.rfind("http://", 0) == 0 || p.rfind("https://", 0) == 0 || p.rfind("data:", 0) == 0) return p;
  if (p.empty()) throw InputError("image " + image.id + ": empty path");
  std::string bytes;
  try {
    bytes = read_text_file(p);
  } catch (const IoError& e) {
    throw InputError("image " + image.id + ": " + e.what());
  }
  return "data:" + mime_for(p) + ";base64," + base64_encode(bytes);
}

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

inline ParsedUrl parse_base_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base_url must start with http:// or https://: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.scheme_host_port = url.substr(0, path_start);
  out.path_prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  return out;
}

}  // namespace detail

/// Request body in chat-completions shape.
inline json build_chat_body(const EndpointConfig& config, const ChatRequest& req) {
  json messages = json::array();
  if (req.system) messages.push_back({{"role", "system"}, {"content", *req.system}});

  std::string prompt = req.prompt;
  if (req.assistant_prefix && config.prefill_mode == "inline") prompt += "\n" + *req.assistant_prefix;
  json content = json::array({{{"type", "text"}, {"text", prompt}}});
  if (req.image) content.push_back({{"type", "image_url"}, {"image_url", {{"url", detail::image_url(*req.image)}}}});
  messages.push_back({{"role", "user"}, {"content", std::move(content)}});

  json body = {{"model", config.model}, {"stream", false}};
  if (req.assistant_prefix && config.prefill_mode != "inline") {
    messages.push_back({{"role", "assistant"}, {"content", *req.assistant_prefix}});
    if (config.prefill_mode == "continue_final_message") {
      body["continue_final_message"] = true;
      body["add_generation_prompt"] = false;
    }
  }
  body["messages"] = std::move(messages);
  if (auto t = req.temperature ? req.temperature : config.temperature) body["temperature"] = *t;
  if (req.want_logprobs) {
    body["logprobs"] = true;
    body["top_logprobs"] = config.top_logprobs;
    body["max_tokens"] = 1;
  }
  return body;
}

/// Rating-word logits from the first generated token's top_logprobs. Token
/// variants (" Good", "good") collapse to the highest logprob per word.
inline std::optional<RatingLogits> rating_logits_from_top(const json& top) {
  if (!top.is_array()) return std::nullopt;
  std::array<double, 5> best;
  best.fill(-std::numeric_limits<double>::infinity());
  std::array<bool, 5> seen{};
  for (const auto& entry : top) {
    if (!entry.is_object() || !entry.contains("token") || !entry.contains("logprob")) continue;
    if (!entry["logprob"].is_number()) continue;
    std::string tok = text::to_lower(text::trim(entry["token"].get<std::string>()));
    if (auto r = parse_enum<RatingLevel>(tok)) {
      auto i = enum_index(*r);
      best[i] = std::max(best[i], entry["logprob"].get<double>());
      seen[i] = true;
    }
  }
  for (bool s : seen)
    if (!s) return std::nullopt;
  RatingLogits l;
  l.values = best;
  return l;
}

inline ModelResponse parse_chat_response(const json& body) {
  ModelResponse r;
  r.raw = body;
  if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty())
    throw TransientError("response without choices");
  const json& choice = body["choices"][0];
  const json& msg = choice.contains("message") ? choice["message"] : json::object();
  if (msg.contains("content") && msg["content"].is_string()) r.text = msg["content"].get<std::string>();
  if (msg.contains("refusal") && msg["refusal"].is_string() && !msg["refusal"].get<std::string>().empty())
    r.refusal = true;
  if (choice.value("finish_reason", json()).is_string() && choice["finish_reason"] == "content_filter")
    r.refusal = true;
  if (choice.contains("logprobs") && choice["logprobs"].is_object()) {
    const json& lp = choice["logprobs"];
    if (lp.contains("content") && lp["content"].is_array() && !lp["content"].empty()) {
      const json& first = lp["content"][0];
      if (first.contains("top_logprobs")) r.logits = rating_logits_from_top(first["top_logprobs"]);
    }
  }
  return r;
}

class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(EndpointConfig config) : ChatClient(std::move(config)) {
    url_ = detail::parse_base_url(this->config().base_url);
    const std::string& env = this->config().api_key_env;
    if (!env.empty()) {
      const char* v = std::getenv(env.c_str());
      if (v == nullptr || *v == '\0')
        throw ConfigError("endpoint " + this->config().name + ": environment variable " + env +
                          " is not set");
      token_ = v;
    }
  }

 protected:
  ModelResponse do_send(const ChatRequest& request, std::chrono::milliseconds timeout) override {
    json body = build_chat_body(config(), request);
    httplib::Client cli(url_.scheme_host_port);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    auto res = cli.Post(url_.path_prefix + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) throw TransientError("transport error: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
      throw TransientError("HTTP " + std::to_string(res->status));
    if (res->status != 200)
      throw RejectedError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    json parsed;
    try {
      parsed = json::parse(res->body);
    } catch (const json::parse_error&) {
      throw TransientError("response body is not JSON");
    }
    return parse_chat_response(parsed);
  }

 private:
  detail::ParsedUrl url_;
  std::string token_;
};

}  // namespace aesth::client
