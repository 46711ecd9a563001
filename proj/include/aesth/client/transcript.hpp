#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "aesth/client/endpoint.hpp"
#include "aesth/core/jsonl.hpp"
#include "aesth/core/text.hpp"

namespace aesth::client {

/// Cache key of a request sent to a given endpoint.
inline std::string request_hash(const EndpointConfig& config, const ChatRequest& request) {
  json key = {{"endpoint", config.name}, {"model", config.model}, {"request", to_json(request)}};
  return text::hex64(text::fnv1a64(key.dump()));
}

/// Recorded (request, response) pairs keyed by request hash. Shared by every
/// client of a run; thread-safe. Saved as JSONL sorted by hash so the file
/// does not depend on completion order.
class TranscriptStore {
 public:
  struct Entry {
    std::string endpoint;
    json request;
    json response;
  };

  TranscriptStore() = default;

  static std::shared_ptr<TranscriptStore> load(const std::filesystem::path& path) {
    auto store = std::make_shared<TranscriptStore>();
    store->path_ = path;
    if (!std::filesystem::exists(path)) return store;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open transcript " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (text::is_blank(line)) continue;
      try {
        json j = json::parse(line);
        store->entries_[j.at("hash").get<std::string>()] =
            Entry{j.value("endpoint", std::string()), j.at("request"), j.at("response")};
      } catch (const json::exception& e) {
        throw SchemaError(line_no, std::string("transcript: ") + e.what());
      }
    }
    return store;
  }

  std::optional<ModelResponse> find(const std::string& hash) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(hash);
    if (it == entries_.end()) return std::nullopt;
    return response_from_json(it->second.response);
  }

  void put(const std::string& hash, const EndpointConfig& config, const ChatRequest& request,
           const ModelResponse& response) {
    std::lock_guard lock(mu_);
    entries_[hash] = Entry{config.name, to_json(request), to_json(response)};
    dirty_ = true;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }

  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }
  void count_hit() { ++hits_; }
  void count_miss() { ++misses_; }

  void save(const std::filesystem::path& path) const {
    std::lock_guard lock(mu_);
    std::ostringstream out;
    for (const auto& [hash, e] : entries_) {
      json j = {{"hash", hash}, {"endpoint", e.endpoint}, {"request", e.request}, {"response", e.response}};
      out << j.dump() << '\n';
    }
    write_text_file(path, out.str());
  }

  /// Writes back to the file it was loaded from, if anything changed.
  void save() const {
    if (path_.empty() || !dirty_) return;
    save(path_);
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, Entry> entries_;
  std::filesystem::path path_;
  std::atomic<bool> dirty_{false};
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

/// Serves requests from a transcript; forwards misses to `inner` and records
/// them. With no inner client (replay mode) a miss is an EndpointError and no
/// request ever leaves the process.
class TranscriptClient : public ChatClient {
 public:
  TranscriptClient(std::shared_ptr<ChatClient> inner, std::shared_ptr<TranscriptStore> store,
                   EndpointConfig config)
      : ChatClient(std::move(config)), inner_(std::move(inner)), store_(std::move(store)) {}

  TranscriptClient(std::shared_ptr<ChatClient> inner, std::shared_ptr<TranscriptStore> store)
      : TranscriptClient(inner, std::move(store), inner->config()) {}

  ModelResponse send(const ChatRequest& request) override {
    const std::string hash = request_hash(config(), request);
    if (auto cached = store_->find(hash)) {
      store_->count_hit();
      return *cached;
    }
    store_->count_miss();
    if (!inner_) {
      throw EndpointError(config().name + ": replay transcript has no entry for request " + hash, 0);
    }
    ModelResponse r = inner_->send(request);
    store_->put(hash, config(), request, r);
    return r;
  }

 protected:
  ModelResponse do_send(const ChatRequest&, std::chrono::milliseconds) override {
    throw RejectedError("transcript client has no transport");
  }

 private:
  std::shared_ptr<ChatClient> inner_;
  std::shared_ptr<TranscriptStore> store_;
};

}  // namespace aesth::client
