#pragma once

// Run configuration file (JSON). Every section is optional; relative paths
// resolve against the file's directory.
//
//   {"seed": 7,
//    "endpoints": {"candidate": {...} | "candidate.json", "matcher": ..., "judge": ...,
//                  "rewriter": ..., "captioner": ...},
//    "perception": {"policy": "all", "image_token": "<image>"},
//    "assessment": {"mode": "logits", "dataset": "AVA"},
//    "describe":   {"rounds": 5, "temperature": 0.2},
//    "idcp": {"templates": "templates.json", "filters": {...}, "stratify": {...},
//             "balance": [{"target": "equalize_binary", "tolerance": 0}],
//             "match": {"length_threshold_words": 100, "suggestion_keywords": [...]},
//             "parallel_limit": 4, "use_raw_comments": false}}

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "aesth/client/endpoint.hpp"
#include "aesth/client/http.hpp"
#include "aesth/client/mock.hpp"
#include "aesth/client/transcript.hpp"
#include "aesth/core/jsonl.hpp"
#include "aesth/idcp/pipeline.hpp"

namespace aesth::cli {

namespace fs = std::filesystem;

struct RunConfig {
  json raw = json::object();
  fs::path base_dir;
  std::optional<std::uint64_t> seed;

  const json& section(const std::string& name) const {
    static const json empty = json::object();
    auto it = raw.find(name);
    return it == raw.end() ? empty : *it;
  }

  fs::path resolve(const std::string& p) const {
    fs::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  }
};

inline RunConfig load_run_config(const std::optional<fs::path>& path) {
  RunConfig c;
  if (!path) return c;
  c.raw = read_json_file(*path);
  if (!c.raw.is_object()) throw ConfigError(path->string() + ": expected a JSON object");
  c.base_dir = path->parent_path();
  if (c.raw.contains("seed")) {
    if (!c.raw["seed"].is_number_unsigned()) throw ConfigError(path->string() + ": seed must be a non-negative integer");
    c.seed = c.raw["seed"].get<std::uint64_t>();
  }
  return c;
}

/// An endpoint from a standalone file, or else from the config's endpoints
/// section (inline object or path). Returns nullopt when neither names it.
inline std::optional<client::EndpointConfig> endpoint_for(const RunConfig& config, const std::string& role,
                                                          const std::optional<fs::path>& file) {
  if (file) {
    json j = read_json_file(*file);
    return client::endpoint_from_json(j, role, file->parent_path());
  }
  const json& eps = config.section("endpoints");
  auto it = eps.find(role);
  if (it == eps.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) {
    fs::path p = config.resolve(it->get<std::string>());
    return client::endpoint_from_json(read_json_file(p), role, p.parent_path());
  }
  return client::endpoint_from_json(*it, role, config.base_dir);
}

/// Transport for one endpoint, wrapped by the transcript when one is in use.
/// In replay mode nothing but the transcript is consulted.
inline std::shared_ptr<client::ChatClient> make_client(client::EndpointConfig ep,
                                                       const std::shared_ptr<client::TranscriptStore>& store,
                                                       bool replay) {
  if (replay) {
    if (!store) throw ConfigError("--replay requires --transcript");
    return std::make_shared<client::TranscriptClient>(nullptr, store, ep);
  }
  std::shared_ptr<client::ChatClient> inner;
  if (ep.kind == "mock") {
    if (ep.script.empty()) throw ConfigError("endpoint " + ep.name + ": mock endpoint needs a script");
    inner = client::mock_endpoint(ep, read_json_file(ep.script));
  } else {
    inner = std::make_shared<client::HttpChatClient>(ep);
  }
  if (!store) return inner;
  return std::make_shared<client::TranscriptClient>(inner, store, ep);
}

/// Endpoint config as recorded in manifests: the script path is reduced to
/// its file name so relocating a checkout does not change reports.
inline json endpoint_snapshot(const client::EndpointConfig& ep) {
  json j = client::to_json(ep);
  if (j.contains("script")) j["script"] = fs::path(ep.script).filename().string();
  return j;
}

inline idcp::MatchOptions parse_match_options(const json& j) {
  idcp::MatchOptions m;
  if (j.is_null()) return m;
  if (!j.is_object()) throw ConfigError("idcp.match: expected object");
  try {
    m.length_threshold_words = j.value("length_threshold_words", m.length_threshold_words);
    if (j.contains("suggestion_keywords")) m.suggestion_keywords = j["suggestion_keywords"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("idcp.match: ") + e.what());
  }
  return m;
}

inline idcp::IdcpConfig parse_idcp_config(const RunConfig& config, std::uint64_t seed,
                                          const fs::path& default_templates) {
  const json& j = config.section("idcp");
  idcp::IdcpConfig c;
  c.seed = seed;
  try {
    c.filters = idcp::parse_filter_rules(j.value("filters", json()));
    if (j.contains("stratify")) c.strata = idcp::parse_quality_strata(j["stratify"], seed);
    if (j.contains("balance")) {
      const json& b = j["balance"];
      if (b.is_array()) {
        for (const auto& p : b) c.balance.push_back(idcp::parse_balance_policy(p, seed));
      } else {
        c.balance.push_back(idcp::parse_balance_policy(b, seed));
      }
    }
    c.match = parse_match_options(j.value("match", json()));
    c.parallel_limit = j.value("parallel_limit", 4);
    c.use_raw_comments = j.value("use_raw_comments", false);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("idcp: ") + e.what());
  }
  if (c.parallel_limit < 1) throw ConfigError("idcp.parallel_limit must be >= 1");
  fs::path templates = j.contains("templates") ? config.resolve(j["templates"].get<std::string>()) : default_templates;
  c.pool = idcp::load_template_pool(templates);
  return c;
}

}  // namespace aesth::cli
