#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aesth/core/jsonl.hpp"
#include "aesth/core/text.hpp"
#include "aesth/core/types.hpp"

namespace aesth::report {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline std::string digest_text(std::string_view content) { return "fnv1a64:" + text::hex64(text::fnv1a64(content)); }

inline std::string digest_file(const std::filesystem::path& path) { return digest_text(read_text_file(path)); }

/// Embedded in every report. With `reproducible` set, wall-clock fields are
/// written as zero so reruns compare byte for byte.
struct RunManifest {
  std::string command;
  json config = json::object();
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;
  std::vector<std::string> warnings;
  std::string status = "ok";
  std::string error;
  bool reproducible = false;
  std::chrono::system_clock::time_point started = std::chrono::system_clock::now();
  std::chrono::steady_clock::time_point started_mono = std::chrono::steady_clock::now();

  std::string config_digest() const { return digest_text(config.dump()); }

  void add_input(const std::string& role, const std::filesystem::path& path) {
    inputs[role + ":" + path.filename().string()] = digest_file(path);
  }
};

inline json to_json(const RunManifest& m) {
  double elapsed = 0.0;
  long long started = 0;
  if (!m.reproducible) {
    elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - m.started_mono).count();
    started = std::chrono::duration_cast<std::chrono::seconds>(m.started.time_since_epoch()).count();
  }
  json j = {{"tool", "aesthkit"},
            {"version", kToolVersion},
            {"command", m.command},
            {"seed", m.seed},
            {"config", m.config},
            {"config_digest", m.config_digest()},
            {"inputs", m.inputs},
            {"timing", {{"started_unix", started}, {"elapsed_s", elapsed}}},
            {"warnings", m.warnings},
            {"status", m.status}};
  if (!m.error.empty()) j["error"] = m.error;
  return j;
}

}  // namespace aesth::report
