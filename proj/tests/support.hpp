#pragma once

#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "aesth/client/mock.hpp"
#include "aesth/core/types.hpp"

namespace testing {

namespace fs = std::filesystem;

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("aesthkit-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline fs::path samples_dir() { return AESTHKIT_SAMPLES_DIR; }
inline fs::path data_dir() { return AESTHKIT_DATA_DIR; }

inline aesth::ImageRef image(const std::string& id) { return {id, "images/" + id + ".jpg", aesth::json::object()}; }

inline aesth::client::EndpointConfig mock_config(const std::string& name = "candidate", int parallel_limit = 4) {
  aesth::client::EndpointConfig c;
  c.name = name;
  c.kind = "mock";
  c.model = "mock-" + name;
  c.parallel_limit = parallel_limit;
  c.timeout_s = 5;
  return c;
}

inline aesth::PerceptionItem mc_item(const std::string& id, std::vector<std::string> options, int answer,
                                     aesth::AttributeDimension attr = aesth::AttributeDimension::color,
                                     aesth::QuestionType qt = aesth::QuestionType::what,
                                     aesth::Split split = aesth::Split::in_domain) {
  aesth::PerceptionItem it;
  it.id = id;
  it.image = image("img_" + id);
  it.question = "How would you describe the color saturation of this picture?";
  it.options = std::move(options);
  it.answer_index = answer;
  it.attribute = attr;
  it.question_type = qt;
  it.split = split;
  return it;
}

inline aesth::SourceAnnotation binary(const std::string& dataset, const std::string& img, const std::string& name,
                                      bool value) {
  return {dataset, image(img), aesth::BinaryPayload{name, value}, std::nullopt, aesth::json::object()};
}

inline aesth::SourceAnnotation style(const std::string& dataset, const std::string& img, const std::string& s) {
  return {dataset, image(img), aesth::StylePayload{s}, std::nullopt, aesth::json::object()};
}

inline aesth::SourceAnnotation level(const std::string& dataset, const std::string& img, const std::string& name,
                                     const std::string& lvl) {
  return {dataset, image(img), aesth::LevelPayload{name, lvl}, std::nullopt, aesth::json::object()};
}

inline aesth::SourceAnnotation comment(const std::string& dataset, const std::string& img, const std::string& text) {
  return {dataset, image(img), aesth::CommentPayload{text}, std::nullopt, aesth::json::object()};
}

inline aesth::SourceAnnotation dim_comment(const std::string& dataset, const std::string& img,
                                           const std::string& dimension, const std::string& text) {
  return {dataset, image(img), aesth::DimensionCommentPayload{dimension, text}, std::nullopt, aesth::json::object()};
}

template <class F>
double seconds(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace testing
