#pragma once

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "aesth/core/error.hpp"
#include "aesth/core/schema.hpp"

namespace aesth {

enum class ReadMode { fail_fast, permissive };

template <class T>
struct JsonlResult {
  std::vector<T> records;
  /// Only populated in permissive mode.
  std::vector<SchemaError> errors;
};

/// Serialized form of one record: compact JSON, keys sorted, no raw newlines.
template <class T>
std::string to_jsonl_line(const T& record) {
  return schema::to_json(record).dump(-1, ' ', false, json::error_handler_t::strict);
}

template <class T>
JsonlResult<T> read_jsonl(std::istream& in, ReadMode mode = ReadMode::fail_fast) {
  JsonlResult<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::is_blank(line)) continue;
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw schema::FieldError(std::string("invalid JSON: ") + e.what());
      }
      out.records.push_back(schema::from_json<T>(j));
    } catch (const schema::FieldError& e) {
      SchemaError err(line_no, e.what());
      if (mode == ReadMode::fail_fast) throw err;
      out.errors.push_back(std::move(err));
    }
  }
  return out;
}

template <class T>
JsonlResult<T> read_jsonl(const std::filesystem::path& path, ReadMode mode = ReadMode::fail_fast) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string() + " for reading: " + std::strerror(errno));
  }
  return read_jsonl<T>(in, mode);
}

template <class T>
void write_jsonl(const std::vector<T>& records, std::ostream& out) {
  for (const auto& r : records) out << to_jsonl_line(r) << '\n';
}

template <class T>
void write_jsonl(const std::vector<T>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing: " + std::strerror(errno));
  }
  write_jsonl(records, out);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string() + ": " + std::strerror(errno));
}

/// Writes a whole text file, used for reports and audits.
inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing: " + std::strerror(errno));
  }
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string() + ": " + std::strerror(errno));
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string() + " for reading: " + std::strerror(errno));
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json_file(const std::filesystem::path& path) {
  std::string content = read_text_file(path);
  try {
    return json::parse(content);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

}  // namespace aesth
