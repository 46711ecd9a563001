#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "aesth/core/error.hpp"

namespace aesth::ingest {

struct CsvRow {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF.
inline std::vector<CsvRow> parse_csv(std::string_view data, char delimiter) {
  std::vector<CsvRow> rows;
  if (data.substr(0, 3) == "\xEF\xBB\xBF") data.remove_prefix(3);

  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = data.size();
  while (i < n) {
    CsvRow row;
    row.line = line;
    std::string field;
    bool row_done = false;
    while (!row_done) {
      field.clear();
      if (i < n && data[i] == '"') {
        const std::size_t open_line = line;
        ++i;
        for (;;) {
          if (i >= n) throw InputError("line " + std::to_string(open_line) + ": unterminated quoted field");
          char c = data[i++];
          if (c == '"') {
            if (i < n && data[i] == '"') {
              field.push_back('"');
              ++i;
            } else {
              break;
            }
          } else {
            if (c == '\n') ++line;
            field.push_back(c);
          }
        }
        // Anything between the closing quote and the delimiter is kept verbatim.
        while (i < n && data[i] != delimiter && data[i] != '\n' && data[i] != '\r') field.push_back(data[i++]);
      } else {
        while (i < n && data[i] != delimiter && data[i] != '\n' && data[i] != '\r') field.push_back(data[i++]);
      }
      row.fields.push_back(field);
      if (i < n && data[i] == delimiter) {
        ++i;
        continue;
      }
      if (i < n && data[i] == '\r') ++i;
      if (i < n && data[i] == '\n') ++i;
      ++line;
      row_done = true;
    }
    bool blank = row.fields.size() == 1 && row.fields[0].empty();
    if (!blank) rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace aesth::ingest
