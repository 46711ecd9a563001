#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aesth/core/error.hpp"
#include "aesth/core/jsonl.hpp"
#include "aesth/ingest/adapter_spec.hpp"
#include "aesth/ingest/csv.hpp"

namespace aesth::ingest {

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct LoadResult {
  std::vector<SourceAnnotation> records;
  std::map<AnnotationKind, std::size_t> counts;
  std::vector<RowError> errors;
};

enum class LoadMode { permissive, strict };

namespace detail {

/// One dump row as column -> cell text. Absent keys are distinguishable from
/// empty cells.
using Row = std::map<std::string, std::string>;

class RowFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::string& cell(const Row& row, const std::string& column) {
  auto it = row.find(column);
  if (it == row.end()) throw RowFailure("missing column " + column);
  return it->second;
}

inline std::string resolve(const Row& row, const KindMapping& m, const std::string& field) {
  const FieldSource& src = m.fields.at(field);
  std::string v = src.literal ? src.value : cell(row, src.value);
  if (auto mit = m.value_map.find(field); mit != m.value_map.end()) {
    if (auto vit = mit->second.find(v); vit != mit->second.end()) v = vit->second;
  }
  return v;
}

inline bool parse_bool(const SourceAdapterSpec& spec, const std::string& raw) {
  std::string v = text::to_lower(text::trim(raw));
  if (spec.true_values.count(v)) return true;
  if (spec.false_values.count(v)) return false;
  throw RowFailure("cannot interpret \"" + raw + "\" as a boolean");
}

inline AnnotationPayload build_payload(const SourceAdapterSpec& spec, const KindMapping& m,
                                       const Row& row) {
  switch (m.kind) {
    case AnnotationKind::overall_comment:
      return CommentPayload{resolve(row, m, "text")};
    case AnnotationKind::photo_style:
      return StylePayload{resolve(row, m, "style")};
    case AnnotationKind::binary_attribute:
      return BinaryPayload{resolve(row, m, "name"), parse_bool(spec, resolve(row, m, "value"))};
    case AnnotationKind::attribute_level:
      return LevelPayload{resolve(row, m, "name"), resolve(row, m, "level")};
    case AnnotationKind::single_attribute_comment:
      return DimensionCommentPayload{resolve(row, m, "dimension"), resolve(row, m, "text")};
    case AnnotationKind::color_scheme: {
      ColorSchemePayload c{resolve(row, m, "scheme"), std::nullopt};
      if (m.fields.count("color_a")) {
        auto a = resolve(row, m, "color_a");
        auto b = resolve(row, m, "color_b");
        if (!text::is_blank(a) || !text::is_blank(b)) c.colors = std::make_pair(a, b);
      }
      return c;
    }
  }
  throw RowFailure("unknown kind");
}

inline std::vector<std::pair<std::size_t, Row>> read_rows(const SourceAdapterSpec& spec,
                                                         const std::string& content) {
  std::vector<std::pair<std::size_t, Row>> rows;
  if (spec.format == DumpFormat::jsonl) {
    std::size_t line_no = 0;
    for (const auto& line : text::split(content, '\n')) {
      ++line_no;
      if (text::is_blank(line)) continue;
      Row row;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error&) {
        // Marked with an empty sentinel and reported by the caller.
        rows.emplace_back(line_no, Row{{"\x01invalid", "invalid JSON"}});
        continue;
      }
      if (!j.is_object()) {
        rows.emplace_back(line_no, Row{{"\x01invalid", "expected JSON object"}});
        continue;
      }
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (it->is_string()) row[it.key()] = it->get<std::string>();
        else if (it->is_null()) continue;
        else row[it.key()] = it->dump();
      }
      rows.emplace_back(line_no, std::move(row));
    }
    return rows;
  }

  auto csv = parse_csv(content, spec.format == DumpFormat::tsv ? '\t' : ',');
  if (csv.empty()) return rows;
  const auto& header = csv.front().fields;
  for (std::size_t r = 1; r < csv.size(); ++r) {
    const auto& fields = csv[r].fields;
    if (fields.size() != header.size()) {
      rows.emplace_back(csv[r].line,
                        Row{{"\x01invalid", "expected " + std::to_string(header.size()) +
                                                " columns, got " + std::to_string(fields.size())}});
      continue;
    }
    Row row;
    for (std::size_t c = 0; c < header.size(); ++c) row[header[c]] = fields[c];
    rows.emplace_back(csv[r].line, std::move(row));
  }
  return rows;
}

inline void check_header(const SourceAdapterSpec& spec, const std::string& content,
                         const std::string& origin) {
  if (spec.format == DumpFormat::jsonl) return;
  auto csv = parse_csv(content, spec.format == DumpFormat::tsv ? '\t' : ',');
  if (csv.empty()) return;
  std::set<std::string> header(csv.front().fields.begin(), csv.front().fields.end());
  auto need = [&](const std::string& col) {
    if (!header.count(col))
      throw ConfigError(origin + ": mapped column \"" + col + "\" not in dump header");
  };
  need(spec.image_id_column);
  need(spec.image_path_column);
  if (spec.quality_score_column) need(*spec.quality_score_column);
  for (const auto& m : spec.mappings) {
    for (const auto& [field, src] : m.fields)
      if (!src.literal) need(src.value);
    for (const auto& [col, v] : m.when) need(col);
  }
}

}  // namespace detail

/// Parses a native dump already held in memory. `origin` prefixes messages.
inline LoadResult load_source_text(const SourceAdapterSpec& spec, const std::string& content,
                                   LoadMode mode = LoadMode::permissive,
                                   const std::string& origin = "dump") {
  detail::check_header(spec, content, origin);
  LoadResult out;
  for (const auto& [line, row] : detail::read_rows(spec, content)) {
    try {
      if (auto bad = row.find("\x01invalid"); bad != row.end()) throw detail::RowFailure(bad->second);
      std::string image_id(text::trim(detail::cell(row, spec.image_id_column)));
      if (image_id.empty()) throw detail::RowFailure("empty image id");
      ImageRef image{image_id, spec.path_prefix + detail::cell(row, spec.image_path_column),
                     json::object()};
      std::optional<double> quality;
      if (spec.quality_score_column) {
        const std::string& raw = detail::cell(row, *spec.quality_score_column);
        if (!text::is_blank(raw)) {
          char* end = nullptr;
          std::string t(text::trim(raw));
          double v = std::strtod(t.c_str(), &end);
          if (end != t.c_str() + t.size() || !std::isfinite(v))
            throw detail::RowFailure("quality score \"" + raw + "\" is not a number");
          quality = v;
        }
      }
      // Build every record of the row first so a bad cell drops the whole row.
      std::vector<SourceAnnotation> emitted;
      for (const auto& m : spec.mappings) {
        bool selected = true;
        for (const auto& [col, want] : m.when) {
          if (detail::cell(row, col) != want) {
            selected = false;
            break;
          }
        }
        if (!selected) continue;
        emitted.push_back(SourceAnnotation{spec.dataset_id, image,
                                           detail::build_payload(spec, m, row), quality,
                                           json::object()});
      }
      for (auto& rec : emitted) {
        ++out.counts[rec.kind()];
        out.records.push_back(std::move(rec));
      }
    } catch (const detail::RowFailure& e) {
      if (mode == LoadMode::strict)
        throw InputError(origin + ":" + std::to_string(line) + ": " + e.what());
      out.errors.push_back({line, e.what()});
    }
  }
  return out;
}

inline LoadResult load_source(const SourceAdapterSpec& spec, const std::filesystem::path& path,
                              LoadMode mode = LoadMode::permissive) {
  return load_source_text(spec, read_text_file(path), mode, path.string());
}

}  // namespace aesth::ingest
