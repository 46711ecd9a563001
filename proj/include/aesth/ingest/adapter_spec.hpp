#pragma once

// Source adapter mapping files.
//
// A mapping file is line-oriented `key = value` text. `#` starts a comment.
// Global keys come first; each `[kind]` or `[kind label]` section then maps
// one annotation kind. Example:
//
//   dataset_id = AADB
//   format = csv                 # csv | tsv | jsonl
//   image_id = ImageFile         # column holding the image id
//   image_path = ImageFile       # optional, defaults to the image_id column
//   path_prefix = images/aadb/   # optional
//   quality_score = score        # optional column, numeric
//   true_values = 1, true, yes   # optional, case-insensitive
//   false_values = 0, false, no
//
//   [binary_attribute balance]
//   name = "balancing"           # quoted value = literal
//   value = BalancingElement     # bare value = column name
//   when.split = train           # emit only rows whose `split` column is `train`
//   map.value.-1 = 0             # rewrite raw cell values before parsing
//
// Payload fields per kind:
//   overall_comment           text
//   photo_style               style
//   binary_attribute          name, value
//   attribute_level           name, level
//   single_attribute_comment  dimension, text
//   color_scheme              scheme, [color_a, color_b]

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aesth/core/error.hpp"
#include "aesth/core/jsonl.hpp"
#include "aesth/core/text.hpp"
#include "aesth/core/types.hpp"

namespace aesth::ingest {

enum class DumpFormat { csv, tsv, jsonl };

/// A column reference or a literal constant.
struct FieldSource {
  std::string value;
  bool literal = false;

  bool operator==(const FieldSource&) const = default;
};

struct KindMapping {
  AnnotationKind kind = AnnotationKind::overall_comment;
  std::string label;
  std::map<std::string, FieldSource> fields;
  std::map<std::string, std::string> when;
  /// field -> (raw value -> replacement)
  std::map<std::string, std::map<std::string, std::string>> value_map;
};

struct SourceAdapterSpec {
  std::string dataset_id;
  DumpFormat format = DumpFormat::csv;
  std::string image_id_column;
  std::string image_path_column;
  std::string path_prefix;
  std::optional<std::string> quality_score_column;
  std::set<std::string> true_values{"1", "true", "yes", "y"};
  std::set<std::string> false_values{"0", "false", "no", "n"};
  std::vector<KindMapping> mappings;

  std::set<AnnotationKind> expected_kinds() const {
    std::set<AnnotationKind> out;
    for (const auto& m : mappings) out.insert(m.kind);
    return out;
  }
};

struct PayloadFieldSpec {
  std::vector<std::string> required;
  std::vector<std::string> optional;
};

inline PayloadFieldSpec payload_fields(AnnotationKind kind) {
  switch (kind) {
    case AnnotationKind::overall_comment: return {{"text"}, {}};
    case AnnotationKind::photo_style: return {{"style"}, {}};
    case AnnotationKind::binary_attribute: return {{"name", "value"}, {}};
    case AnnotationKind::attribute_level: return {{"name", "level"}, {}};
    case AnnotationKind::single_attribute_comment: return {{"dimension", "text"}, {}};
    case AnnotationKind::color_scheme: return {{"scheme"}, {"color_a", "color_b"}};
  }
  return {};
}

namespace detail {

inline FieldSource parse_field_source(std::string_view raw) {
  auto v = text::trim(raw);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    return {std::string(v.substr(1, v.size() - 2)), true};
  }
  return {std::string(v), false};
}

inline std::set<std::string> parse_value_set(std::string_view raw) {
  std::set<std::string> out;
  for (const auto& part : text::split(raw, ',')) {
    auto t = text::trim(part);
    if (!t.empty()) out.insert(text::to_lower(t));
  }
  return out;
}

}  // namespace detail

inline void validate(const SourceAdapterSpec& spec, const std::string& origin = "mapping") {
  auto fail = [&](const std::string& msg) { throw ConfigError(origin + ": " + msg); };
  if (spec.dataset_id.empty()) fail("missing dataset_id");
  if (spec.image_id_column.empty()) fail("missing image_id");
  if (spec.mappings.empty()) fail("no [kind] sections");
  std::set<std::pair<AnnotationKind, std::string>> seen;
  for (const auto& m : spec.mappings) {
    std::string section = "[" + std::string(to_string(m.kind)) +
                          (m.label.empty() ? "" : " " + m.label) + "]";
    if (!seen.insert({m.kind, m.label}).second) fail("duplicate section " + section);
    auto fields = payload_fields(m.kind);
    for (const auto& f : fields.required) {
      auto it = m.fields.find(f);
      if (it == m.fields.end() || it->second.value.empty())
        fail("section " + section + ": missing mapping for " + f);
    }
    for (const auto& [name, src] : m.fields) {
      bool known = std::find(fields.required.begin(), fields.required.end(), name) !=
                       fields.required.end() ||
                   std::find(fields.optional.begin(), fields.optional.end(), name) !=
                       fields.optional.end();
      if (!known) fail("section " + section + ": unknown payload field " + name);
    }
    if (m.kind == AnnotationKind::color_scheme &&
        (m.fields.count("color_a") != m.fields.count("color_b")))
      fail("section " + section + ": color_a and color_b must be mapped together");
  }
}

inline SourceAdapterSpec parse_adapter_spec(std::string_view content,
                                            const std::string& origin = "mapping") {
  SourceAdapterSpec spec;
  KindMapping* current = nullptr;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + msg);
  };

  for (const auto& raw_line : text::split(content, '\n')) {
    ++line_no;
    std::string_view line = raw_line;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      // Keep '#' inside a quoted literal.
      auto quote = line.find('"');
      if (quote == std::string_view::npos || hash < quote) line = line.substr(0, hash);
    }
    line = text::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      auto inner = text::trim(line.substr(1, line.size() - 2));
      auto space = inner.find(' ');
      std::string kind_name(inner.substr(0, space));
      auto kind = parse_enum<AnnotationKind>(kind_name);
      if (!kind) fail("unknown annotation kind \"" + kind_name + "\"");
      KindMapping m;
      m.kind = *kind;
      if (space != std::string_view::npos) m.label = std::string(text::trim(inner.substr(space)));
      spec.mappings.push_back(std::move(m));
      current = &spec.mappings.back();
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    std::string key(text::trim(line.substr(0, eq)));
    std::string_view value = text::trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");

    if (current == nullptr) {
      if (key == "dataset_id") {
        spec.dataset_id = std::string(value);
      } else if (key == "format") {
        if (value == "csv") spec.format = DumpFormat::csv;
        else if (value == "tsv") spec.format = DumpFormat::tsv;
        else if (value == "jsonl") spec.format = DumpFormat::jsonl;
        else fail("unknown format \"" + std::string(value) + "\"");
      } else if (key == "image_id") {
        spec.image_id_column = std::string(value);
      } else if (key == "image_path") {
        spec.image_path_column = std::string(value);
      } else if (key == "path_prefix") {
        spec.path_prefix = detail::parse_field_source(value).value;
      } else if (key == "quality_score") {
        spec.quality_score_column = std::string(value);
      } else if (key == "true_values") {
        spec.true_values = detail::parse_value_set(value);
      } else if (key == "false_values") {
        spec.false_values = detail::parse_value_set(value);
      } else {
        fail("unknown key \"" + key + "\"");
      }
      continue;
    }

    if (key.rfind("when.", 0) == 0) {
      current->when[key.substr(5)] = detail::parse_field_source(value).value;
    } else if (key.rfind("map.", 0) == 0) {
      auto rest = key.substr(4);
      auto dot = rest.find('.');
      if (dot == std::string::npos) fail("expected map.<field>.<raw> = <value>");
      current->value_map[rest.substr(0, dot)][rest.substr(dot + 1)] =
          detail::parse_field_source(value).value;
    } else {
      if (current->fields.count(key)) fail("duplicate field \"" + key + "\"");
      current->fields[key] = detail::parse_field_source(value);
    }
  }
  if (spec.image_path_column.empty()) spec.image_path_column = spec.image_id_column;
  validate(spec, origin);
  return spec;
}

inline SourceAdapterSpec load_adapter_spec(const std::filesystem::path& path) {
  return parse_adapter_spec(read_text_file(path), path.string());
}

}  // namespace aesth::ingest
