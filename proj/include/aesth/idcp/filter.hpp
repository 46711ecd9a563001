#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aesth/core/error.hpp"
#include "aesth/core/text.hpp"
#include "aesth/core/types.hpp"
#include "aesth/ingest/audit.hpp"

namespace aesth::idcp {

enum class FilterRule { empty, incomplete, excluded_attribute, length_bounds };

inline std::string_view to_string(FilterRule r) {
  switch (r) {
    case FilterRule::empty: return "empty";
    case FilterRule::incomplete: return "incomplete";
    case FilterRule::excluded_attribute: return "excluded-attribute";
    case FilterRule::length_bounds: return "length-bounds";
  }
  return "?";
}

inline FilterRule parse_filter_rule(std::string_view id) {
  for (auto r : {FilterRule::empty, FilterRule::incomplete, FilterRule::excluded_attribute,
                 FilterRule::length_bounds})
    if (to_string(r) == id) return r;
  throw ConfigError("unknown filter rule id \"" + std::string(id) + "\"");
}

/// Attribute to drop; an empty dataset matches every source.
struct ExcludedAttribute {
  std::string dataset_id;
  std::string attribute;
};

struct FilterRules {
  std::vector<FilterRule> active{FilterRule::empty, FilterRule::incomplete};
  std::vector<ExcludedAttribute> excluded;
  /// Bounds on comment text length in code points.
  std::optional<std::size_t> min_chars;
  std::optional<std::size_t> max_chars;

  bool has(FilterRule r) const {
    for (auto a : active)
      if (a == r) return true;
    return false;
  }
};

/// {"rules": [...], "excluded_attributes": [{"dataset": "AADB", "attribute": "ColorHarmony"}],
///  "min_chars": 1, "max_chars": 2000}
inline FilterRules parse_filter_rules(const json& j) {
  FilterRules out;
  if (j.is_null()) return out;
  if (!j.is_object()) throw ConfigError("filters: expected object");
  if (j.contains("rules")) {
    out.active.clear();
    for (const auto& id : j["rules"]) {
      if (!id.is_string()) throw ConfigError("filters.rules: expected strings");
      out.active.push_back(parse_filter_rule(id.get<std::string>()));
    }
  }
  if (j.contains("excluded_attributes")) {
    for (const auto& e : j["excluded_attributes"]) {
      if (e.is_string()) {
        out.excluded.push_back({"", e.get<std::string>()});
      } else if (e.is_object() && e.contains("attribute")) {
        out.excluded.push_back({e.value("dataset", std::string()), e["attribute"].get<std::string>()});
      } else {
        throw ConfigError("filters.excluded_attributes: expected string or {dataset, attribute}");
      }
    }
  }
  if (j.contains("min_chars")) out.min_chars = j["min_chars"].get<std::size_t>();
  if (j.contains("max_chars")) out.max_chars = j["max_chars"].get<std::size_t>();
  for (const auto& k : j.items()) {
    if (k.key() != "rules" && k.key() != "excluded_attributes" && k.key() != "min_chars" &&
        k.key() != "max_chars")
      throw ConfigError("filters: unknown key \"" + k.key() + "\"");
  }
  return out;
}

inline std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

inline std::optional<std::string_view> comment_text(const SourceAnnotation& r) {
  if (const auto* c = std::get_if<CommentPayload>(&r.payload)) return std::string_view(c->text);
  if (const auto* d = std::get_if<DimensionCommentPayload>(&r.payload)) return std::string_view(d->text);
  return std::nullopt;
}

struct DroppedRecord {
  SourceAnnotation record;
  FilterRule reason = FilterRule::empty;
};

struct FilterResult {
  std::vector<SourceAnnotation> kept;
  std::vector<DroppedRecord> dropped;
};

/// First failing rule (in rule-id order) decides the drop reason.
inline std::optional<FilterRule> failing_rule(const SourceAnnotation& r, const FilterRules& rules) {
  auto issue = ingest::payload_issue(r);
  if (rules.has(FilterRule::empty) && issue == ingest::PayloadIssue::empty) return FilterRule::empty;
  if (rules.has(FilterRule::incomplete) && issue == ingest::PayloadIssue::incomplete)
    return FilterRule::incomplete;
  if (rules.has(FilterRule::excluded_attribute)) {
    const std::string attr = r.attribute();
    for (const auto& e : rules.excluded) {
      if (!e.dataset_id.empty() && e.dataset_id != r.dataset_id) continue;
      if (text::iequals(e.attribute, attr)) return FilterRule::excluded_attribute;
    }
  }
  if (rules.has(FilterRule::length_bounds)) {
    if (auto t = comment_text(r)) {
      auto len = utf8_length(text::trim(*t));
      if ((rules.min_chars && len < *rules.min_chars) || (rules.max_chars && len > *rules.max_chars))
        return FilterRule::length_bounds;
    }
  }
  return std::nullopt;
}

inline FilterResult filter_quality(const std::vector<SourceAnnotation>& records, const FilterRules& rules) {
  FilterResult out;
  for (const auto& r : records) {
    if (auto reason = failing_rule(r, rules)) {
      out.dropped.push_back({r, *reason});
    } else {
      out.kept.push_back(r);
    }
  }
  return out;
}

}  // namespace aesth::idcp
