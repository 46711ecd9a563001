#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "aesth/core/text.hpp"
#include "aesth/core/types.hpp"

namespace aesth::ingest {

/// Identity of an annotation for duplicate detection. Comment kinds carry
/// their text so distinct comments on one image are not duplicates.
struct AnnotationKey {
  std::string dataset_id;
  std::string image_id;
  AnnotationKind kind = AnnotationKind::overall_comment;
  std::string attribute;
  std::string text;

  auto operator<=>(const AnnotationKey&) const = default;
};

inline AnnotationKey key_of(const SourceAnnotation& r) {
  AnnotationKey k{r.dataset_id, r.image.id, r.kind(), r.attribute(), {}};
  if (const auto* c = std::get_if<CommentPayload>(&r.payload)) k.text = c->text;
  if (const auto* d = std::get_if<DimensionCommentPayload>(&r.payload)) k.text = d->text;
  return k;
}

enum class PayloadIssue { empty, incomplete };

inline std::string_view to_string(PayloadIssue i) {
  return i == PayloadIssue::empty ? "empty" : "incomplete";
}

/// `empty` = blank comment text; `incomplete` = a blank label or name, or a
/// half-filled color pair.
inline std::optional<PayloadIssue> payload_issue(const SourceAnnotation& r) {
  return std::visit(
      [](const auto& p) -> std::optional<PayloadIssue> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, CommentPayload>) {
          if (text::is_blank(p.text)) return PayloadIssue::empty;
        } else if constexpr (std::is_same_v<P, StylePayload>) {
          if (text::is_blank(p.style)) return PayloadIssue::incomplete;
        } else if constexpr (std::is_same_v<P, BinaryPayload>) {
          if (text::is_blank(p.name)) return PayloadIssue::incomplete;
        } else if constexpr (std::is_same_v<P, LevelPayload>) {
          if (text::is_blank(p.name) || text::is_blank(p.level)) return PayloadIssue::incomplete;
        } else if constexpr (std::is_same_v<P, DimensionCommentPayload>) {
          if (text::is_blank(p.dimension)) return PayloadIssue::incomplete;
          if (text::is_blank(p.text)) return PayloadIssue::empty;
        } else if constexpr (std::is_same_v<P, ColorSchemePayload>) {
          if (text::is_blank(p.scheme)) return PayloadIssue::incomplete;
          if (p.colors && (text::is_blank(p.colors->first) || text::is_blank(p.colors->second)))
            return PayloadIssue::incomplete;
        }
        return std::nullopt;
      },
      r.payload);
}

struct IncompleteFinding {
  AnnotationKey key;
  PayloadIssue issue = PayloadIssue::empty;

  auto operator<=>(const IncompleteFinding&) const = default;
};

struct DuplicateFinding {
  AnnotationKey key;
  std::size_t count = 0;

  auto operator<=>(const DuplicateFinding&) const = default;
};

struct IngestAudit {
  std::size_t total = 0;
  std::vector<IncompleteFinding> incomplete;
  std::vector<DuplicateFinding> duplicates;
  std::map<std::string, std::size_t> per_kind;
  /// "kind:attribute", or just "kind" for overall comments.
  std::map<std::string, std::size_t> per_attribute;

  std::size_t findings() const { return incomplete.size() + duplicates.size(); }

  bool operator==(const IngestAudit&) const = default;
};

inline std::string attribute_bucket(const SourceAnnotation& r) {
  std::string bucket(to_string(r.kind()));
  auto attr = r.attribute();
  if (!attr.empty()) bucket += ":" + attr;
  return bucket;
}

/// Total audit of an ingested corpus. Output is sorted, so any permutation of
/// the input yields the same audit.
inline IngestAudit validate_corpus(const std::vector<SourceAnnotation>& records) {
  IngestAudit audit;
  audit.total = records.size();
  std::map<AnnotationKey, std::size_t> key_counts;
  for (const auto& r : records) {
    if (auto issue = payload_issue(r)) audit.incomplete.push_back({key_of(r), *issue});
    ++key_counts[key_of(r)];
    ++audit.per_kind[std::string(to_string(r.kind()))];
    ++audit.per_attribute[attribute_bucket(r)];
  }
  for (const auto& [key, n] : key_counts)
    if (n > 1) audit.duplicates.push_back({key, n});
  std::sort(audit.incomplete.begin(), audit.incomplete.end());
  return audit;
}

/// Drops repeated keys; the first occurrence wins and input order is kept.
inline std::vector<SourceAnnotation> deduplicate(const std::vector<SourceAnnotation>& records) {
  std::set<AnnotationKey> seen;
  std::vector<SourceAnnotation> out;
  out.reserve(records.size());
  for (const auto& r : records)
    if (seen.insert(key_of(r)).second) out.push_back(r);
  return out;
}

inline json key_to_json(const AnnotationKey& k) {
  json j = {{"dataset_id", k.dataset_id},
            {"image_id", k.image_id},
            {"kind", to_string(k.kind)},
            {"attribute", k.attribute}};
  if (!k.text.empty()) j["text"] = k.text;
  return j;
}

inline json to_json(const IngestAudit& a) {
  json inc = json::array();
  for (const auto& f : a.incomplete) {
    json j = key_to_json(f.key);
    j["issue"] = to_string(f.issue);
    inc.push_back(std::move(j));
  }
  json dup = json::array();
  for (const auto& f : a.duplicates) {
    json j = key_to_json(f.key);
    j["count"] = f.count;
    dup.push_back(std::move(j));
  }
  return {{"total", a.total},
          {"incomplete", std::move(inc)},
          {"duplicates", std::move(dup)},
          {"per_kind", a.per_kind},
          {"per_attribute", a.per_attribute}};
}

}  // namespace aesth::ingest
