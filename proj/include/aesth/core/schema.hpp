#pragma once

// JSON encoding and validation for every record type exchanged as JSONL.
// Field names here are the file contract; keep them stable.

#include <cmath>
#include <initializer_list>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "aesth/core/text.hpp"
#include "aesth/core/types.hpp"

namespace aesth::schema {

/// Validation failure for one record; the JSONL reader attaches the line number.
class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const json& require(const json& obj, std::string_view key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw FieldError("missing field " + std::string(key));
  return *it;
}

inline bool has(const json& obj, std::string_view key) {
  auto it = obj.find(key);
  return it != obj.end() && !it->is_null();
}

inline std::string get_string(const json& obj, std::string_view key) {
  const json& v = require(obj, key);
  if (!v.is_string()) throw FieldError("field " + std::string(key) + ": expected string");
  return v.get<std::string>();
}

inline std::string get_nonempty_string(const json& obj, std::string_view key) {
  std::string s = get_string(obj, key);
  if (text::is_blank(s)) throw FieldError("field " + std::string(key) + ": must be nonempty");
  return s;
}

inline bool get_bool(const json& obj, std::string_view key) {
  const json& v = require(obj, key);
  if (!v.is_boolean()) throw FieldError("field " + std::string(key) + ": expected boolean");
  return v.get<bool>();
}

inline double get_number(const json& obj, std::string_view key) {
  const json& v = require(obj, key);
  if (!v.is_number()) throw FieldError("field " + std::string(key) + ": expected number");
  double d = v.get<double>();
  if (!std::isfinite(d)) throw FieldError("field " + std::string(key) + ": must be finite");
  return d;
}

inline long long get_integer(const json& obj, std::string_view key) {
  const json& v = require(obj, key);
  if (!v.is_number_integer()) throw FieldError("field " + std::string(key) + ": expected integer");
  return v.get<long long>();
}

template <class E>
E get_enum(const json& obj, std::string_view key) {
  std::string s = get_string(obj, key);
  auto e = parse_enum<E>(s);
  if (!e) throw FieldError("field " + std::string(key) + ": unknown value \"" + s + "\"");
  return *e;
}

inline const json& require_object(const json& obj, std::string_view key) {
  const json& v = require(obj, key);
  if (!v.is_object()) throw FieldError("field " + std::string(key) + ": expected object");
  return v;
}

/// Keys of `obj` that are not in `known`.
inline json collect_extra(const json& obj, std::initializer_list<std::string_view> known) {
  json extra = json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool is_known = false;
    for (auto k : known) {
      if (it.key() == k) {
        is_known = true;
        break;
      }
    }
    if (!is_known) extra[it.key()] = it.value();
  }
  return extra;
}

inline void merge_extra(json& out, const json& extra) {
  if (!extra.is_object()) return;
  for (auto it = extra.begin(); it != extra.end(); ++it) {
    if (!out.contains(it.key())) out[it.key()] = it.value();
  }
}

// ---------------------------------------------------------------------------

template <class T>
struct RecordSchema;

template <>
struct RecordSchema<ImageRef> {
  static ImageRef parse(const json& j) {
    if (!j.is_object()) throw FieldError("image: expected object");
    ImageRef r;
    r.id = get_nonempty_string(j, "id");
    r.path = get_string(j, "path");
    r.extra = collect_extra(j, {"id", "path"});
    return r;
  }
  static json dump(const ImageRef& r) {
    json j = {{"id", r.id}, {"path", r.path}};
    merge_extra(j, r.extra);
    return j;
  }
};

inline ImageRef parse_image(const json& obj) {
  const json& v = require_object(obj, "image");
  try {
    return RecordSchema<ImageRef>::parse(v);
  } catch (const FieldError& e) {
    throw FieldError(std::string("image.") + e.what());
  }
}

/// Structural validation only. Blank comment text and blank labels are
/// accepted here so the filtration stage can see and report them.
template <>
struct RecordSchema<SourceAnnotation> {
  static SourceAnnotation parse(const json& j) {
    if (!j.is_object()) throw FieldError("expected JSON object");
    SourceAnnotation r;
    r.dataset_id = get_nonempty_string(j, "dataset_id");
    r.image = parse_image(j);
    auto kind = get_enum<AnnotationKind>(j, "kind");
    const json& p = require_object(j, "payload");
    try {
      r.payload = parse_payload(kind, p);
    } catch (const FieldError& e) {
      throw FieldError(std::string("payload.") + e.what());
    }
    if (has(j, "quality_score")) r.quality_score = get_number(j, "quality_score");
    r.extra = collect_extra(j, {"dataset_id", "image", "kind", "payload", "quality_score"});
    return r;
  }

  static AnnotationPayload parse_payload(AnnotationKind kind, const json& p) {
    switch (kind) {
      case AnnotationKind::overall_comment:
        return CommentPayload{get_string(p, "text")};
      case AnnotationKind::photo_style:
        return StylePayload{get_string(p, "style")};
      case AnnotationKind::binary_attribute:
        return BinaryPayload{get_string(p, "name"), get_bool(p, "value")};
      case AnnotationKind::attribute_level:
        return LevelPayload{get_string(p, "name"), get_string(p, "level")};
      case AnnotationKind::single_attribute_comment:
        return DimensionCommentPayload{get_string(p, "dimension"), get_string(p, "text")};
      case AnnotationKind::color_scheme: {
        ColorSchemePayload c{get_string(p, "scheme"), std::nullopt};
        if (has(p, "colors")) {
          const json& cs = p.at("colors");
          if (!cs.is_array() || cs.size() != 2 || !cs[0].is_string() || !cs[1].is_string())
            throw FieldError("field colors: expected array of two strings");
          c.colors = std::make_pair(cs[0].get<std::string>(), cs[1].get<std::string>());
        }
        return c;
      }
    }
    throw FieldError("unknown kind");
  }

  static json dump_payload(const AnnotationPayload& payload) {
    return std::visit(
        [](const auto& p) -> json {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, CommentPayload>) {
            return {{"text", p.text}};
          } else if constexpr (std::is_same_v<P, StylePayload>) {
            return {{"style", p.style}};
          } else if constexpr (std::is_same_v<P, BinaryPayload>) {
            return {{"name", p.name}, {"value", p.value}};
          } else if constexpr (std::is_same_v<P, LevelPayload>) {
            return {{"name", p.name}, {"level", p.level}};
          } else if constexpr (std::is_same_v<P, DimensionCommentPayload>) {
            return {{"dimension", p.dimension}, {"text", p.text}};
          } else {
            json j = {{"scheme", p.scheme}};
            if (p.colors) j["colors"] = json::array({p.colors->first, p.colors->second});
            return j;
          }
        },
        payload);
  }

  static json dump(const SourceAnnotation& r) {
    json j = {{"dataset_id", r.dataset_id},
              {"image", RecordSchema<ImageRef>::dump(r.image)},
              {"kind", to_string(r.kind())},
              {"payload", dump_payload(r.payload)}};
    if (r.quality_score) j["quality_score"] = *r.quality_score;
    merge_extra(j, r.extra);
    return j;
  }
};

template <>
struct RecordSchema<InstructionSample> {
  static InstructionSample parse(const json& j) {
    if (!j.is_object()) throw FieldError("expected JSON object");
    InstructionSample r;
    r.id = get_nonempty_string(j, "id");
    r.image = parse_image(j);
    r.question = get_nonempty_string(j, "question");
    r.answer = get_nonempty_string(j, "answer");
    const json& p = require_object(j, "provenance");
    try {
      r.provenance.source_dataset = get_nonempty_string(p, "source_dataset");
      r.provenance.pipeline = get_enum<Pipeline>(p, "pipeline");
      if (has(p, "attribute")) r.provenance.attribute = get_string(p, "attribute");
      if (has(p, "question_type"))
        r.provenance.question_type = get_enum<QuestionType>(p, "question_type");
    } catch (const FieldError& e) {
      throw FieldError(std::string("provenance.") + e.what());
    }
    r.extra = collect_extra(j, {"id", "image", "question", "answer", "provenance"});
    return r;
  }
  static json dump(const InstructionSample& r) {
    json p = {{"source_dataset", r.provenance.source_dataset},
              {"pipeline", to_string(r.provenance.pipeline)}};
    if (r.provenance.attribute) p["attribute"] = *r.provenance.attribute;
    if (r.provenance.question_type) p["question_type"] = to_string(*r.provenance.question_type);
    json j = {{"id", r.id},
              {"image", RecordSchema<ImageRef>::dump(r.image)},
              {"question", r.question},
              {"answer", r.answer},
              {"provenance", std::move(p)}};
    merge_extra(j, r.extra);
    return j;
  }
};

template <>
struct RecordSchema<PerceptionItem> {
  static PerceptionItem parse(const json& j) {
    if (!j.is_object()) throw FieldError("expected JSON object");
    PerceptionItem r;
    r.id = get_nonempty_string(j, "id");
    r.image = parse_image(j);
    r.question = get_nonempty_string(j, "question");
    const json& opts = require(j, "options");
    if (!opts.is_array()) throw FieldError("field options: expected array");
    for (const auto& o : opts) {
      if (!o.is_string()) throw FieldError("field options: expected array of strings");
      r.options.push_back(o.get<std::string>());
    }
    if (r.options.size() < 2 || r.options.size() > 4)
      throw FieldError("field options: expected 2 to 4 options, got " +
                       std::to_string(r.options.size()));
    std::set<std::string> distinct(r.options.begin(), r.options.end());
    if (distinct.size() != r.options.size())
      throw FieldError("field options: options must be pairwise distinct");
    long long idx = get_integer(j, "answer_index");
    if (idx < 0 || idx >= static_cast<long long>(r.options.size()))
      throw FieldError("field answer_index: out of range");
    r.answer_index = static_cast<int>(idx);
    r.attribute = get_enum<AttributeDimension>(j, "attribute");
    r.question_type = get_enum<QuestionType>(j, "question_type");
    r.split = get_enum<Split>(j, "split");
    r.extra = collect_extra(j, {"id", "image", "question", "options", "answer_index",
                                "attribute", "question_type", "split"});
    return r;
  }
  static json dump(const PerceptionItem& r) {
    json j = {{"id", r.id},
              {"image", RecordSchema<ImageRef>::dump(r.image)},
              {"question", r.question},
              {"options", r.options},
              {"answer_index", r.answer_index},
              {"attribute", to_string(r.attribute)},
              {"question_type", to_string(r.question_type)},
              {"split", to_string(r.split)}};
    merge_extra(j, r.extra);
    return j;
  }
};

template <>
struct RecordSchema<AssessmentItem> {
  static AssessmentItem parse(const json& j) {
    if (!j.is_object()) throw FieldError("expected JSON object");
    AssessmentItem r;
    r.id = get_nonempty_string(j, "id");
    r.image = parse_image(j);
    r.mos = get_number(j, "mos");
    r.scale_max = get_number(j, "scale_max");
    if (r.scale_max <= 0) throw FieldError("field scale_max: must be positive");
    if (!(r.mos > 0 && r.mos <= r.scale_max))
      throw FieldError("field mos: must satisfy 0 < mos <= scale_max");
    r.extra = collect_extra(j, {"id", "image", "mos", "scale_max"});
    return r;
  }
  static json dump(const AssessmentItem& r) {
    json j = {{"id", r.id},
              {"image", RecordSchema<ImageRef>::dump(r.image)},
              {"mos", r.mos},
              {"scale_max", r.scale_max}};
    merge_extra(j, r.extra);
    return j;
  }
};

template <>
struct RecordSchema<DescribeItem> {
  static DescribeItem parse(const json& j) {
    if (!j.is_object()) throw FieldError("expected JSON object");
    DescribeItem r;
    r.id = get_nonempty_string(j, "id");
    r.image = parse_image(j);
    r.golden = get_nonempty_string(j, "golden");
    r.quality_band = get_enum<QualityBand>(j, "quality_band");
    r.extra = collect_extra(j, {"id", "image", "golden", "quality_band"});
    return r;
  }
  static json dump(const DescribeItem& r) {
    json j = {{"id", r.id},
              {"image", RecordSchema<ImageRef>::dump(r.image)},
              {"golden", r.golden},
              {"quality_band", to_string(r.quality_band)}};
    merge_extra(j, r.extra);
    return j;
  }
};

template <class T>
json to_json(const T& r) {
  return RecordSchema<T>::dump(r);
}

template <class T>
T from_json(const json& j) {
  return RecordSchema<T>::parse(j);
}

}  // namespace aesth::schema
