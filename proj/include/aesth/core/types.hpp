#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace aesth {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Enumerations. Each one has a name table used for JSON and CLI parsing.
// ---------------------------------------------------------------------------

enum class AttributeDimension { content_theme, composition, color, light, focus, sentiment };
enum class QuestionType { yes_no, what, how };
enum class Split { in_domain, wild };
enum class AnnotationKind {
  overall_comment,
  photo_style,
  binary_attribute,
  attribute_level,
  single_attribute_comment,
  color_scheme
};
enum class Pipeline { attributes, comments };
enum class QualityBand { low, medium, high };

/// Ordered rating words; the underlying value is the quantified score.
enum class RatingLevel { bad = 1, poor = 2, fair = 3, good = 4, excellent = 5 };

template <class E>
struct EnumNames;

template <>
struct EnumNames<AttributeDimension> {
  static constexpr std::array<std::string_view, 6> names{
      "content_theme", "composition", "color", "light", "focus", "sentiment"};
};
template <>
struct EnumNames<QuestionType> {
  static constexpr std::array<std::string_view, 3> names{"yes_no", "what", "how"};
};
template <>
struct EnumNames<Split> {
  static constexpr std::array<std::string_view, 2> names{"in_domain", "wild"};
};
template <>
struct EnumNames<AnnotationKind> {
  static constexpr std::array<std::string_view, 6> names{
      "overall_comment",  "photo_style",
      "binary_attribute", "attribute_level",
      "single_attribute_comment", "color_scheme"};
};
template <>
struct EnumNames<Pipeline> {
  static constexpr std::array<std::string_view, 2> names{"attributes", "comments"};
};
template <>
struct EnumNames<QualityBand> {
  static constexpr std::array<std::string_view, 3> names{"low", "medium", "high"};
};
template <>
struct EnumNames<RatingLevel> {
  static constexpr std::array<std::string_view, 5> names{"bad", "poor", "fair", "good",
                                                         "excellent"};
};

template <class E>
constexpr std::size_t enum_count() {
  return EnumNames<E>::names.size();
}

template <class E>
constexpr std::size_t enum_index(E e) {
  if constexpr (std::is_same_v<E, RatingLevel>) {
    return static_cast<std::size_t>(e) - 1;
  } else {
    return static_cast<std::size_t>(e);
  }
}

template <class E>
constexpr E enum_at(std::size_t i) {
  if constexpr (std::is_same_v<E, RatingLevel>) {
    return static_cast<E>(i + 1);
  } else {
    return static_cast<E>(i);
  }
}

template <class E>
constexpr std::string_view to_string(E e) {
  return EnumNames<E>::names[enum_index(e)];
}

template <class E>
constexpr std::optional<E> parse_enum(std::string_view s) {
  const auto& names = EnumNames<E>::names;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == s) return enum_at<E>(i);
  }
  return std::nullopt;
}

template <class E>
constexpr std::array<E, EnumNames<E>::names.size()> all_values() {
  std::array<E, EnumNames<E>::names.size()> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = enum_at<E>(i);
  return out;
}

constexpr int rating_score(RatingLevel r) { return static_cast<int>(r); }

constexpr std::optional<RatingLevel> rating_from_score(int s) {
  if (s < 1 || s > 5) return std::nullopt;
  return static_cast<RatingLevel>(s);
}

constexpr bool is_comment_kind(AnnotationKind k) {
  return k == AnnotationKind::overall_comment || k == AnnotationKind::single_attribute_comment;
}

// ---------------------------------------------------------------------------
// Records. Every top-level record keeps unknown input keys in `extra` so they
// survive a read/write cycle.
// ---------------------------------------------------------------------------

struct ImageRef {
  std::string id;
  std::string path;
  json extra = json::object();

  bool operator==(const ImageRef&) const = default;
};

struct CommentPayload {
  std::string text;
  bool operator==(const CommentPayload&) const = default;
};
struct StylePayload {
  std::string style;
  bool operator==(const StylePayload&) const = default;
};
struct BinaryPayload {
  std::string name;
  bool value = false;
  bool operator==(const BinaryPayload&) const = default;
};
struct LevelPayload {
  std::string name;
  std::string level;
  bool operator==(const LevelPayload&) const = default;
};
struct DimensionCommentPayload {
  std::string dimension;
  std::string text;
  bool operator==(const DimensionCommentPayload&) const = default;
};
struct ColorSchemePayload {
  std::string scheme;
  std::optional<std::pair<std::string, std::string>> colors;
  bool operator==(const ColorSchemePayload&) const = default;
};

/// Alternative order follows AnnotationKind.
using AnnotationPayload = std::variant<CommentPayload, StylePayload, BinaryPayload, LevelPayload,
                                       DimensionCommentPayload, ColorSchemePayload>;

struct SourceAnnotation {
  std::string dataset_id;
  ImageRef image;
  AnnotationPayload payload;
  /// Caller-provided aesthetic score, used only for quality-band sampling.
  std::optional<double> quality_score;
  json extra = json::object();

  AnnotationKind kind() const { return static_cast<AnnotationKind>(payload.index()); }

  /// The attribute a record speaks about: binary/level name, comment
  /// dimension, style or scheme label. Empty for overall comments.
  std::string attribute() const {
    return std::visit(
        [](const auto& p) -> std::string {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, BinaryPayload> || std::is_same_v<P, LevelPayload>) {
            return p.name;
          } else if constexpr (std::is_same_v<P, DimensionCommentPayload>) {
            return p.dimension;
          } else if constexpr (std::is_same_v<P, StylePayload>) {
            return p.style;
          } else if constexpr (std::is_same_v<P, ColorSchemePayload>) {
            return p.scheme;
          } else {
            return {};
          }
        },
        payload);
  }

  bool operator==(const SourceAnnotation&) const = default;
};

struct Provenance {
  std::string source_dataset;
  Pipeline pipeline = Pipeline::attributes;
  std::optional<std::string> attribute;
  std::optional<QuestionType> question_type;

  bool operator==(const Provenance&) const = default;
};

struct InstructionSample {
  std::string id;
  ImageRef image;
  std::string question;
  std::string answer;
  Provenance provenance;
  json extra = json::object();

  bool operator==(const InstructionSample&) const = default;
};

struct PerceptionItem {
  std::string id;
  ImageRef image;
  std::string question;
  std::vector<std::string> options;
  int answer_index = 0;
  AttributeDimension attribute = AttributeDimension::content_theme;
  QuestionType question_type = QuestionType::what;
  Split split = Split::in_domain;
  json extra = json::object();

  bool operator==(const PerceptionItem&) const = default;
};

struct AssessmentItem {
  std::string id;
  ImageRef image;
  double mos = 0.0;
  double scale_max = 10.0;
  json extra = json::object();

  bool operator==(const AssessmentItem&) const = default;
};

struct DescribeItem {
  std::string id;
  ImageRef image;
  std::string golden;
  QualityBand quality_band = QualityBand::high;
  json extra = json::object();

  bool operator==(const DescribeItem&) const = default;
};

}  // namespace aesth
