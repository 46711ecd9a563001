#pragma once

#include <string>

#include "aesth/core/error.hpp"
#include "aesth/core/rng.hpp"
#include "aesth/core/types.hpp"
#include "aesth/idcp/templates.hpp"

namespace aesth::idcp {

/// Annotation kind -> question type of the attribute pipeline.
inline QuestionType question_type_for(AnnotationKind kind) {
  switch (kind) {
    case AnnotationKind::binary_attribute: return QuestionType::yes_no;
    case AnnotationKind::photo_style:
    case AnnotationKind::color_scheme: return QuestionType::what;
    case AnnotationKind::attribute_level: return QuestionType::how;
    default:
      throw InputError("comment kind " + std::string(to_string(kind)) + " has no attribute question type");
  }
}

/// Sample id composed from caller-supplied ids: dataset/image/kind[/attribute].
inline std::string sample_id(const std::string& dataset_id, const std::string& image_id, AnnotationKind kind,
                             const std::string& attribute) {
  std::string id = dataset_id + "/" + image_id + "/" + std::string(to_string(kind));
  if (!attribute.empty()) id += "/" + attribute;
  return id;
}

inline std::string sample_id(const SourceAnnotation& r) {
  return sample_id(r.dataset_id, r.image.id, r.kind(),
                   std::holds_alternative<CommentPayload>(r.payload) ? std::string() : r.attribute());
}

inline InstructionSample gen_attribute_qa(const SourceAnnotation& record, const TemplatePool& pool, Rng& rng) {
  const AnnotationKind kind = record.kind();
  if (is_comment_kind(kind))
    throw InputError("gen_attribute_qa: " + std::string(to_string(kind)) +
                     " records belong to the comment pipeline");

  InstructionSample s;
  s.id = sample_id(record);
  s.image = record.image;
  s.provenance.source_dataset = record.dataset_id;
  s.provenance.pipeline = Pipeline::attributes;
  s.provenance.question_type = question_type_for(kind);

  TemplateVars vars;
  std::string attribute_for_pick;
  std::string answer_tmpl;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, StylePayload>) {
          vars["style"] = std::string(text::trim(p.style));
          answer_tmpl = pool.answer_style;
          s.provenance.attribute = "photo_style";
        } else if constexpr (std::is_same_v<P, ColorSchemePayload>) {
          vars["scheme"] = std::string(text::trim(p.scheme));
          answer_tmpl = pool.answer_scheme;
          s.provenance.attribute = "color_scheme";
        } else if constexpr (std::is_same_v<P, BinaryPayload>) {
          vars["name"] = std::string(text::trim(p.name));
          attribute_for_pick = vars["name"];
          answer_tmpl = p.value ? pool.answer_yes : pool.answer_no;
          s.provenance.attribute = vars["name"];
        } else if constexpr (std::is_same_v<P, LevelPayload>) {
          vars["name"] = std::string(text::trim(p.name));
          vars["level"] = std::string(text::trim(p.level));
          attribute_for_pick = vars["name"];
          answer_tmpl = pool.answer_level;
          s.provenance.attribute = vars["name"];
        }
      },
      record.payload);

  s.question = render_template(pool.pick(kind, attribute_for_pick, rng), vars);
  s.answer = text::capitalize_first(render_template(answer_tmpl, vars));
  if (text::is_blank(s.question) || text::is_blank(s.answer))
    throw ConfigError("template rendered empty text for " + s.id);
  return s;
}

}  // namespace aesth::idcp
