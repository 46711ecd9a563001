#pragma once

// Question and answer templates for the attribute pipeline.
//
// Pool file (JSON):
//   {"questions": {
//      "photo_style":      ["What kind of photography style is this image in?", ...],
//      "color_scheme":     [...],
//      "binary_attribute": {"balancing": [...], "*": ["Does this image show good {name}?", ...]},
//      "attribute_level":  {"*": ["How would you rate the {name} of this image?", ...]}},
//    "answers": {
//      "photo_style": "{style}.",
//      "color_scheme": "{scheme}.",
//      "binary_attribute": {"true": "Yes.", "false": "No."},
//      "attribute_level": "The image has a {level} score of {name}."}}
//
// Placeholders: {name} {style} {scheme} {level}. The first letter of every
// rendered answer is upper-cased.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aesth/core/error.hpp"
#include "aesth/core/jsonl.hpp"
#include "aesth/core/rng.hpp"
#include "aesth/core/text.hpp"
#include "aesth/core/types.hpp"

namespace aesth::idcp {

using TemplateVars = std::map<std::string, std::string>;

/// Substitutes `{key}` slots. A slot without a value is a configuration error.
inline std::string render_template(const std::string& tmpl, const TemplateVars& vars) {
  std::string out;
  out.reserve(tmpl.size());
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i);
      if (close == std::string::npos) throw ConfigError("template has unterminated slot: " + tmpl);
      std::string key = tmpl.substr(i + 1, close - i - 1);
      auto it = vars.find(key);
      if (it == vars.end()) throw ConfigError("template slot {" + key + "} has no value: " + tmpl);
      out += it->second;
      i = close + 1;
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

class TemplatePool {
 public:
  /// Per-kind question lists. Binary and level kinds are keyed by attribute
  /// name with "*" as fallback.
  std::vector<std::string> photo_style;
  std::vector<std::string> color_scheme;
  std::map<std::string, std::vector<std::string>> binary_attribute;
  std::map<std::string, std::vector<std::string>> attribute_level;

  std::string answer_style = "{style}.";
  std::string answer_scheme = "{scheme}.";
  std::string answer_yes = "Yes.";
  std::string answer_no = "No.";
  std::string answer_level = "The image has a {level} score of {name}.";

  const std::vector<std::string>& questions_for(AnnotationKind kind, const std::string& attribute) const {
    auto keyed = [&](const std::map<std::string, std::vector<std::string>>& m) -> const std::vector<std::string>& {
      if (auto it = m.find(attribute); it != m.end() && !it->second.empty()) return it->second;
      if (auto it = m.find("*"); it != m.end() && !it->second.empty()) return it->second;
      throw ConfigError("template pool has no " + std::string(to_string(kind)) + " questions for \"" +
                        attribute + "\" and no \"*\" fallback");
    };
    switch (kind) {
      case AnnotationKind::photo_style:
        if (photo_style.empty()) throw ConfigError("template pool has no photo_style questions");
        return photo_style;
      case AnnotationKind::color_scheme:
        if (color_scheme.empty()) throw ConfigError("template pool has no color_scheme questions");
        return color_scheme;
      case AnnotationKind::binary_attribute: return keyed(binary_attribute);
      case AnnotationKind::attribute_level: return keyed(attribute_level);
      default:
        throw InputError("no attribute templates for comment kind " + std::string(to_string(kind)));
    }
  }

  /// Seeded choice among the paraphrases.
  const std::string& pick(AnnotationKind kind, const std::string& attribute, Rng& rng) const {
    const auto& list = questions_for(kind, attribute);
    return list[static_cast<std::size_t>(rng.uniform_index(list.size()))];
  }

  /// Every template must render to nonempty text with representative values.
  void validate() const {
    const TemplateVars vars{{"name", "x"}, {"style", "x"}, {"scheme", "x"}, {"level", "x"}};
    auto check = [&](const std::string& t) {
      if (text::is_blank(render_template(t, vars))) throw ConfigError("template renders empty: \"" + t + "\"");
    };
    for (const auto& t : photo_style) check(t);
    for (const auto& t : color_scheme) check(t);
    for (const auto& [k, list] : binary_attribute)
      for (const auto& t : list) check(t);
    for (const auto& [k, list] : attribute_level)
      for (const auto& t : list) check(t);
    for (const auto* t : {&answer_style, &answer_scheme, &answer_yes, &answer_no, &answer_level}) check(*t);
  }
};

namespace detail {

inline std::vector<std::string> string_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError("template pool: " + where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& s : j) {
    if (!s.is_string()) throw ConfigError("template pool: " + where + " must be an array of strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

inline std::map<std::string, std::vector<std::string>> keyed_lists(const json& j, const std::string& where) {
  std::map<std::string, std::vector<std::string>> out;
  if (j.is_array()) {
    out["*"] = string_list(j, where);
    return out;
  }
  if (!j.is_object()) throw ConfigError("template pool: " + where + " must be an object or array");
  for (const auto& [k, v] : j.items()) out[k] = string_list(v, where + "." + k);
  return out;
}

}  // namespace detail

inline TemplatePool parse_template_pool(const json& j) {
  if (!j.is_object()) throw ConfigError("template pool: expected JSON object");
  TemplatePool p;
  const json q = j.value("questions", json::object());
  if (q.contains("photo_style")) p.photo_style = detail::string_list(q["photo_style"], "questions.photo_style");
  if (q.contains("color_scheme")) p.color_scheme = detail::string_list(q["color_scheme"], "questions.color_scheme");
  if (q.contains("binary_attribute"))
    p.binary_attribute = detail::keyed_lists(q["binary_attribute"], "questions.binary_attribute");
  if (q.contains("attribute_level"))
    p.attribute_level = detail::keyed_lists(q["attribute_level"], "questions.attribute_level");

  const json a = j.value("answers", json::object());
  try {
    if (a.contains("photo_style")) p.answer_style = a["photo_style"].get<std::string>();
    if (a.contains("color_scheme")) p.answer_scheme = a["color_scheme"].get<std::string>();
    if (a.contains("binary_attribute")) {
      p.answer_yes = a["binary_attribute"].value("true", p.answer_yes);
      p.answer_no = a["binary_attribute"].value("false", p.answer_no);
    }
    if (a.contains("attribute_level")) p.answer_level = a["attribute_level"].get<std::string>();
  } catch (const json::type_error& e) {
    throw ConfigError(std::string("template pool answers: ") + e.what());
  }
  p.validate();
  return p;
}

inline TemplatePool load_template_pool(const std::filesystem::path& path) {
  return parse_template_pool(read_json_file(path));
}

}  // namespace aesth::idcp
