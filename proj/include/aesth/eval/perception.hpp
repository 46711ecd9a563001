#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "aesth/client/endpoint.hpp"
#include "aesth/client/parallel.hpp"
#include "aesth/core/error.hpp"
#include "aesth/core/text.hpp"
#include "aesth/core/types.hpp"

namespace aesth::eval {

inline constexpr std::string_view kChooseLine = "Choose between one of the options as follows:";
inline constexpr std::string_view kAnswerCue = "#Answer:";
inline constexpr std::string_view kDefaultImageToken = "<image>";

inline char option_letter(std::size_t i) { return static_cast<char>('A' + i); }

/// "{question} {image token}\nChoose between ...\nA. x\nB. y\n#Answer:"
inline std::string build_mc_prompt(const PerceptionItem& item, std::string_view image_token = kDefaultImageToken) {
  std::string p = item.question;
  if (!image_token.empty()) {
    p += ' ';
    p += image_token;
  }
  p += '\n';
  p += kChooseLine;
  for (std::size_t i = 0; i < item.options.size(); ++i) {
    p += '\n';
    p += option_letter(i);
    p += ". ";
    p += item.options[i];
  }
  p += '\n';
  p += kAnswerCue;
  return p;
}

inline constexpr std::string_view kMatcherPrompt =
    "As a language expert, please complete the following task. You are now an answer selection expert, and I "
    "will provide you with a question with several options, as well as a target sentence. Please return the "
    "alphabet of the option with the highest probability of matching this target sentence. Given questions with "
    "options and the target sequence [MLLM ANSWER]. Please output your responses in the form of a dictionary "
    "{\"maximum probability\": \"xxx\"}, where xxx is A or B or C or ...";

inline std::string build_matcher_prompt(const PerceptionItem& item, std::string_view answer) {
  std::string p = text::replace_all(std::string(kMatcherPrompt), "[MLLM ANSWER]", answer);
  p += "\nQuestion: " + item.question;
  for (std::size_t i = 0; i < item.options.size(); ++i) {
    p += '\n';
    p += option_letter(i);
    p += ". ";
    p += item.options[i];
  }
  return p;
}

enum class VerdictMethod { direct, fallback_matcher, invalid_option, refusal };

inline std::string_view to_string(VerdictMethod m) {
  switch (m) {
    case VerdictMethod::direct: return "direct";
    case VerdictMethod::fallback_matcher: return "fallback_matcher";
    case VerdictMethod::invalid_option: return "invalid_option";
    case VerdictMethod::refusal: return "refusal";
  }
  return "?";
}

struct Verdict {
  std::string item_id;
  std::optional<int> extracted_choice;
  VerdictMethod method = VerdictMethod::invalid_option;
  bool correct = false;
  std::string response;
  std::string note;
};

inline json to_json(const Verdict& v) {
  json j = {{"id", v.item_id},
            {"method", to_string(v.method)},
            {"correct", v.correct},
            {"choice", v.extracted_choice ? json(std::string(1, option_letter(*v.extracted_choice))) : json()},
            {"response", v.response}};
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

/// Leading letter in one of the forms "X", "X.", "X. text", "(X)", after an
/// optional "Answer:" cue. Returns the 0-based letter index, unbounded.
inline std::optional<int> direct_letter(std::string_view response) {
  auto s = text::trim(response);
  for (std::string_view cue : {"#Answer:", "Answer:"}) {
    if (s.size() >= cue.size() && text::iequals(s.substr(0, cue.size()), cue)) {
      s = text::trim(s.substr(cue.size()));
      break;
    }
  }
  auto letter_index = [](char c) -> std::optional<int> {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a';
    return std::nullopt;
  };
  if (s.size() >= 3 && s[0] == '(' && s[2] == ')') {
    auto rest = s.substr(3);
    if (rest.empty() || text::is_space(rest[0]) || rest[0] == '.') return letter_index(s[1]);
    return std::nullopt;
  }
  if (s.empty()) return std::nullopt;
  auto idx = letter_index(s[0]);
  if (!idx) return std::nullopt;
  if (s.size() == 1 || s[1] == '.') return idx;
  return std::nullopt;
}

/// Parses {"maximum probability": "B"} from a matcher reply.
inline std::optional<int> parse_matcher_reply(std::string_view reply) {
  auto open = reply.find('{');
  auto close = reply.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
  json j = json::parse(reply.substr(open, close - open + 1), nullptr, false);
  if (!j.is_object()) return std::nullopt;
  auto it = j.find("maximum probability");
  if (it == j.end() || !it->is_string()) return std::nullopt;
  auto value = text::trim(it->get_ref<const std::string&>());
  if (value.empty()) return std::nullopt;
  return direct_letter(value);
}

/// Grades one response. Precedence: refusal, direct letter, matcher.
/// A matcher problem never throws; it yields invalid_option with a note.
inline Verdict extract_choice(const client::ModelResponse& response, const PerceptionItem& item,
                              client::ChatClient* matcher = nullptr) {
  Verdict v;
  v.item_id = item.id;
  v.response = response.text;
  const int n = static_cast<int>(item.options.size());
  auto settle = [&](std::optional<int> letter, VerdictMethod method) {
    if (letter && *letter >= 0 && *letter < n) {
      v.method = method;
      v.extracted_choice = *letter;
      v.correct = *letter == item.answer_index;
    } else {
      v.method = VerdictMethod::invalid_option;
      if (letter) v.note = std::string("option ") + option_letter(*letter) + " does not exist";
    }
    return v;
  };

  if (response.refusal) {
    v.method = VerdictMethod::refusal;
    return v;
  }
  if (auto letter = direct_letter(response.text)) return settle(letter, VerdictMethod::direct);
  if (matcher == nullptr) {
    v.note = "no direct answer and no matcher configured";
    return v;
  }
  try {
    client::ChatRequest req;
    req.prompt = build_matcher_prompt(item, response.text);
    auto reply = matcher->send(req);
    if (reply.refusal) {
      v.note = "matcher refused";
      return v;
    }
    auto letter = parse_matcher_reply(reply.text);
    if (!letter) {
      v.note = "matcher reply unparsable: " + std::string(text::trim(reply.text)).substr(0, 80);
      return v;
    }
    return settle(letter, VerdictMethod::fallback_matcher);
  } catch (const Error& e) {
    v.note = std::string("matcher failed: ") + e.what();
    return v;
  }
}

enum class DenominatorPolicy { all_items, answered_only };

inline std::string_view to_string(DenominatorPolicy p) {
  return p == DenominatorPolicy::all_items ? "all_items" : "answered_only";
}

inline DenominatorPolicy parse_policy(std::string_view s) {
  if (s == "all" || s == "all_items") return DenominatorPolicy::all_items;
  if (s == "answered" || s == "answered_only") return DenominatorPolicy::answered_only;
  throw ConfigError("unknown denominator policy \"" + std::string(s) + "\"");
}

/// `correct` is a real so the analytic baseline can share the layout.
struct Cell {
  double correct = 0.0;
  std::size_t total = 0;
  std::size_t refusals = 0;

  std::size_t denominator(DenominatorPolicy p) const {
    return p == DenominatorPolicy::all_items ? total : total - refusals;
  }
  /// NaN for an empty denominator.
  double accuracy(DenominatorPolicy p) const {
    auto d = denominator(p);
    return d == 0 ? std::nan("") : correct / static_cast<double>(d);
  }
  void add(double c, bool refused) {
    correct += c;
    ++total;
    if (refused) ++refusals;
  }
};

struct PerceptionReport {
  DenominatorPolicy policy = DenominatorPolicy::all_items;
  Cell overall;
  std::array<Cell, 6> by_attribute{};
  std::array<Cell, 3> by_question_type{};
  std::array<Cell, 2> by_split{};
  std::map<std::string, std::size_t> methods;

  std::size_t refusals() const { return overall.refusals; }

  void add(const PerceptionItem& item, double correct, bool refused) {
    overall.add(correct, refused);
    by_attribute[enum_index(item.attribute)].add(correct, refused);
    by_question_type[enum_index(item.question_type)].add(correct, refused);
    by_split[enum_index(item.split)].add(correct, refused);
  }
};

inline PerceptionReport aggregate(const std::vector<Verdict>& verdicts, const std::vector<PerceptionItem>& items,
                                  DenominatorPolicy policy = DenominatorPolicy::all_items) {
  std::map<std::string, const Verdict*> by_id;
  for (const auto& v : verdicts)
    if (!by_id.emplace(v.item_id, &v).second) throw ConsistencyError("duplicate verdict for item " + v.item_id);
  if (verdicts.size() != items.size())
    throw ConsistencyError("have " + std::to_string(verdicts.size()) + " verdicts for " +
                           std::to_string(items.size()) + " items");
  PerceptionReport r;
  r.policy = policy;
  for (const auto& item : items) {
    auto it = by_id.find(item.id);
    if (it == by_id.end()) throw ConsistencyError("no verdict for item " + item.id);
    const Verdict& v = *it->second;
    if (v.correct && v.extracted_choice != item.answer_index)
      throw ConsistencyError("verdict for " + item.id + " is correct but names another option");
    r.add(item, v.correct ? 1.0 : 0.0, v.method == VerdictMethod::refusal);
    ++r.methods[std::string(to_string(v.method))];
  }
  return r;
}

/// Expected accuracy of a uniform guesser: mean of 1/|options|, per cell.
inline PerceptionReport random_baseline(const std::vector<PerceptionItem>& items) {
  PerceptionReport r;
  for (const auto& item : items) r.add(item, 1.0 / static_cast<double>(item.options.size()), false);
  return r;
}

inline json to_json(const Cell& c, DenominatorPolicy p) {
  double acc = c.accuracy(p);
  return {{"correct", c.correct},
          {"total", c.total},
          {"refusals", c.refusals},
          {"denominator", c.denominator(p)},
          {"accuracy", std::isnan(acc) ? json() : json(acc)}};
}

inline json to_json(const PerceptionReport& r, DenominatorPolicy p) {
  json j = {{"overall", to_json(r.overall, p)}};
  for (auto a : all_values<AttributeDimension>())
    j["attributes"][std::string(to_string(a))] = to_json(r.by_attribute[enum_index(a)], p);
  for (auto q : all_values<QuestionType>())
    j["question_types"][std::string(to_string(q))] = to_json(r.by_question_type[enum_index(q)], p);
  for (auto s : all_values<Split>()) j["splits"][std::string(to_string(s))] = to_json(r.by_split[enum_index(s)], p);
  return j;
}

inline json to_json(const PerceptionReport& r) {
  json j = {{"policy", to_string(r.policy)},
            {"items", r.overall.total},
            {"refusals", r.refusals()},
            {"methods", r.methods},
            {"accuracy", to_json(r, r.policy)}};
  if (r.refusals() > 0) {
    auto other = r.policy == DenominatorPolicy::all_items ? DenominatorPolicy::answered_only
                                                          : DenominatorPolicy::all_items;
    j["accuracy_" + std::string(to_string(other))] = to_json(r, other);
  }
  return j;
}

/// Inverse of to_json(report) for the counts; used when re-rendering saved
/// reports.
inline PerceptionReport perception_report_from_json(const json& j) {
  auto cell = [](const json& c) {
    Cell out;
    out.correct = c.at("correct").get<double>();
    out.total = c.at("total").get<std::size_t>();
    out.refusals = c.at("refusals").get<std::size_t>();
    return out;
  };
  PerceptionReport r;
  try {
    r.policy = parse_policy(j.at("policy").get<std::string>());
    const json& acc = j.at("accuracy");
    r.overall = cell(acc.at("overall"));
    for (auto a : all_values<AttributeDimension>())
      r.by_attribute[enum_index(a)] = cell(acc.at("attributes").at(std::string(to_string(a))));
    for (auto q : all_values<QuestionType>())
      r.by_question_type[enum_index(q)] = cell(acc.at("question_types").at(std::string(to_string(q))));
    for (auto s : all_values<Split>()) r.by_split[enum_index(s)] = cell(acc.at("splits").at(std::string(to_string(s))));
    if (j.contains("methods")) r.methods = j["methods"].get<std::map<std::string, std::size_t>>();
  } catch (const json::exception& e) {
    throw InputError(std::string("perception report: ") + e.what());
  }
  return r;
}

struct PerceptionRun {
  /// Sorted by item id.
  std::vector<Verdict> verdicts;
  std::vector<std::string> warnings;
};

/// Candidate exhaustion propagates as EndpointError; matcher trouble is
/// recorded per verdict.
inline PerceptionRun eval_perception(const std::vector<PerceptionItem>& items, client::ChatClient& candidate,
                                     client::ChatClient* matcher = nullptr, int parallel_limit = 4,
                                     std::string_view image_token = kDefaultImageToken) {
  PerceptionRun run;
  run.verdicts.resize(items.size());
  parallel_for(items.size(), parallel_limit, [&](std::size_t i) {
    client::ChatRequest req;
    req.prompt = build_mc_prompt(items[i], image_token);
    req.image = items[i].image;
    run.verdicts[i] = extract_choice(candidate.send(req), items[i], matcher);
  });
  std::sort(run.verdicts.begin(), run.verdicts.end(),
            [](const Verdict& a, const Verdict& b) { return a.item_id < b.item_id; });
  for (const auto& v : run.verdicts)
    if (v.method == VerdictMethod::invalid_option && v.note.rfind("matcher", 0) == 0)
      run.warnings.push_back(v.item_id + ": " + v.note);
  return run;
}

}  // namespace aesth::eval
