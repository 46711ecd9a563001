#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "aesth/client/endpoint.hpp"
#include "aesth/client/parallel.hpp"
#include "aesth/core/error.hpp"
#include "aesth/core/text.hpp"
#include "aesth/core/types.hpp"

namespace aesth::eval {

inline constexpr std::string_view kDescribePrompt = "Describe and evaluate the aesthetic attribute in detail.";
inline constexpr std::string_view kSuggestionPrompt = "Give suggestions for improvement.";

inline std::string describe_prompt(QualityBand band) {
  std::string p(kDescribePrompt);
  if (band == QualityBand::low || band == QualityBand::medium) {
    p += ' ';
    p += kSuggestionPrompt;
  }
  return p;
}

enum class JudgeDimension { completeness, preciseness, relevance };

inline constexpr std::array<JudgeDimension, 3> kJudgeDimensions{
    JudgeDimension::completeness, JudgeDimension::preciseness, JudgeDimension::relevance};

inline std::string_view to_string(JudgeDimension d) {
  switch (d) {
    case JudgeDimension::completeness: return "completeness";
    case JudgeDimension::preciseness: return "preciseness";
    case JudgeDimension::relevance: return "relevance";
  }
  return "?";
}

inline constexpr std::string_view kJudgeSystem = "As a language expert, please complete the following task.";

inline constexpr std::string_view kCompletenessTemplate =
    "Evaluate whether the description [MLLM_DESC] contains the dimensions of aesthetic, including composition, "
    "color, lighting, focus and suggestions, etc., in the reference description [GOLDEN_DESC].\n"
    "Please rate score 2 for completely or almost completely including aesthetic dimensions, 0 for not including "
    "at all, and 1 for including part of the dimensions or similar description..\n"
    "Please only provide the result in the following format: Score:";

inline constexpr std::string_view kPrecisenessTemplate =
    "The precision metric punishes highly controversial aesthetic perspectives that output contrasts with the "
    "reference, e.g., positive for negative evaluations, good composition for messy composition, harmonious colors "
    "for abrupt colors, appropriate lighting for inappropriate lighting, high quality for low quality, colorful for "
    "monotonous.\n"
    "Evaluate whether [MLLM_DESC] precisely reflects reference [GOLDEN_DESC].\n"
    "Please rate score 2 for a totally no controversial aesthetic description, 1 for less controversial aesthetic "
    "description than the matched description, and 0 for more controversial aesthetic description than the "
    "matched.\n"
    "Please only provide the result in the following format: Score:";

inline constexpr std::string_view kRelevanceTemplate =
    "Evaluate whether the [MLLM_DESC] is relevant to the aesthetic evaluation, aesthetic attributes and aesthetic "
    "terminology. Aesthetic attributes include composition, color, lighting, focus, sentiments, and suggestions for "
    "improvement.\n"
    "Please rate score 2 for completely relevant, with no content unrelated to aesthetics; 1 for partly relevant, "
    "with a small amount of content unrelated to aesthetics; 0 for a large amount of content unrelated to "
    "aesthetics, even irrelevant.\n"
    "Please only provide the result in the following format: Score:";

inline std::string_view judge_template(JudgeDimension d) {
  switch (d) {
    case JudgeDimension::completeness: return kCompletenessTemplate;
    case JudgeDimension::preciseness: return kPrecisenessTemplate;
    case JudgeDimension::relevance: return kRelevanceTemplate;
  }
  return {};
}

/// Single pass, so slot markers inside the substituted texts stay literal.
inline std::string render_judge_prompt(JudgeDimension d, std::string_view candidate, std::string_view golden) {
  static constexpr std::string_view kCand = "[MLLM_DESC]";
  static constexpr std::string_view kGold = "[GOLDEN_DESC]";
  std::string_view t = judge_template(d);
  std::string out;
  for (std::size_t i = 0; i < t.size();) {
    if (t.compare(i, kCand.size(), kCand) == 0) {
      out += candidate;
      i += kCand.size();
    } else if (t.compare(i, kGold.size(), kGold) == 0) {
      out += golden;
      i += kGold.size();
    } else {
      out += t[i++];
    }
  }
  return out;
}

/// Accepts "Score: n", "Score:n" (anywhere, case-insensitive) or a bare
/// trailing integer; n must be 0, 1 or 2.
inline std::optional<int> parse_score(std::string_view reply) {
  auto s = text::trim(reply);
  auto in_range = [](long v) -> std::optional<int> {
    if (v < 0 || v > 2) return std::nullopt;
    return static_cast<int>(v);
  };
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  for (std::size_t i = 0; i + 5 <= s.size(); ++i) {
    if (!text::iequals(s.substr(i, 5), "score")) continue;
    std::size_t j = i + 5;
    while (j < s.size() && s[j] == ' ') ++j;
    if (j >= s.size() || s[j] != ':') continue;
    ++j;
    while (j < s.size() && text::is_space(s[j])) ++j;
    std::size_t k = j;
    while (k < s.size() && is_digit(s[k])) ++k;
    if (k == j) continue;
    if (k < s.size() && (s[k] == '.' && k + 1 < s.size() && is_digit(s[k + 1]))) return std::nullopt;
    return in_range(std::stol(std::string(s.substr(j, k - j))));
  }
  while (!s.empty() && s.back() == '.') s.remove_suffix(1);
  std::size_t k = s.size();
  while (k > 0 && is_digit(s[k - 1])) --k;
  if (k == s.size()) return std::nullopt;
  if (k > 0 && (text::is_alpha(s[k - 1]) || s[k - 1] == '.' || s[k - 1] == '-')) return std::nullopt;
  return in_range(std::stol(std::string(s.substr(k))));
}

struct JudgeOptions {
  int rounds = 5;
  std::optional<double> temperature;
};

struct DimensionScore {
  JudgeDimension dimension = JudgeDimension::completeness;
  /// Parsed rounds in round order; missing rounds are left out.
  std::vector<int> rounds;
  int missing_rounds = 0;

  std::optional<double> mean() const {
    if (rounds.empty()) return std::nullopt;
    return static_cast<double>(std::accumulate(rounds.begin(), rounds.end(), 0)) /
           static_cast<double>(rounds.size());
  }
};

inline json to_json(const DimensionScore& d) {
  auto m = d.mean();
  return {{"rounds", d.rounds}, {"missing_rounds", d.missing_rounds}, {"mean", m ? json(*m) : json()}};
}

/// Runs the template `rounds` times. An unparsable reply is asked once more
/// under a distinct cache tag, then counted missing.
inline DimensionScore judge_dimension(const std::string& candidate, const std::string& golden, JudgeDimension dim,
                                      client::ChatClient& judge, const JudgeOptions& opts = {},
                                      std::vector<std::string>* warnings = nullptr) {
  if (text::is_blank(candidate) || text::is_blank(golden))
    throw InputError("judge_dimension: candidate and golden must be nonempty");
  if (opts.rounds < 1) throw ConfigError("judge rounds must be >= 1");
  DimensionScore out;
  out.dimension = dim;
  client::ChatRequest req;
  req.system = std::string(kJudgeSystem);
  req.prompt = render_judge_prompt(dim, candidate, golden);
  req.temperature = opts.temperature;
  for (int k = 1; k <= opts.rounds; ++k) {
    std::optional<int> score;
    std::string last;
    for (int attempt = 0; attempt < 2 && !score; ++attempt) {
      req.cache_tag = "round-" + std::to_string(k) + (attempt ? "-retry" : "");
      auto r = judge.send(req);
      last = r.text;
      if (!r.refusal) score = parse_score(r.text);
    }
    if (score) {
      out.rounds.push_back(*score);
    } else {
      ++out.missing_rounds;
      if (warnings)
        warnings->push_back(std::string(to_string(dim)) + " round " + std::to_string(k) +
                            ": unparsable judge reply \"" + std::string(text::trim(last)).substr(0, 60) + "\"");
    }
  }
  return out;
}

struct DescribeItemResult {
  std::string id;
  QualityBand band = QualityBand::high;
  std::string description;
  std::array<DimensionScore, 3> scores{};
  std::string missing_reason;
  std::vector<std::string> warnings;

  bool missing() const { return !missing_reason.empty(); }

  /// Sum of the three dimension means; no intermediate rounding.
  double overall() const {
    double s = 0.0;
    for (const auto& d : scores) s += d.mean().value_or(0.0);
    return s;
  }
};

struct DescribeReport {
  std::vector<DescribeItemResult> items;
  std::array<double, 3> dimension_means{};
  double overall = 0.0;
  std::size_t scored = 0;
  std::size_t missing = 0;
  int rounds = 5;
  std::vector<std::string> warnings;
};

/// Corpus means over scored items. Overall is the mean of the per-item
/// overalls, which equals the sum of the three dimension means but rounds once.
inline void summarize(DescribeReport& r) {
  r.dimension_means = {0.0, 0.0, 0.0};
  r.overall = 0.0;
  r.scored = 0;
  r.missing = 0;
  for (const auto& it : r.items) {
    if (it.missing()) {
      ++r.missing;
      continue;
    }
    ++r.scored;
    for (std::size_t d = 0; d < 3; ++d) r.dimension_means[d] += *it.scores[d].mean();
    r.overall += it.overall();
  }
  if (r.scored > 0) {
    for (auto& m : r.dimension_means) m /= static_cast<double>(r.scored);
    r.overall /= static_cast<double>(r.scored);
  }
}

inline json to_json(const DescribeReport& r) {
  json items = json::array();
  for (const auto& it : r.items) {
    json j = {{"id", it.id}, {"band", to_string(it.band)}, {"description", it.description}};
    if (it.missing()) {
      j["missing"] = it.missing_reason;
    } else {
      for (std::size_t d = 0; d < 3; ++d) j["scores"][std::string(to_string(kJudgeDimensions[d]))] = to_json(it.scores[d]);
      j["overall"] = it.overall();
    }
    items.push_back(std::move(j));
  }
  json means;
  for (std::size_t d = 0; d < 3; ++d) means[std::string(to_string(kJudgeDimensions[d]))] = r.dimension_means[d];
  return {{"rounds", r.rounds},  {"scored", r.scored},     {"missing", r.missing}, {"means", means},
          {"overall", r.overall}, {"items", items},        {"warnings", r.warnings}};
}

inline std::string elicit_description(const DescribeItem& item, client::ChatClient& endpoint) {
  client::ChatRequest req;
  req.prompt = describe_prompt(item.quality_band);
  req.image = item.image;
  auto r = endpoint.send(req);
  if (r.refusal) throw IncompleteResponseError("model refused to describe " + item.id);
  if (text::is_blank(r.text)) throw IncompleteResponseError("empty description for " + item.id);
  return r.text;
}

inline DescribeReport eval_describe(const std::vector<DescribeItem>& items, client::ChatClient& candidate,
                                    client::ChatClient& judge, const JudgeOptions& opts = {},
                                    int parallel_limit = 4) {
  DescribeReport report;
  report.rounds = opts.rounds;
  report.items.resize(items.size());
  parallel_for(items.size(), parallel_limit, [&](std::size_t i) {
    const auto& item = items[i];
    auto& res = report.items[i];
    res.id = item.id;
    res.band = item.quality_band;
    try {
      res.description = elicit_description(item, candidate);
    } catch (const IncompleteResponseError& e) {
      res.missing_reason = e.what();
      return;
    }
    for (std::size_t d = 0; d < 3; ++d) {
      res.scores[d] = judge_dimension(res.description, item.golden, kJudgeDimensions[d], judge, opts, &res.warnings);
      if (!res.scores[d].mean()) {
        res.missing_reason = "no parsable " + std::string(to_string(kJudgeDimensions[d])) + " score";
        return;
      }
    }
  });
  std::sort(report.items.begin(), report.items.end(),
            [](const DescribeItemResult& a, const DescribeItemResult& b) { return a.id < b.id; });
  for (const auto& it : report.items) {
    for (const auto& w : it.warnings) report.warnings.push_back(it.id + ": " + w);
    if (it.missing()) report.warnings.push_back(it.id + ": excluded (" + it.missing_reason + ")");
  }
  summarize(report);
  return report;
}

}  // namespace aesth::eval
