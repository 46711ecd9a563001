#pragma once

#include <algorithm>
#include <array>
#include <cmath>
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

struct PooledScore {
  double value = 0.0;
  /// Indexed bad..excellent.
  std::array<double, 5> probabilities{};
};

/// Softmax over the five rating-word logits, then the expectation of the
/// quantified scores 1..5.
inline PooledScore pool_score(const client::RatingLogits& logits) {
  if (!logits.all_finite()) throw InputError("pool_score: non-finite logit");
  const auto& L = logits.values;
  const double m = *std::max_element(L.begin(), L.end());
  std::array<double, 5> e{};
  double sum = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    e[i] = std::exp(L[i] - m);
    sum += e[i];
  }
  PooledScore s;
  for (std::size_t i = 0; i < 5; ++i) {
    s.probabilities[i] = e[i] / sum;
    s.value += s.probabilities[i] * static_cast<double>(rating_score(enum_at<RatingLevel>(i)));
  }
  return s;
}

namespace detail {

inline void check_pair(const std::vector<double>& x, const std::vector<double>& y, const char* what) {
  if (x.size() != y.size())
    throw InputError(std::string(what) + ": length mismatch (" + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()) + ")");
  if (x.size() < 2) throw InputError(std::string(what) + ": need at least 2 points");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InputError(std::string(what) + ": non-finite value");
}

inline bool is_constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nan("");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace detail

/// 1-based ranks; ties share the mean of their positions.
inline std::vector<double> mid_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

/// Sample Pearson correlation. NaN when either input is constant.
inline double plcc(const std::vector<double>& x, const std::vector<double>& y) {
  detail::check_pair(x, y, "plcc");
  return detail::pearson(x, y);
}

/// Pearson correlation of mid-ranks. NaN when either input is constant.
inline double srcc(const std::vector<double>& x, const std::vector<double>& y) {
  detail::check_pair(x, y, "srcc");
  return detail::pearson(mid_ranks(x), mid_ranks(y));
}

struct CorrelationResult {
  double plcc = std::nan("");
  double srcc = std::nan("");
  std::size_t n = 0;
  bool degenerate = true;
};

/// Never throws on size: fewer than two points or a constant input gives a
/// degenerate result.
inline CorrelationResult correlate(const std::vector<double>& predicted, const std::vector<double>& truth) {
  if (predicted.size() != truth.size()) throw InputError("correlate: length mismatch");
  CorrelationResult r;
  r.n = predicted.size();
  if (r.n < 2 || detail::is_constant(predicted) || detail::is_constant(truth)) return r;
  r.plcc = plcc(predicted, truth);
  r.srcc = srcc(predicted, truth);
  r.degenerate = false;
  return r;
}

inline json nan_to_null(double v) { return std::isnan(v) ? json() : json(v); }

inline json to_json(const CorrelationResult& c) {
  return {{"plcc", nan_to_null(c.plcc)}, {"srcc", nan_to_null(c.srcc)}, {"n", c.n}, {"degenerate", c.degenerate}};
}

enum class AssessmentMode { logits, text_rating };

inline std::string_view to_string(AssessmentMode m) { return m == AssessmentMode::logits ? "logits" : "text"; }

inline AssessmentMode parse_assessment_mode(std::string_view s) {
  if (s == "logits") return AssessmentMode::logits;
  if (s == "text" || s == "text_rating") return AssessmentMode::text_rating;
  throw ConfigError("unknown assessment mode \"" + std::string(s) + "\"");
}

/// First rating word in the text (case-insensitive, whole word).
inline std::optional<RatingLevel> parse_text_rating(std::string_view text) {
  std::optional<RatingLevel> best;
  std::size_t best_pos = std::string_view::npos;
  for (auto r : all_values<RatingLevel>()) {
    auto pos = text::find_word_ci(text, to_string(r));
    if (pos != std::string_view::npos && (best_pos == std::string_view::npos || pos < best_pos)) {
      best_pos = pos;
      best = r;
    }
  }
  return best;
}

struct ItemScore {
  std::string id;
  double mos = 0.0;
  std::optional<double> score;
  std::optional<std::array<double, 5>> probabilities;
  std::string response;
  std::string missing_reason;
};

inline json to_json(const ItemScore& s) {
  json j = {{"id", s.id}, {"mos", s.mos}, {"score", s.score ? json(*s.score) : json()}};
  if (s.probabilities) j["probabilities"] = *s.probabilities;
  if (!s.response.empty()) j["response"] = s.response;
  if (!s.missing_reason.empty()) j["missing"] = s.missing_reason;
  return j;
}

struct AssessmentReport {
  AssessmentMode mode = AssessmentMode::logits;
  CorrelationResult correlation;
  /// Sorted by item id.
  std::vector<ItemScore> items;
  std::size_t missing = 0;
  std::vector<std::string> warnings;
};

inline std::string_view assessment_deviation(AssessmentMode m) {
  return m == AssessmentMode::logits
             ? "rating-word logits read from served token logprobs of the first token after the assistant prefix"
             : "text-rating fallback: the first rating word in the reply is mapped to its score; no logits";
}

inline json to_json(const AssessmentReport& r) {
  json items = json::array();
  for (const auto& s : r.items) items.push_back(to_json(s));
  return {{"mode", to_string(r.mode)},
          {"deviation", assessment_deviation(r.mode)},
          {"n", r.correlation.n},
          {"missing", r.missing},
          {"correlation", to_json(r.correlation)},
          {"items", items},
          {"warnings", r.warnings}};
}

/// Refusals and unusable replies mark an item missing; endpoint exhaustion
/// and capability errors propagate.
inline AssessmentReport eval_assessment(const std::vector<AssessmentItem>& items, client::ChatClient& endpoint,
                                        AssessmentMode mode, int parallel_limit = 4) {
  if (mode == AssessmentMode::logits && !endpoint.config().supports_logits)
    throw CapabilityError("endpoint " + endpoint.config().name +
                          " does not provide token logprobs; use the text-rating fallback mode (--mode text)");
  AssessmentReport report;
  report.mode = mode;
  report.items.resize(items.size());
  parallel_for(items.size(), parallel_limit, [&](std::size_t i) {
    const auto& item = items[i];
    ItemScore& s = report.items[i];
    s.id = item.id;
    s.mos = item.mos;
    if (mode == AssessmentMode::logits) {
      try {
        auto pooled = pool_score(client::score_logits(endpoint, item.image));
        s.score = pooled.value;
        s.probabilities = pooled.probabilities;
      } catch (const IncompleteResponseError& e) {
        s.missing_reason = e.what();
      }
    } else {
      auto r = endpoint.send(client::rating_request(item.image, false));
      s.response = r.text;
      if (r.refusal) {
        s.missing_reason = "refused";
      } else if (auto level = parse_text_rating(r.text)) {
        s.score = rating_score(*level);
      } else {
        s.missing_reason = "no rating word in reply";
      }
    }
  });
  std::sort(report.items.begin(), report.items.end(),
            [](const ItemScore& a, const ItemScore& b) { return a.id < b.id; });
  std::vector<double> pred, truth;
  for (const auto& s : report.items) {
    if (s.score) {
      pred.push_back(*s.score);
      truth.push_back(s.mos);
    } else {
      ++report.missing;
      report.warnings.push_back(s.id + ": excluded (" + s.missing_reason + ")");
    }
  }
  report.correlation = correlate(pred, truth);
  if (report.correlation.degenerate && report.correlation.n >= 2)
    report.warnings.push_back("constant scores or MOS; correlations undefined");
  return report;
}

}  // namespace aesth::eval
