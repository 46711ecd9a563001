#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aesth/core/error.hpp"
#include "aesth/core/rng.hpp"
#include "aesth/core/text.hpp"
#include "aesth/core/types.hpp"

namespace aesth::idcp {

enum class BalanceTarget { equalize_binary, equalize_options, cap_per_attribute };

inline std::string_view to_string(BalanceTarget t) {
  switch (t) {
    case BalanceTarget::equalize_binary: return "equalize_binary";
    case BalanceTarget::equalize_options: return "equalize_options";
    case BalanceTarget::cap_per_attribute: return "cap_per_attribute";
  }
  return "?";
}

/// equalize_binary: per binary attribute name, |#true - #false| <= tolerance.
/// equalize_options: per option group (style labels, scheme labels, levels of
///   one attribute), no option exceeds the rarest option by more than tolerance.
/// cap_per_attribute: at most `tolerance` records per attribute bucket.
/// Excess records are removed by seeded sampling; survivors keep input order.
struct BalancePolicy {
  BalanceTarget target = BalanceTarget::equalize_binary;
  std::size_t tolerance = 0;
  std::uint64_t seed = 0;
};

inline BalancePolicy parse_balance_policy(const json& j, std::uint64_t default_seed) {
  if (!j.is_object()) throw ConfigError("balance: expected object");
  BalancePolicy p;
  std::string t = j.value("target", std::string("equalize_binary"));
  if (t == "equalize_binary") p.target = BalanceTarget::equalize_binary;
  else if (t == "equalize_options") p.target = BalanceTarget::equalize_options;
  else if (t == "cap_per_attribute") p.target = BalanceTarget::cap_per_attribute;
  else throw ConfigError("balance: unknown target \"" + t + "\"");
  long long tol = j.value("tolerance", 0LL);
  if (tol < 0) throw ConfigError("balance: tolerance must be >= 0");
  p.tolerance = static_cast<std::size_t>(tol);
  p.seed = j.value("seed", default_seed);
  return p;
}

namespace detail {

struct GroupKey {
  std::string group;
  std::string option;
  auto operator<=>(const GroupKey&) const = default;
};

inline std::optional<GroupKey> group_of(const SourceAnnotation& r, BalanceTarget target) {
  switch (target) {
    case BalanceTarget::equalize_binary:
      if (const auto* b = std::get_if<BinaryPayload>(&r.payload)) return GroupKey{b->name, b->value ? "true" : "false"};
      return std::nullopt;
    case BalanceTarget::equalize_options:
      if (const auto* s = std::get_if<StylePayload>(&r.payload)) return GroupKey{"photo_style", s->style};
      if (const auto* c = std::get_if<ColorSchemePayload>(&r.payload)) return GroupKey{"color_scheme", c->scheme};
      if (const auto* l = std::get_if<LevelPayload>(&r.payload)) return GroupKey{"attribute_level:" + l->name, l->level};
      return std::nullopt;
    case BalanceTarget::cap_per_attribute: {
      std::string bucket(to_string(r.kind()));
      if (std::holds_alternative<BinaryPayload>(r.payload) || std::holds_alternative<LevelPayload>(r.payload) ||
          std::holds_alternative<DimensionCommentPayload>(r.payload))
        bucket += ":" + r.attribute();
      return GroupKey{bucket, ""};
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Each (group, option) class draws from its own generator derived from the
/// seed and the class key, so selections do not depend on group iteration.
inline std::vector<SourceAnnotation> balance(const std::vector<SourceAnnotation>& records,
                                             const BalancePolicy& policy) {
  std::map<detail::GroupKey, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (auto k = detail::group_of(records[i], policy.target)) classes[*k].push_back(i);

  // Quota per class.
  std::map<std::string, std::size_t> group_min;
  for (const auto& [k, idx] : classes) {
    auto it = group_min.find(k.group);
    if (it == group_min.end()) group_min[k.group] = idx.size();
    else it->second = std::min(it->second, idx.size());
  }
  // A binary attribute with only one class present still has an empty class.
  if (policy.target == BalanceTarget::equalize_binary) {
    std::map<std::string, int> present;
    for (const auto& [k, idx] : classes) ++present[k.group];
    for (const auto& [g, n] : present)
      if (n < 2) group_min[g] = 0;
  }

  std::vector<bool> keep(records.size(), true);
  for (auto& [k, idx] : classes) {
    std::size_t quota = policy.target == BalanceTarget::cap_per_attribute
                            ? policy.tolerance
                            : group_min[k.group] + policy.tolerance;
    if (idx.size() <= quota) continue;
    Rng rng(policy.seed ^ text::fnv1a64(k.group + '\x1f' + k.option));
    std::vector<std::size_t> order = idx;
    rng.shuffle(order);
    for (std::size_t j = quota; j < order.size(); ++j) keep[order[j]] = false;
  }

  std::vector<SourceAnnotation> out;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (keep[i]) out.push_back(records[i]);
  return out;
}

/// Uniform sampling across aesthetic-quality bands. `edges` split the score
/// axis into edges.size()+1 bands; every nonempty band keeps `per_band`
/// records (0 = as many as the smallest nonempty band). Records without a
/// quality score pass through.
struct QualityStrata {
  std::vector<double> edges;
  std::size_t per_band = 0;
  std::uint64_t seed = 0;
};

inline QualityStrata parse_quality_strata(const json& j, std::uint64_t default_seed) {
  if (!j.is_object()) throw ConfigError("stratify: expected object");
  QualityStrata s;
  if (!j.contains("edges") || !j["edges"].is_array()) throw ConfigError("stratify: missing edges array");
  s.edges = j["edges"].get<std::vector<double>>();
  if (!std::is_sorted(s.edges.begin(), s.edges.end())) throw ConfigError("stratify: edges must be ascending");
  s.per_band = j.value("per_band", std::size_t{0});
  s.seed = j.value("seed", default_seed);
  return s;
}

inline std::vector<SourceAnnotation> stratify(const std::vector<SourceAnnotation>& records,
                                              const QualityStrata& strata) {
  std::map<std::size_t, std::vector<std::size_t>> bands;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].quality_score) continue;
    auto band = static_cast<std::size_t>(
        std::upper_bound(strata.edges.begin(), strata.edges.end(), *records[i].quality_score) -
        strata.edges.begin());
    bands[band].push_back(i);
  }
  std::size_t quota = strata.per_band;
  if (quota == 0 && !bands.empty()) {
    quota = bands.begin()->second.size();
    for (const auto& [b, idx] : bands) quota = std::min(quota, idx.size());
  }
  std::vector<bool> keep(records.size(), true);
  for (auto& [b, idx] : bands) {
    if (idx.size() <= quota) continue;
    Rng rng(strata.seed ^ text::fnv1a64("band:" + std::to_string(b)));
    std::vector<std::size_t> order = idx;
    rng.shuffle(order);
    for (std::size_t j = quota; j < order.size(); ++j) keep[order[j]] = false;
  }
  std::vector<SourceAnnotation> out;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (keep[i]) out.push_back(records[i]);
  return out;
}

}  // namespace aesth::idcp
