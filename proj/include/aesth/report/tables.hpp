#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "aesth/core/text.hpp"
#include "aesth/eval/assessment.hpp"
#include "aesth/eval/describe.hpp"
#include "aesth/eval/perception.hpp"

namespace aesth::report {

/// Left-aligned first column, right-aligned data columns, " | " separators.
inline std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string cell = c < cells.size() ? cells[c] : std::string();
      const std::string pad(width[c] - cell.size(), ' ');
      if (c > 0) out += " | ";
      out += c == 0 ? cell + pad : pad + cell;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line(header);
  std::string rule;
  for (std::size_t c = 0; c < width.size(); ++c) {
    if (c > 0) rule += "-+-";
    rule += std::string(width[c], '-');
  }
  out += rule + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

inline std::string percent(double v) { return std::isnan(v) ? "-" : text::fixed(100.0 * v, 2); }

inline const std::vector<std::string>& perception_header() {
  static const std::vector<std::string> h{"Model",     "Content&Theme", "Composition", "Color",     "Light",
                                          "Focus",     "Sentiment",     "Yes-or-No",   "What",      "How",
                                          "In-domain", "Wild",          "Overall"};
  return h;
}

struct PerceptionRow {
  std::string label;
  eval::PerceptionReport report;
};

inline std::vector<std::string> perception_cells(const std::string& label, const eval::PerceptionReport& r,
                                                 eval::DenominatorPolicy p) {
  std::vector<std::string> row{label};
  for (const auto& c : r.by_attribute) row.push_back(percent(c.accuracy(p)));
  for (const auto& c : r.by_question_type) row.push_back(percent(c.accuracy(p)));
  for (const auto& c : r.by_split) row.push_back(percent(c.accuracy(p)));
  row.push_back(percent(r.overall.accuracy(p)));
  return row;
}

/// Accuracy in percent. A row with refusals is followed by its answered-only
/// variant and a footnote.
inline std::string render_perception_table(const std::vector<PerceptionRow>& rows) {
  std::vector<std::vector<std::string>> body;
  std::vector<std::string> notes;
  for (const auto& row : rows) {
    const auto& r = row.report;
    body.push_back(perception_cells(row.label, r, r.policy));
    if (r.refusals() > 0) {
      auto other = r.policy == eval::DenominatorPolicy::all_items ? eval::DenominatorPolicy::answered_only
                                                                  : eval::DenominatorPolicy::all_items;
      body.push_back(perception_cells(row.label + " (" + std::string(eval::to_string(other)) + ")*", r, other));
      notes.push_back("* " + row.label + " refused " + std::to_string(r.refusals()) + " of " +
                      std::to_string(r.overall.total) +
                      " questions; answered_only accuracy is calculated based on the questions it answers.");
    }
  }
  std::string out = render_table(perception_header(), body);
  for (const auto& n : notes) out += n + "\n";
  return out;
}

inline std::string render_perception_table(const std::string& label, const eval::PerceptionReport& r) {
  return render_perception_table(std::vector<PerceptionRow>{{label, r}});
}

struct AssessmentColumn {
  std::string dataset;
  eval::CorrelationResult result;
  /// true = seen in training, false = unseen; unset = no annotation.
  std::optional<bool> seen;
};

inline std::string correlation_cell(const eval::CorrelationResult& c) {
  if (c.degenerate) return "n/a (constant)";
  return text::fixed(c.plcc, 3) + "/" + text::fixed(c.srcc, 3);
}

/// One row, one column per dataset; cells are "plcc/srcc".
inline std::string render_assessment_table(const std::string& label, const std::vector<AssessmentColumn>& columns) {
  std::vector<std::string> header{"Model"};
  std::vector<std::string> row{label};
  for (const auto& c : columns) {
    std::string h = c.dataset;
    if (c.seen) h += *c.seen ? " (seen)" : " (unseen)";
    header.push_back(h);
    row.push_back(correlation_cell(c.result));
  }
  return render_table(header, {row}) + "Metrics are PLCC/SRCC.\n";
}

inline std::string render_describe_table(const std::string& label, const eval::DescribeReport& r) {
  std::vector<std::string> header{"Model", "Completeness", "Preciseness", "Relevance", "Overall"};
  std::vector<std::string> row{label};
  for (double m : r.dimension_means) row.push_back(text::fixed(m, 3));
  row.push_back(text::fixed(r.overall, 3));
  std::string out = render_table(header, {row});
  if (r.missing > 0) out += std::to_string(r.missing) + " item(s) excluded as missing.\n";
  return out;
}

}  // namespace aesth::report
