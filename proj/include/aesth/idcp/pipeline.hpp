#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aesth/client/endpoint.hpp"
#include "aesth/client/parallel.hpp"
#include "aesth/core/rng.hpp"
#include "aesth/core/text.hpp"
#include "aesth/core/types.hpp"
#include "aesth/idcp/balance.hpp"
#include "aesth/idcp/comments.hpp"
#include "aesth/idcp/filter.hpp"
#include "aesth/idcp/qa.hpp"
#include "aesth/idcp/templates.hpp"
#include "aesth/ingest/audit.hpp"

namespace aesth::idcp {

struct IdcpConfig {
  FilterRules filters;
  std::optional<QualityStrata> strata;
  /// Applied in order.
  std::vector<BalancePolicy> balance;
  TemplatePool pool;
  MatchOptions match;
  int parallel_limit = 4;
  /// Without a rewriter, emit the raw comments (joined) instead of failing
  /// every comment job.
  bool use_raw_comments = false;
  std::uint64_t seed = 0;
};

struct IdcpEndpoints {
  client::ChatClient* captioner = nullptr;
  client::ChatClient* rewriter = nullptr;
};

struct StageCounts {
  std::size_t ingested = 0;
  std::size_t deduplicated = 0;
  std::size_t filtered = 0;
  std::size_t stratified = 0;
  std::size_t balanced = 0;
  std::size_t generated = 0;

  bool monotone() const {
    return generated <= balanced && balanced <= stratified && stratified <= filtered &&
           filtered <= deduplicated && deduplicated <= ingested;
  }
};

struct FailedJob {
  std::string id;
  std::string error;
};

struct ConversionAudit {
  StageCounts attributes;
  StageCounts comments;
  std::size_t rewrite_jobs = 0;
  std::size_t rewrite_done = 0;
  std::vector<FailedJob> failed_jobs;
  std::map<std::string, std::size_t> dropped;
  std::map<std::string, std::size_t> per_question_type;
};

inline json to_json(const StageCounts& s) {
  return {{"ingested", s.ingested},     {"deduplicated", s.deduplicated}, {"filtered", s.filtered},
          {"stratified", s.stratified}, {"balanced", s.balanced},         {"generated", s.generated}};
}

inline json to_json(const ConversionAudit& a) {
  json failed = json::array();
  for (const auto& f : a.failed_jobs) failed.push_back({{"id", f.id}, {"error", f.error}});
  return {{"stages", {{"attributes", to_json(a.attributes)}, {"comments", to_json(a.comments)}}},
          {"rewrite_jobs", {{"total", a.rewrite_jobs}, {"done", a.rewrite_done}, {"failed", a.failed_jobs.size()}}},
          {"failed_jobs", failed},
          {"dropped", a.dropped},
          {"per_question_type", a.per_question_type}};
}

struct IdcpResult {
  std::vector<InstructionSample> samples;
  ConversionAudit audit;
  std::vector<RewriteJob> jobs;
};

namespace detail {

inline void count(const std::vector<SourceAnnotation>& records, std::size_t StageCounts::*field,
                  ConversionAudit& audit) {
  std::size_t attr = 0;
  for (const auto& r : records)
    if (!is_comment_kind(r.kind())) ++attr;
  audit.attributes.*field = attr;
  audit.comments.*field = records.size() - attr;
}

inline std::vector<RewriteJob> group_jobs(const std::vector<SourceAnnotation>& records) {
  std::map<std::string, std::size_t> index;
  std::vector<RewriteJob> jobs;
  for (const auto& r : records) {
    if (!is_comment_kind(r.kind())) continue;
    std::string id = sample_id(r);
    auto [it, fresh] = index.emplace(id, jobs.size());
    if (fresh) {
      RewriteJob job;
      job.id = id;
      jobs.push_back(std::move(job));
    }
    jobs[it->second].annotations.push_back(r);
  }
  std::sort(jobs.begin(), jobs.end(), [](const RewriteJob& a, const RewriteJob& b) { return a.id < b.id; });
  return jobs;
}

inline std::string join_comments(const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& c : comments) {
    if (!out.empty()) out += ' ';
    out += c;
  }
  return out;
}

}  // namespace detail

/// dedupe -> filter -> stratify -> balance -> generate. Output is sorted by
/// sample id and is a pure function of (annotations, config, endpoint replies).
inline IdcpResult run_idcp(const std::vector<SourceAnnotation>& annotations, const IdcpConfig& config,
                           IdcpEndpoints endpoints = {}) {
  IdcpResult out;
  auto& audit = out.audit;

  detail::count(annotations, &StageCounts::ingested, audit);
  auto records = ingest::deduplicate(annotations);
  detail::count(records, &StageCounts::deduplicated, audit);

  auto filtered = filter_quality(records, config.filters);
  for (const auto& d : filtered.dropped) ++audit.dropped[std::string(to_string(d.reason))];
  records = std::move(filtered.kept);
  detail::count(records, &StageCounts::filtered, audit);

  if (config.strata) records = stratify(records, *config.strata);
  detail::count(records, &StageCounts::stratified, audit);

  for (const auto& policy : config.balance) records = balance(records, policy);
  detail::count(records, &StageCounts::balanced, audit);

  for (const auto& r : records) {
    if (is_comment_kind(r.kind())) continue;
    Rng rng(config.seed ^ text::fnv1a64(sample_id(r)));
    out.samples.push_back(gen_attribute_qa(r, config.pool, rng));
  }
  audit.attributes.generated = out.samples.size();

  out.jobs = detail::group_jobs(records);
  audit.rewrite_jobs = out.jobs.size();
  if (endpoints.rewriter != nullptr) {
    parallel_for(out.jobs.size(), config.parallel_limit,
                 [&](std::size_t i) { run_rewrite_job(out.jobs[i], endpoints.captioner, *endpoints.rewriter); });
  } else {
    for (auto& job : out.jobs) {
      if (config.use_raw_comments) {
        job.rewritten = detail::join_comments(job.comments());
        job.status = JobStatus::done;
      } else {
        job.fail("no rewriter endpoint configured");
      }
    }
  }

  std::size_t comment_samples = 0;
  for (const auto& job : out.jobs) {
    if (job.status != JobStatus::done) {
      audit.failed_jobs.push_back({job.id, job.error});
      continue;
    }
    ++audit.rewrite_done;
    const auto& first = job.annotations.front();
    InstructionSample s;
    s.id = job.id;
    s.image = first.image;
    s.answer = *job.rewritten;
    s.question = match_question(s.answer, job.dimension(), config.match);
    s.provenance.source_dataset = first.dataset_id;
    s.provenance.pipeline = Pipeline::comments;
    s.provenance.attribute = job.dimension();
    out.samples.push_back(std::move(s));
    ++comment_samples;
  }
  audit.comments.generated = comment_samples;

  std::stable_sort(out.samples.begin(), out.samples.end(),
                   [](const InstructionSample& a, const InstructionSample& b) { return a.id < b.id; });
  for (const auto& s : out.samples)
    ++audit.per_question_type[s.provenance.question_type ? std::string(to_string(*s.provenance.question_type))
                                                         : std::string("comment")];
  return out;
}

/// Two-turn conversational layout used by LLaVA-style trainers.
inline json to_conversation(const InstructionSample& s, std::string_view image_token = "<image>") {
  return {{"id", s.id},
          {"image", s.image.path},
          {"conversations",
           json::array({{{"from", "human"}, {"value", std::string(image_token) + "\n" + s.question}},
                        {{"from", "gpt"}, {"value", s.answer}}})}};
}

}  // namespace aesth::idcp
