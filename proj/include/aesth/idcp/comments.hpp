#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aesth/client/endpoint.hpp"
#include "aesth/core/error.hpp"
#include "aesth/core/text.hpp"
#include "aesth/core/types.hpp"

namespace aesth::idcp {

/// Content-only caption request; sent with the image.
inline constexpr std::string_view kCaptionPrompt =
    "Provide a detailed description of this image, including the spatial and relative position of the "
    "elements in the picture.\n"
    "Do not output any information related to aesthetics, such as atmosphere, emotion, and the beauty of "
    "the scenery, etc.";

/// Comment rewriting instructions. The caption and raw comments follow.
inline constexpr std::string_view kRewritePrompt =
    "Assistant is a professional aesthetic critic.\n"
    "The assistant is a highly professional individual who possesses a remarkable eye for aesthetics and "
    "aligns well with the views of the general public. Instructions:\n"
    "- You're given a caption of an image and some comments on the image from a photography website.\n"
    "- Step1: Rewrite the comments into professional aesthetic comments and ignore those comments that are "
    "not highly related to aesthetics or only expressions of personal affection.\n"
    "Please be objective and do not use colloquial words.\n"
    "- Step2: Summarize the rewritten aesthetic comments and your answers in Step2 into one complete "
    "aesthetic comment written by a professional aesthetic critic.\n"
    "You may refer to the image caption as though you are truly seeing this image, but please focus solely "
    "on the aesthetic-related content.\n"
    "When the image caption conflicts with the given comments, follow the comments.\n"
    "Do not imagine and give irrelevant or groundless responses regarding the given comments.";

inline constexpr std::string_view kNoCaption = "(no caption available)";

enum class JobStatus { pending, done, failed };

inline std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::pending: return "pending";
    case JobStatus::done: return "done";
    case JobStatus::failed: return "failed";
  }
  return "?";
}

/// One rewrite unit: every comment of one kind (and dimension) on one image.
struct RewriteJob {
  std::string id;
  std::vector<SourceAnnotation> annotations;
  std::optional<std::string> caption;
  std::optional<std::string> rewritten;
  JobStatus status = JobStatus::pending;
  std::string error;

  std::optional<std::string> dimension() const {
    if (annotations.empty()) return std::nullopt;
    if (const auto* d = std::get_if<DimensionCommentPayload>(&annotations.front().payload))
      return std::string(text::trim(d->dimension));
    return std::nullopt;
  }

  std::vector<std::string> comments() const {
    std::vector<std::string> out;
    for (const auto& a : annotations) {
      if (const auto* c = std::get_if<CommentPayload>(&a.payload)) out.emplace_back(text::trim(c->text));
      if (const auto* d = std::get_if<DimensionCommentPayload>(&a.payload)) out.emplace_back(text::trim(d->text));
    }
    return out;
  }

  void fail(std::string why) {
    status = JobStatus::failed;
    error = std::move(why);
  }
};

inline std::string rewrite_prompt(const std::optional<std::string>& caption,
                                  const std::vector<std::string>& comments) {
  std::string p(kRewritePrompt);
  p += "\n\nCaption: ";
  p += caption ? *caption : std::string(kNoCaption);
  p += "\nComments:";
  for (const auto& c : comments) p += "\n- " + c;
  return p;
}

/// Throws EndpointError on exhaustion, IncompleteResponseError on refusal or
/// empty output.
inline std::string caption_image(const ImageRef& image, client::ChatClient& captioner) {
  client::ChatRequest req;
  req.prompt = std::string(kCaptionPrompt);
  req.image = image;
  auto r = captioner.send(req);
  if (r.refusal) throw IncompleteResponseError("captioner refused image " + image.id);
  auto t = text::trim(r.text);
  if (t.empty()) throw IncompleteResponseError("captioner returned empty caption for image " + image.id);
  return std::string(t);
}

inline std::string rewrite_comment(const std::vector<std::string>& comments, const std::optional<std::string>& caption,
                                   client::ChatClient& rewriter) {
  if (comments.empty()) throw InputError("rewrite_comment: no comments");
  client::ChatRequest req;
  req.prompt = rewrite_prompt(caption, comments);
  auto r = rewriter.send(req);
  if (r.refusal) throw IncompleteResponseError("rewriter refused");
  auto t = text::trim(r.text);
  if (t.empty()) throw IncompleteResponseError("rewriter returned empty text");
  return std::string(t);
}

inline std::string rewrite_comment(const SourceAnnotation& annotation, const std::optional<std::string>& caption,
                                   client::ChatClient& rewriter) {
  if (!is_comment_kind(annotation.kind()))
    throw InputError("rewrite_comment: " + std::string(to_string(annotation.kind())) + " is not a comment kind");
  RewriteJob job;
  job.annotations.push_back(annotation);
  return rewrite_comment(job.comments(), caption, rewriter);
}

/// Runs caption (optional) and rewrite for one job. Endpoint trouble marks
/// the job failed; it never propagates.
inline void run_rewrite_job(RewriteJob& job, client::ChatClient* captioner, client::ChatClient& rewriter) {
  try {
    if (captioner != nullptr) job.caption = caption_image(job.annotations.front().image, *captioner);
    job.rewritten = rewrite_comment(job.comments(), job.caption, rewriter);
    job.status = JobStatus::done;
  } catch (const EndpointError& e) {
    job.fail(e.what());
  } catch (const IncompleteResponseError& e) {
    job.fail(e.what());
  } catch (const InputError& e) {
    job.fail(e.what());
  }
}

// ---------------------------------------------------------------------------
// Question matching
// ---------------------------------------------------------------------------

struct MatchOptions {
  std::size_t length_threshold_words = 100;
  /// Matched case-insensitively at word starts ("improve" hits "improvement").
  std::vector<std::string> suggestion_keywords{"suggest", "improve", "would be better", "try"};
};

inline constexpr std::string_view kOverallQuestion =
    "What is your overall impression of this image from an aesthetic viewpoint?";
inline constexpr std::string_view kOverallDetailedQuestion =
    "Please provide a detailed aesthetic evaluation of this image.";
inline constexpr std::string_view kDimensionQuestion =
    "How would you evaluate the aesthetic expression of the {dimension} of this image?";
inline constexpr std::string_view kDimensionDetailedQuestion =
    "Please give a detailed evaluation of the aesthetic expression of the {dimension} of this image.";
inline constexpr std::string_view kSuggestionSuffix = "Please provide some aesthetic improvement suggestions.";

inline bool has_word_prefix_ci(std::string_view haystack, std::string_view needle) {
  if (needle.empty() || haystack.size() < needle.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (i > 0 && text::is_alpha(haystack[i - 1])) continue;
    if (text::iequals(haystack.substr(i, needle.size()), needle)) return true;
  }
  return false;
}

inline bool mentions_suggestion(std::string_view comment, const MatchOptions& opts) {
  for (const auto& k : opts.suggestion_keywords)
    if (has_word_prefix_ci(comment, k)) return true;
  return false;
}

inline std::string match_question(std::string_view cleaned_comment, const std::optional<std::string>& dimension,
                                  const MatchOptions& opts = {}) {
  if (text::is_blank(cleaned_comment)) throw InputError("match_question: empty comment");
  const bool detailed = text::word_count(cleaned_comment) > opts.length_threshold_words;
  std::string q;
  if (dimension && !text::is_blank(*dimension)) {
    q = text::replace_all(std::string(detailed ? kDimensionDetailedQuestion : kDimensionQuestion), "{dimension}",
                          std::string(text::trim(*dimension)));
  } else {
    q = std::string(detailed ? kOverallDetailedQuestion : kOverallQuestion);
  }
  if (mentions_suggestion(cleaned_comment, opts)) {
    q += " ";
    q += kSuggestionSuffix;
  }
  return q;
}

}  // namespace aesth::idcp
