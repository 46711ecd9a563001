#include "support.hpp"

#include "aesth/report/manifest.hpp"
#include "aesth/report/tables.hpp"

using namespace aesth;
using namespace aesth::report;

namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == '\n') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

eval::PerceptionReport sample_report() {
  std::vector<PerceptionItem> items{testing::mc_item("1", {"a", "b"}, 0),
                                    testing::mc_item("2", {"a", "b"}, 0, AttributeDimension::light,
                                                     QuestionType::how, Split::wild)};
  std::vector<eval::Verdict> verdicts(2);
  verdicts[0].item_id = "1";
  verdicts[0].extracted_choice = 0;
  verdicts[0].method = eval::VerdictMethod::direct;
  verdicts[0].correct = true;
  verdicts[1].item_id = "2";
  verdicts[1].method = eval::VerdictMethod::refusal;
  return eval::aggregate(verdicts, items);
}

}  // namespace

TEST_CASE("perception table has twelve data columns and an overall", "[report]") {
  auto t = render_perception_table("m", sample_report());
  auto ls = lines(t);
  REQUIRE(ls.size() >= 4);
  CHECK(count(ls[0], " | ") == 12);
  CHECK(ls[0].rfind("Model", 0) == 0);
  CHECK(ls[0].find("Content&Theme") != std::string::npos);
  CHECK(ls[0].find("In-domain | Wild | Overall") != std::string::npos);
  CHECK(ls[2].rfind("m ", 0) == 0);
  CHECK(ls[2].find("50.00") != std::string::npos);
  CHECK(ls[3].find("(answered_only)*") != std::string::npos);
  CHECK(ls[3].find("100.00") != std::string::npos);
  CHECK(t.find("* m refused 1 of 2 questions") != std::string::npos);
}

TEST_CASE("empty table is header only", "[report]") {
  auto t = render_perception_table(std::vector<PerceptionRow>{});
  CHECK(lines(t).size() == 2);
  CHECK(render_table({"a", "b"}, {}) == "a | b\n--+--\n");
}

TEST_CASE("assessment cells read plcc/srcc", "[report]") {
  eval::CorrelationResult c;
  c.plcc = 0.7041;
  c.srcc = 0.7129;
  c.n = 100;
  c.degenerate = false;
  CHECK(correlation_cell(c) == "0.704/0.713");
  CHECK(correlation_cell(eval::CorrelationResult{}) == "n/a (constant)");

  auto t = render_assessment_table("m", {{"AVA", c, true}, {"TAD66K", c, false}});
  auto ls = lines(t);
  CHECK(ls[0] == "Model |  AVA (seen) | TAD66K (unseen)");
  CHECK(count(ls[2], "0.704/0.713") == 2);
  CHECK(ls.back() == "Metrics are PLCC/SRCC.");
}

TEST_CASE("describe table uses three decimals", "[report]") {
  eval::DescribeReport r;
  r.dimension_means = {1.581, 0.821, 1.046};
  r.overall = 3.448;
  r.scored = 1000;
  auto t = render_describe_table("m", r);
  CHECK(lines(t)[2] == "m     |        1.581 |       0.821 |     1.046 |   3.448");
  CHECK(t.find("excluded") == std::string::npos);
  r.missing = 2;
  CHECK(render_describe_table("m", r).find("2 item(s) excluded as missing.") != std::string::npos);
}

TEST_CASE("rendering is a pure function of its input", "[report]") {
  auto r = sample_report();
  CHECK(render_perception_table("m", r) == render_perception_table("m", r));
  CHECK(percent(std::nan("")) == "-");
  CHECK(percent(0.36904761904761907) == "36.90");
}

TEST_CASE("manifest carries seed, digest and version", "[report]") {
  RunManifest m;
  m.command = "eval perception";
  m.seed = 7;
  m.config = {{"perception", {{"policy", "all_items"}}}};
  m.reproducible = true;
  auto j = to_json(m);
  CHECK(j["seed"] == 7);
  CHECK(j["version"] == std::string(kToolVersion));
  CHECK(j["config_digest"] == digest_text(m.config.dump()));
  CHECK(j["timing"]["elapsed_s"] == 0.0);
  CHECK(j["timing"]["started_unix"] == 0);
  CHECK(to_json(m) == j);
  m.config["perception"]["policy"] = "answered_only";
  CHECK(to_json(m)["config_digest"] != j["config_digest"]);
}
