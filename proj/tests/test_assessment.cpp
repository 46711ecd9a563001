#include "support.hpp"

#include <cmath>

#include "aesth/core/rng.hpp"
#include "aesth/eval/assessment.hpp"
#include "oracles.hpp"

using namespace aesth;
using namespace aesth::eval;

namespace {

client::RatingLogits logits(std::array<double, 5> v) {
  client::RatingLogits l;
  l.values = v;
  return l;
}

std::array<double, 5> random_logits(Rng& rng, double spread) {
  std::array<double, 5> v{};
  for (auto& x : v) x = (rng.uniform01() * 2 - 1) * spread;
  return v;
}

AssessmentItem assessment_item(const std::string& id, double mos) {
  AssessmentItem it;
  it.id = id;
  it.image = testing::image(id);
  it.mos = mos;
  it.scale_max = 10;
  return it;
}

}  // namespace

TEST_CASE("pooled score examples", "[assessment]") {
  auto uniform = pool_score(logits({0, 0, 0, 0, 0}));
  CHECK(uniform.value == 3.0);
  for (double p : uniform.probabilities) CHECK(p == Catch::Approx(0.2).margin(1e-15));
  CHECK(pool_score(logits({-100, -100, -100, -100, 100})).value == Catch::Approx(5.0).margin(1e-9));
  CHECK(pool_score(logits({100, -100, -100, -100, -100})).value == Catch::Approx(1.0).margin(1e-9));
  CHECK(pool_score(logits({1, 2, 3, 4, 5})).value == Catch::Approx(4.451941567662194731).margin(1e-12));
  CHECK(static_cast<double>(oracle::pooled({1, 2, 3, 4, 5})) == Catch::Approx(4.451941567662194731).margin(1e-15));
}

TEST_CASE("non-finite logits are input errors", "[assessment]") {
  CHECK_THROWS_AS(pool_score(logits({0, 0, std::nan(""), 0, 0})), InputError);
  CHECK_THROWS_AS(pool_score(logits({0, 0, 0, INFINITY, 0})), InputError);
}

TEST_CASE("pooled score matches the high-precision oracle", "[assessment]") {
  Rng rng(2024);
  for (int i = 0; i < 300; ++i) {
    auto v = random_logits(rng, i % 3 == 0 ? 50.0 : 8.0);
    auto s = pool_score(logits(v));
    CHECK(std::abs(s.value - static_cast<double>(oracle::pooled(v))) <= 1e-9);
    double sum = 0;
    for (double p : s.probabilities) sum += p;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    CHECK(s.value >= 1.0);
    CHECK(s.value <= 5.0);
  }
}

TEST_CASE("pooled score is shift invariant and monotone", "[assessment]") {
  Rng rng(77);
  for (int i = 0; i < 300; ++i) {
    auto v = random_logits(rng, 6.0);
    double c = (rng.uniform01() * 2 - 1) * 20;
    auto shifted = v;
    for (auto& x : shifted) x += c;
    CHECK(std::abs(pool_score(logits(v)).value - pool_score(logits(shifted)).value) <= 1e-12);

    double base = pool_score(logits(v)).value;
    auto up = v;
    up[4] += 0.5;
    CHECK(pool_score(logits(up)).value > base);
    auto down = v;
    down[0] += 0.5;
    CHECK(pool_score(logits(down)).value < base);
    CHECK(base > 1.0);
    CHECK(base < 5.0);
  }
}

TEST_CASE("correlation examples", "[assessment]") {
  CHECK(plcc({1, 2, 3, 4}, {3, 5, 7, 9}) == Catch::Approx(1.0).margin(1e-15));
  CHECK(plcc({1, 2, 3, 4}, {-1, -2, -3, -4}) == Catch::Approx(-1.0).margin(1e-15));
  CHECK(plcc({1, 2, 4}, {2, 1, 5}) == Catch::Approx(0.8386278693775346366).margin(1e-15));
  CHECK(srcc({1, 2, 3}, {3, 2, 1}) == Catch::Approx(-1.0).margin(1e-15));
  CHECK(srcc({1, 2, 3, 4}, {1, 4, 9, 16}) == Catch::Approx(1.0).margin(1e-15));
  CHECK(srcc({1, 2, 2, 3}, {1, 2, 3, 4}) == Catch::Approx(0.9486832980505137996).margin(1e-15));
}

TEST_CASE("correlation inputs are validated", "[assessment]") {
  CHECK_THROWS_AS(plcc({1, 2, 3}, {1, 2}), InputError);
  CHECK_THROWS_AS(srcc({1, 2, 3}, {1, 2}), InputError);
  CHECK_THROWS_AS(plcc({1}, {1}), InputError);
  auto c = correlate({2, 2, 2}, {1, 2, 3});
  CHECK(c.degenerate);
  CHECK(std::isnan(c.plcc));
  CHECK(c.n == 3);
  CHECK_FALSE(correlate({1, 3}, {2, 9}).degenerate);
  CHECK(correlate({1, 3}, {2, 9}).plcc == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("correlations match brute-force references on tied data", "[assessment]") {
  Rng rng(4242);
  int tied = 0;
  for (int i = 0; i < 300; ++i) {
    std::size_t n = 2 + rng.uniform_index(7);
    std::vector<double> x(n), y(n);
    bool ties = rng.uniform_index(2) == 0;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = ties ? static_cast<double>(rng.uniform_index(3)) : rng.uniform01() * 10;
      y[k] = ties ? static_cast<double>(rng.uniform_index(4)) : rng.uniform01() * 10;
    }
    auto c = correlate(x, y);
    if (c.degenerate) continue;
    if (ties) ++tied;
    CHECK(std::abs(c.plcc - static_cast<double>(oracle::pearson(x, y))) <= 1e-9);
    CHECK(std::abs(c.srcc - static_cast<double>(oracle::spearman(x, y))) <= 1e-9);
    CHECK(std::abs(c.plcc) <= 1.0);
    CHECK(std::abs(c.srcc) <= 1.0);
  }
  CHECK(tied > 50);
}

TEST_CASE("correlations are invariant under allowed transforms", "[assessment]") {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    std::size_t n = 3 + rng.uniform_index(10);
    std::vector<double> x(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = rng.uniform01() * 4;
      y[k] = x[k] + rng.uniform01();
    }
    double a = 0.5 + rng.uniform01() * 3, b = (rng.uniform01() - 0.5) * 10;
    std::vector<double> affine(n), cubed(n);
    for (std::size_t k = 0; k < n; ++k) {
      affine[k] = a * x[k] + b;
      cubed[k] = std::exp(x[k]) + x[k] * x[k] * x[k];
    }
    CHECK(plcc(affine, y) == Catch::Approx(plcc(x, y)).margin(1e-9));
    CHECK(plcc(y, affine) == Catch::Approx(plcc(x, y)).margin(1e-9));
    CHECK(srcc(cubed, y) == Catch::Approx(srcc(x, y)).margin(1e-12));
    CHECK(srcc(y, cubed) == Catch::Approx(srcc(y, x)).margin(1e-12));
  }
}

TEST_CASE("logit scores that follow mos order rank perfectly", "[assessment]") {
  std::vector<AssessmentItem> items;
  std::string rules = R"({"rules":[)";
  for (int i = 0; i < 6; ++i) {
    std::string id = "i" + std::to_string(i);
    items.push_back(assessment_item(id, 1.0 + i));
    if (i) rules += ",";
    rules += R"({"match":{"image_id":")" + id + R"("},"respond":{"logits":{"bad":0,"poor":0,"fair":0,"good":0,"excellent":)" +
             std::to_string(i) + "}}}";
  }
  rules += "]}";
  auto cfg = testing::mock_config();
  cfg.supports_logits = true;
  auto ep = client::mock_endpoint(cfg, json::parse(rules));
  auto r = eval_assessment(items, *ep, AssessmentMode::logits);
  CHECK(r.correlation.srcc == Catch::Approx(1.0).margin(1e-15));
  CHECK(r.missing == 0);
  CHECK(r.mode == AssessmentMode::logits);
  CHECK(to_json(r)["deviation"].get<std::string>().find("logprobs") != std::string::npos);
}

TEST_CASE("logits mode requires logprob support", "[assessment]") {
  auto ep = client::mock_endpoint(testing::mock_config(), client::always("good"));
  CHECK_THROWS_AS(eval_assessment({assessment_item("a", 2)}, *ep, AssessmentMode::logits), CapabilityError);
}

TEST_CASE("text mode maps the first rating word", "[assessment]") {
  CHECK(parse_text_rating("The aesthetic quality is Good, not excellent.") == RatingLevel::good);
  CHECK(parse_text_rating("poorly lit") == std::nullopt);
  CHECK(parse_text_rating("bad") == RatingLevel::bad);

  auto ep = client::mock_endpoint(testing::mock_config(), json::parse(R"({"rules":[
      {"match":{"image_id":"a"},"respond":"excellent"},
      {"match":{"image_id":"b"},"respond":"fair"},
      {"match":{"image_id":"c"},"respond":"I would rather not say."},
      {"match":{"image_id":"d"},"respond":{"refusal":true}},
      {"respond":"poor"}]})"));
  std::vector<AssessmentItem> items{assessment_item("a", 9), assessment_item("b", 5), assessment_item("c", 4),
                                    assessment_item("d", 3), assessment_item("e", 2)};
  auto r = eval_assessment(items, *ep, AssessmentMode::text_rating);
  CHECK(r.missing == 2);
  CHECK(r.correlation.n == 3);
  CHECK(r.items[0].score == 5.0);
  CHECK(r.items[1].score == 3.0);
  CHECK(r.items[2].missing_reason == "no rating word in reply");
  CHECK(r.items[3].missing_reason == "refused");
  CHECK(r.warnings.size() == 2);
  CHECK(r.correlation.srcc == Catch::Approx(1.0).margin(1e-15));
  CHECK(to_json(r)["mode"] == "text");
}

TEST_CASE("two scored items correlate at plus or minus one", "[assessment]") {
  auto ep = client::mock_endpoint(testing::mock_config(), json::parse(R"({"rules":[
      {"match":{"image_id":"a"},"respond":"good"},{"respond":"bad"}]})"));
  auto r = eval_assessment({assessment_item("a", 1), assessment_item("b", 8)}, *ep, AssessmentMode::text_rating);
  CHECK(std::abs(r.correlation.plcc) == Catch::Approx(1.0).margin(1e-15));
  CHECK(r.correlation.plcc < 0);
}
