#include "support.hpp"

#include <sstream>

#include "aesth/core/jsonl.hpp"
#include "aesth/core/rng.hpp"

using namespace aesth;
using testing::TempDir;

namespace {

std::string random_text(Rng& rng) {
  static const std::vector<std::string> words{"soft", "light", "Ünïcode", "tab\there", "new\nline", "quote\"d",
                                              "back\\slash", "emoji 📷", "", " padded "};
  std::string s;
  auto n = rng.uniform_index(4) + 1;
  for (std::uint64_t i = 0; i < n; ++i) s += words[rng.uniform_index(words.size())] + " ";
  return s;
}

ImageRef random_image(Rng& rng, std::size_t i) {
  ImageRef r{"img_" + std::to_string(i), "p/" + std::to_string(rng.uniform_index(1000)) + ".jpg", json::object()};
  if (rng.uniform_index(3) == 0) r.extra["width"] = rng.uniform_index(4000);
  return r;
}

SourceAnnotation random_annotation(Rng& rng, std::size_t i) {
  SourceAnnotation a;
  a.dataset_id = rng.uniform_index(2) ? "AADB" : "PCCD";
  a.image = random_image(rng, i);
  switch (rng.uniform_index(6)) {
    case 0: a.payload = CommentPayload{random_text(rng)}; break;
    case 1: a.payload = StylePayload{random_text(rng)}; break;
    case 2: a.payload = BinaryPayload{"balancing", rng.uniform_index(2) == 1}; break;
    case 3: a.payload = LevelPayload{"composition", "fair"}; break;
    case 4: a.payload = DimensionCommentPayload{"use of camera", random_text(rng)}; break;
    default: {
      ColorSchemePayload c{"complementary", std::nullopt};
      if (rng.uniform_index(2)) c.colors = std::make_pair("red", "green");
      a.payload = c;
    }
  }
  if (rng.uniform_index(2)) a.quality_score = static_cast<double>(rng.uniform_index(1000)) / 100.0;
  if (rng.uniform_index(4) == 0) a.extra["source_row"] = i;
  return a;
}

InstructionSample random_sample(Rng& rng, std::size_t i) {
  InstructionSample s;
  s.id = "s" + std::to_string(i);
  s.image = random_image(rng, i);
  s.question = "Q " + random_text(rng);
  s.answer = "A " + random_text(rng);
  s.provenance.source_dataset = "AVA";
  s.provenance.pipeline = rng.uniform_index(2) ? Pipeline::attributes : Pipeline::comments;
  if (rng.uniform_index(2)) s.provenance.attribute = "composition";
  if (rng.uniform_index(2)) s.provenance.question_type = enum_at<QuestionType>(rng.uniform_index(3));
  if (rng.uniform_index(3) == 0) s.extra["lang"] = "en";
  return s;
}

PerceptionItem random_item(Rng& rng, std::size_t i) {
  PerceptionItem p;
  p.id = "p" + std::to_string(i);
  p.image = random_image(rng, i);
  p.question = "Q" + random_text(rng);
  auto n = 2 + rng.uniform_index(3);
  for (std::uint64_t k = 0; k < n; ++k) p.options.push_back("opt" + std::to_string(k));
  p.answer_index = static_cast<int>(rng.uniform_index(n));
  p.attribute = enum_at<AttributeDimension>(rng.uniform_index(6));
  p.question_type = enum_at<QuestionType>(rng.uniform_index(3));
  p.split = enum_at<Split>(rng.uniform_index(2));
  return p;
}

template <class T>
std::vector<T> round_trip(const std::vector<T>& records) {
  std::stringstream ss;
  write_jsonl(records, ss);
  return read_jsonl<T>(ss).records;
}

json valid_item_json() {
  return json::parse(R"({"id":"p1","image":{"id":"i1","path":"a.jpg"},"question":"Q?",
    "options":["Yes","No"],"answer_index":1,"attribute":"color","question_type":"yes_no","split":"wild"})");
}

}  // namespace

TEST_CASE("enumerations have the fixed variant counts", "[core]") {
  CHECK(enum_count<AttributeDimension>() == 6);
  CHECK(enum_count<QuestionType>() == 3);
  CHECK(enum_count<Split>() == 2);
  CHECK(enum_count<AnnotationKind>() == 6);
  CHECK(enum_count<RatingLevel>() == 5);
}

TEST_CASE("rating words and scores form an ordered bijection", "[core]") {
  const std::vector<std::pair<std::string, int>> expected{
      {"bad", 1}, {"poor", 2}, {"fair", 3}, {"good", 4}, {"excellent", 5}};
  for (const auto& [word, score] : expected) {
    auto r = parse_enum<RatingLevel>(word);
    REQUIRE(r);
    CHECK(rating_score(*r) == score);
    CHECK(to_string(*rating_from_score(score)) == word);
  }
  CHECK_FALSE(rating_from_score(0));
  CHECK_FALSE(rating_from_score(6));
  auto all = all_values<RatingLevel>();
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(rating_score(all[i - 1]) < rating_score(all[i]));
}

TEST_CASE("JSONL round trip is the identity for every record type", "[core]") {
  Rng rng(20240611);
  std::vector<SourceAnnotation> annotations;
  std::vector<InstructionSample> samples;
  std::vector<PerceptionItem> items;
  std::vector<AssessmentItem> assess;
  std::vector<DescribeItem> describe;
  for (std::size_t i = 0; i < 100; ++i) {
    annotations.push_back(random_annotation(rng, i));
    samples.push_back(random_sample(rng, i));
    items.push_back(random_item(rng, i));
    assess.push_back({"a" + std::to_string(i), random_image(rng, i), 0.5 + static_cast<double>(i) / 25.0, 5.0 + 5.0 * static_cast<double>(i % 2), json::object()});
    describe.push_back({"d" + std::to_string(i), random_image(rng, i), "golden " + random_text(rng),
                        enum_at<QualityBand>(rng.uniform_index(3)), json::object()});
  }
  CHECK(round_trip(annotations) == annotations);
  CHECK(round_trip(samples) == samples);
  CHECK(round_trip(items) == items);
  CHECK(round_trip(assess) == assess);
  CHECK(round_trip(describe) == describe);
}

TEST_CASE("write then read 100 instruction samples through a file", "[core]") {
  TempDir dir;
  Rng rng(5);
  std::vector<InstructionSample> samples;
  for (std::size_t i = 0; i < 100; ++i) samples.push_back(random_sample(rng, i));
  write_jsonl(samples, dir / "s.jsonl");
  CHECK(read_jsonl<InstructionSample>(dir / "s.jsonl").records == samples);
}

TEST_CASE("embedded newlines stay on one line", "[core]") {
  InstructionSample s;
  s.id = "x";
  s.image = testing::image("i");
  s.question = "line one\nline two";
  s.answer = "a\r\nb";
  s.provenance.source_dataset = "AVA";
  std::stringstream ss;
  write_jsonl(std::vector<InstructionSample>{s, s}, ss);
  std::string text = ss.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(round_trip(std::vector<InstructionSample>{s}).front() == s);
}

TEST_CASE("read_jsonl keeps file order and handles an empty file", "[core]") {
  TempDir dir;
  auto items = read_jsonl<PerceptionItem>(testing::samples_dir() / "perception_items.jsonl").records;
  REQUIRE(items.size() == 7);
  for (std::size_t i = 0; i < items.size(); ++i) CHECK(items[i].id == "p" + std::to_string(i + 1));
  write_text_file(dir / "empty.jsonl", "");
  CHECK(read_jsonl<PerceptionItem>(dir / "empty.jsonl").records.empty());
}

TEST_CASE("schema errors carry the 1-based line number", "[core]") {
  json bad = valid_item_json();
  bad.erase("answer_index");
  std::stringstream ss;
  ss << valid_item_json().dump() << "\n" << bad.dump() << "\n" << valid_item_json().dump() << "\n";
  try {
    read_jsonl<PerceptionItem>(ss);
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()) == "line 2: missing field answer_index");
  }
  ss.clear();
  ss.seekg(0);
  auto r = read_jsonl<PerceptionItem>(ss, ReadMode::permissive);
  CHECK(r.records.size() == 2);
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].line() == 2);
}

TEST_CASE("perception item validation rejects exactly the invariant violations", "[core]") {
  auto accepts = [](const json& j) {
    try {
      schema::from_json<PerceptionItem>(j);
      return true;
    } catch (const schema::FieldError&) {
      return false;
    }
  };
  // Each mutation breaks one invariant; the unmutated item is valid.
  const std::vector<std::pair<std::string, std::function<void(json&)>>> violations{
      {"one option", [](json& j) { j["options"] = {"Yes"}; j["answer_index"] = 0; }},
      {"five options", [](json& j) { j["options"] = {"a", "b", "c", "d", "e"}; }},
      {"duplicate options", [](json& j) { j["options"] = {"Yes", "Yes"}; }},
      {"negative answer", [](json& j) { j["answer_index"] = -1; }},
      {"answer past end", [](json& j) { j["answer_index"] = 2; }},
      {"fractional answer", [](json& j) { j["answer_index"] = 0.5; }},
      {"unknown attribute", [](json& j) { j["attribute"] = "texture"; }},
      {"unknown question type", [](json& j) { j["question_type"] = "why"; }},
      {"unknown split", [](json& j) { j["split"] = "test"; }},
      {"empty id", [](json& j) { j["id"] = ""; }},
      {"image without id", [](json& j) { j["image"].erase("id"); }},
      {"non-string option", [](json& j) { j["options"] = {"Yes", 3}; }},
  };
  CHECK(accepts(valid_item_json()));
  for (const auto& [name, mutate] : violations) {
    json j = valid_item_json();
    mutate(j);
    INFO(name);
    CHECK_FALSE(accepts(j));
  }
  // Valid variations stay accepted.
  for (int n = 2; n <= 4; ++n) {
    json j = valid_item_json();
    j["options"] = json::array();
    for (int k = 0; k < n; ++k) j["options"].push_back("o" + std::to_string(k));
    for (int a = 0; a < n; ++a) {
      j["answer_index"] = a;
      CHECK(accepts(j));
    }
  }
}

TEST_CASE("assessment and describe items enforce their invariants", "[core]") {
  auto assess = [](double mos, double scale) {
    json j = {{"id", "a"}, {"image", {{"id", "i"}, {"path", "p"}}}, {"mos", mos}, {"scale_max", scale}};
    return j;
  };
  CHECK_NOTHROW(schema::from_json<AssessmentItem>(assess(10, 10)));
  CHECK_NOTHROW(schema::from_json<AssessmentItem>(assess(0.1, 5)));
  CHECK_THROWS_AS(schema::from_json<AssessmentItem>(assess(0, 10)), schema::FieldError);
  CHECK_THROWS_AS(schema::from_json<AssessmentItem>(assess(5.5, 5)), schema::FieldError);
  CHECK_THROWS_AS(schema::from_json<AssessmentItem>(assess(1, 0)), schema::FieldError);

  json d = {{"id", "d"}, {"image", {{"id", "i"}, {"path", "p"}}}, {"golden", "x"}, {"quality_band", "low"}};
  CHECK_NOTHROW(schema::from_json<DescribeItem>(d));
  d["golden"] = "  ";
  CHECK_THROWS_AS(schema::from_json<DescribeItem>(d), schema::FieldError);
  d["golden"] = "x";
  d["quality_band"] = "top";
  CHECK_THROWS_AS(schema::from_json<DescribeItem>(d), schema::FieldError);
}

TEST_CASE("unknown fields survive a read/write cycle", "[core]") {
  json j = valid_item_json();
  j["source"] = {{"batch", 3}};
  j["image"]["exif"] = "f/2.8";
  auto item = schema::from_json<PerceptionItem>(j);
  CHECK(schema::to_json(item) == j);
}

TEST_CASE("writing to an unwritable path names the path", "[core]") {
  std::vector<InstructionSample> none;
  try {
    write_jsonl(none, std::filesystem::path("/nonexistent-dir/x/out.jsonl"));
    FAIL("expected an I/O error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/x/out.jsonl") != std::string::npos);
  }
}

TEST_CASE("seeded generator is reproducible and unbiased in range", "[core]") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng r(7);
  std::array<int, 3> hist{};
  for (int i = 0; i < 30000; ++i) ++hist[r.uniform_index(3)];
  for (int h : hist) CHECK(std::abs(h - 10000) < 400);
  std::vector<int> v{1, 2, 3, 4, 5, 6};
  Rng s1(9), s2(9);
  auto v1 = v, v2 = v;
  s1.shuffle(v1);
  s2.shuffle(v2);
  CHECK(v1 == v2);
  std::sort(v1.begin(), v1.end());
  CHECK(v1 == v);
}
