#include <doctest.h>

#include "csi/record.hpp"
#include "generators.hpp"

using namespace csi;
using csi::testing::Gen;

TEST_CASE("fnv1a64 matches published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(derive_paper_id("") == "cbf29ce484222325");
  CHECK(derive_paper_id("a") == "af63dc4c8601ec8c");
}

TEST_CASE("derived ids are 16 lowercase hex digits and stable") {
  Gen g(7);
  for (int i = 0; i < 200; ++i) {
    std::string key = "conf/x/" + std::to_string(g.bits());
    std::string id = derive_paper_id(key);
    REQUIRE(id.size() == 16);
    CHECK(id.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(id == derive_paper_id(key));
  }
}

TEST_CASE("enum names round-trip") {
  for (auto t : all_paper_types()) CHECK(parse_paper_type(to_string(t)) == t);
  for (auto a : all_access_types()) CHECK(parse_access_type(to_string(a)) == a);
  CHECK(all_paper_types().size() == 7);
  CHECK(all_access_types().size() == 3);
  CHECK_FALSE(parse_access_type("unknownown"));
  CHECK_FALSE(parse_paper_type("inproceedings"));
}

TEST_CASE("jsonl defaults absent optionals") {
  auto r = from_jsonl(
      R"({"id":"p1","title":"T","year":2019,"authors":["A"],"in_citations":0,"out_citations":0})");
  CHECK(r.id == "p1");
  CHECK(r.title == "T");
  CHECK(r.year == 2019);
  CHECK(r.authors == std::vector<std::string>{"A"});
  CHECK(r.paper_type == PaperType::other);
  CHECK(r.access_type == AccessType::unknown);
  CHECK(r.fields_of_study.empty());
  CHECK_FALSE(r.venue);
  CHECK_FALSE(r.publisher);
  CHECK_FALSE(r.abstract);
  CHECK_FALSE(r.url);
}

TEST_CASE("jsonl rejects an out-of-range year") {
  try {
    from_jsonl(R"({"id":"p1","title":"T","year":99999})");
    FAIL("expected SchemaViolation");
  } catch (const SchemaViolation& e) {
    CHECK(e.field() == "year");
    CHECK(e.reason() == "out of range");
    CHECK(e.code() == Errc::schema_violation);
  }
}

TEST_CASE("jsonl schema violations name the field") {
  struct Case {
    const char* line;
    const char* field;
  };
  const Case cases[] = {
      {R"({"title":"T","year":2000})", "id"},
      {R"({"id":"x","year":2000})", "title"},
      {R"({"id":"x","title":"","year":2000})", "title"},
      {R"({"id":"x","title":"T"})", "year"},
      {R"({"id":"x","title":"T","year":"2000"})", "year"},
      {R"({"id":"x","title":"T","year":999})", "year"},
      {R"({"id":"x","title":"T","year":3001})", "year"},
      {R"({"id":"x","title":"T","year":2000,"in_citations":-1})", "in_citations"},
      {R"({"id":"x","title":"T","year":2000,"out_citations":1.5})", "out_citations"},
      {R"({"id":"x","title":"T","year":2000,"authors":["A",""]})", "authors"},
      {R"({"id":"x","title":"T","year":2000,"authors":"A"})", "authors"},
      {R"({"id":"x","title":"T","year":2000,"paper_type":"inproceedings"})", "paper_type"},
      {R"({"id":"x","title":"T","year":2000,"access_type":"unknownown"})", "access_type"},
      {R"({"id":"x","title":"T","year":2000,"fields_of_study":[""]})", "fields_of_study"},
      {R"({"id":"x","title":"T","year":2000,"venue":""})", "venue"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.line);
    try {
      from_jsonl(c.line);
      FAIL("expected SchemaViolation");
    } catch (const SchemaViolation& e) {
      CHECK(e.field() == c.field);
    }
  }
  CHECK_THROWS_AS(from_jsonl("not json"), SchemaViolation);
  CHECK_THROWS_AS(from_jsonl("[1,2]"), SchemaViolation);
}

TEST_CASE("jsonl ignores unknown keys and canonicalizes fields of study") {
  auto r = from_jsonl(
      R"({"id":"x","title":"T","year":2000,"extra":{"a":1},"fields_of_study":["b","a","b"]})");
  CHECK(r.fields_of_study == std::vector<std::string>{"a", "b"});
}

TEST_CASE("jsonl keeps boundary years") {
  CHECK(from_jsonl(R"({"id":"x","title":"T","year":1000})").year == 1000);
  CHECK(from_jsonl(R"({"id":"x","title":"T","year":3000})").year == 3000);
}

TEST_CASE("to_jsonl omits absent optionals and uses a fixed key order") {
  PaperRecord r;
  r.id = "p1";
  r.title = "T";
  r.year = 2019;
  r.authors = {"A"};
  CHECK(to_jsonl(r) ==
        R"({"id":"p1","title":"T","year":2019,"authors":["A"],"paper_type":"other",)"
        R"("fields_of_study":[],"access_type":"unknown","in_citations":0,"out_citations":0})");
}

TEST_CASE("jsonl round-trips awkward records") {
  Gen g(2024);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    PaperRecord r = testing::awkward_record(g, i);
    validate(r);
    std::string line = to_jsonl(r);
    CAPTURE(line);
    REQUIRE(line.find('\n') == std::string::npos);
    CHECK(from_jsonl(line) == r);
    CHECK(to_jsonl(from_jsonl(line)) == line);
  }
}

TEST_CASE("validate enforces record invariants") {
  Gen g(3);
  PaperRecord good = testing::random_record(g, 1);
  CHECK_NOTHROW(validate(good));

  auto bad = good;
  bad.authors.push_back("");
  CHECK_THROWS_AS(validate(bad), SchemaViolation);

  bad = good;
  bad.year = kMaxYear + 1;
  CHECK_THROWS_AS(validate(bad), SchemaViolation);

  bad = good;
  bad.fields_of_study = {"b", "a"};
  CHECK_THROWS_AS(validate(bad), SchemaViolation);
  canonicalize(bad);
  CHECK_NOTHROW(validate(bad));
}
