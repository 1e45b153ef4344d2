#include <doctest.h>

#include <map>
#include <set>
#include <thread>

#include "csi/query.hpp"
#include "csi/store.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace csi;
using csi::testing::Gen;

namespace {

using IdIndex = std::map<std::string, std::set<std::string>>;

/// Facet postings keyed by value and expressed as id sets so that corpora
/// with different slot assignments compare equal.
IdIndex ids_of(const Corpus& c, Facet f) {
  IdIndex out;
  for (const auto& [value, docs] : c.index(f))
    for (auto d : docs) out[value].insert(c.at(d).id);
  return out;
}

/// Brute-force postings straight from the records.
IdIndex oracle_postings(const std::vector<PaperRecord>& records, Facet f) {
  IdIndex out;
  for (const auto& r : records) {
    std::vector<std::string> values;
    switch (f) {
      case Facet::venue: values = testing::opt_list(r.venue); break;
      case Facet::publisher: values = testing::opt_list(r.publisher); break;
      case Facet::author: values = r.authors; break;
      case Facet::field_of_study: values = r.fields_of_study; break;
      case Facet::paper_type: values = {std::string(to_string(r.paper_type))}; break;
      case Facet::access_type: values = {std::string(to_string(r.access_type))}; break;
    }
    for (const auto& v : values) out[v].insert(r.id);
  }
  return out;
}

template <class Key>
std::map<Key, std::set<std::string>> ids_of(const Corpus& c, const std::map<Key, DocSet>& index) {
  std::map<Key, std::set<std::string>> out;
  for (const auto& [k, docs] : index) {
    CHECK_FALSE(docs.empty());
    CHECK(std::is_sorted(docs.begin(), docs.end()));
    for (auto d : docs) out[k].insert(c.at(d).id);
  }
  return out;
}

std::vector<PaperRecord> records_of(const Corpus& c) {
  std::vector<PaperRecord> out;
  for (DocNo d = 0; d < c.size(); ++d) out.push_back(c.at(d));
  return out;
}

void check_indexes_match_records(const Corpus& c) {
  auto records = records_of(c);
  for (auto f : kAllFacets) {
    CAPTURE(to_string(f));
    CHECK(ids_of(c, f) == oracle_postings(records, f));
  }
  std::map<int, std::set<std::string>> years;
  std::map<std::uint64_t, std::set<std::string>> cites;
  for (const auto& r : records) {
    years[r.year].insert(r.id);
    cites[r.in_citations].insert(r.id);
  }
  CHECK(ids_of(c, c.year_index()) == years);
  CHECK(ids_of(c, c.citation_index()) == cites);
}

void check_same_answers(const Corpus& a, const Corpus& b, Gen& g, int queries) {
  REQUIRE(a.size() == b.size());
  CHECK(a.stats() == b.stats());
  for (int i = 0; i < queries; ++i) {
    auto f = testing::random_filter(g);
    auto ia = a.ids(select(a, f));
    auto ib = b.ids(select(b, f));
    std::sort(ia.begin(), ia.end());
    std::sort(ib.begin(), ib.end());
    CHECK(ia == ib);
  }
  for (DocNo d = 0; d < a.size(); ++d) {
    const auto* other = b.find(a.at(d).id);
    REQUIRE(other);
    CHECK(*other == a.at(d));
  }
}

}  // namespace

TEST_CASE("upsert of a fresh record returns false and stores it") {
  Corpus c;
  Gen g(1);
  auto r = testing::random_record(g, 1);
  CHECK_FALSE(c.upsert(r));
  REQUIRE(c.find(r.id));
  CHECK(*c.find(r.id) == r);
  CHECK(c.size() == 1);
  CHECK_FALSE(c.find("missing"));
}

TEST_CASE("overwriting a record de-indexes the old version") {
  Corpus c;
  PaperRecord r;
  r.id = "p";
  r.title = "T";
  r.year = 2000;
  r.venue = "Old";
  r.authors = {"A", "B"};
  r.in_citations = 5;
  c.upsert(r);
  r.venue = "New";
  r.authors = {"B"};
  r.year = 2001;
  r.in_citations = 6;
  CHECK(c.upsert(r));
  CHECK(c.size() == 1);
  CHECK(c.posting(Facet::venue, "Old").empty());
  CHECK(c.index(Facet::venue).count("Old") == 0);
  CHECK(c.posting(Facet::venue, "New").size() == 1);
  CHECK(c.posting(Facet::author, "A").empty());
  CHECK(c.years_between(2000, 2000).empty());
  CHECK(c.citations_between(5, 5).empty());
  CHECK(c.citations_between(6, 6).size() == 1);
  check_indexes_match_records(c);
}

TEST_CASE("upsert rejects invalid records") {
  Corpus c;
  PaperRecord r;
  r.id = "p";
  r.title = "";
  r.year = 2000;
  CHECK_THROWS_AS(c.upsert(r), SchemaViolation);
  CHECK(c.empty());
}

TEST_CASE("duplicate author names index once") {
  Corpus c;
  PaperRecord r;
  r.id = "p";
  r.title = "T";
  r.year = 2000;
  r.authors = {"A", "A"};
  c.upsert(r);
  CHECK(c.posting(Facet::author, "A").size() == 1);
  CHECK(c.find("p")->authors.size() == 2);
}

TEST_CASE("random upserts with overwrites equal a rebuild from scratch") {
  Gen g(99);
  Corpus incremental;
  std::map<std::string, PaperRecord> truth;
  std::vector<std::string> ids;
  int overwrites = 0;
  for (int i = 0; i < 1000; ++i) {
    PaperRecord r;
    if (i >= 100 && overwrites < 200 && g.chance(0.25)) {
      r = testing::random_record(g, 50000 + static_cast<std::uint64_t>(i));
      r.id = g.pick(ids);
      ++overwrites;
      CHECK(incremental.upsert(r));
    } else {
      r = testing::random_record(g, static_cast<std::uint64_t>(i));
      ids.push_back(r.id);
      CHECK_FALSE(incremental.upsert(r));
    }
    truth[r.id] = r;
  }
  REQUIRE(overwrites == 200);
  CHECK(incremental.size() == truth.size());

  Corpus rebuilt;
  for (const auto& [id, r] : truth) rebuilt.upsert(r);
  for (auto f : kAllFacets) CHECK(ids_of(incremental, f) == ids_of(rebuilt, f));
  CHECK(ids_of(incremental, incremental.year_index()) == ids_of(rebuilt, rebuilt.year_index()));
  CHECK(ids_of(incremental, incremental.citation_index()) ==
        ids_of(rebuilt, rebuilt.citation_index()));
  CHECK(incremental.stats() == rebuilt.stats());
  check_indexes_match_records(incremental);
  for (const auto& [id, r] : truth) CHECK(*incremental.find(id) == r);
}

TEST_CASE("upsert is idempotent") {
  Gen g(5);
  Corpus c = testing::random_corpus(g, 300);
  Corpus twice = c;
  for (DocNo d = 0; d < c.size(); ++d) CHECK(twice.upsert(c.at(d)));
  CHECK(snapshot_bytes(twice) == snapshot_bytes(c));
  Gen q(6);
  check_same_answers(c, twice, q, 30);
}

TEST_CASE("range lookups agree with a scan") {
  Gen g(8);
  Corpus c = testing::random_corpus(g, 500);
  for (int i = 0; i < 100; ++i) {
    int a = g.uniform(1985, 2025), b = g.uniform(1985, 2025);
    if (a > b) std::swap(a, b);
    DocSet expect;
    for (DocNo d = 0; d < c.size(); ++d)
      if (c.at(d).year >= a && c.at(d).year <= b) expect.push_back(d);
    CHECK(c.years_between(a, b) == expect);

    std::uint64_t lo = g.uniform_u64(0, 400), hi = g.uniform_u64(0, 400);
    if (lo > hi) std::swap(lo, hi);
    DocSet cites;
    for (DocNo d = 0; d < c.size(); ++d)
      if (c.at(d).in_citations >= lo && c.at(d).in_citations <= hi) cites.push_back(d);
    CHECK(c.citations_between(lo, hi) == cites);
  }
  CHECK(c.years_between(2010, 2000).empty());
}

TEST_CASE("stats") {
  SUBCASE("empty store") {
    Corpus c;
    auto s = c.stats();
    CHECK(s.n_records == 0);
    CHECK_FALSE(s.year_range);
    for (auto f : kAllFacets) CHECK(s.per_facet_cardinality.at(std::string(to_string(f))) == 0);
  }
  SUBCASE("year range of three records") {
    Corpus c;
    for (int y : {2009, 1999, 2019}) {
      PaperRecord r;
      r.id = "p" + std::to_string(y);
      r.title = "T";
      r.year = y;
      c.upsert(r);
    }
    auto s = c.stats();
    CHECK(s.n_records == 3);
    REQUIRE(s.year_range);
    CHECK(*s.year_range == std::pair{1999, 2019});
  }
  SUBCASE("cardinalities equal brute-force distinct counts") {
    Gen g(11);
    Corpus c = testing::random_corpus(g, 800);
    auto records = records_of(c);
    auto s = c.stats();
    CHECK(s.n_records == 800);
    std::map<std::string, std::set<std::string>> distinct;
    for (const auto& r : records) {
      for (auto dim : {Dimension::venues, Dimension::authors, Dimension::publishers,
                       Dimension::paper_types, Dimension::fields_of_study})
        for (const auto& l : testing::oracle_labels(r, dim))
          distinct[std::string(to_string(dim))].insert(l);
      distinct["access_types"].insert(std::string(to_string(r.access_type)));
    }
    for (const auto& [name, values] : distinct) {
      CAPTURE(name);
      CHECK(s.per_facet_cardinality.at(name) == values.size());
    }
  }
}

TEST_CASE("snapshot round-trip") {
  SUBCASE("empty corpus") {
    Corpus c;
    Corpus back = load_bytes(snapshot_bytes(c));
    CHECK(back.empty());
    CHECK(snapshot_bytes(back) == snapshot_bytes(c));
  }
  SUBCASE("500 records answer 50 queries identically") {
    Gen g(21);
    Corpus c = testing::random_corpus(g, 500);
    Corpus back = load_bytes(snapshot_bytes(c));
    check_indexes_match_records(back);
    check_same_answers(c, back, g, 50);
  }
  SUBCASE("awkward records survive the file round-trip") {
    Gen g(22);
    Corpus c;
    for (std::uint64_t i = 0; i < 300; ++i) c.upsert(testing::awkward_record(g, i));
    testing::TempDir dir;
    snapshot(c, dir / "store.snap");
    CHECK_FALSE(std::filesystem::exists(dir / "store.snap.tmp"));
    Corpus back = load(dir / "store.snap");
    check_same_answers(c, back, g, 20);
  }
}

TEST_CASE("snapshots are deterministic") {
  Gen g(31);
  std::vector<PaperRecord> records;
  for (std::uint64_t i = 0; i < 200; ++i) records.push_back(testing::random_record(g, i));
  Corpus a, b;
  for (const auto& r : records) a.upsert(r);
  for (auto it = records.rbegin(); it != records.rend(); ++it) b.upsert(*it);
  CHECK(snapshot_bytes(a) == snapshot_bytes(a));
  CHECK(snapshot_bytes(a) == snapshot_bytes(b));
}

TEST_CASE("damaged snapshots are refused") {
  Gen g(41);
  Corpus c = testing::random_corpus(g, 50);
  const std::string bytes = snapshot_bytes(c);
  auto code_of = [](std::string_view b) {
    try {
      load_bytes(b);
    } catch (const Error& e) {
      return e.code();
    }
    FAIL("expected an error");
    return Errc::invalid_argument;
  };

  CHECK(code_of(bytes.substr(0, bytes.size() - 10)) == Errc::corrupt_snapshot);
  CHECK(code_of(bytes.substr(0, 5)) == Errc::corrupt_snapshot);
  CHECK(code_of("") == Errc::corrupt_snapshot);
  CHECK(code_of("hello world") == Errc::corrupt_snapshot);

  std::string flipped = bytes;
  flipped[flipped.size() / 2 + 40] ^= 0x01;
  CHECK(code_of(flipped) == Errc::corrupt_snapshot);

  std::string newer = bytes;
  auto at = newer.find("\"version\":1");
  REQUIRE(at != std::string::npos);
  newer.replace(at, 11, "\"version\":2");
  CHECK(code_of(newer) == Errc::unsupported_version);
}

TEST_CASE("file errors surface as io") {
  testing::TempDir dir;
  try {
    load(dir / "absent.snap");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
  }
  try {
    snapshot(Corpus{}, dir / "no" / "such" / "dir" / "x.snap");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
  }
}

TEST_CASE("store admits concurrent readers while a writer upserts") {
  Gen g(51);
  Store store(testing::random_corpus(g, 200));
  std::atomic<bool> stop{false};
  std::atomic<int> bad{0};
  std::vector<std::thread> readers;
  for (int t = 0; t < 4; ++t)
    readers.emplace_back([&] {
      while (!stop) {
        store.read([&](const Corpus& c) {
          std::size_t total = 0;
          for (const auto& [y, docs] : c.year_index()) total += docs.size();
          if (total != c.size()) ++bad;
        });
      }
    });
  Gen w(52);
  for (std::uint64_t i = 0; i < 300; ++i)
    store.write([&](Corpus& c) { c.upsert(testing::random_record(w, 1000 + i)); });
  stop = true;
  for (auto& t : readers) t.join();
  CHECK(bad == 0);
  CHECK(store.read([](const Corpus& c) { return c.size(); }) == 500);
}
