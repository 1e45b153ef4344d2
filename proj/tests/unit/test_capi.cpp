#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <set>

#include "csi/csi.h"
#include "fixtures.hpp"

using Json = nlohmann::json;
using csi::testing::fixture_path;

namespace {

struct Owned {
  char* s = nullptr;
  ~Owned() { csi_string_free(s); }
  Json json() const { return Json::parse(s); }
};

std::set<std::string> expected_ids(const std::string& name) {
  std::set<std::string> ids;
  for (const auto& line : csi::testing::read_lines(fixture_path(name)))
    ids.insert(Json::parse(line)["id"].get<std::string>());
  return ids;
}

std::uint64_t n_records(csi_store* store) {
  Owned stats;
  REQUIRE(csi_store_stats_json(store, &stats.s) == CSI_OK);
  return stats.json()["n_records"].get<std::uint64_t>();
}

}  // namespace

TEST_CASE("store lifecycle through the C interface") {
  csi::testing::TempDir dir;
  const auto snap = (dir / "corpus.snap").string();

  csi_store* store = nullptr;
  REQUIRE(csi_store_open(snap.c_str(), &store) == CSI_OK);
  REQUIRE(store);
  CHECK(n_records(store) == 0);

  Owned report;
  REQUIRE(csi_store_ingest_file(store, fixture_path("dump.xml").c_str(), "xml", 0, &report.s) ==
          CSI_OK);
  auto r = report.json();
  auto xml_ids = expected_ids("dump.expected.jsonl");
  CHECK(r["records"] == 119);
  CHECK(r["issues"].size() == 1);
  CHECK(r["issues"][0]["kind"] == "MalformedXml");
  CHECK(r["issues"][0]["source_key"] == "conf/fx/Rec057");
  CHECK(n_records(store) == xml_ids.size());

  REQUIRE(csi_store_ingest_file(store, fixture_path("records.jsonl").c_str(), "jsonl", 1, nullptr) ==
          CSI_OK);
  auto all_ids = xml_ids;
  all_ids.merge(expected_ids("records.expected.jsonl"));
  CHECK(n_records(store) == all_ids.size());

  REQUIRE(csi_store_save(store, nullptr) == CSI_OK);
  csi_store_close(store);

  REQUIRE(csi_store_open(snap.c_str(), &store) == CSI_OK);
  CHECK(n_records(store) == all_ids.size());

  int status = 0;
  Owned top;
  REQUIRE(csi_query(store, "venues/top-k", "k=3&metric=papers", &status, &top.s) == CSI_OK);
  CHECK(status == 200);
  CHECK(top.json()["entries"].size() == 3);
  CHECK(top.json()["metric"] == "papers");

  Owned csv;
  REQUIRE(csi_query(store, "export.csv", "endpoint=venues/top-k&k=2", &status, &csv.s) == CSI_OK);
  CHECK(status == 200);
  CHECK(std::string(csv.s).starts_with("label,"));

  Owned bad;
  REQUIRE(csi_query(store, "journals/top-k", nullptr, &status, &bad.s) == CSI_OK);
  CHECK(status == 404);
  CHECK(bad.json()["code"] == "UnknownDimension");
  Owned regex;
  REQUIRE(csi_query(store, "venues/grid", "venue=re%3A(", &status, &regex.s) == CSI_OK);
  CHECK(status == 400);
  CHECK(regex.json()["code"] == "InvalidRegex");
  Owned none;
  REQUIRE(csi_query(store, "topics/jobs", "", &status, &none.s) == CSI_OK);
  CHECK(status == 404);

  REQUIRE(csi_store_ingest_file(store, fixture_path("records.jsonl").c_str(), "jsonl", 0, nullptr) ==
          CSI_OK);
  CHECK(n_records(store) == expected_ids("records.expected.jsonl").size());
  csi_store_close(store);
}

TEST_CASE("C interface errors") {
  csi::testing::TempDir dir;
  csi_store* store = nullptr;
  CHECK(csi_store_open(nullptr, &store) == CSI_ERR_INVALID_ARGUMENT);
  CHECK(std::string(csi_last_error()).size() > 0);

  csi::testing::write_file(dir / "junk.snap", "not a snapshot");
  CHECK(csi_store_open((dir / "junk.snap").c_str(), &store) == CSI_ERR_CORRUPT);
  CHECK(store == nullptr);
  CHECK(std::string(csi_last_error()).starts_with("CorruptSnapshot"));

  REQUIRE(csi_store_open((dir / "new.snap").c_str(), &store) == CSI_OK);
  CHECK(csi_store_ingest_file(store, (dir / "missing.xml").c_str(), "xml", 0, nullptr) == CSI_ERR_IO);
  CHECK(csi_store_ingest_file(store, fixture_path("dump.xml").c_str(), "csv", 0, nullptr) ==
        CSI_ERR_INVALID_ARGUMENT);
  CHECK(csi_store_save(store, (dir / "no" / "such" / "dir" / "x.snap").c_str()) == CSI_ERR_IO);
  char* out = nullptr;
  CHECK(csi_query(store, nullptr, nullptr, nullptr, &out) == CSI_ERR_INVALID_ARGUMENT);
  CHECK(out == nullptr);

  csi_server* server = nullptr;
  REQUIRE(csi_server_create(store, nullptr, 0, &server) == CSI_OK);
  CHECK(csi_server_bind(server, "nonsense") == CSI_ERR_INVALID_ARGUMENT);
  CHECK(csi_server_port(nullptr) == -1);
  csi_server_destroy(server);
  csi_store_close(store);
  csi_string_free(nullptr);
}

TEST_CASE("server through the C interface") {
  csi::testing::TempDir dir;
  csi_store* store = nullptr;
  REQUIRE(csi_store_open((dir / "s.snap").c_str(), &store) == CSI_OK);
  REQUIRE(csi_store_ingest_file(store, fixture_path("dump.xml").c_str(), "xml", 0, nullptr) == CSI_OK);

  csi_server* server = nullptr;
  REQUIRE(csi_server_create(store, (dir / "data").c_str(), 1, &server) == CSI_OK);
  REQUIRE(csi_server_bind(server, "127.0.0.1:0") == CSI_OK);
  int port = csi_server_port(server);
  CHECK(port > 0);
  REQUIRE(csi_server_start(server) == CSI_OK);

  httplib::Client cli("127.0.0.1", port);
  auto health = cli.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  auto stats = cli.Get("/api/v1/stats");
  REQUIRE(stats);
  CHECK(Json::parse(stats->body)["n_records"] == expected_ids("dump.expected.jsonl").size());
  auto job = cli.Post("/api/v1/topics/jobs", R"({"K": 2, "iterations": 5})", "application/json");
  REQUIRE(job);
  CHECK(job->status == 202);

  csi_server_stop(server);
  csi_server_destroy(server);
  CHECK(std::filesystem::exists(dir / "data" / "jobs.json"));
  csi_store_close(store);
}
