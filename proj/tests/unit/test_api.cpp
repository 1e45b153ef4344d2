#include <doctest.h>

#include <httplib.h>

#include <chrono>
#include <numeric>

#include "csi/api.hpp"
#include "csv_reader.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace csi;
using namespace std::chrono_literals;
using csi::testing::Gen;

namespace {

std::shared_ptr<Store> random_store(std::uint64_t seed, std::size_t n) {
  Gen g(seed);
  return std::make_shared<Store>(testing::random_corpus(g, n));
}

PaperRecord tiny(std::uint64_t i, std::string title = "graph") {
  PaperRecord r;
  r.id = derive_paper_id("tiny/" + std::to_string(i));
  r.title = std::move(title);
  r.year = 2000;
  return r;
}

Json body_of(const ApiResponse& r) { return Json::parse(r.body); }

void check_error(const ApiResponse& r, int status, std::string_view code) {
  CHECK(r.status == status);
  auto j = body_of(r);
  CHECK(j["status"] == status);
  CHECK(j["code"] == code);
  CHECK(j["message"].is_string());
}

std::string api(std::string_view route) { return std::string(kApiPrefix) + "/" + std::string(route); }

Json small_job(std::uint64_t seed = 7) {
  return {{"K", 3}, {"iterations", 40}, {"seed", seed}, {"alpha", 0.5}};
}

JobRecord wait_done(const ApiService& svc, const std::string& id) {
  auto job = svc.jobs().wait_final(id, 60s);
  REQUIRE(job);
  REQUIRE((job->state == JobState::done || job->state == JobState::failed));
  return *job;
}

}  // namespace

TEST_CASE("status codes for domain errors") {
  CHECK(http_status(Errc::unknown_dimension) == 404);
  CHECK(http_status(Errc::unknown_job) == 404);
  CHECK(http_status(Errc::unknown_model) == 404);
  CHECK(http_status(Errc::job_not_done) == 409);
  CHECK(http_status(Errc::too_many_documents) == 413);
  CHECK(http_status(Errc::empty_selection) == 422);
  CHECK(http_status(Errc::empty_corpus_after_cleaning) == 422);
  CHECK(http_status(Errc::degenerate_corpus) == 422);
  CHECK(http_status(Errc::corrupt_snapshot) == 500);
  CHECK(http_status(Errc::io) == 500);
  for (auto c : {Errc::invalid_regex, Errc::invalid_range, Errc::invalid_filter, Errc::unknown_facet,
                 Errc::invalid_metric, Errc::bad_page, Errc::bad_sort_key, Errc::invalid_argument,
                 Errc::topic_out_of_range, Errc::unknown_term})
    CHECK(http_status(c) == 400);
}

TEST_CASE("read routes") {
  auto store = random_store(21, 400);
  ApiService svc(store);

  auto health = svc.handle("GET", "/healthz", {});
  CHECK(health.status == 200);
  CHECK(health.body == "ok");

  SUBCASE("per-year counts sum to the selection size for papers") {
    Params p{{"venue", "ACL"}, {"venue", "KDD"}};
    auto r = svc.handle("GET", api("papers/per-year"), p);
    REQUIRE(r.status == 200);
    std::uint64_t sum = 0;
    auto hist = body_of(r);
    for (const auto& b : hist["buckets"]) sum += b["count"].get<std::uint64_t>();
    auto n = store->read([&](const Corpus& c) { return select(c, filter_from_params(p)).size(); });
    CHECK(sum == n);
    CHECK(n > 0);
  }

  SUBCASE("authors grid sorted by citations descending") {
    auto r = svc.handle("GET", api("authors/grid"),
                        {{"sort", "n_citations"}, {"sort_dir", "desc"}, {"page_size", "500"}});
    REQUIRE(r.status == 200);
    auto rows = body_of(r)["rows"];
    REQUIRE(rows.size() > 1);
    std::uint64_t best = 0;
    for (const auto& row : rows) best = std::max(best, row["n_citations"].get<std::uint64_t>());
    CHECK(rows[0]["n_citations"] == best);
    for (std::size_t i = 1; i < rows.size(); ++i)
      CHECK(rows[i - 1]["n_citations"].get<std::uint64_t>() >= rows[i]["n_citations"].get<std::uint64_t>());
  }

  SUBCASE("venue top-k honours k") {
    auto j = body_of(svc.handle("GET", api("venues/top-k"), {{"k", "2"}, {"metric", "papers"}}));
    CHECK(j["k"] == 2);
    CHECK(j["metric"] == "papers");
    CHECK(j["entries"].size() == 2);
    auto dflt = body_of(svc.handle("GET", api("venues/top-k"), {}));
    CHECK(dflt["k"] == kDefaultTopK);
    CHECK(dflt["metric"] == "citations");
  }

  SUBCASE("citation series of an empty selection") {
    auto r = svc.handle("GET", api("citations/series"), {{"venue", "No Such Venue"}});
    CHECK(r.status == 200);
    auto j = body_of(r);
    CHECK(j["incoming"]["buckets"].empty());
    CHECK(j["incoming_distribution"].is_null());
  }

  SUBCASE("autocomplete") {
    auto types = body_of(svc.handle("GET", api("autocomplete"), {{"facet", "paper_type"}}));
    CHECK(types.size() == 6);
    auto access = body_of(svc.handle("GET", api("autocomplete"), {{"facet", "access_type"}}));
    CHECK(access.size() == 3);
    auto all = body_of(
        svc.handle("GET", api("autocomplete"), {{"facet", "venue"}, {"q", "re:.*"}, {"limit", "100"}}));
    auto n_venues = store->read([](const Corpus& c) { return c.index(Facet::venue).size(); });
    CHECK(all.size() == n_venues);
    auto acl = suggestions_from_json(
        body_of(svc.handle("GET", api("autocomplete"), {{"facet", "venue"}, {"q", "acl"}})));
    REQUIRE(acl.size() == 2);
    CHECK(acl[0].count >= acl[1].count);
  }

  SUBCASE("stats") {
    auto j = body_of(svc.handle("GET", api("stats"), {}));
    CHECK(j["n_records"] == 400);
  }

  SUBCASE("errors") {
    check_error(svc.handle("GET", api("journals/top-k"), {}), 404, "UnknownDimension");
    check_error(svc.handle("GET", api("venues/top-k"), {{"venue", "re:(unclosed"}}), 400,
                "InvalidRegex");
    check_error(svc.handle("GET", api("autocomplete"), {{"facet", "colour"}}), 400, "UnknownFacet");
    check_error(svc.handle("GET", api("autocomplete"), {}), 400, "UnknownFacet");
    check_error(svc.handle("POST", api("venues/top-k"), {}), 405, "MethodNotAllowed");
    check_error(svc.handle("DELETE", api("topics/jobs"), {}), 405, "MethodNotAllowed");
    check_error(svc.handle("GET", api("venues/distribution"), {{"venue", "No Such Venue"}}), 422,
                "EmptySelection");
    check_error(svc.handle("GET", api("papers/distribution"), {{"metric", "papers"}}), 400,
                "InvalidMetric");
    check_error(svc.handle("GET", api("venues/top-k"), {{"metric", "h-index"}}), 400,
                "InvalidMetric");
    check_error(svc.handle("GET", api("venues/top-k"), {{"k", "0"}}), 400, "InvalidArgument");
    check_error(svc.handle("GET", api("venues/top-k"), {{"k", "ten"}}), 400, "InvalidArgument");
    check_error(svc.handle("GET", api("venues/grid"), {{"page", "0"}}), 400, "BadPage");
    check_error(svc.handle("GET", api("venues/grid"), {{"sort", "colour"}}), 400, "BadSortKey");
    check_error(svc.handle("GET", api("venues/grid"), {{"sort_dir", "up"}}), 400, "BadSortKey");
    check_error(svc.handle("GET", api("papers/top-k"), {{"year_min", "2010"}, {"year_max", "2000"}}),
                400, "InvalidRange");
    check_error(svc.handle("GET", api("papers/top-k"), {{"paper_type", "poem"}}), 400,
                "InvalidFilter");
    check_error(svc.handle("GET", api("nothing"), {}), 404, "NotFound");
    check_error(svc.handle("GET", "/elsewhere", {}), 404, "NotFound");
    check_error(svc.handle("GET", api("export.csv"), {{"endpoint", "stats"}}), 400,
                "InvalidArgument");
    check_error(svc.handle("GET", api("topics/jobs/job-999999"), {}), 404, "UnknownJob");
    check_error(svc.handle("GET", api("topics/models/job-999999/map"), {}), 404, "UnknownModel");
  }
}

TEST_CASE("API answers equal the engine for random filters") {
  auto store = random_store(22, 600);
  ApiService svc(store);
  Gen g(23);
  const char* ops[] = {"per-year", "distribution", "top-k", "grid"};
  for (int i = 0; i < 150; ++i) {
    auto filter = testing::random_filter(g);
    auto params = filter_to_params(filter);
    auto dim = kAllDimensions[static_cast<std::size_t>(g.uniform(0, 5))];
    std::string op = ops[g.uniform(0, 3)];
    auto metric = g.chance(0.5) ? Metric::citations : Metric::papers;
    params.emplace("metric", std::string(to_string(metric)));
    CAPTURE(to_string(dim));
    CAPTURE(op);

    std::optional<Json> expected;
    std::optional<Errc> expected_error;
    try {
      expected = store->read([&](const Corpus& c) -> Json {
        auto docs = select(c, filter);
        if (op == "per-year") return to_json(per_year(c, dim, docs));
        if (op == "distribution") return to_json(distribution(c, dim, docs, metric));
        if (op == "top-k") return to_json(top_k(c, dim, docs, metric, kDefaultTopK));
        return to_json(details_grid(c, dim, docs, GridRequest{}));
      });
    } catch (const Error& e) {
      expected_error = e.code();
    }

    auto r = svc.handle("GET", api(std::string(to_string(dim)) + "/" + op), params);
    if (expected) {
      CHECK(r.status == 200);
      CHECK(body_of(r) == *expected);
    } else {
      check_error(r, http_status(*expected_error), errc_name(*expected_error));
    }
  }
}

TEST_CASE("CSV export") {
  Gen g(24);
  Corpus corpus;
  for (int i = 0; i < 120; ++i) corpus.upsert(testing::awkward_record(g, static_cast<std::uint64_t>(i)));
  auto store = std::make_shared<Store>(std::move(corpus));
  ApiService svc(store);

  auto r = svc.handle("GET", api("export.csv"), {{"endpoint", "papers/grid"}, {"page_size", "500"}});
  REQUIRE(r.status == 200);
  CHECK(r.content_type.starts_with("text/csv"));
  REQUIRE(r.headers.size() == 1);
  CHECK(r.headers[0].first == "Content-Disposition");
  CHECK(r.headers[0].second == "attachment; filename=\"papers-grid.csv\"");

  auto rows = testing::read_csv(r.body);
  REQUIRE(rows.size() == 121);
  CHECK(rows[0] == testing::CsvRow{"id", "title", "year", "authors", "venue", "citations", "link"});
  auto page = details_from_json(body_of(svc.handle("GET", api("papers/grid"), {{"page_size", "500"}})));
  REQUIRE(page.rows.size() == 120);
  for (std::size_t i = 0; i < page.rows.size(); ++i) {
    const auto& p = std::get<PaperRow>(page.rows[i]);
    std::string authors;
    for (const auto& a : p.authors) authors += (authors.empty() ? "" : "; ") + a;
    CHECK(rows[i + 1] == testing::CsvRow{p.id, p.title, std::to_string(p.year), authors,
                                         p.venue.value_or(""), std::to_string(p.citations),
                                         p.link.value_or("")});
  }

  auto venues = svc.handle("GET", api("export.csv"), {{"endpoint", "venues/top-k"}, {"k", "3"}});
  CHECK(venues.headers[0].second == "attachment; filename=\"venues-top-k.csv\"");
  CHECK(testing::read_csv(venues.body).size() == 4);
  auto series = svc.handle("GET", api("export.csv"), {{"endpoint", "citations/series"}});
  CHECK(series.status == 200);
  CHECK(svc.handle("GET", api("export.csv"), {}).status == 400);
}

TEST_CASE("HTTP front end") {
  auto store = random_store(25, 300);
  ApiService svc(store);
  HttpServer server(svc);
  int port = server.bind("127.0.0.1", 0);
  CHECK(port > 0);
  CHECK(server.port() == port);
  server.start();

  httplib::Client cli("127.0.0.1", port);
  auto health = cli.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(health->body == "ok");

  httplib::Params params{{"venue", "ACL"}, {"venue", "re:^K"}, {"year_min", "2000"}};
  auto top = cli.Get(api("authors/top-k"), params, httplib::Headers{});
  REQUIRE(top);
  CHECK(top->status == 200);
  CHECK(top->get_header_value("Content-Type") == "application/json");
  CHECK(Json::parse(top->body) ==
        body_of(svc.handle("GET", api("authors/top-k"), Params(params.begin(), params.end()))));

  auto ac = cli.Get(api("autocomplete"), httplib::Params{{"facet", "venue"}, {"q", "re:.*"}},
                    httplib::Headers{});
  REQUIRE(ac);
  CHECK(Json::parse(ac->body).size() == kDefaultSuggestions);

  auto csv = cli.Get(api("export.csv"), httplib::Params{{"endpoint", "venues/grid"}}, httplib::Headers{});
  REQUIRE(csv);
  CHECK(csv->get_header_value("Content-Disposition") == "attachment; filename=\"venues-grid.csv\"");
  CHECK(testing::read_csv(csv->body)[0][0] == "label");

  auto bad = cli.Get(api("journals/grid"));
  REQUIRE(bad);
  CHECK(bad->status == 404);
  CHECK(Json::parse(bad->body)["code"] == "UnknownDimension");
  auto put = cli.Put(api("venues/grid"), "", "text/plain");
  REQUIRE(put);
  CHECK(put->status == 405);

  auto posted = cli.Post(api("topics/jobs"), small_job().dump(), "application/json");
  REQUIRE(posted);
  CHECK(posted->status == 202);
  auto id = Json::parse(posted->body)["job_id"].get<std::string>();
  wait_done(svc, id);
  auto map = cli.Get(api("topics/models/" + id + "/map"));
  REQUIRE(map);
  CHECK(map->status == 200);
  CHECK(Json::parse(map->body)["coords"].size() == 3);

  server.stop();
  CHECK_FALSE(cli.Get("/healthz"));
}

TEST_CASE("topic job lifecycle") {
  auto store = random_store(26, 300);
  ApiService svc(store);

  auto post = svc.handle("POST", api("topics/jobs"), {}, small_job().dump());
  REQUIRE(post.status == 202);
  auto created = job_from_json(body_of(post));
  CHECK(created.state == JobState::queued);
  CHECK(created.job_id == "job-000001");
  CHECK(created.n_documents == 300);
  CHECK(created.params.train.topics == 3);

  auto job = wait_done(svc, created.job_id);
  CHECK(job.state == JobState::done);
  CHECK(job.result_ref == job.job_id);
  CHECK(job.started_at);
  CHECK(job.finished_at);
  CHECK(*job.started_at <= *job.finished_at);
  CHECK_FALSE(job.error);

  auto status = body_of(svc.handle("GET", api("topics/jobs/" + job.job_id), {}));
  CHECK(status["state"] == "done");
  auto list = body_of(svc.handle("GET", api("topics/jobs"), {}));
  CHECK(list.size() == 1);

  const std::string models = api("topics/models/" + job.job_id);
  auto map = body_of(svc.handle("GET", models + "/map", {}));
  CHECK(map["model_id"] == job.job_id);
  CHECK(map["topics"] == 3);
  double total = 0;
  for (const auto& m : map["marginal"]) total += m.get<double>();
  CHECK(total == doctest::Approx(1.0));

  auto overall = term_panel_from_json(body_of(svc.handle("GET", models + "/terms", {})));
  CHECK(overall.mode == PanelMode::salient_overall);
  CHECK_FALSE(overall.terms.empty());
  auto in_topic = term_panel_from_json(
      body_of(svc.handle("GET", models + "/terms", {{"topic", "1"}, {"lambda", "0.3"}, {"n", "5"}})));
  CHECK(in_topic.mode == PanelMode::relevant_in_topic);
  CHECK(in_topic.lambda == 0.3);
  CHECK(in_topic.terms.size() == 5);
  for (const auto& row : in_topic.terms) {
    REQUIRE(row.in_topic);
    CHECK(*row.in_topic <= static_cast<double>(row.overall) + 1e-9);
  }
  auto dflt = term_panel_from_json(body_of(svc.handle("GET", models + "/terms", {{"topic", "0"}})));
  CHECK(dflt.lambda == kDefaultLambda);
  auto by_term = term_panel_from_json(
      body_of(svc.handle("GET", models + "/terms", {{"term", overall.terms[0].term}})));
  CHECK(by_term.topic_weights.size() == 3);

  check_error(svc.handle("GET", models + "/terms", {{"topic", "3"}}), 400, "TopicOutOfRange");
  check_error(svc.handle("GET", models + "/terms", {{"term", "zzzz"}}), 400, "UnknownTerm");
  check_error(svc.handle("GET", models + "/terms", {{"topic", "0"}, {"term", "graph"}}), 400,
              "InvalidArgument");
  check_error(svc.handle("GET", models + "/nothing", {}), 404, "NotFound");

  SUBCASE("identical parameters give identical artifacts") {
    auto again = job_from_json(body_of(svc.handle("POST", api("topics/jobs"), {}, small_job().dump())));
    CHECK(again.job_id == "job-000002");
    wait_done(svc, again.job_id);
    auto a = svc.handle("GET", models + "/artifact", {});
    auto b = svc.handle("GET", api("topics/models/" + again.job_id + "/artifact"), {});
    REQUIRE(a.status == 200);
    CHECK(a.body == b.body);
    CHECK(*svc.model(job.job_id) == *svc.model(again.job_id));

    auto other = job_from_json(body_of(svc.handle("POST", api("topics/jobs"), {}, small_job(8).dump())));
    wait_done(svc, other.job_id);
    CHECK(svc.handle("GET", api("topics/models/" + other.job_id + "/artifact"), {}).body != a.body);
  }

  SUBCASE("a job over an empty selection fails") {
    Json body = small_job();
    body["filters"] = {{"venue", "No Such Venue"}};
    auto failed = job_from_json(body_of(svc.handle("POST", api("topics/jobs"), {}, body.dump())));
    CHECK(failed.n_documents == 0);
    auto done = wait_done(svc, failed.job_id);
    CHECK(done.state == JobState::failed);
    CHECK(done.error_code == "EmptyCorpusAfterCleaning");
    CHECK(done.error);
    CHECK_FALSE(done.result_ref);
    check_error(svc.handle("GET", api("topics/models/" + failed.job_id + "/map"), {}), 404,
                "UnknownModel");
  }

  SUBCASE("invalid job bodies") {
    for (const char* body : {"{", "[]", R"({"K": 1})", R"({"K": "three"})", R"({"iterations": 0})",
                             R"({"alpha": -1})", R"({"beta": 0})", R"({"lambda": 1.5})",
                             R"({"colour": "red"})"}) {
      CAPTURE(body);
      check_error(svc.handle("POST", api("topics/jobs"), {}, body), 400, "InvalidArgument");
    }
    check_error(svc.handle("POST", api("topics/jobs"), {}, R"({"filters": {"venues": "x"}})"), 400,
                "InvalidFilter");
    check_error(svc.handle("POST", api("topics/jobs"), {}, R"({"filters": {"venue": "re:("}})"), 400,
                "InvalidRegex");
  }
}

TEST_CASE("job defaults and parameter codec") {
  auto p = job_params_from_json(Json::object());
  CHECK(p.train.topics == 20);
  CHECK(p.train.alpha == 2.5);
  CHECK(p.train.beta == 0.01);
  CHECK(p.train.iterations == 500);
  CHECK(p.lambda == kDefaultLambda);
  CHECK(p.filter == FilterQuery{});
  CHECK(job_params_from_json(Json::parse(to_json(p).dump())) == p);

  Gen g(27);
  for (int i = 0; i < 100; ++i) {
    JobParams q;
    q.filter = testing::random_filter(g);
    q.train.topics = static_cast<std::uint32_t>(g.uniform(2, 50));
    q.train.alpha = g.real() + 0.01;
    q.train.beta = g.real() + 0.001;
    q.train.iterations = static_cast<std::uint32_t>(g.uniform(1, 1000));
    q.train.seed = g.bits();
    q.lambda = g.real();
    CHECK(job_params_from_json(Json::parse(to_json(q).dump())) == q);

    JobRecord rec;
    rec.job_id = "job-00000" + std::to_string(i % 10);
    rec.state = static_cast<JobState>(g.uniform(0, 3));
    rec.submitted_at = static_cast<std::int64_t>(g.bits() >> 20);
    if (g.chance(0.5)) rec.started_at = rec.submitted_at + 5;
    rec.params = job_params_from_json(to_json(q));
    rec.n_documents = g.uniform_u64(0, 100000);
    if (g.chance(0.5)) rec.result_ref = rec.job_id;
    else rec.error = "boom", rec.error_code = "Internal";
    CHECK(job_from_json(Json::parse(to_json(rec).dump())) == rec);
  }
}

TEST_CASE("a running job blocks model reads and is interrupted by shutdown") {
  auto store = random_store(28, 400);
  ApiService svc(store);
  Json body = {{"K", 5}, {"iterations", 1000000}};
  auto job = job_from_json(body_of(svc.handle("POST", api("topics/jobs"), {}, body.dump())));
  check_error(svc.handle("GET", api("topics/models/" + job.job_id + "/map"), {}), 409, "JobNotDone");

  auto deadline = std::chrono::steady_clock::now() + 10s;
  while (svc.jobs().get(job.job_id)->state == JobState::queued &&
         std::chrono::steady_clock::now() < deadline)
    std::this_thread::sleep_for(1ms);
  CHECK(svc.jobs().get(job.job_id)->state == JobState::running);
  check_error(svc.handle("GET", api("topics/models/" + job.job_id + "/terms"), {}), 409,
              "JobNotDone");

  svc.shutdown();
  auto after = svc.jobs().get(job.job_id);
  CHECK(after->state == JobState::failed);
  CHECK(after->error_code == "Interrupted");
  check_error(svc.handle("GET", api("topics/models/" + job.job_id + "/map"), {}), 404, "UnknownModel");
}

TEST_CASE("document cap is enforced at submission") {
  Corpus corpus;
  for (std::uint64_t i = 0; i <= kMaxTrainingDocuments; ++i) corpus.upsert(tiny(i));
  REQUIRE(corpus.size() == kMaxTrainingDocuments + 1);
  auto store = std::make_shared<Store>(std::move(corpus));
  ApiService svc(store, ServiceOptions{{}, 0});

  check_error(svc.handle("POST", api("topics/jobs"), {}, "{}"), 413, "TooManyDocuments");
  CHECK(svc.jobs().all().empty());

  store->write([](Corpus& c) {
    auto r = tiny(0);
    r.year = 2001;
    c.upsert(r);
  });
  Json body = {{"filters", {{"year_max", 2000}}}};
  auto r = svc.handle("POST", api("topics/jobs"), {}, body.dump());
  CHECK(r.status == 202);
  CHECK(body_of(r)["n_documents"] == kMaxTrainingDocuments);
}

TEST_CASE("job registry transitions") {
  JobRegistry reg;
  auto a = reg.create(JobParams{}, 10);
  CHECK(a.job_id == "job-000001");
  CHECK(a.state == JobState::queued);
  CHECK(reg.queued_ids() == std::vector<std::string>{"job-000001"});
  CHECK_FALSE(reg.get("job-000002"));

  auto expect_illegal = [](auto&& f) {
    try {
      f();
      FAIL("transition accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::invalid_argument);
    }
  };
  expect_illegal([&] { reg.mark_done(a.job_id, a.job_id); });
  CHECK(reg.mark_running(a.job_id).state == JobState::running);
  expect_illegal([&] { reg.mark_running(a.job_id); });
  CHECK(reg.queued_ids().empty());
  auto done = reg.mark_done(a.job_id, a.job_id);
  CHECK(done.state == JobState::done);
  CHECK(done.result_ref == a.job_id);
  expect_illegal([&] { reg.mark_failed(a.job_id, "X", "y"); });
  expect_illegal([&] { reg.mark_running(a.job_id); });

  auto b = reg.create(JobParams{}, 0);
  auto failed = reg.mark_failed(b.job_id, "EmptySelection", "nothing");
  CHECK(failed.state == JobState::failed);
  CHECK(failed.error_code == "EmptySelection");
  CHECK(reg.wait_final(b.job_id, 0ms)->state == JobState::failed);
  auto c = reg.create(JobParams{}, 0);
  CHECK(reg.wait_final(c.job_id, 5ms)->state == JobState::queued);
  CHECK_FALSE(reg.wait_final("job-404", 5ms));
  CHECK(reg.all().size() == 3);
  try {
    reg.mark_running("job-404");
    FAIL("unknown job accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_job);
  }
}

TEST_CASE("jobs and models survive a restart") {
  testing::TempDir dir;
  const auto data = dir / "data";
  auto store = random_store(29, 200);
  std::string first, second, caught;
  {
    ApiService svc(store, ServiceOptions{data, 0});
    first = svc.submit(job_params_from_json(small_job(1))).job_id;
    second = svc.submit(job_params_from_json(small_job(2))).job_id;
  }
  {
    JobRegistry reg(data / "jobs.json");
    CHECK(reg.queued_ids() == std::vector<std::string>{first, second});
    caught = reg.create(job_params_from_json(small_job(3)), 200).job_id;
    reg.mark_running(caught);
  }
  std::string artifact;
  {
    ApiService svc(store, ServiceOptions{data, 1});
    auto interrupted = svc.jobs().get(caught);
    CHECK(interrupted->state == JobState::failed);
    CHECK(interrupted->error_code == "Interrupted");
    CHECK(wait_done(svc, first).state == JobState::done);
    CHECK(wait_done(svc, second).state == JobState::done);
    CHECK(svc.submit(job_params_from_json(small_job(4))).job_id == "job-000004");
    artifact = svc.handle("GET", api("topics/models/" + first + "/artifact"), {}).body;
    CHECK(std::filesystem::exists(data / "models" / (first + ".json")));
  }
  {
    ApiService svc(store, ServiceOptions{data, 0});
    CHECK(svc.jobs().all().size() == 4);
    auto reloaded = svc.handle("GET", api("topics/models/" + first + "/artifact"), {});
    CHECK(reloaded.status == 200);
    CHECK(reloaded.body == artifact);
    check_error(svc.handle("GET", api("topics/models/" + caught + "/map"), {}), 404, "UnknownModel");
  }
}

TEST_CASE("listen addresses") {
  CHECK(parse_listen_address("127.0.0.1:8080") == std::pair<std::string, int>{"127.0.0.1", 8080});
  CHECK(parse_listen_address("9000") == std::pair<std::string, int>{"0.0.0.0", 9000});
  CHECK(parse_listen_address("localhost:0").second == 0);
  for (const char* bad : {"", "host:", ":80", "host:http", "host:70000", "1.2.3.4:-1"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_listen_address(bad), Error);
  }
}
