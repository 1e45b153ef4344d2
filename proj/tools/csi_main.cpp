// Command-line front end: ingest dumps into a store, serve the REST API, and
// run one-off queries. Talks to the core only through the C API.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "csi/csi.h"

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

int report(csi_status status, const char* what) {
  std::fprintf(stderr, "csi: %s failed: %s\n", what, csi_last_error());
  return static_cast<int>(status) + 1;
}

struct StoreHandle {
  csi_store* ptr = nullptr;
  ~StoreHandle() { csi_store_close(ptr); }
};

std::string format_for(const std::string& path) {
  for (const char* ext : {".jsonl", ".ndjson"})
    if (path.size() >= std::string_view(ext).size() && path.ends_with(ext)) return "jsonl";
  return "xml";
}

int cmd_ingest(const std::string& input, const std::string& format, const std::string& store_path,
               bool append, bool quiet) {
  StoreHandle store;
  if (auto s = csi_store_open(store_path.c_str(), &store.ptr)) return report(s, "opening the store");
  char* report_json = nullptr;
  if (auto s = csi_store_ingest_file(store.ptr, input.c_str(), format.c_str(), append ? 1 : 0,
                                     &report_json))
    return report(s, "ingest");
  if (!quiet) std::fprintf(stderr, "%s\n", report_json);
  csi_string_free(report_json);
  if (auto s = csi_store_save(store.ptr, nullptr)) return report(s, "saving the store");
  char* stats = nullptr;
  if (csi_store_stats_json(store.ptr, &stats) == CSI_OK) std::printf("%s\n", stats);
  csi_string_free(stats);
  return 0;
}

int cmd_serve(std::string store_path, std::string listen, std::size_t workers,
              std::string data_dir) {
  if (store_path.empty()) {
    std::fprintf(stderr, "csi: serve needs --store or CSI_STORE\n");
    return 2;
  }
  if (data_dir.empty()) data_dir = store_path + ".d";

  StoreHandle store;
  if (auto s = csi_store_open(store_path.c_str(), &store.ptr)) return report(s, "opening the store");
  csi_server* server = nullptr;
  if (auto s = csi_server_create(store.ptr, data_dir.c_str(), workers, &server))
    return report(s, "creating the server");
  if (auto s = csi_server_bind(server, listen.c_str())) {
    csi_server_destroy(server);
    return report(s, "binding");
  }
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  if (auto s = csi_server_start(server)) {
    csi_server_destroy(server);
    return report(s, "starting");
  }
  std::fprintf(stderr, "csi: listening on port %d\n", csi_server_port(server));
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  csi_server_destroy(server);
  return 0;
}

int cmd_query(const std::string& store_path, const std::string& endpoint,
              const std::string& query) {
  StoreHandle store;
  if (auto s = csi_store_open(store_path.c_str(), &store.ptr)) return report(s, "opening the store");
  int status = 0;
  char* body = nullptr;
  if (auto s = csi_query(store.ptr, endpoint.c_str(), query.c_str(), &status, &body))
    return report(s, "query");
  std::printf("%s\n", body);
  csi_string_free(body);
  return status == 200 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scholarly corpus analytics: ingest, query and serve"};
  app.require_subcommand(1);

  std::string input, format, store_path, listen = "127.0.0.1:8080", data_dir, endpoint,
                     query;
  bool append = false, quiet = false;
  std::size_t workers = 2;

  auto* ingest = app.add_subcommand("ingest", "Read a dump into a store snapshot");
  ingest->add_option("--input", input, "Dump file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--format", format, "xml or jsonl; inferred from the file extension by default")
      ->check(CLI::IsMember({"xml", "jsonl"}));
  ingest->add_option("--store", store_path, "Snapshot path")->required();
  ingest->add_flag("--append", append, "Keep existing records");
  ingest->add_flag("--quiet", quiet, "Do not print the ingest report");

  auto* serve = app.add_subcommand("serve", "Serve the REST API");
  serve->add_option("--store", store_path, "Snapshot path")->envname("CSI_STORE");
  serve->add_option("--listen", listen, "host:port")->envname("CSI_LISTEN")->capture_default_str();
  serve->add_option("--workers", workers, "Topic training workers")->check(CLI::Range(1, 64));
  serve->add_option("--data-dir", data_dir, "Jobs and models; defaults to <store>.d");

  auto* q = app.add_subcommand("query", "Run one read route against a store");
  q->add_option("--store", store_path, "Snapshot path")->required();
  q->add_option("endpoint", endpoint, "Route below /api/v1, e.g. venues/top-k")->required();
  q->add_option("query", query, "URL query string, e.g. k=5&metric=papers");

  CLI11_PARSE(app, argc, argv);

  if (*ingest) return cmd_ingest(input, format.empty() ? format_for(input) : format, store_path, append, quiet);
  if (*serve) return cmd_serve(store_path, listen, workers, data_dir);
  return cmd_query(store_path, endpoint, query);
}
