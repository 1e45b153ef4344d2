#include "csi/csi.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include <httplib.h>

#include "csi/api.hpp"
#include "csi/ingest.hpp"
#include "csi/store.hpp"

struct csi_store {
  std::shared_ptr<csi::Store> store;
  std::filesystem::path path;
};

struct csi_server {
  std::unique_ptr<csi::ApiService> service;
  std::unique_ptr<csi::HttpServer> http;
};

namespace {

thread_local std::string g_last_error;

csi_status fail(csi_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

csi_status status_for(csi::Errc code) {
  using csi::Errc;
  switch (code) {
    case Errc::io: return CSI_ERR_IO;
    case Errc::corrupt_snapshot:
    case Errc::corrupt_model:
      return CSI_ERR_CORRUPT;
    case Errc::unsupported_version: return CSI_ERR_UNSUPPORTED_VERSION;
    case Errc::unknown_job:
    case Errc::unknown_model:
    case Errc::unknown_dimension:
      return CSI_ERR_NOT_FOUND;
    case Errc::invalid_argument: return CSI_ERR_INVALID_ARGUMENT;
    default: return CSI_ERR_QUERY;
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <class F>
csi_status guarded(F&& f) {
  try {
    f();
    return CSI_OK;
  } catch (const csi::Error& e) {
    return fail(status_for(e.code()), std::string(csi::errc_name(e.code())) + ": " + e.what());
  } catch (const std::bad_alloc&) {
    return fail(CSI_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CSI_ERR_INTERNAL, e.what());
  }
}

}  // namespace

extern "C" {

const char* csi_last_error(void) { return g_last_error.c_str(); }

void csi_string_free(char* s) { std::free(s); }

csi_status csi_store_open(const char* path, csi_store** out) {
  if (!path || !out) return fail(CSI_ERR_INVALID_ARGUMENT, "path and out are required");
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<csi_store>();
    handle->path = path;
    if (std::filesystem::exists(handle->path))
      handle->store = std::make_shared<csi::Store>(csi::load(handle->path));
    else
      handle->store = std::make_shared<csi::Store>();
    *out = handle.release();
  });
}

void csi_store_close(csi_store* store) { delete store; }

csi_status csi_store_ingest_file(csi_store* store, const char* input_path, const char* format,
                                 int append, char** report_json) {
  if (!store || !input_path || !format)
    return fail(CSI_ERR_INVALID_ARGUMENT, "store, input_path and format are required");
  if (report_json) *report_json = nullptr;
  auto fmt = csi::parse_dump_format(format);
  if (!fmt) return fail(CSI_ERR_INVALID_ARGUMENT, std::string("unknown format '") + format + "'");
  return guarded([&] {
    std::ifstream in(input_path, std::ios::binary);
    if (!in) throw csi::Error(csi::Errc::io, std::string("cannot read ") + input_path);
    if (!append) store->store->write([](csi::Corpus& c) { c = csi::Corpus{}; });
    auto report = csi::read_dump(in, *fmt, [&](csi::PaperRecord&& r) {
      store->store->write([&](csi::Corpus& c) { c.upsert(std::move(r)); });
    });
    if (report_json) {
      csi::Json j;
      j["records"] = report.records;
      j["issues"] = csi::Json::array();
      for (const auto& issue : report.issues) {
        csi::Json i;
        i["kind"] = csi::errc_name(issue.kind);
        i["line"] = issue.line;
        i["position"] = issue.position;
        i["source_key"] = issue.source_key;
        i["field"] = issue.field;
        i["message"] = csi::describe(issue);
        j["issues"].push_back(std::move(i));
      }
      *report_json = dup(j.dump());
    }
  });
}

csi_status csi_store_save(csi_store* store, const char* path) {
  if (!store) return fail(CSI_ERR_INVALID_ARGUMENT, "store is required");
  return guarded([&] {
    std::filesystem::path target = path ? std::filesystem::path(path) : store->path;
    store->store->read([&](const csi::Corpus& c) { csi::snapshot(c, target); });
  });
}

csi_status csi_store_stats_json(csi_store* store, char** out) {
  if (!store || !out) return fail(CSI_ERR_INVALID_ARGUMENT, "store and out are required");
  *out = nullptr;
  return guarded([&] {
    auto stats = store->store->read([](const csi::Corpus& c) { return c.stats(); });
    *out = dup(csi::to_json(stats).dump());
  });
}

csi_status csi_query(csi_store* store, const char* endpoint, const char* query, int* http_status,
                     char** out) {
  if (!store || !endpoint || !out)
    return fail(CSI_ERR_INVALID_ARGUMENT, "store, endpoint and out are required");
  *out = nullptr;
  return guarded([&] {
    httplib::Params raw;
    if (query) httplib::detail::parse_query_text(std::string(query), raw);
    csi::Params params(raw.begin(), raw.end());
    csi::QueryHandler handler(store->store);
    auto r = handler.get(endpoint, params);
    if (!r) r = csi::error_response(404, "NotFound", std::string("no read route ") + endpoint);
    if (http_status) *http_status = r->status;
    *out = dup(r->body);
  });
}

csi_status csi_server_create(csi_store* store, const char* data_dir, size_t workers,
                             csi_server** out) {
  if (!store || !out) return fail(CSI_ERR_INVALID_ARGUMENT, "store and out are required");
  *out = nullptr;
  return guarded([&] {
    auto server = std::make_unique<csi_server>();
    csi::ServiceOptions options;
    if (data_dir) options.data_dir = data_dir;
    options.workers = workers;
    server->service = std::make_unique<csi::ApiService>(store->store, options);
    server->http = std::make_unique<csi::HttpServer>(*server->service);
    *out = server.release();
  });
}

csi_status csi_server_bind(csi_server* server, const char* listen) {
  if (!server || !listen) return fail(CSI_ERR_INVALID_ARGUMENT, "server and listen are required");
  return guarded([&] {
    auto [host, port] = csi::parse_listen_address(listen);
    server->http->bind(host, port);
  });
}

int csi_server_port(const csi_server* server) { return server ? server->http->port() : -1; }

csi_status csi_server_start(csi_server* server) {
  if (!server) return fail(CSI_ERR_INVALID_ARGUMENT, "server is required");
  return guarded([&] { server->http->start(); });
}

csi_status csi_server_run(csi_server* server) {
  if (!server) return fail(CSI_ERR_INVALID_ARGUMENT, "server is required");
  return guarded([&] { server->http->run(); });
}

void csi_server_stop(csi_server* server) {
  if (server) server->http->stop();
}

void csi_server_destroy(csi_server* server) {
  if (!server) return;
  server->http->stop();
  server->service->shutdown();
  delete server;
}

}  // extern "C"
