#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "csi/codec.hpp"
#include "csi/error.hpp"
#include "csi/query.hpp"
#include "csi/store.hpp"
#include "csi/topics.hpp"

namespace csi {

inline constexpr std::string_view kApiPrefix = "/api/v1";
inline constexpr std::uint64_t kDefaultTopK = 10;
inline constexpr std::size_t kDefaultSuggestions = 10;

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

/// HTTP status for a domain error.
int http_status(Errc code) noexcept;
/// Error body {"status", "code", "message"}.
ApiResponse error_response(int status, std::string_view code, std::string_view message);
ApiResponse error_response(const Error& error);

/// Answers the read-only routes: aggregates, citations, autocomplete, export
/// and stats. Paths are relative to the API prefix, e.g. "venues/top-k".
class QueryHandler {
public:
  explicit QueryHandler(std::shared_ptr<const Store> store) : store_(std::move(store)) {}

  /// Returns nullopt when the path names no read route.
  std::optional<ApiResponse> get(std::string_view path, const Params& params) const;

  /// JSON body for one aggregate route, as served. Throws Error.
  Json aggregate(std::string_view path, const Params& params) const;
  /// CSV body for one aggregate route. Throws Error.
  std::string aggregate_csv(std::string_view path, const Params& params) const;

private:
  std::shared_ptr<const Store> store_;
};

enum class JobState { queued, running, done, failed };
std::string_view to_string(JobState state) noexcept;
std::optional<JobState> parse_job_state(std::string_view text) noexcept;

struct JobParams {
  FilterQuery filter;
  TrainParams train;
  double lambda = kDefaultLambda;

  bool operator==(const JobParams& o) const {
    return filter == o.filter && train.topics == o.train.topics &&
           train.effective_alpha() == o.train.effective_alpha() && train.beta == o.train.beta &&
           train.iterations == o.train.iterations && train.seed == o.train.seed &&
           lambda == o.lambda;
  }
};

/// Body of POST topics/jobs: {filters, K, alpha, beta, iterations, seed,
/// lambda}; every key is optional. Throws Error(invalid_filter) or
/// Error(invalid_argument).
JobParams job_params_from_json(const Json& j);
Json to_json(const JobParams& params);

struct JobRecord {
  std::string job_id;
  JobState state = JobState::queued;
  std::int64_t submitted_at = 0;  // Unix milliseconds
  std::optional<std::int64_t> started_at;
  std::optional<std::int64_t> finished_at;
  JobParams params;
  std::uint64_t n_documents = 0;
  std::optional<std::string> result_ref;  // model id, present iff done
  std::optional<std::string> error;       // message, present iff failed
  std::optional<std::string> error_code;

  bool operator==(const JobRecord&) const = default;
};

Json to_json(const JobRecord& job);
JobRecord job_from_json(const Json& j);

/// Thread-safe job table. With a file path, every change is written through
/// atomically, and reopening the file recovers the table: queued jobs stay
/// queued and jobs caught running are marked failed.
class JobRegistry {
public:
  explicit JobRegistry(std::filesystem::path file = {});

  JobRecord create(const JobParams& params, std::uint64_t n_documents);
  std::optional<JobRecord> get(std::string_view id) const;
  std::vector<JobRecord> all() const;
  std::vector<std::string> queued_ids() const;

  /// Each transition checks the current state and throws
  /// Error(invalid_argument) on an illegal move.
  JobRecord mark_running(std::string_view id);
  JobRecord mark_done(std::string_view id, std::string model_id);
  JobRecord mark_failed(std::string_view id, std::string_view code, std::string message);

  /// Blocks until the job reaches done or failed, or the timeout passes.
  std::optional<JobRecord> wait_final(std::string_view id, std::chrono::milliseconds timeout) const;

private:
  JobRecord& find_locked(std::string_view id);
  void persist_locked() const;

  std::filesystem::path file_;
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::map<std::string, JobRecord, std::less<>> jobs_;
  std::uint64_t next_id_ = 1;
};

struct ServiceOptions {
  /// Holds jobs.json and models/. Empty keeps everything in memory.
  std::filesystem::path data_dir;
  std::size_t workers = 1;
};

/// Complete request handler: read routes plus the topic job lifecycle, with
/// a worker pool that trains models off the request path.
class ApiService {
public:
  ApiService(std::shared_ptr<Store> store, ServiceOptions options = {});
  ~ApiService();
  ApiService(const ApiService&) = delete;
  ApiService& operator=(const ApiService&) = delete;

  /// Dispatches on method and full path ("/api/v1/..." or "/healthz").
  ApiResponse handle(std::string_view method, std::string_view path, const Params& params,
                     std::string_view body = {});

  JobRecord submit(const JobParams& params);
  const JobRegistry& jobs() const noexcept { return registry_; }
  /// Throws Error(unknown_model) or Error(job_not_done).
  std::shared_ptr<const TopicModel> model(std::string_view id);

  /// Stops accepting work and joins the workers. A job interrupted mid-training
  /// is marked failed.
  void shutdown();

private:
  void worker_loop();
  void run_job(const std::string& id);
  ApiResponse handle_topics(std::string_view method, std::string_view rest, const Params& params,
                            std::string_view body);
  std::filesystem::path model_path(std::string_view id) const;

  std::shared_ptr<Store> store_;
  ServiceOptions options_;
  QueryHandler queries_;
  JobRegistry registry_;

  std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::deque<std::string> queue_;
  bool stopping_ = false;
  std::vector<std::thread> workers_;

  std::mutex models_mutex_;
  std::map<std::string, std::shared_ptr<const TopicModel>, std::less<>> models_;
};

/// HTTP front end over an ApiService.
class HttpServer {
public:
  explicit HttpServer(ApiService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds host:port; port 0 picks a free port. Returns the bound port.
  /// Throws Error(io) when binding fails.
  int bind(const std::string& host, int port);
  /// Serves on a background thread until stop().
  void start();
  /// Serves on the calling thread until stop().
  void run();
  void stop();
  int port() const noexcept { return port_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
};

/// Splits "host:port"; a bare port binds all interfaces.
std::pair<std::string, int> parse_listen_address(std::string_view text);

}  // namespace csi
