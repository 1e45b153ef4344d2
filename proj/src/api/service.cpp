#include <charconv>

#include "csi/api.hpp"

namespace csi {

namespace {

struct Interrupted {};

ApiResponse json_response(const Json& j, int status = 200) {
  ApiResponse r;
  r.status = status;
  r.body = j.dump();
  return r;
}

std::optional<std::string> param(const Params& params, std::string_view key) {
  auto it = params.find(std::string(key));
  if (it == params.end()) return std::nullopt;
  return it->second;
}

template <class T>
std::optional<T> number_param(const Params& params, std::string_view key) {
  auto text = param(params, key);
  if (!text) return std::nullopt;
  T value{};
  auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), value);
  if (text->empty() || ec != std::errc{} || ptr != text->data() + text->size())
    throw Error(Errc::invalid_argument, std::string(key) + " is not a number: '" + *text + "'");
  return value;
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  while (!path.empty()) {
    auto slash = path.find('/');
    parts.push_back(path.substr(0, slash));
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }
  return parts;
}

Json map_json(std::string_view id, const TopicModel& m) {
  Json j;
  j["model_id"] = id;
  j["topics"] = m.topics;
  j["marginal"] = m.marginal;
  j["coords"] = Json::array();
  for (const auto& c : m.coords) j["coords"].push_back({c[0], c[1]});
  return j;
}

}  // namespace

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::unknown_dimension:
    case Errc::unknown_job:
    case Errc::unknown_model:
      return 404;
    case Errc::job_not_done:
      return 409;
    case Errc::too_many_documents:
      return 413;
    case Errc::empty_selection:
    case Errc::empty_corpus_after_cleaning:
    case Errc::degenerate_corpus:
      return 422;
    case Errc::io:
    case Errc::corrupt_snapshot:
    case Errc::corrupt_model:
    case Errc::unsupported_version:
      return 500;
    default:
      return 400;
  }
}

ApiResponse error_response(int status, std::string_view code, std::string_view message) {
  Json j;
  j["status"] = status;
  j["code"] = code;
  j["message"] = message;
  return json_response(j, status);
}

ApiResponse error_response(const Error& error) {
  return error_response(http_status(error.code()), errc_name(error.code()), error.what());
}

ApiService::ApiService(std::shared_ptr<Store> store, ServiceOptions options)
    : store_(std::move(store)),
      options_(std::move(options)),
      queries_(store_),
      registry_(options_.data_dir.empty() ? std::filesystem::path{}
                                          : (std::filesystem::create_directories(options_.data_dir),
                                             options_.data_dir / "jobs.json")) {
  if (!options_.data_dir.empty()) std::filesystem::create_directories(options_.data_dir / "models");
  for (auto& id : registry_.queued_ids()) queue_.push_back(std::move(id));
  for (std::size_t i = 0; i < options_.workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

ApiService::~ApiService() { shutdown(); }

void ApiService::shutdown() {
  {
    std::lock_guard lock(queue_mutex_);
    if (stopping_ && workers_.empty()) return;
    stopping_ = true;
  }
  queue_cv_.notify_all();
  for (auto& t : workers_)
    if (t.joinable()) t.join();
  workers_.clear();
}

std::filesystem::path ApiService::model_path(std::string_view id) const {
  return options_.data_dir / "models" / (std::string(id) + ".json");
}

JobRecord ApiService::submit(const JobParams& params) {
  const Predicate predicate = compile(params.filter);
  const std::size_t n = store_->read([&](const Corpus& c) { return select(c, predicate).size(); });
  if (n > kMaxTrainingDocuments)
    throw Error(Errc::too_many_documents, "the filter selects " + std::to_string(n) +
                                              " documents; the cap is " +
                                              std::to_string(kMaxTrainingDocuments));
  auto job = registry_.create(params, n);
  {
    std::lock_guard lock(queue_mutex_);
    queue_.push_back(job.job_id);
  }
  queue_cv_.notify_one();
  return job;
}

void ApiService::worker_loop() {
  for (;;) {
    std::string id;
    {
      std::unique_lock lock(queue_mutex_);
      queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = std::move(queue_.front());
      queue_.pop_front();
    }
    run_job(id);
  }
}

void ApiService::run_job(const std::string& id) {
  JobRecord job;
  try {
    job = registry_.mark_running(id);
  } catch (const Error&) {
    return;
  }
  try {
    const Predicate predicate = compile(job.params.filter);
    auto texts = store_->read([&](const Corpus& c) {
      std::vector<DocumentText> out;
      auto docs = select(c, predicate);
      if (docs.size() > kMaxTrainingDocuments)
        throw Error(Errc::too_many_documents,
                    std::to_string(docs.size()) + " documents exceed the cap");
      out.reserve(docs.size());
      for (DocNo d : docs) {
        const auto& r = c.at(d);
        out.push_back({r.id, r.title, r.abstract});
      }
      return out;
    });
    auto corpus = preprocess(texts);
    texts.clear();
    auto observer = [this](const GibbsCounts&) {
      std::lock_guard lock(queue_mutex_);
      if (stopping_) throw Interrupted{};
    };
    auto model = std::make_shared<const TopicModel>(train(corpus, job.params.train, observer));
    if (!options_.data_dir.empty()) save_model(*model, model_path(id));
    {
      std::lock_guard lock(models_mutex_);
      models_[id] = model;
    }
    registry_.mark_done(id, id);
  } catch (const Interrupted&) {
    registry_.mark_failed(id, "Interrupted", "the server stopped while this job was running");
  } catch (const Error& e) {
    registry_.mark_failed(id, errc_name(e.code()), e.what());
  } catch (const std::exception& e) {
    registry_.mark_failed(id, "Internal", e.what());
  }
}

std::shared_ptr<const TopicModel> ApiService::model(std::string_view id) {
  auto job = registry_.get(id);
  if (!job) throw Error(Errc::unknown_model, "no model '" + std::string(id) + "'");
  if (job->state == JobState::failed)
    throw Error(Errc::unknown_model, "job " + job->job_id + " failed and produced no model");
  if (job->state != JobState::done)
    throw Error(Errc::job_not_done,
                "job " + job->job_id + " is " + std::string(to_string(job->state)));
  std::lock_guard lock(models_mutex_);
  auto it = models_.find(id);
  if (it != models_.end()) return it->second;
  if (options_.data_dir.empty() || !std::filesystem::exists(model_path(id)))
    throw Error(Errc::unknown_model, "model '" + std::string(id) + "' is not available");
  auto loaded = std::make_shared<const TopicModel>(load_model(model_path(id)));
  models_.emplace(std::string(id), loaded);
  return loaded;
}

ApiResponse ApiService::handle(std::string_view method, std::string_view path,
                               const Params& params, std::string_view body) {
  if (path == "/healthz") {
    ApiResponse r;
    r.content_type = "text/plain";
    r.body = "ok";
    return r;
  }
  if (!path.starts_with(kApiPrefix) || path.size() <= kApiPrefix.size() ||
      path[kApiPrefix.size()] != '/')
    return error_response(404, "NotFound", "no route " + std::string(path));
  std::string_view rest = path.substr(kApiPrefix.size() + 1);

  try {
    if (rest.starts_with("topics/")) return handle_topics(method, rest.substr(7), params, body);
    if (method != "GET") return error_response(405, "MethodNotAllowed", "use GET");
    if (auto r = queries_.get(rest, params)) return *r;
    return error_response(404, "NotFound", "no route " + std::string(path));
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

ApiResponse ApiService::handle_topics(std::string_view method, std::string_view rest,
                                      const Params& params, std::string_view body) {
  auto parts = split_path(rest);
  if (parts.size() == 1 && parts[0] == "jobs") {
    if (method == "POST") {
      Json j;
      try {
        j = body.empty() ? Json::object() : Json::parse(body);
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_argument, std::string("body is not JSON: ") + e.what());
      }
      return json_response(to_json(submit(job_params_from_json(j))), 202);
    }
    if (method == "GET") {
      Json list = Json::array();
      for (const auto& job : registry_.all()) list.push_back(to_json(job));
      return json_response(list);
    }
    return error_response(405, "MethodNotAllowed", "use GET or POST");
  }
  if (method != "GET") return error_response(405, "MethodNotAllowed", "use GET");

  if (parts.size() == 2 && parts[0] == "jobs") {
    auto job = registry_.get(parts[1]);
    if (!job) throw Error(Errc::unknown_job, "no job '" + std::string(parts[1]) + "'");
    return json_response(to_json(*job));
  }

  if (parts.size() == 3 && parts[0] == "models") {
    const std::string_view id = parts[1];
    if (parts[2] == "map") return json_response(map_json(id, *model(id)));
    if (parts[2] == "artifact") {
      ApiResponse r;
      r.body = model_to_bytes(*model(id));
      return r;
    }
    if (parts[2] == "terms") {
      auto m = model(id);
      PanelRequest req;
      req.topic = number_param<std::uint32_t>(params, "topic");
      req.term = param(params, "term");
      auto job = registry_.get(id);
      req.lambda = number_param<double>(params, "lambda").value_or(job->params.lambda);
      req.n = number_param<std::size_t>(params, "n").value_or(kPanelSize);
      return json_response(to_json(term_panel(*m, req)));
    }
  }
  return error_response(404, "NotFound", "no route topics/" + std::string(rest));
}

}  // namespace csi
