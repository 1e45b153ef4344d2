#include <cstdio>
#include <fstream>
#include <sstream>

#include "csi/api.hpp"

namespace csi {

namespace {

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <class T>
std::optional<T> read_optional(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

bool is_final(JobState s) { return s == JobState::done || s == JobState::failed; }

}  // namespace

std::string_view to_string(JobState state) noexcept {
  switch (state) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
  }
  return "failed";
}

std::optional<JobState> parse_job_state(std::string_view text) noexcept {
  for (auto s : {JobState::queued, JobState::running, JobState::done, JobState::failed})
    if (to_string(s) == text) return s;
  return std::nullopt;
}

JobParams job_params_from_json(const Json& j) {
  if (!j.is_object()) throw Error(Errc::invalid_argument, "job body must be a JSON object");
  JobParams p;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "filters") {
        p.filter = filter_from_json(value);
      } else if (key == "K") {
        p.train.topics = value.get<std::uint32_t>();
      } else if (key == "alpha") {
        if (!value.is_null()) p.train.alpha = value.get<double>();
      } else if (key == "beta") {
        p.train.beta = value.get<double>();
      } else if (key == "iterations") {
        p.train.iterations = value.get<std::uint32_t>();
      } else if (key == "seed") {
        p.train.seed = value.get<std::uint64_t>();
      } else if (key == "lambda") {
        p.lambda = value.get<double>();
      } else {
        throw Error(Errc::invalid_argument, "unknown job parameter '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("malformed job parameters: ") + e.what());
  }
  if (p.train.topics < 2) throw Error(Errc::invalid_argument, "K must be at least 2");
  if (p.train.iterations < 1) throw Error(Errc::invalid_argument, "iterations must be at least 1");
  const double alpha = p.train.effective_alpha();
  if (!(alpha > 0) || !(p.train.beta > 0))
    throw Error(Errc::invalid_argument, "alpha and beta must be positive");
  if (!(p.lambda >= 0 && p.lambda <= 1))
    throw Error(Errc::invalid_argument, "lambda must lie in [0, 1]");
  p.train.alpha = alpha;
  return p;
}

Json to_json(const JobParams& p) {
  Json j;
  j["filters"] = filter_to_json(p.filter);
  j["K"] = p.train.topics;
  j["alpha"] = p.train.effective_alpha();
  j["beta"] = p.train.beta;
  j["iterations"] = p.train.iterations;
  j["seed"] = p.train.seed;
  j["lambda"] = p.lambda;
  return j;
}

Json to_json(const JobRecord& job) {
  Json j;
  j["job_id"] = job.job_id;
  j["state"] = to_string(job.state);
  j["submitted_at"] = job.submitted_at;
  j["started_at"] = optional_json(job.started_at);
  j["finished_at"] = optional_json(job.finished_at);
  j["params"] = to_json(job.params);
  j["n_documents"] = job.n_documents;
  j["result_ref"] = optional_json(job.result_ref);
  j["error"] = optional_json(job.error);
  j["error_code"] = optional_json(job.error_code);
  return j;
}

JobRecord job_from_json(const Json& j) {
  try {
    JobRecord r;
    j.at("job_id").get_to(r.job_id);
    auto state = j.at("state").get<std::string>();
    auto parsed = parse_job_state(state);
    if (!parsed) throw Error(Errc::invalid_argument, "unknown job state '" + state + "'");
    r.state = *parsed;
    j.at("submitted_at").get_to(r.submitted_at);
    r.started_at = read_optional<std::int64_t>(j, "started_at");
    r.finished_at = read_optional<std::int64_t>(j, "finished_at");
    r.params = job_params_from_json(j.at("params"));
    j.at("n_documents").get_to(r.n_documents);
    r.result_ref = read_optional<std::string>(j, "result_ref");
    r.error = read_optional<std::string>(j, "error");
    r.error_code = read_optional<std::string>(j, "error_code");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("malformed job record: ") + e.what());
  }
}

JobRegistry::JobRegistry(std::filesystem::path file) : file_(std::move(file)) {
  if (file_.empty() || !std::filesystem::exists(file_)) return;
  std::ifstream in(file_, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  Json j;
  try {
    j = Json::parse(buf.str());
    j.at("next_id").get_to(next_id_);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io, "job registry " + file_.string() + " is unreadable: " + e.what());
  }
  bool changed = false;
  for (const auto& item : j.at("jobs")) {
    auto job = job_from_json(item);
    if (job.state == JobState::running) {
      job.state = JobState::failed;
      job.finished_at = now_ms();
      job.error_code = "Interrupted";
      job.error = "the server stopped while this job was running";
      changed = true;
    }
    jobs_.emplace(job.job_id, std::move(job));
  }
  if (changed) persist_locked();
}

void JobRegistry::persist_locked() const {
  if (file_.empty()) return;
  Json j;
  j["format"] = "csi-jobs";
  j["version"] = 1;
  j["next_id"] = next_id_;
  j["jobs"] = Json::array();
  for (const auto& [id, job] : jobs_) j["jobs"].push_back(to_json(job));
  auto tmp = file_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << j.dump(1) << '\n';
    if (!out.flush()) throw Error(Errc::io, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, file_);
}

JobRecord& JobRegistry::find_locked(std::string_view id) {
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw Error(Errc::unknown_job, "no job '" + std::string(id) + "'");
  return it->second;
}

JobRecord JobRegistry::create(const JobParams& params, std::uint64_t n_documents) {
  std::lock_guard lock(mutex_);
  char id[32];
  std::snprintf(id, sizeof id, "job-%06llu", static_cast<unsigned long long>(next_id_++));
  JobRecord job;
  job.job_id = id;
  job.submitted_at = now_ms();
  job.params = params;
  job.n_documents = n_documents;
  jobs_.emplace(job.job_id, job);
  persist_locked();
  changed_.notify_all();
  return job;
}

std::optional<JobRecord> JobRegistry::get(std::string_view id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

std::vector<JobRecord> JobRegistry::all() const {
  std::lock_guard lock(mutex_);
  std::vector<JobRecord> out;
  for (const auto& [id, job] : jobs_) out.push_back(job);
  return out;
}

std::vector<std::string> JobRegistry::queued_ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, job] : jobs_)
    if (job.state == JobState::queued) out.push_back(id);
  return out;
}

JobRecord JobRegistry::mark_running(std::string_view id) {
  std::lock_guard lock(mutex_);
  auto& job = find_locked(id);
  if (job.state != JobState::queued)
    throw Error(Errc::invalid_argument, "job " + job.job_id + " is " +
                                            std::string(to_string(job.state)) + ", not queued");
  job.state = JobState::running;
  job.started_at = now_ms();
  persist_locked();
  changed_.notify_all();
  return job;
}

JobRecord JobRegistry::mark_done(std::string_view id, std::string model_id) {
  std::lock_guard lock(mutex_);
  auto& job = find_locked(id);
  if (job.state != JobState::running)
    throw Error(Errc::invalid_argument, "job " + job.job_id + " is not running");
  job.state = JobState::done;
  job.finished_at = now_ms();
  job.result_ref = std::move(model_id);
  persist_locked();
  changed_.notify_all();
  return job;
}

JobRecord JobRegistry::mark_failed(std::string_view id, std::string_view code, std::string message) {
  std::lock_guard lock(mutex_);
  auto& job = find_locked(id);
  if (is_final(job.state))
    throw Error(Errc::invalid_argument, "job " + job.job_id + " already finished");
  job.state = JobState::failed;
  job.finished_at = now_ms();
  job.error_code = std::string(code);
  job.error = std::move(message);
  persist_locked();
  changed_.notify_all();
  return job;
}

std::optional<JobRecord> JobRegistry::wait_final(std::string_view id,
                                                 std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  auto finished = [&] {
    auto it = jobs_.find(id);
    return it == jobs_.end() || is_final(it->second.state);
  };
  changed_.wait_for(lock, timeout, finished);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

}  // namespace csi
