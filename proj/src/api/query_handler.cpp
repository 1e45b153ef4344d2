#include <charconv>

#include "csi/analytics.hpp"
#include "csi/api.hpp"

namespace csi {

namespace {

std::optional<std::string> param(const Params& params, std::string_view key) {
  auto it = params.find(std::string(key));
  if (it == params.end()) return std::nullopt;
  return it->second;
}

template <class T>
std::optional<T> integer_param(const Params& params, std::string_view key) {
  auto text = param(params, key);
  if (!text) return std::nullopt;
  T value{};
  auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), value);
  if (text->empty() || ec != std::errc{} || ptr != text->data() + text->size())
    throw Error(Errc::invalid_argument,
                std::string(key) + " must be a non-negative integer, got '" + *text + "'");
  return value;
}

Metric metric_param(const Params& params) {
  auto text = param(params, "metric");
  if (!text) return Metric::citations;
  auto m = parse_metric(*text);
  if (!m) throw Error(Errc::invalid_metric, "metric must be citations or papers, got '" + *text + "'");
  return *m;
}

struct Route {
  std::string_view head;
  std::string_view op;
};

Route split_route(std::string_view path) {
  auto slash = path.find('/');
  if (slash == std::string_view::npos) return {path, {}};
  return {path.substr(0, slash), path.substr(slash + 1)};
}

bool is_aggregate_op(std::string_view op) {
  return op == "per-year" || op == "distribution" || op == "top-k" || op == "grid";
}

enum class Output { json, csv };

// Runs one aggregate under the store's reader lock and renders it.
std::string render(const Store& store, std::string_view path, const Params& params, Output out) {
  auto [head, op] = split_route(path);
  const bool citations = head == "citations" && op == "series";
  std::optional<Dimension> dim;
  if (!citations) {
    if (!is_aggregate_op(op)) throw Error(Errc::invalid_argument, "no aggregate route '" + std::string(path) + "'");
    dim = parse_dimension(head);
    if (!dim) throw Error(Errc::unknown_dimension, "unknown dimension '" + std::string(head) + "'");
  }
  const Predicate predicate = compile(filter_from_params(params));

  // Parameters are validated before touching the store so errors do not
  // depend on the data.
  Metric metric = metric_param(params);
  std::uint64_t k = kDefaultTopK;
  GridRequest grid;
  if (op == "top-k") k = integer_param<std::uint64_t>(params, "k").value_or(kDefaultTopK);
  if (op == "grid") {
    grid.page = integer_param<std::uint32_t>(params, "page").value_or(1);
    grid.page_size = integer_param<std::uint32_t>(params, "page_size").value_or(kDefaultPageSize);
    grid.sort_key = param(params, "sort").value_or("");
    if (auto dir = param(params, "sort_dir")) {
      grid.sort_dir = parse_sort_dir(*dir);
      if (!grid.sort_dir) throw Error(Errc::bad_sort_key, "sort_dir must be asc or desc");
    }
  }

  return store.read([&](const Corpus& corpus) -> std::string {
    const DocSet docs = select(corpus, predicate);
    auto emit = [&](const auto& result) {
      return out == Output::json ? to_json(result).dump() : export_csv(result);
    };
    if (citations) return emit(citations_over_time(corpus, docs));
    if (op == "per-year") return emit(per_year(corpus, *dim, docs));
    if (op == "distribution") return emit(distribution(corpus, *dim, docs, metric));
    if (op == "top-k") return emit(top_k(corpus, *dim, docs, metric, k));
    return emit(details_grid(corpus, *dim, docs, grid));
  });
}

std::string csv_filename(std::string_view endpoint) {
  std::string name(endpoint);
  for (auto& c : name)
    if (c == '/') c = '-';
  return name + ".csv";
}

ApiResponse json_response(const Json& j) {
  ApiResponse r;
  r.body = j.dump();
  return r;
}

}  // namespace

Json QueryHandler::aggregate(std::string_view path, const Params& params) const {
  return Json::parse(render(*store_, path, params, Output::json));
}

std::string QueryHandler::aggregate_csv(std::string_view path, const Params& params) const {
  return render(*store_, path, params, Output::csv);
}

std::optional<ApiResponse> QueryHandler::get(std::string_view path, const Params& params) const {
  try {
    if (path == "stats")
      return json_response(to_json(store_->read([](const Corpus& c) { return c.stats(); })));

    if (path == "autocomplete") {
      auto facet_name = param(params, "facet");
      if (!facet_name) throw Error(Errc::unknown_facet, "facet is required");
      auto facet = parse_facet(*facet_name);
      if (!facet) throw Error(Errc::unknown_facet, "unknown facet '" + *facet_name + "'");
      auto limit = integer_param<std::size_t>(params, "limit").value_or(kDefaultSuggestions);
      auto matcher = decode_matcher(param(params, "q").value_or(""));
      auto suggestions = store_->read([&](const Corpus& c) {
        return autocomplete(c, *facet, matcher.pattern, limit, matcher.mode);
      });
      return json_response(to_json(suggestions));
    }

    if (path == "export.csv") {
      auto endpoint = param(params, "endpoint");
      if (!endpoint) throw Error(Errc::invalid_argument, "endpoint is required");
      auto [head, op] = split_route(*endpoint);
      bool known = (head == "citations" && op == "series") ||
                   (is_aggregate_op(op) && parse_dimension(head));
      if (!known)
        throw Error(Errc::invalid_argument, "cannot export '" + *endpoint + "'");
      ApiResponse r;
      r.content_type = "text/csv; charset=utf-8";
      r.body = render(*store_, *endpoint, params, Output::csv);
      r.headers.emplace_back("Content-Disposition",
                             "attachment; filename=\"" + csv_filename(*endpoint) + "\"");
      return r;
    }

    auto [head, op] = split_route(path);
    if ((head == "citations" && op == "series") || is_aggregate_op(op)) {
      ApiResponse r;
      r.body = render(*store_, path, params, Output::json);
      return r;
    }
    return std::nullopt;
  } catch (const Error& e) {
    return error_response(e);
  }
}

}  // namespace csi
