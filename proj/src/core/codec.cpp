#include "csi/codec.hpp"

#include <charconv>
#include <limits>

#include "csi/error.hpp"

namespace csi {

namespace {

constexpr std::string_view kRegexPrefix = "re:";
constexpr std::string_view kExactPrefix = "eq:";

template <class T>
T parse_integer(std::string_view key, std::string_view text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw Error(Errc::invalid_filter,
                std::string(key) + " must be an integer, got '" + std::string(text) + "'");
  return value;
}

struct FilterBuilder {
  FilterQuery q;
  std::optional<int> year_min, year_max;
  std::optional<std::uint64_t> cit_min, cit_max;

  void add(std::string_view key, const std::string& value) {
    if (key == "venue") {
      q.venues.push_back(decode_matcher(value));
    } else if (key == "author") {
      q.authors.push_back(decode_matcher(value));
    } else if (key == "publisher") {
      q.publishers.push_back(decode_matcher(value));
    } else if (key == "field_of_study") {
      q.fields_of_study.push_back(value);
    } else if (key == "paper_type") {
      auto t = parse_paper_type(value);
      if (!t) throw Error(Errc::invalid_filter, "unknown paper_type '" + value + "'");
      q.paper_types.push_back(*t);
    } else if (key == "access_type") {
      auto t = parse_access_type(value);
      if (!t) throw Error(Errc::invalid_filter, "unknown access_type '" + value + "'");
      q.access_types.push_back(*t);
    } else if (key == "year_min") {
      set_once(year_min, key, parse_integer<int>(key, value));
    } else if (key == "year_max") {
      set_once(year_max, key, parse_integer<int>(key, value));
    } else if (key == "cit_min") {
      set_once(cit_min, key, parse_integer<std::uint64_t>(key, value));
    } else if (key == "cit_max") {
      set_once(cit_max, key, parse_integer<std::uint64_t>(key, value));
    }
  }

  template <class T>
  static void set_once(std::optional<T>& slot, std::string_view key, T value) {
    if (slot) throw Error(Errc::invalid_filter, std::string(key) + " given more than once");
    slot = value;
  }

  FilterQuery finish() {
    if (year_min || year_max)
      q.year_range = Range<int>{year_min.value_or(kMinYear), year_max.value_or(kMaxYear)};
    if (cit_min || cit_max)
      q.citation_range = Range<std::uint64_t>{
          cit_min.value_or(0), cit_max.value_or(std::numeric_limits<std::uint64_t>::max())};
    return std::move(q);
  }
};

bool is_filter_key(std::string_view key) {
  for (auto k : kFilterKeys)
    if (k == key) return true;
  return false;
}

template <class F>
auto decoding(std::string_view what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, "malformed " + std::string(what) + ": " + e.what());
  }
}

Json optional_string(const std::optional<std::string>& s) {
  return s ? Json(*s) : Json(nullptr);
}

std::optional<std::string> read_optional_string(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

template <class T>
T parse_enum(std::optional<T> parsed, std::string_view what, const std::string& text) {
  if (!parsed) throw Error(Errc::invalid_argument, "unknown " + std::string(what) + " '" + text + "'");
  return *parsed;
}

HistogramMetric parse_histogram_metric(const std::string& text) {
  if (text == "entity_count") return HistogramMetric::entity_count;
  if (text == "citation_sum") return HistogramMetric::citation_sum;
  throw Error(Errc::invalid_argument, "unknown histogram metric '" + text + "'");
}

Json row_to_json(const GridRow& row) {
  return std::visit(
      [](const auto& r) -> Json {
        using R = std::decay_t<decltype(r)>;
        Json j;
        if constexpr (std::is_same_v<R, PaperRow>) {
          j["id"] = r.id;
          j["title"] = r.title;
          j["year"] = r.year;
          j["authors"] = r.authors;
          j["venue"] = optional_string(r.venue);
          j["citations"] = r.citations;
          j["link"] = optional_string(r.link);
        } else if constexpr (std::is_same_v<R, AuthorRow>) {
          j["name"] = r.name;
          j["first_year"] = r.first_year;
          j["last_year"] = r.last_year;
          j["n_papers"] = r.n_papers;
          j["n_citations"] = r.n_citations;
          j["avg_citations"] = r.avg_citations;
          j["n_venues"] = r.n_venues;
        } else {
          j["label"] = r.label;
          j["first_year"] = r.first_year;
          j["last_year"] = r.last_year;
          j["n_papers"] = r.n_papers;
          j["n_citations"] = r.n_citations;
          j["avg_citations"] = r.avg_citations;
        }
        return j;
      },
      row);
}

GridRow row_from_json(Dimension dim, const Json& j) {
  if (dim == Dimension::papers) {
    PaperRow r;
    j.at("id").get_to(r.id);
    j.at("title").get_to(r.title);
    j.at("year").get_to(r.year);
    j.at("authors").get_to(r.authors);
    r.venue = read_optional_string(j, "venue");
    j.at("citations").get_to(r.citations);
    r.link = read_optional_string(j, "link");
    return r;
  }
  if (dim == Dimension::authors) {
    AuthorRow r;
    j.at("name").get_to(r.name);
    j.at("first_year").get_to(r.first_year);
    j.at("last_year").get_to(r.last_year);
    j.at("n_papers").get_to(r.n_papers);
    j.at("n_citations").get_to(r.n_citations);
    j.at("avg_citations").get_to(r.avg_citations);
    j.at("n_venues").get_to(r.n_venues);
    return r;
  }
  EntityRow r;
  j.at("label").get_to(r.label);
  j.at("first_year").get_to(r.first_year);
  j.at("last_year").get_to(r.last_year);
  j.at("n_papers").get_to(r.n_papers);
  j.at("n_citations").get_to(r.n_citations);
  j.at("avg_citations").get_to(r.avg_citations);
  return r;
}

}  // namespace

std::string encode_matcher(const TextMatcher& matcher) {
  if (matcher.mode == MatchMode::regex) return std::string(kRegexPrefix) + matcher.pattern;
  if (matcher.pattern.starts_with(kRegexPrefix) || matcher.pattern.starts_with(kExactPrefix))
    return std::string(kExactPrefix) + matcher.pattern;
  return matcher.pattern;
}

TextMatcher decode_matcher(std::string_view text) {
  if (text.starts_with(kRegexPrefix))
    return TextMatcher::regex(std::string(text.substr(kRegexPrefix.size())));
  if (text.starts_with(kExactPrefix))
    return TextMatcher::exact(std::string(text.substr(kExactPrefix.size())));
  return TextMatcher::exact(std::string(text));
}

FilterQuery filter_from_params(const Params& params) {
  FilterBuilder b;
  for (const auto& [key, value] : params)
    if (is_filter_key(key)) b.add(key, value);
  return b.finish();
}

Params filter_to_params(const FilterQuery& filter) {
  Params p;
  for (const auto& m : filter.venues) p.emplace("venue", encode_matcher(m));
  for (const auto& m : filter.authors) p.emplace("author", encode_matcher(m));
  for (const auto& m : filter.publishers) p.emplace("publisher", encode_matcher(m));
  for (auto t : filter.paper_types) p.emplace("paper_type", std::string(to_string(t)));
  for (const auto& f : filter.fields_of_study) p.emplace("field_of_study", f);
  for (auto t : filter.access_types) p.emplace("access_type", std::string(to_string(t)));
  if (filter.year_range) {
    p.emplace("year_min", std::to_string(filter.year_range->min));
    p.emplace("year_max", std::to_string(filter.year_range->max));
  }
  if (filter.citation_range) {
    p.emplace("cit_min", std::to_string(filter.citation_range->min));
    p.emplace("cit_max", std::to_string(filter.citation_range->max));
  }
  return p;
}

FilterQuery filter_from_json(const Json& j) {
  if (j.is_null()) return {};
  if (!j.is_object()) throw Error(Errc::invalid_filter, "filters must be a JSON object");
  FilterBuilder b;
  for (const auto& [key, value] : j.items()) {
    if (!is_filter_key(key)) throw Error(Errc::invalid_filter, "unknown filter key '" + key + "'");
    auto add_scalar = [&](const Json& v) {
      if (v.is_string())
        b.add(key, v.get<std::string>());
      else if (v.is_number_integer())
        b.add(key, v.dump());
      else
        throw Error(Errc::invalid_filter, "filter " + key + " has a value of the wrong type");
    };
    if (value.is_array()) {
      if (key.starts_with("year_") || key.starts_with("cit_"))
        throw Error(Errc::invalid_filter, key + " takes a single value");
      for (const auto& v : value) add_scalar(v);
    } else {
      add_scalar(value);
    }
  }
  return b.finish();
}

Json filter_to_json(const FilterQuery& filter) {
  Json j = Json::object();
  for (const auto& [key, value] : filter_to_params(filter)) {
    if (key.starts_with("year_") || key.starts_with("cit_")) {
      if (key.starts_with("year_"))
        j[key] = std::stoi(value);
      else
        j[key] = std::stoull(value);
    } else {
      j[key].push_back(value);
    }
  }
  return j;
}

Json to_json(const YearHistogram& hist) {
  Json j;
  j["metric"] = to_string(hist.metric);
  j["buckets"] = Json::array();
  for (const auto& b : hist.buckets) j["buckets"].push_back({{"year", b.year}, {"count", b.count}});
  return j;
}

Json to_json(const DistributionSummary& d) {
  return {{"metric", to_string(d.metric)}, {"min", d.min},       {"q25", d.q25},
          {"median", d.median},            {"q75", d.q75},       {"max", d.max}};
}

Json to_json(const TopKList& list) {
  Json j;
  j["metric"] = to_string(list.metric);
  j["k"] = list.k;
  j["entries"] = Json::array();
  for (const auto& e : list.entries)
    j["entries"].push_back({{"label", e.label}, {"weight", e.weight}});
  return j;
}

Json to_json(const DetailsPage& page) {
  Json j;
  j["dimension"] = to_string(page.dimension);
  j["total"] = page.total;
  j["page"] = page.page;
  j["page_size"] = page.page_size;
  j["sort_key"] = page.sort_key;
  j["sort_dir"] = to_string(page.sort_dir);
  j["rows"] = Json::array();
  for (const auto& row : page.rows) j["rows"].push_back(row_to_json(row));
  return j;
}

Json to_json(const CitationSeries& s) {
  Json j;
  j["incoming"] = to_json(s.incoming);
  j["outgoing"] = to_json(s.outgoing);
  j["incoming_distribution"] = s.incoming_dist ? to_json(*s.incoming_dist) : Json(nullptr);
  j["outgoing_distribution"] = s.outgoing_dist ? to_json(*s.outgoing_dist) : Json(nullptr);
  return j;
}

Json to_json(const std::vector<Suggestion>& suggestions) {
  Json j = Json::array();
  for (const auto& s : suggestions) j.push_back({{"value", s.value}, {"count", s.count}});
  return j;
}

Json to_json(const StoreStats& stats) {
  Json j;
  j["n_records"] = stats.n_records;
  j["per_facet_cardinality"] = Json::object();
  for (const auto& [facet, n] : stats.per_facet_cardinality) j["per_facet_cardinality"][facet] = n;
  if (stats.year_range)
    j["year_range"] = {stats.year_range->first, stats.year_range->second};
  else
    j["year_range"] = nullptr;
  return j;
}

Json to_json(const TermPanel& panel) {
  Json j;
  j["mode"] = to_string(panel.mode);
  j["lambda"] = panel.lambda;
  j["selected_topic"] = panel.selected_topic ? Json(*panel.selected_topic) : Json(nullptr);
  j["selected_term"] = optional_string(panel.selected_term);
  j["terms"] = Json::array();
  for (const auto& row : panel.terms) {
    Json r{{"term", row.term}, {"overall", row.overall}};
    r["in_topic"] = row.in_topic ? Json(*row.in_topic) : Json(nullptr);
    j["terms"].push_back(std::move(r));
  }
  j["topic_weights"] = panel.topic_weights;
  return j;
}

YearHistogram histogram_from_json(const Json& j) {
  return decoding("histogram", [&] {
    YearHistogram h;
    h.metric = parse_histogram_metric(j.at("metric").get<std::string>());
    for (const auto& b : j.at("buckets"))
      h.buckets.push_back({b.at("year").get<int>(), b.at("count").get<std::uint64_t>()});
    return h;
  });
}

DistributionSummary distribution_from_json(const Json& j) {
  return decoding("distribution", [&] {
    DistributionSummary d;
    auto metric = j.at("metric").get<std::string>();
    d.metric = parse_enum(parse_metric(metric), "metric", metric);
    j.at("min").get_to(d.min);
    j.at("q25").get_to(d.q25);
    j.at("median").get_to(d.median);
    j.at("q75").get_to(d.q75);
    j.at("max").get_to(d.max);
    return d;
  });
}

TopKList top_k_from_json(const Json& j) {
  return decoding("top-k list", [&] {
    TopKList list;
    auto metric = j.at("metric").get<std::string>();
    list.metric = parse_enum(parse_metric(metric), "metric", metric);
    j.at("k").get_to(list.k);
    for (const auto& e : j.at("entries"))
      list.entries.push_back({e.at("label").get<std::string>(), e.at("weight").get<std::uint64_t>()});
    return list;
  });
}

DetailsPage details_from_json(const Json& j) {
  return decoding("details page", [&] {
    DetailsPage page;
    auto dim = j.at("dimension").get<std::string>();
    page.dimension = parse_enum(parse_dimension(dim), "dimension", dim);
    j.at("total").get_to(page.total);
    j.at("page").get_to(page.page);
    j.at("page_size").get_to(page.page_size);
    j.at("sort_key").get_to(page.sort_key);
    auto dir = j.at("sort_dir").get<std::string>();
    page.sort_dir = parse_enum(parse_sort_dir(dir), "sort direction", dir);
    for (const auto& row : j.at("rows")) page.rows.push_back(row_from_json(page.dimension, row));
    return page;
  });
}

CitationSeries citation_series_from_json(const Json& j) {
  return decoding("citation series", [&] {
    CitationSeries s;
    s.incoming = histogram_from_json(j.at("incoming"));
    s.outgoing = histogram_from_json(j.at("outgoing"));
    if (!j.at("incoming_distribution").is_null())
      s.incoming_dist = distribution_from_json(j.at("incoming_distribution"));
    if (!j.at("outgoing_distribution").is_null())
      s.outgoing_dist = distribution_from_json(j.at("outgoing_distribution"));
    return s;
  });
}

std::vector<Suggestion> suggestions_from_json(const Json& j) {
  return decoding("suggestions", [&] {
    std::vector<Suggestion> out;
    for (const auto& s : j)
      out.push_back({s.at("value").get<std::string>(), s.at("count").get<std::uint64_t>()});
    return out;
  });
}

TermPanel term_panel_from_json(const Json& j) {
  return decoding("term panel", [&] {
    TermPanel p;
    auto mode = j.at("mode").get<std::string>();
    if (mode == "salient_overall")
      p.mode = PanelMode::salient_overall;
    else if (mode == "relevant_in_topic")
      p.mode = PanelMode::relevant_in_topic;
    else
      throw Error(Errc::invalid_argument, "unknown panel mode '" + mode + "'");
    j.at("lambda").get_to(p.lambda);
    if (!j.at("selected_topic").is_null()) p.selected_topic = j.at("selected_topic").get<std::uint32_t>();
    p.selected_term = read_optional_string(j, "selected_term");
    for (const auto& r : j.at("terms")) {
      TermPanelRow row{r.at("term").get<std::string>(), r.at("overall").get<std::uint64_t>(),
                       std::nullopt};
      if (!r.at("in_topic").is_null()) row.in_topic = r.at("in_topic").get<double>();
      p.terms.push_back(std::move(row));
    }
    j.at("topic_weights").get_to(p.topic_weights);
    return p;
  });
}

}  // namespace csi
