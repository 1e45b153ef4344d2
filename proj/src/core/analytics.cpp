#include "csi/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <unordered_set>

#include "csi/error.hpp"

namespace csi {

namespace {

Facet facet_of(Dimension dim) {
  switch (dim) {
    case Dimension::authors: return Facet::author;
    case Dimension::venues: return Facet::venue;
    case Dimension::paper_types: return Facet::paper_type;
    case Dimension::fields_of_study: return Facet::field_of_study;
    case Dimension::publishers: return Facet::publisher;
    case Dimension::papers: break;
  }
  throw Error(Errc::invalid_argument, "papers dimension has no facet");
}

struct EntityAgg {
  std::uint64_t n_papers = 0;
  std::uint64_t n_citations = 0;
  int first_year = 0;
  int last_year = 0;
  std::set<std::string_view> venues;
};

std::map<std::string_view, EntityAgg> aggregate_entities(const Corpus& corpus, Dimension dim,
                                                         const DocSet& docs,
                                                         bool track_venues = false) {
  std::map<std::string_view, EntityAgg> out;
  Facet facet = facet_of(dim);
  for (auto d : docs) {
    const auto& r = corpus.at(d);
    for (auto label : facet_values(r, facet)) {
      auto [it, fresh] = out.try_emplace(label);
      auto& agg = it->second;
      if (fresh) {
        agg.first_year = agg.last_year = r.year;
      } else {
        agg.first_year = std::min(agg.first_year, r.year);
        agg.last_year = std::max(agg.last_year, r.year);
      }
      ++agg.n_papers;
      agg.n_citations += r.in_citations;
      if (track_venues && r.venue) agg.venues.insert(*r.venue);
    }
  }
  return out;
}

double quantile(const std::vector<double>& sorted, double p) {
  double h = static_cast<double>(sorted.size() - 1) * p;
  auto f = static_cast<std::size_t>(std::floor(h));
  if (f + 1 >= sorted.size()) return sorted.back();
  return sorted[f] + (h - static_cast<double>(f)) * (sorted[f + 1] - sorted[f]);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

template <class Row, class Less>
void sort_rows(std::vector<Row>& rows, Less key_less, SortDir dir,
               std::function<bool(const Row&, const Row&)> tie_less) {
  std::sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
    if (key_less(a, b)) return dir == SortDir::asc;
    if (key_less(b, a)) return dir == SortDir::desc;
    return tie_less(a, b);
  });
}

template <class Row, class Field>
auto by(Field Row::*field) {
  return [field](const Row& a, const Row& b) { return a.*field < b.*field; };
}

}  // namespace

std::string_view to_string(Dimension dim) noexcept {
  switch (dim) {
    case Dimension::papers: return "papers";
    case Dimension::authors: return "authors";
    case Dimension::venues: return "venues";
    case Dimension::paper_types: return "paper_types";
    case Dimension::fields_of_study: return "fields_of_study";
    case Dimension::publishers: return "publishers";
  }
  return "papers";
}

std::optional<Dimension> parse_dimension(std::string_view text) noexcept {
  std::string normalized(text);
  std::replace(normalized.begin(), normalized.end(), '-', '_');
  for (auto d : kAllDimensions)
    if (to_string(d) == normalized) return d;
  return std::nullopt;
}

std::string_view to_string(Metric metric) noexcept {
  return metric == Metric::citations ? "citations" : "papers";
}

std::optional<Metric> parse_metric(std::string_view text) noexcept {
  if (text == "citations") return Metric::citations;
  if (text == "papers") return Metric::papers;
  return std::nullopt;
}

std::string_view to_string(HistogramMetric metric) noexcept {
  return metric == HistogramMetric::entity_count ? "entity_count" : "citation_sum";
}

std::string_view to_string(SortDir dir) noexcept { return dir == SortDir::asc ? "asc" : "desc"; }

std::optional<SortDir> parse_sort_dir(std::string_view text) noexcept {
  if (text == "asc") return SortDir::asc;
  if (text == "desc") return SortDir::desc;
  return std::nullopt;
}

double average_citations(std::uint64_t n_citations, std::uint64_t n_papers) noexcept {
  if (n_papers == 0) return 0.0;
  std::uint64_t scaled = n_citations * 100;
  std::uint64_t hundredths = scaled / n_papers;
  if (2 * (scaled % n_papers) >= n_papers) ++hundredths;
  return static_cast<double>(hundredths) / 100.0;
}

DistributionSummary five_number_summary(std::vector<double> sample, Metric metric) {
  if (sample.empty()) throw Error(Errc::empty_selection, "no values in the selection");
  std::sort(sample.begin(), sample.end());
  DistributionSummary s;
  s.metric = metric;
  s.min = sample.front();
  s.q25 = quantile(sample, 0.25);
  s.median = quantile(sample, 0.5);
  s.q75 = quantile(sample, 0.75);
  s.max = sample.back();
  return s;
}

YearHistogram per_year(const Corpus& corpus, Dimension dim, const DocSet& docs) {
  YearHistogram hist;
  hist.metric = HistogramMetric::entity_count;
  std::map<int, std::uint64_t> counts;
  if (dim == Dimension::papers) {
    for (auto d : docs) ++counts[corpus.at(d).year];
  } else {
    Facet facet = facet_of(dim);
    std::map<int, std::unordered_set<std::string_view>> seen;
    for (auto d : docs) {
      const auto& r = corpus.at(d);
      auto& bucket = seen[r.year];
      for (auto v : facet_values(r, facet)) bucket.insert(v);
    }
    for (const auto& [year, set] : seen)
      if (!set.empty()) counts[year] = set.size();
  }
  for (const auto& [year, count] : counts) hist.buckets.push_back({year, count});
  return hist;
}

DistributionSummary distribution(const Corpus& corpus, Dimension dim, const DocSet& docs,
                                 Metric metric) {
  std::vector<double> sample;
  if (dim == Dimension::papers) {
    if (metric != Metric::citations)
      throw Error(Errc::invalid_metric, "the papers dimension only supports metric=citations");
    sample.reserve(docs.size());
    for (auto d : docs) sample.push_back(static_cast<double>(corpus.at(d).in_citations));
  } else {
    for (const auto& [label, agg] : aggregate_entities(corpus, dim, docs))
      sample.push_back(static_cast<double>(metric == Metric::citations ? agg.n_citations
                                                                       : agg.n_papers));
  }
  return five_number_summary(std::move(sample), metric);
}

TopKList top_k(const Corpus& corpus, Dimension dim, const DocSet& docs, Metric metric,
               std::uint64_t k) {
  if (k == 0) throw Error(Errc::invalid_argument, "k must be at least 1");
  TopKList list;
  list.k = k;
  if (dim == Dimension::papers) {
    list.metric = Metric::citations;
    std::vector<DocNo> order(docs.begin(), docs.end());
    auto cmp = [&](DocNo a, DocNo b) {
      const auto& ra = corpus.at(a);
      const auto& rb = corpus.at(b);
      if (ra.in_citations != rb.in_citations) return ra.in_citations > rb.in_citations;
      if (ra.title != rb.title) return ra.title < rb.title;
      return ra.id < rb.id;
    };
    auto n = std::min<std::uint64_t>(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n),
                      order.end(), cmp);
    for (std::uint64_t i = 0; i < n; ++i)
      list.entries.push_back({corpus.at(order[i]).title, corpus.at(order[i]).in_citations});
    return list;
  }
  list.metric = metric;
  for (const auto& [label, agg] : aggregate_entities(corpus, dim, docs))
    list.entries.push_back(
        {std::string(label), metric == Metric::citations ? agg.n_citations : agg.n_papers});
  std::sort(list.entries.begin(), list.entries.end(), [](const TopKEntry& a, const TopKEntry& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.label < b.label;
  });
  if (list.entries.size() > k) list.entries.resize(k);
  return list;
}

std::vector<std::string_view> sort_keys(Dimension dim) {
  switch (dim) {
    case Dimension::papers: return {"title", "year", "venue", "citations"};
    case Dimension::authors:
      return {"name",      "first_year",  "last_year",    "n_papers",
              "n_citations", "avg_citations", "n_venues"};
    default:
      return {"label", "first_year", "last_year", "n_papers", "n_citations", "avg_citations"};
  }
}

std::string_view default_sort_key(Dimension dim) {
  return dim == Dimension::papers ? "citations" : "n_papers";
}

DetailsPage details_grid(const Corpus& corpus, Dimension dim, const DocSet& docs,
                         const GridRequest& request) {
  if (request.page < 1) throw Error(Errc::bad_page, "page must be at least 1");
  if (request.page_size < 1 || request.page_size > kMaxPageSize)
    throw Error(Errc::bad_page,
                "page_size must be between 1 and " + std::to_string(kMaxPageSize));
  std::string key = request.sort_key.empty() ? std::string(default_sort_key(dim))
                                             : request.sort_key;
  auto keys = sort_keys(dim);
  if (std::find(keys.begin(), keys.end(), key) == keys.end())
    throw Error(Errc::bad_sort_key,
                "unknown sort key '" + key + "' for " + std::string(to_string(dim)));
  SortDir dir = request.sort_dir.value_or(
      key == "title" || key == "name" || key == "label" || key == "venue" ? SortDir::asc
                                                                          : SortDir::desc);

  DetailsPage page;
  page.dimension = dim;
  page.page = request.page;
  page.page_size = request.page_size;
  page.sort_key = key;
  page.sort_dir = dir;

  std::uint64_t offset = std::uint64_t{request.page - 1} * request.page_size;
  auto take = [&](auto& rows) {
    page.total = rows.size();
    for (std::uint64_t i = offset; i < rows.size() && i < offset + request.page_size; ++i)
      page.rows.emplace_back(std::move(rows[i]));
  };

  if (dim == Dimension::papers) {
    std::vector<PaperRow> rows;
    rows.reserve(docs.size());
    for (auto d : docs) {
      const auto& r = corpus.at(d);
      rows.push_back({r.id, r.title, r.year, r.authors, r.venue, r.in_citations, r.url});
    }
    std::function<bool(const PaperRow&, const PaperRow&)> tie = [](const PaperRow& a,
                                                                   const PaperRow& b) {
      if (a.title != b.title) return a.title < b.title;
      return a.id < b.id;
    };
    if (key == "title") sort_rows(rows, by(&PaperRow::title), dir, tie);
    else if (key == "year") sort_rows(rows, by(&PaperRow::year), dir, tie);
    else if (key == "venue")
      sort_rows(rows, [](const PaperRow& a, const PaperRow& b) {
        return a.venue.value_or("") < b.venue.value_or("");
      }, dir, tie);
    else sort_rows(rows, by(&PaperRow::citations), dir, tie);
    take(rows);
    return page;
  }

  if (dim == Dimension::authors) {
    std::vector<AuthorRow> rows;
    for (auto& [label, agg] : aggregate_entities(corpus, dim, docs, true))
      rows.push_back({std::string(label), agg.first_year, agg.last_year, agg.n_papers,
                      agg.n_citations, average_citations(agg.n_citations, agg.n_papers),
                      agg.venues.size()});
    std::function<bool(const AuthorRow&, const AuthorRow&)> tie = by(&AuthorRow::name);
    if (key == "name") sort_rows(rows, by(&AuthorRow::name), dir, tie);
    else if (key == "first_year") sort_rows(rows, by(&AuthorRow::first_year), dir, tie);
    else if (key == "last_year") sort_rows(rows, by(&AuthorRow::last_year), dir, tie);
    else if (key == "n_papers") sort_rows(rows, by(&AuthorRow::n_papers), dir, tie);
    else if (key == "n_citations") sort_rows(rows, by(&AuthorRow::n_citations), dir, tie);
    else if (key == "avg_citations") sort_rows(rows, by(&AuthorRow::avg_citations), dir, tie);
    else sort_rows(rows, by(&AuthorRow::n_venues), dir, tie);
    take(rows);
    return page;
  }

  std::vector<EntityRow> rows;
  for (auto& [label, agg] : aggregate_entities(corpus, dim, docs))
    rows.push_back({std::string(label), agg.first_year, agg.last_year, agg.n_papers,
                    agg.n_citations, average_citations(agg.n_citations, agg.n_papers)});
  std::function<bool(const EntityRow&, const EntityRow&)> tie = by(&EntityRow::label);
  if (key == "label") sort_rows(rows, by(&EntityRow::label), dir, tie);
  else if (key == "first_year") sort_rows(rows, by(&EntityRow::first_year), dir, tie);
  else if (key == "last_year") sort_rows(rows, by(&EntityRow::last_year), dir, tie);
  else if (key == "n_papers") sort_rows(rows, by(&EntityRow::n_papers), dir, tie);
  else if (key == "n_citations") sort_rows(rows, by(&EntityRow::n_citations), dir, tie);
  else sort_rows(rows, by(&EntityRow::avg_citations), dir, tie);
  take(rows);
  return page;
}

CitationSeries citations_over_time(const Corpus& corpus, const DocSet& docs) {
  CitationSeries s;
  s.incoming.metric = s.outgoing.metric = HistogramMetric::citation_sum;
  std::map<int, std::pair<std::uint64_t, std::uint64_t>> sums;
  std::vector<double> in, out;
  for (auto d : docs) {
    const auto& r = corpus.at(d);
    auto& [i, o] = sums[r.year];
    i += r.in_citations;
    o += r.out_citations;
    in.push_back(static_cast<double>(r.in_citations));
    out.push_back(static_cast<double>(r.out_citations));
  }
  for (const auto& [year, io] : sums) {
    s.incoming.buckets.push_back({year, io.first});
    s.outgoing.buckets.push_back({year, io.second});
  }
  if (!docs.empty()) {
    s.incoming_dist = five_number_summary(std::move(in), Metric::citations);
    s.outgoing_dist = five_number_summary(std::move(out), Metric::citations);
  }
  return s;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string export_csv(const YearHistogram& hist) {
  std::string out = "year,count\n";
  for (const auto& b : hist.buckets)
    out += std::to_string(b.year) + "," + std::to_string(b.count) + "\n";
  return out;
}

std::string export_csv(const DistributionSummary& d) {
  return "min,q25,median,q75,max\n" + format_number(d.min) + "," + format_number(d.q25) + "," +
         format_number(d.median) + "," + format_number(d.q75) + "," + format_number(d.max) +
         "\n";
}

std::string export_csv(const TopKList& list) {
  std::string out = "label,weight\n";
  for (const auto& e : list.entries)
    out += csv_field(e.label) + "," + std::to_string(e.weight) + "\n";
  return out;
}

std::string export_csv(const DetailsPage& page) {
  std::string out;
  if (page.dimension == Dimension::papers)
    out = "id,title,year,authors,venue,citations,link\n";
  else if (page.dimension == Dimension::authors)
    out = "name,first_year,last_year,n_papers,n_citations,avg_citations,n_venues\n";
  else
    out = "label,first_year,last_year,n_papers,n_citations,avg_citations\n";
  for (const auto& row : page.rows) {
    if (const auto* p = std::get_if<PaperRow>(&row)) {
      out += csv_field(p->id) + "," + csv_field(p->title) + "," + std::to_string(p->year) +
             "," + csv_field(join(p->authors, "; ")) + "," + csv_field(p->venue.value_or("")) +
             "," + std::to_string(p->citations) + "," + csv_field(p->link.value_or("")) + "\n";
    } else if (const auto* a = std::get_if<AuthorRow>(&row)) {
      out += csv_field(a->name) + "," + std::to_string(a->first_year) + "," +
             std::to_string(a->last_year) + "," + std::to_string(a->n_papers) + "," +
             std::to_string(a->n_citations) + "," + format_number(a->avg_citations) + "," +
             std::to_string(a->n_venues) + "\n";
    } else {
      const auto& e = std::get<EntityRow>(row);
      out += csv_field(e.label) + "," + std::to_string(e.first_year) + "," +
             std::to_string(e.last_year) + "," + std::to_string(e.n_papers) + "," +
             std::to_string(e.n_citations) + "," + format_number(e.avg_citations) + "\n";
    }
  }
  return out;
}

std::string export_csv(const CitationSeries& series) {
  std::map<int, std::pair<std::uint64_t, std::uint64_t>> rows;
  for (const auto& b : series.incoming.buckets) rows[b.year].first = b.count;
  for (const auto& b : series.outgoing.buckets) rows[b.year].second = b.count;
  std::string out = "year,incoming,outgoing\n";
  for (const auto& [year, io] : rows)
    out += std::to_string(year) + "," + std::to_string(io.first) + "," +
           std::to_string(io.second) + "\n";
  return out;
}

}  // namespace csi
