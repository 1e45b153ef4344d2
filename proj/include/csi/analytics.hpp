#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "csi/store.hpp"

namespace csi {

/// The unit counted by a dashboard. Citations and topics have their own
/// operations.
enum class Dimension { papers, authors, venues, paper_types, fields_of_study, publishers };

inline constexpr Dimension kAllDimensions[] = {
    Dimension::papers,      Dimension::authors,         Dimension::venues,
    Dimension::paper_types, Dimension::fields_of_study, Dimension::publishers};

/// Snake-case name, e.g. "fields_of_study".
std::string_view to_string(Dimension dim) noexcept;
/// Accepts both "fields_of_study" and the URL form "fields-of-study".
std::optional<Dimension> parse_dimension(std::string_view text) noexcept;

enum class Metric { citations, papers };
std::string_view to_string(Metric metric) noexcept;
std::optional<Metric> parse_metric(std::string_view text) noexcept;

enum class HistogramMetric { entity_count, citation_sum };
std::string_view to_string(HistogramMetric metric) noexcept;

struct YearCount {
  int year = 0;
  std::uint64_t count = 0;
  bool operator==(const YearCount&) const = default;
};

/// Sparse: only years present in the selection appear, in increasing order.
struct YearHistogram {
  HistogramMetric metric = HistogramMetric::entity_count;
  std::vector<YearCount> buckets;
  bool operator==(const YearHistogram&) const = default;
};

struct DistributionSummary {
  Metric metric = Metric::citations;
  double min = 0;
  double q25 = 0;
  double median = 0;
  double q75 = 0;
  double max = 0;
  bool operator==(const DistributionSummary&) const = default;
};

struct TopKEntry {
  std::string label;
  std::uint64_t weight = 0;
  bool operator==(const TopKEntry&) const = default;
};

struct TopKList {
  Metric metric = Metric::citations;
  std::uint64_t k = 0;
  std::vector<TopKEntry> entries;
  bool operator==(const TopKList&) const = default;
};

struct PaperRow {
  std::string id;
  std::string title;
  int year = 0;
  std::vector<std::string> authors;
  std::optional<std::string> venue;
  std::uint64_t citations = 0;
  std::optional<std::string> link;
  bool operator==(const PaperRow&) const = default;
};

struct AuthorRow {
  std::string name;
  int first_year = 0;
  int last_year = 0;
  std::uint64_t n_papers = 0;
  std::uint64_t n_citations = 0;
  double avg_citations = 0;
  std::uint64_t n_venues = 0;
  bool operator==(const AuthorRow&) const = default;
};

struct EntityRow {
  std::string label;
  int first_year = 0;
  int last_year = 0;
  std::uint64_t n_papers = 0;
  std::uint64_t n_citations = 0;
  double avg_citations = 0;
  bool operator==(const EntityRow&) const = default;
};

using GridRow = std::variant<PaperRow, AuthorRow, EntityRow>;

enum class SortDir { asc, desc };
std::string_view to_string(SortDir dir) noexcept;
std::optional<SortDir> parse_sort_dir(std::string_view text) noexcept;

inline constexpr std::uint32_t kDefaultPageSize = 50;
inline constexpr std::uint32_t kMaxPageSize = 500;

struct GridRequest {
  std::uint32_t page = 1;  // 1-based
  std::uint32_t page_size = kDefaultPageSize;
  std::string sort_key;  // empty selects the dimension's default
  std::optional<SortDir> sort_dir;
};

struct DetailsPage {
  Dimension dimension = Dimension::papers;
  std::vector<GridRow> rows;
  std::uint64_t total = 0;
  std::uint32_t page = 1;
  std::uint32_t page_size = kDefaultPageSize;
  std::string sort_key;
  SortDir sort_dir = SortDir::desc;
  bool operator==(const DetailsPage&) const = default;
};

struct CitationSeries {
  YearHistogram incoming;
  YearHistogram outgoing;
  std::optional<DistributionSummary> incoming_dist;
  std::optional<DistributionSummary> outgoing_dist;
  bool operator==(const CitationSeries&) const = default;
};

/// n_citations / n_papers rounded half-up to two decimals; 0 when n_papers is 0.
double average_citations(std::uint64_t n_citations, std::uint64_t n_papers) noexcept;

/// Quartiles by linear interpolation between closest ranks: for sorted x of
/// size n, q(p) = x[f] + (h - f) * (x[f+1] - x[f]) with h = (n-1)p, f = floor(h).
/// Throws Error(empty_selection) for an empty sample.
DistributionSummary five_number_summary(std::vector<double> sample, Metric metric);

/// Papers count papers per year; every other dimension counts distinct
/// entities per year.
YearHistogram per_year(const Corpus& corpus, Dimension dim, const DocSet& docs);

/// Papers: per-paper incoming citations (metric must be citations).
/// Otherwise one sample per entity: its summed citations or its paper count.
/// Throws Error(invalid_metric) or Error(empty_selection).
DistributionSummary distribution(const Corpus& corpus, Dimension dim, const DocSet& docs,
                                 Metric metric);

/// Entities by metric descending then label ascending. The papers dimension
/// always ranks titles by citations. Throws Error(invalid_argument) for k = 0.
TopKList top_k(const Corpus& corpus, Dimension dim, const DocSet& docs, Metric metric,
               std::uint64_t k);

std::vector<std::string_view> sort_keys(Dimension dim);
std::string_view default_sort_key(Dimension dim);

/// Throws Error(bad_page) or Error(bad_sort_key).
DetailsPage details_grid(const Corpus& corpus, Dimension dim, const DocSet& docs,
                         const GridRequest& request);

/// Buckets by the selected papers' own publication year.
CitationSeries citations_over_time(const Corpus& corpus, const DocSet& docs);

std::string export_csv(const YearHistogram& hist);
std::string export_csv(const DistributionSummary& dist);
std::string export_csv(const TopKList& list);
std::string export_csv(const DetailsPage& page);
std::string export_csv(const CitationSeries& series);

/// RFC 4180 field quoting.
std::string csv_field(std::string_view value);
/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

}  // namespace csi
