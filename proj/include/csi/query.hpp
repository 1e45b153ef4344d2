#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "csi/record.hpp"
#include "csi/store.hpp"

namespace csi {

enum class MatchMode { exact, regex };

/// Exact matchers compare whole strings case-sensitively. Regex matchers use
/// the ECMAScript grammar and are unanchored: they match when the pattern is
/// found anywhere in the value.
struct TextMatcher {
  std::string pattern;
  MatchMode mode = MatchMode::exact;

  static TextMatcher exact(std::string p) { return {std::move(p), MatchMode::exact}; }
  static TextMatcher regex(std::string p) { return {std::move(p), MatchMode::regex}; }

  bool operator==(const TextMatcher&) const = default;
};

template <class T>
struct Range {
  T min{};
  T max{};

  bool contains(T v) const noexcept { return min <= v && v <= max; }
  bool operator==(const Range&) const = default;
};

/// AND across facets, OR within one facet's list. Empty lists and absent
/// ranges do not constrain.
struct FilterQuery {
  std::vector<TextMatcher> venues;
  std::vector<TextMatcher> authors;
  std::vector<PaperType> paper_types;
  std::vector<std::string> fields_of_study;
  std::vector<TextMatcher> publishers;
  std::vector<AccessType> access_types;
  std::optional<Range<int>> year_range;
  std::optional<Range<std::uint64_t>> citation_range;

  bool unconstrained() const noexcept;
  bool operator==(const FilterQuery&) const = default;
};

class CompiledMatcher {
public:
  explicit CompiledMatcher(const TextMatcher& matcher);
  bool matches(std::string_view value) const;
  const TextMatcher& source() const noexcept { return source_; }

private:
  TextMatcher source_;
  std::shared_ptr<const std::regex> re_;
};

/// A validated, compiled filter. Cheap to copy; safe to share across threads.
class Predicate {
public:
  bool operator()(const PaperRecord& record) const;
  const FilterQuery& query() const noexcept { return query_; }

  const std::vector<CompiledMatcher>& venues() const noexcept { return venues_; }
  const std::vector<CompiledMatcher>& authors() const noexcept { return authors_; }
  const std::vector<CompiledMatcher>& publishers() const noexcept { return publishers_; }

private:
  friend Predicate compile(const FilterQuery& filter);

  FilterQuery query_;
  std::vector<CompiledMatcher> venues_;
  std::vector<CompiledMatcher> authors_;
  std::vector<CompiledMatcher> publishers_;
};

/// Throws Error(invalid_regex) or Error(invalid_range).
Predicate compile(const FilterQuery& filter);

/// Answers through the facet, year and citation indexes. Regex matchers scan
/// the facet's distinct-value dictionary rather than the records.
DocSet select(const Corpus& corpus, const Predicate& predicate);
DocSet select(const Corpus& corpus, const FilterQuery& filter);

/// Evaluates the predicate against every record.
DocSet scan_select(const Corpus& corpus, const Predicate& predicate);

struct Suggestion {
  std::string value;
  std::uint64_t count = 0;

  bool operator==(const Suggestion&) const = default;
};

/// Values the paper_types facet offers before any data is loaded.
std::vector<std::string> preset_values(Facet facet);

/// Distinct facet values matching the input case-insensitively (substring in
/// exact mode, unanchored regex in regex mode), by descending record count
/// then ascending value, truncated to limit. paper_types and access_types
/// always offer their preset values, even with zero records.
/// Throws Error(invalid_argument) for limit 0 and Error(invalid_regex).
std::vector<Suggestion> autocomplete(const Corpus& corpus, Facet facet,
                                     std::string_view input, std::size_t limit,
                                     MatchMode mode = MatchMode::exact);

}  // namespace csi
