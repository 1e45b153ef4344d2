#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "csi/analytics.hpp"
#include "csi/query.hpp"
#include "csi/store.hpp"
#include "csi/topics.hpp"

namespace csi {

using Json = nlohmann::ordered_json;

/// Query parameters as decoded from a URL; repeated keys keep every value.
using Params = std::multimap<std::string, std::string>;

/// Wire form of a text matcher: plain text is an exact match, "re:" selects
/// regex mode and "eq:" forces an exact match of the remainder (for values
/// that themselves begin with "re:" or "eq:").
std::string encode_matcher(const TextMatcher& matcher);
TextMatcher decode_matcher(std::string_view text);

/// Filter parameter names shared by URLs and JSON bodies.
inline constexpr std::string_view kFilterKeys[] = {
    "venue",       "author",   "publisher", "paper_type", "field_of_study",
    "access_type", "year_min", "year_max",  "cit_min",    "cit_max"};

/// Reads the filter keys out of URL parameters and ignores every other key.
/// A range given with one bound is open on the other side.
/// Throws Error(invalid_filter).
FilterQuery filter_from_params(const Params& params);
/// Inverse of filter_from_params, for building request URLs.
Params filter_to_params(const FilterQuery& filter);

/// Same keys as the URL form; each list key takes a string or an array of
/// strings. Unknown keys are rejected. Throws Error(invalid_filter).
FilterQuery filter_from_json(const Json& j);
Json filter_to_json(const FilterQuery& filter);

Json to_json(const YearHistogram& hist);
Json to_json(const DistributionSummary& dist);
Json to_json(const TopKList& list);
Json to_json(const DetailsPage& page);
Json to_json(const CitationSeries& series);
Json to_json(const std::vector<Suggestion>& suggestions);
Json to_json(const StoreStats& stats);
Json to_json(const TermPanel& panel);

// Decoders throw Error(invalid_argument) on a payload of the wrong shape.
YearHistogram histogram_from_json(const Json& j);
DistributionSummary distribution_from_json(const Json& j);
TopKList top_k_from_json(const Json& j);
DetailsPage details_from_json(const Json& j);
CitationSeries citation_series_from_json(const Json& j);
std::vector<Suggestion> suggestions_from_json(const Json& j);
TermPanel term_panel_from_json(const Json& j);

}  // namespace csi
