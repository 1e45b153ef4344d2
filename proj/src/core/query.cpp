#include "csi/query.hpp"

#include <algorithm>
#include <cctype>

#include "csi/error.hpp"

namespace csi {

namespace {

std::shared_ptr<const std::regex> compile_regex(const std::string& pattern,
                                                std::regex::flag_type extra = {}) {
  try {
    return std::make_shared<const std::regex>(
        pattern, std::regex::ECMAScript | std::regex::optimize | extra);
  } catch (const std::regex_error& e) {
    throw Error(Errc::invalid_regex, "invalid regex '" + pattern + "': " + e.what());
  }
}

bool any_matches(const std::vector<CompiledMatcher>& matchers,
                 const std::vector<std::string_view>& values) {
  for (const auto& m : matchers)
    for (auto v : values)
      if (m.matches(v)) return true;
  return false;
}

void sort_unique(DocSet& docs) {
  std::sort(docs.begin(), docs.end());
  docs.erase(std::unique(docs.begin(), docs.end()), docs.end());
}

DocSet intersect(const DocSet& a, const DocSet& b) {
  DocSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void append(DocSet& out, std::span<const DocNo> posting) {
  out.insert(out.end(), posting.begin(), posting.end());
}

DocSet text_facet_docs(const Corpus& corpus, Facet facet,
                       const std::vector<CompiledMatcher>& matchers) {
  DocSet out;
  for (const auto& m : matchers) {
    if (m.source().mode == MatchMode::exact) {
      append(out, corpus.posting(facet, m.source().pattern));
    } else {
      for (const auto& [value, posting] : corpus.index(facet))
        if (m.matches(value)) append(out, posting);
    }
  }
  sort_unique(out);
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

bool FilterQuery::unconstrained() const noexcept {
  return venues.empty() && authors.empty() && paper_types.empty() &&
         fields_of_study.empty() && publishers.empty() && access_types.empty() &&
         !year_range && !citation_range;
}

CompiledMatcher::CompiledMatcher(const TextMatcher& matcher) : source_(matcher) {
  if (matcher.mode == MatchMode::regex) re_ = compile_regex(matcher.pattern);
}

bool CompiledMatcher::matches(std::string_view value) const {
  if (!re_) return value == source_.pattern;
  return std::regex_search(value.begin(), value.end(), *re_);
}

Predicate compile(const FilterQuery& filter) {
  if (filter.year_range && filter.year_range->min > filter.year_range->max)
    throw Error(Errc::invalid_range, "year range has min > max");
  if (filter.citation_range && filter.citation_range->min > filter.citation_range->max)
    throw Error(Errc::invalid_range, "citation range has min > max");
  Predicate p;
  p.query_ = filter;
  for (const auto& m : filter.venues) p.venues_.emplace_back(m);
  for (const auto& m : filter.authors) p.authors_.emplace_back(m);
  for (const auto& m : filter.publishers) p.publishers_.emplace_back(m);
  return p;
}

bool Predicate::operator()(const PaperRecord& r) const {
  const auto& q = query_;
  if (!venues_.empty() && !any_matches(venues_, facet_values(r, Facet::venue))) return false;
  if (!authors_.empty() && !any_matches(authors_, facet_values(r, Facet::author))) return false;
  if (!publishers_.empty() && !any_matches(publishers_, facet_values(r, Facet::publisher)))
    return false;
  if (!q.paper_types.empty() &&
      std::find(q.paper_types.begin(), q.paper_types.end(), r.paper_type) == q.paper_types.end())
    return false;
  if (!q.access_types.empty() &&
      std::find(q.access_types.begin(), q.access_types.end(), r.access_type) ==
          q.access_types.end())
    return false;
  if (!q.fields_of_study.empty() &&
      std::none_of(q.fields_of_study.begin(), q.fields_of_study.end(), [&](const auto& f) {
        return std::binary_search(r.fields_of_study.begin(), r.fields_of_study.end(), f);
      }))
    return false;
  if (q.year_range && !q.year_range->contains(r.year)) return false;
  if (q.citation_range && !q.citation_range->contains(r.in_citations)) return false;
  return true;
}

DocSet select(const Corpus& corpus, const Predicate& predicate) {
  const auto& q = predicate.query();
  std::vector<DocSet> parts;
  if (!q.venues.empty()) parts.push_back(text_facet_docs(corpus, Facet::venue, predicate.venues()));
  if (!q.authors.empty())
    parts.push_back(text_facet_docs(corpus, Facet::author, predicate.authors()));
  if (!q.publishers.empty())
    parts.push_back(text_facet_docs(corpus, Facet::publisher, predicate.publishers()));
  if (!q.paper_types.empty()) {
    DocSet docs;
    for (auto t : q.paper_types) append(docs, corpus.posting(Facet::paper_type, to_string(t)));
    sort_unique(docs);
    parts.push_back(std::move(docs));
  }
  if (!q.access_types.empty()) {
    DocSet docs;
    for (auto t : q.access_types) append(docs, corpus.posting(Facet::access_type, to_string(t)));
    sort_unique(docs);
    parts.push_back(std::move(docs));
  }
  if (!q.fields_of_study.empty()) {
    DocSet docs;
    for (const auto& f : q.fields_of_study) append(docs, corpus.posting(Facet::field_of_study, f));
    sort_unique(docs);
    parts.push_back(std::move(docs));
  }
  if (q.year_range) parts.push_back(corpus.years_between(q.year_range->min, q.year_range->max));
  if (q.citation_range)
    parts.push_back(corpus.citations_between(q.citation_range->min, q.citation_range->max));

  if (parts.empty()) return corpus.all();
  std::sort(parts.begin(), parts.end(),
            [](const DocSet& a, const DocSet& b) { return a.size() < b.size(); });
  DocSet result = std::move(parts.front());
  for (std::size_t i = 1; i < parts.size() && !result.empty(); ++i)
    result = intersect(result, parts[i]);
  return result;
}

DocSet select(const Corpus& corpus, const FilterQuery& filter) {
  return select(corpus, compile(filter));
}

DocSet scan_select(const Corpus& corpus, const Predicate& predicate) {
  DocSet out;
  for (DocNo d = 0; d < corpus.size(); ++d)
    if (predicate(corpus.at(d))) out.push_back(d);
  return out;
}

std::vector<std::string> preset_values(Facet facet) {
  std::vector<std::string> out;
  if (facet == Facet::paper_type) {
    for (auto t : all_paper_types())
      if (t != PaperType::other) out.emplace_back(to_string(t));
  } else if (facet == Facet::access_type) {
    for (auto t : all_access_types()) out.emplace_back(to_string(t));
  }
  return out;
}

std::vector<Suggestion> autocomplete(const Corpus& corpus, Facet facet,
                                     std::string_view input, std::size_t limit,
                                     MatchMode mode) {
  if (limit == 0) throw Error(Errc::invalid_argument, "limit must be at least 1");
  std::shared_ptr<const std::regex> re;
  if (mode == MatchMode::regex) re = compile_regex(std::string(input), std::regex::icase);
  const std::string needle = lower(input);
  auto matches = [&](std::string_view value) {
    if (re) return std::regex_search(value.begin(), value.end(), *re);
    return lower(value).find(needle) != std::string::npos;
  };

  std::vector<Suggestion> out;
  const auto& index = corpus.index(facet);
  auto presets = preset_values(facet);
  for (const auto& p : presets)
    if (matches(p)) out.push_back({p, corpus.posting(facet, p).size()});
  for (const auto& [value, posting] : index) {
    if (std::find(presets.begin(), presets.end(), value) != presets.end()) continue;
    if (facet == Facet::paper_type) continue;
    if (matches(value)) out.push_back({value, posting.size()});
  }
  std::sort(out.begin(), out.end(), [](const Suggestion& a, const Suggestion& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.value < b.value;
  });
  if (out.size() > limit) out.resize(limit);
  return out;
}

}  // namespace csi
