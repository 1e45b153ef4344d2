#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "csi/record.hpp"

namespace csi {

/// The six textual facets a record can be filtered and suggested on.
enum class Facet { venue, author, publisher, paper_type, field_of_study, access_type };

inline constexpr std::array<Facet, 6> kAllFacets = {
    Facet::venue,          Facet::author,     Facet::publisher, Facet::paper_type,
    Facet::field_of_study, Facet::access_type};

/// Plural wire name, e.g. "venues", "fields_of_study".
std::string_view to_string(Facet facet) noexcept;
/// Accepts the plural name and the singular filter-parameter name.
std::optional<Facet> parse_facet(std::string_view text) noexcept;

/// Distinct values of one facet on one record, in first-seen order.
std::vector<std::string_view> facet_values(const PaperRecord& record, Facet facet);

/// Internal dense document number. Stable for the lifetime of a Corpus; an
/// overwritten record keeps its slot.
using DocNo = std::uint32_t;
/// Sorted, duplicate-free set of document numbers.
using DocSet = std::vector<DocNo>;

struct StoreStats {
  std::uint64_t n_records = 0;
  std::map<std::string, std::uint64_t> per_facet_cardinality;
  std::optional<std::pair<int, int>> year_range;

  bool operator==(const StoreStats&) const = default;
};

class Corpus {
public:
  using ValueIndex = std::map<std::string, DocSet, std::less<>>;

  /// Inserts or replaces by id. Returns true when a previous version existed.
  /// Throws SchemaViolation for invalid records.
  bool upsert(PaperRecord record);

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  const PaperRecord& at(DocNo doc) const { return records_.at(doc); }
  const PaperRecord* find(std::string_view id) const;
  std::optional<DocNo> doc_of(std::string_view id) const;

  DocSet all() const;
  std::vector<std::string> ids(const DocSet& docs) const;

  const ValueIndex& index(Facet facet) const noexcept {
    return facets_[static_cast<std::size_t>(facet)];
  }
  /// Posting list for an exact facet value; empty when absent.
  std::span<const DocNo> posting(Facet facet, std::string_view value) const;

  DocSet years_between(int lo, int hi) const;
  DocSet citations_between(std::uint64_t lo, std::uint64_t hi) const;
  const std::map<int, DocSet>& year_index() const noexcept { return years_; }
  const std::map<std::uint64_t, DocSet>& citation_index() const noexcept {
    return citations_;
  }

  StoreStats stats() const;

private:
  void index_doc(DocNo doc);
  void unindex_doc(DocNo doc);

  std::vector<PaperRecord> records_;
  std::unordered_map<std::string, DocNo> by_id_;
  std::array<ValueIndex, kAllFacets.size()> facets_;
  std::map<int, DocSet> years_;
  std::map<std::uint64_t, DocSet> citations_;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;

/// Serialized snapshot. Records are written in id order so equal corpora
/// produce identical bytes.
std::string snapshot_bytes(const Corpus& corpus);
/// Throws Error(corrupt_snapshot) or Error(unsupported_version).
Corpus load_bytes(std::string_view bytes);

/// Writes atomically via a sibling temporary file. Throws Error(io).
void snapshot(const Corpus& corpus, const std::filesystem::path& path);
Corpus load(const std::filesystem::path& path);

/// Corpus guarded by a many-readers / one-writer lock.
class Store {
public:
  Store() = default;
  explicit Store(Corpus corpus) : corpus_(std::move(corpus)) {}

  template <class F>
  decltype(auto) read(F&& f) const {
    std::shared_lock lock(mutex_);
    return std::forward<F>(f)(static_cast<const Corpus&>(corpus_));
  }

  template <class F>
  decltype(auto) write(F&& f) {
    std::unique_lock lock(mutex_);
    return std::forward<F>(f)(corpus_);
  }

private:
  mutable std::shared_mutex mutex_;
  Corpus corpus_;
};

}  // namespace csi
