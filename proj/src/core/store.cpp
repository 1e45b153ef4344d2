#include "csi/store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "csi/error.hpp"

namespace csi {

namespace {

constexpr std::string_view kSnapshotMagic = "CSISNAP\n";

void posting_insert(DocSet& posting, DocNo doc) {
  if (posting.empty() || posting.back() < doc) {
    posting.push_back(doc);
    return;
  }
  auto it = std::lower_bound(posting.begin(), posting.end(), doc);
  if (it == posting.end() || *it != doc) posting.insert(it, doc);
}

template <class Map, class Key>
void posting_erase(Map& index, const Key& key, DocNo doc) {
  auto entry = index.find(key);
  if (entry == index.end()) return;
  auto& posting = entry->second;
  auto it = std::lower_bound(posting.begin(), posting.end(), doc);
  if (it != posting.end() && *it == doc) posting.erase(it);
  if (posting.empty()) index.erase(entry);
}

template <class Map, class Key>
DocSet range_union(const Map& index, const Key& lo, const Key& hi) {
  DocSet out;
  if (hi < lo) return out;
  for (auto it = index.lower_bound(lo); it != index.end() && !(hi < it->first); ++it)
    out.insert(out.end(), it->second.begin(), it->second.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string_view to_string(Facet facet) noexcept {
  switch (facet) {
    case Facet::venue: return "venues";
    case Facet::author: return "authors";
    case Facet::publisher: return "publishers";
    case Facet::paper_type: return "paper_types";
    case Facet::field_of_study: return "fields_of_study";
    case Facet::access_type: return "access_types";
  }
  return "venues";
}

std::optional<Facet> parse_facet(std::string_view text) noexcept {
  static constexpr std::pair<std::string_view, Facet> kSingular[] = {
      {"venue", Facet::venue},
      {"author", Facet::author},
      {"publisher", Facet::publisher},
      {"paper_type", Facet::paper_type},
      {"field_of_study", Facet::field_of_study},
      {"access_type", Facet::access_type},
  };
  for (auto f : kAllFacets)
    if (to_string(f) == text) return f;
  for (const auto& [name, f] : kSingular)
    if (name == text) return f;
  return std::nullopt;
}

std::vector<std::string_view> facet_values(const PaperRecord& r, Facet facet) {
  std::vector<std::string_view> out;
  switch (facet) {
    case Facet::venue:
      if (r.venue) out.emplace_back(*r.venue);
      break;
    case Facet::publisher:
      if (r.publisher) out.emplace_back(*r.publisher);
      break;
    case Facet::paper_type:
      out.push_back(to_string(r.paper_type));
      break;
    case Facet::access_type:
      out.push_back(to_string(r.access_type));
      break;
    case Facet::field_of_study:
      out.assign(r.fields_of_study.begin(), r.fields_of_study.end());
      break;
    case Facet::author:
      for (const auto& a : r.authors)
        if (std::find(out.begin(), out.end(), a) == out.end()) out.emplace_back(a);
      break;
  }
  return out;
}

bool Corpus::upsert(PaperRecord record) {
  canonicalize(record);
  validate(record);
  if (auto it = by_id_.find(record.id); it != by_id_.end()) {
    DocNo doc = it->second;
    unindex_doc(doc);
    records_[doc] = std::move(record);
    index_doc(doc);
    return true;
  }
  auto doc = static_cast<DocNo>(records_.size());
  by_id_.emplace(record.id, doc);
  records_.push_back(std::move(record));
  index_doc(doc);
  return false;
}

void Corpus::index_doc(DocNo doc) {
  const auto& r = records_[doc];
  for (auto f : kAllFacets) {
    auto& index = facets_[static_cast<std::size_t>(f)];
    for (auto v : facet_values(r, f)) {
      auto it = index.find(v);
      if (it == index.end()) it = index.emplace(std::string(v), DocSet{}).first;
      posting_insert(it->second, doc);
    }
  }
  posting_insert(years_[r.year], doc);
  posting_insert(citations_[r.in_citations], doc);
}

void Corpus::unindex_doc(DocNo doc) {
  const auto& r = records_[doc];
  for (auto f : kAllFacets) {
    auto& index = facets_[static_cast<std::size_t>(f)];
    for (auto v : facet_values(r, f)) posting_erase(index, v, doc);
  }
  posting_erase(years_, r.year, doc);
  posting_erase(citations_, r.in_citations, doc);
}

const PaperRecord* Corpus::find(std::string_view id) const {
  auto doc = doc_of(id);
  return doc ? &records_[*doc] : nullptr;
}

std::optional<DocNo> Corpus::doc_of(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

DocSet Corpus::all() const {
  DocSet out(records_.size());
  std::iota(out.begin(), out.end(), DocNo{0});
  return out;
}

std::vector<std::string> Corpus::ids(const DocSet& docs) const {
  std::vector<std::string> out;
  out.reserve(docs.size());
  for (auto d : docs) out.push_back(records_.at(d).id);
  return out;
}

std::span<const DocNo> Corpus::posting(Facet facet, std::string_view value) const {
  const auto& index = facets_[static_cast<std::size_t>(facet)];
  auto it = index.find(value);
  if (it == index.end()) return {};
  return it->second;
}

DocSet Corpus::years_between(int lo, int hi) const { return range_union(years_, lo, hi); }

DocSet Corpus::citations_between(std::uint64_t lo, std::uint64_t hi) const {
  return range_union(citations_, lo, hi);
}

StoreStats Corpus::stats() const {
  StoreStats s;
  s.n_records = records_.size();
  for (auto f : kAllFacets)
    s.per_facet_cardinality[std::string(to_string(f))] =
        facets_[static_cast<std::size_t>(f)].size();
  if (!years_.empty()) s.year_range = {years_.begin()->first, years_.rbegin()->first};
  return s;
}

std::string snapshot_bytes(const Corpus& corpus) {
  std::vector<const PaperRecord*> sorted;
  sorted.reserve(corpus.size());
  for (DocNo d = 0; d < corpus.size(); ++d) sorted.push_back(&corpus.at(d));
  std::sort(sorted.begin(), sorted.end(),
            [](const PaperRecord* a, const PaperRecord* b) { return a->id < b->id; });

  std::string payload;
  for (const auto* r : sorted) {
    payload += to_jsonl(*r);
    payload += '\n';
  }
  char checksum[17];
  std::snprintf(checksum, sizeof checksum, "%016llx",
                static_cast<unsigned long long>(fnv1a64(payload)));

  nlohmann::ordered_json header;
  header["format"] = "csi-snapshot";
  header["version"] = kSnapshotVersion;
  header["records"] = sorted.size();
  header["payload_bytes"] = payload.size();
  header["checksum"] = checksum;

  std::string out(kSnapshotMagic);
  out += header.dump();
  out += '\n';
  out += payload;
  return out;
}

Corpus load_bytes(std::string_view bytes) {
  auto corrupt = [](const std::string& why) {
    return Error(Errc::corrupt_snapshot, "corrupt snapshot: " + why);
  };
  if (bytes.substr(0, kSnapshotMagic.size()) != kSnapshotMagic)
    throw corrupt("bad magic header");
  bytes.remove_prefix(kSnapshotMagic.size());
  auto eol = bytes.find('\n');
  if (eol == std::string_view::npos) throw corrupt("missing header");
  auto header = nlohmann::json::parse(bytes.substr(0, eol), nullptr, false);
  bytes.remove_prefix(eol + 1);
  std::uint64_t version = 0, payload_bytes = 0, records = 0;
  std::string checksum_text;
  try {
    if (header.is_discarded() || !header.is_object() ||
        header.at("format").get<std::string>() != "csi-snapshot")
      throw corrupt("unreadable header");
    version = header.at("version").get<std::uint64_t>();
    payload_bytes = header.at("payload_bytes").get<std::uint64_t>();
    records = header.at("records").get<std::uint64_t>();
    checksum_text = header.at("checksum").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw corrupt("unreadable header");
  }

  if (version > kSnapshotVersion)
    throw Error(Errc::unsupported_version,
                "snapshot format version " + std::to_string(version) +
                    " is newer than supported version " +
                    std::to_string(kSnapshotVersion));
  if (version != kSnapshotVersion) throw corrupt("unknown format version");

  if (bytes.size() != payload_bytes)
    throw corrupt("payload is " + std::to_string(bytes.size()) + " bytes, header says " +
                  std::to_string(payload_bytes));
  char checksum[17];
  std::snprintf(checksum, sizeof checksum, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  if (checksum_text != checksum) throw corrupt("checksum mismatch");

  Corpus corpus;
  std::uint64_t n = 0;
  while (!bytes.empty()) {
    auto end = bytes.find('\n');
    if (end == std::string_view::npos) throw corrupt("unterminated record line");
    try {
      corpus.upsert(from_jsonl(bytes.substr(0, end)));
    } catch (const SchemaViolation& e) {
      throw corrupt("record " + std::to_string(n + 1) + ": " + e.what());
    }
    bytes.remove_prefix(end + 1);
    ++n;
  }
  if (n != records || corpus.size() != n)
    throw corrupt("record count mismatch");
  return corpus;
}

void snapshot(const Corpus& corpus, const std::filesystem::path& path) {
  auto bytes = snapshot_bytes(corpus);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(Errc::io, "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io, "cannot replace " + path.string() + ": " + ec.message());
}

Corpus load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(Errc::io, "read from " + path.string() + " failed");
  return load_bytes(buf.str());
}

}  // namespace csi
