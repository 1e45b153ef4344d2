#include "csi/record.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include <json.hpp>

namespace csi {

namespace {

constexpr std::array<PaperType, 7> kPaperTypes = {
    PaperType::article,   PaperType::proceedings,   PaperType::book,
    PaperType::incollection, PaperType::phdthesis, PaperType::mastersthesis,
    PaperType::other,
};

constexpr std::array<AccessType, 3> kAccessTypes = {
    AccessType::open, AccessType::closed, AccessType::unknown};

using ordered_json = nlohmann::ordered_json;

std::optional<std::string> optional_string(const nlohmann::json& obj,
                                           const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw SchemaViolation(key, "expected string");
  return it->get<std::string>();
}

std::uint64_t count_field(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return 0;
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer()) throw SchemaViolation(key, "negative count");
  throw SchemaViolation(key, "expected non-negative integer");
}

std::vector<std::string> string_list(const nlohmann::json& obj,
                                     const char* key) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw SchemaViolation(key, "expected array of strings");
  out.reserve(it->size());
  for (const auto& item : *it) {
    if (!item.is_string()) throw SchemaViolation(key, "expected array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

std::string_view to_string(PaperType type) noexcept {
  switch (type) {
    case PaperType::article: return "article";
    case PaperType::proceedings: return "proceedings";
    case PaperType::book: return "book";
    case PaperType::incollection: return "incollection";
    case PaperType::phdthesis: return "phdthesis";
    case PaperType::mastersthesis: return "mastersthesis";
    case PaperType::other: return "other";
  }
  return "other";
}

std::string_view to_string(AccessType type) noexcept {
  switch (type) {
    case AccessType::open: return "open";
    case AccessType::closed: return "closed";
    case AccessType::unknown: return "unknown";
  }
  return "unknown";
}

std::optional<PaperType> parse_paper_type(std::string_view text) noexcept {
  for (auto t : kPaperTypes)
    if (to_string(t) == text) return t;
  return std::nullopt;
}

std::optional<AccessType> parse_access_type(std::string_view text) noexcept {
  for (auto t : kAccessTypes)
    if (to_string(t) == text) return t;
  return std::nullopt;
}

std::span<const PaperType> all_paper_types() noexcept { return kPaperTypes; }
std::span<const AccessType> all_access_types() noexcept { return kAccessTypes; }

void canonicalize(PaperRecord& record) {
  auto& fos = record.fields_of_study;
  std::sort(fos.begin(), fos.end());
  fos.erase(std::unique(fos.begin(), fos.end()), fos.end());
}

void validate(const PaperRecord& record) {
  if (record.id.empty()) throw SchemaViolation("id", "empty");
  if (record.title.empty()) throw SchemaViolation("title", "empty");
  if (record.year < kMinYear || record.year > kMaxYear)
    throw SchemaViolation("year", "out of range");
  for (const auto& a : record.authors)
    if (a.empty()) throw SchemaViolation("authors", "empty author name");
  for (const auto& f : record.fields_of_study)
    if (f.empty()) throw SchemaViolation("fields_of_study", "empty entry");
  if (!std::is_sorted(record.fields_of_study.begin(), record.fields_of_study.end()) ||
      std::adjacent_find(record.fields_of_study.begin(), record.fields_of_study.end()) !=
          record.fields_of_study.end())
    throw SchemaViolation("fields_of_study", "not canonical");
  auto non_empty = [](const std::optional<std::string>& v, const char* name) {
    if (v && v->empty()) throw SchemaViolation(name, "empty string");
  };
  non_empty(record.abstract, "abstract");
  non_empty(record.venue, "venue");
  non_empty(record.publisher, "publisher");
  non_empty(record.url, "url");
}

std::string to_jsonl(const PaperRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["title"] = r.title;
  if (r.abstract) j["abstract"] = *r.abstract;
  j["year"] = r.year;
  j["authors"] = r.authors;
  if (r.venue) j["venue"] = *r.venue;
  if (r.publisher) j["publisher"] = *r.publisher;
  j["paper_type"] = to_string(r.paper_type);
  j["fields_of_study"] = r.fields_of_study;
  j["access_type"] = to_string(r.access_type);
  if (r.url) j["url"] = *r.url;
  j["in_citations"] = r.in_citations;
  j["out_citations"] = r.out_citations;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

PaperRecord from_jsonl(std::string_view line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) throw SchemaViolation("<line>", "invalid JSON");
  if (!j.is_object()) throw SchemaViolation("<line>", "expected JSON object");

  PaperRecord r;
  auto id = optional_string(j, "id");
  if (!id) throw SchemaViolation("id", "missing");
  r.id = std::move(*id);
  auto title = optional_string(j, "title");
  if (!title) throw SchemaViolation("title", "missing");
  r.title = std::move(*title);
  r.abstract = optional_string(j, "abstract");

  auto year = j.find("year");
  if (year == j.end() || year->is_null()) throw SchemaViolation("year", "missing");
  if (!year->is_number_integer()) throw SchemaViolation("year", "expected integer");
  bool in_range = year->is_number_unsigned()
                      ? year->get<std::uint64_t>() <= kMaxYear &&
                            year->get<std::uint64_t>() >= kMinYear
                      : year->get<std::int64_t>() >= kMinYear &&
                            year->get<std::int64_t>() <= kMaxYear;
  if (!in_range) throw SchemaViolation("year", "out of range");
  r.year = year->get<int>();

  r.authors = string_list(j, "authors");
  r.venue = optional_string(j, "venue");
  r.publisher = optional_string(j, "publisher");
  if (auto t = optional_string(j, "paper_type")) {
    auto parsed = parse_paper_type(*t);
    if (!parsed) throw SchemaViolation("paper_type", "unknown value '" + *t + "'");
    r.paper_type = *parsed;
  }
  r.fields_of_study = string_list(j, "fields_of_study");
  if (auto a = optional_string(j, "access_type")) {
    auto parsed = parse_access_type(*a);
    if (!parsed) throw SchemaViolation("access_type", "unknown value '" + *a + "'");
    r.access_type = *parsed;
  }
  r.url = optional_string(j, "url");
  r.in_citations = count_field(j, "in_citations");
  r.out_citations = count_field(j, "out_citations");

  canonicalize(r);
  validate(r);
  return r;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string derive_paper_id(std::string_view source_key) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(source_key)));
  return buf;
}

}  // namespace csi
