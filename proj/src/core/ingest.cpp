#include <charconv>
#include <sstream>

#include "csi/ingest.hpp"

namespace csi {

namespace {

std::optional<std::string> non_empty(const std::string* value) {
  if (!value || value->empty()) return std::nullopt;
  return *value;
}

std::optional<std::uint64_t> parse_count(const std::string& text) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

PaperType paper_type_for_element(std::string_view kind) noexcept {
  if (kind == "article" || kind == "inproceedings") return PaperType::article;
  if (kind == "proceedings") return PaperType::proceedings;
  if (kind == "book") return PaperType::book;
  if (kind == "incollection") return PaperType::incollection;
  if (kind == "phdthesis") return PaperType::phdthesis;
  if (kind == "mastersthesis") return PaperType::mastersthesis;
  return PaperType::other;
}

PaperRecord normalize(const RawRecord& raw) {
  PaperRecord r;
  auto title = non_empty(raw.first("title"));
  if (!title) throw Error(Errc::missing_title, "record '" + raw.source_key + "' has no title");
  r.title = std::move(*title);

  const std::string* year = raw.first("year");
  int y = 0;
  if (!year ||
      std::from_chars(year->data(), year->data() + year->size(), y).ptr !=
          year->data() + year->size() ||
      y < kMinYear || y > kMaxYear)
    throw Error(Errc::invalid_year,
                "record '" + raw.source_key + "' has a missing or invalid year");
  r.year = y;

  r.id = derive_paper_id(raw.source_key);
  for (auto& a : raw.values("author"))
    if (!a.empty()) r.authors.push_back(std::move(a));
  r.venue = non_empty(raw.first("journal"));
  if (!r.venue) r.venue = non_empty(raw.first("booktitle"));
  r.publisher = non_empty(raw.first("publisher"));
  r.abstract = non_empty(raw.first("abstract"));
  r.url = non_empty(raw.first("ee"));
  r.paper_type = paper_type_for_element(raw.element_kind);
  for (auto& f : raw.values("field"))
    if (!f.empty()) r.fields_of_study.push_back(std::move(f));

  if (auto it = raw.attributes.find("access"); it != raw.attributes.end()) {
    auto parsed = parse_access_type(it->second);
    if (parsed) r.access_type = *parsed;
  }
  for (auto [tag, target] : {std::pair{"in_citations", &r.in_citations},
                             std::pair{"out_citations", &r.out_citations}}) {
    if (const std::string* text = raw.first(tag)) {
      auto n = parse_count(*text);
      if (!n) throw SchemaViolation(tag, "expected non-negative integer");
      *target = *n;
    }
  }

  canonicalize(r);
  validate(r);
  return r;
}

std::optional<PaperRecord> JsonlReader::next() {
  while (std::getline(in_, line_)) {
    ++line_no_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    if (line_.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      return from_jsonl(line_);
    } catch (const SchemaViolation& e) {
      issues_.push_back({Errc::schema_violation, 0, line_no_, "", e.field(), e.reason()});
    }
  }
  return std::nullopt;
}

std::optional<DumpFormat> parse_dump_format(std::string_view text) noexcept {
  if (text == "xml") return DumpFormat::xml;
  if (text == "jsonl") return DumpFormat::jsonl;
  return std::nullopt;
}

IngestReport read_dump(std::istream& in, DumpFormat format,
                       const std::function<void(PaperRecord&&)>& sink) {
  IngestReport report;
  if (format == DumpFormat::jsonl) {
    JsonlReader reader(in);
    while (auto rec = reader.next()) {
      sink(std::move(*rec));
      ++report.records;
    }
    report.issues = reader.issues();
    return report;
  }

  XmlDumpReader reader(in);
  std::vector<IngestIssue> normalize_issues;
  while (auto raw = reader.next()) {
    try {
      sink(normalize(*raw));
      ++report.records;
    } catch (const SchemaViolation& e) {
      normalize_issues.push_back({e.code(), 0, 0, raw->source_key, e.field(), e.reason()});
    } catch (const Error& e) {
      normalize_issues.push_back({e.code(), 0, 0, raw->source_key, "", e.what()});
    }
  }
  report.issues = reader.issues();
  report.issues.insert(report.issues.end(), normalize_issues.begin(),
                       normalize_issues.end());
  return report;
}

std::string describe(const IngestIssue& issue) {
  std::ostringstream out;
  out << errc_name(issue.kind);
  if (issue.line) out << " at line " << issue.line;
  if (issue.position) out << " (byte " << issue.position << ")";
  if (!issue.source_key.empty()) out << " [" << issue.source_key << "]";
  if (!issue.field.empty()) out << " " << issue.field << ":";
  out << " " << issue.message;
  return out.str();
}

}  // namespace csi
