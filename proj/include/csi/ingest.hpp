#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "csi/error.hpp"
#include "csi/record.hpp"

namespace csi {

/// A dump entry before normalization. Repeated child tags keep document order.
struct RawRecord {
  std::string source_key;
  std::string element_kind;
  std::vector<std::pair<std::string, std::string>> fields;
  std::map<std::string, std::string> attributes;

  std::vector<std::string> values(std::string_view tag) const;
  const std::string* first(std::string_view tag) const;

  bool operator==(const RawRecord&) const = default;
};

/// A record-level problem found while reading a dump. The affected record is
/// skipped; reading continues.
struct IngestIssue {
  Errc kind = Errc::malformed_xml;
  std::uint64_t position = 0;  // byte offset for XML input
  std::uint64_t line = 0;      // 1-based
  std::string source_key;      // empty when unknown
  std::string field;           // set for schema violations
  std::string message;
};

/// Looks up a named character reference: the five XML builtins plus the
/// Latin-1 (ISO 8859-1, U+00A0..U+00FF) names and the Latin Extended-A names
/// OElig, oelig, Scaron, scaron, Yuml. Returns UTF-8.
std::optional<std::string_view> lookup_entity(std::string_view name) noexcept;

/// Pull parser over a DBLP-flavored XML dump. Memory is bounded by the
/// largest single record plus a fixed read buffer.
class XmlDumpReader {
public:
  explicit XmlDumpReader(std::istream& in, std::size_t buffer_size = 64 * 1024);

  XmlDumpReader(const XmlDumpReader&) = delete;
  XmlDumpReader& operator=(const XmlDumpReader&) = delete;

  /// Next well-formed record, or nullopt at end of dump.
  std::optional<RawRecord> next();

  const std::vector<IngestIssue>& issues() const noexcept { return issues_; }
  const std::string& root_name() const noexcept { return root_name_; }

private:
  struct Fault {
    Errc kind;
    std::uint64_t position;
    std::uint64_t line;
    std::string message;
  };

  int peek();
  int get();
  bool starts_with(std::string_view s);
  bool fill();

  [[noreturn]] void fail(Errc kind, std::string message);
  [[noreturn]] void fail_at(Errc kind, std::uint64_t pos, std::uint64_t line,
                            std::string message);

  std::string read_name();
  void skip_ws();
  void skip_until(std::string_view terminator);
  void skip_doctype();
  void read_attributes(std::map<std::string, std::string>& attrs,
                       bool& self_closing);
  void read_reference(std::string& out);
  void open_root();
  std::optional<RawRecord> read_record(std::string kind);
  bool resync(const std::string& kind);

  std::istream& in_;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
  std::size_t len_ = 0;
  std::uint64_t offset_ = 0;
  std::uint64_t line_ = 1;

  std::optional<Fault> pending_;
  std::string current_key_;
  std::uint64_t record_pos_ = 0;
  std::uint64_t record_line_ = 0;
  bool root_open_ = false;
  bool done_ = false;
  std::string root_name_;
  std::vector<IngestIssue> issues_;
};

/// Maps a raw dump record onto a validated PaperRecord.
/// Throws Error(missing_title), Error(invalid_year) or SchemaViolation.
PaperRecord normalize(const RawRecord& raw);

/// Maps a dump element name onto the paper-type enum.
PaperType paper_type_for_element(std::string_view element_kind) noexcept;

/// Pull reader over the normalized JSONL format.
class JsonlReader {
public:
  explicit JsonlReader(std::istream& in) : in_(in) {}

  std::optional<PaperRecord> next();

  const std::vector<IngestIssue>& issues() const noexcept { return issues_; }

private:
  std::istream& in_;
  std::uint64_t line_no_ = 0;
  std::string line_;
  std::vector<IngestIssue> issues_;
};

enum class DumpFormat { xml, jsonl };

std::optional<DumpFormat> parse_dump_format(std::string_view text) noexcept;

struct IngestReport {
  std::uint64_t records = 0;
  std::vector<IngestIssue> issues;
};

/// Reads a whole dump, normalizing XML records, and hands each valid record
/// to sink in input order.
IngestReport read_dump(std::istream& in, DumpFormat format,
                       const std::function<void(PaperRecord&&)>& sink);

std::string describe(const IngestIssue& issue);

}  // namespace csi
