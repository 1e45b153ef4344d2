#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "csi/error.hpp"

namespace csi {

enum class PaperType {
  article,
  proceedings,
  book,
  incollection,
  phdthesis,
  mastersthesis,
  other,
};

enum class AccessType { open, closed, unknown };

inline constexpr int kMinYear = 1000;
inline constexpr int kMaxYear = 3000;

std::string_view to_string(PaperType type) noexcept;
std::string_view to_string(AccessType type) noexcept;
std::optional<PaperType> parse_paper_type(std::string_view text) noexcept;
std::optional<AccessType> parse_access_type(std::string_view text) noexcept;

/// Every PaperType in declaration order.
std::span<const PaperType> all_paper_types() noexcept;
std::span<const AccessType> all_access_types() noexcept;

struct PaperRecord {
  std::string id;
  std::string title;
  std::optional<std::string> abstract;
  int year = 0;
  std::vector<std::string> authors;
  std::optional<std::string> venue;
  std::optional<std::string> publisher;
  PaperType paper_type = PaperType::other;
  // Sorted and deduplicated; see canonicalize().
  std::vector<std::string> fields_of_study;
  AccessType access_type = AccessType::unknown;
  std::optional<std::string> url;
  std::uint64_t in_citations = 0;
  std::uint64_t out_citations = 0;

  bool operator==(const PaperRecord&) const = default;
};

/// Sorts and deduplicates fields_of_study in place.
void canonicalize(PaperRecord& record);

class SchemaViolation : public Error {
public:
  SchemaViolation(std::string field, std::string reason)
      : Error(Errc::schema_violation, field + ": " + reason),
        field_(std::move(field)),
        reason_(std::move(reason)) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& reason() const noexcept { return reason_; }

private:
  std::string field_;
  std::string reason_;
};

/// Throws SchemaViolation when an invariant does not hold. Expects a
/// canonicalized record.
void validate(const PaperRecord& record);

/// One line of the normalized JSONL interchange format, without newline.
std::string to_jsonl(const PaperRecord& record);

/// Parses, canonicalizes and validates one JSONL line. Unknown keys are
/// ignored; absent optionals take their defaults.
PaperRecord from_jsonl(std::string_view line);

/// Deterministic 16-hex-digit id for a dump-local key (FNV-1a 64).
std::string derive_paper_id(std::string_view source_key);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace csi
