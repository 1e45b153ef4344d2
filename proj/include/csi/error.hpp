#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace csi {

enum class Errc {
  invalid_argument,
  io,
  corrupt_snapshot,
  unsupported_version,
  malformed_xml,
  unknown_entity,
  schema_violation,
  missing_title,
  invalid_year,
  invalid_regex,
  invalid_range,
  invalid_filter,
  unknown_facet,
  unknown_dimension,
  invalid_metric,
  empty_selection,
  bad_page,
  bad_sort_key,
  empty_corpus_after_cleaning,
  too_many_documents,
  degenerate_corpus,
  topic_out_of_range,
  unknown_term,
  unknown_job,
  unknown_model,
  job_not_done,
  corrupt_model,
};

/// Machine-readable name, e.g. "InvalidRegex".
std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

}  // namespace csi
