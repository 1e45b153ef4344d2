#include "csi/error.hpp"

namespace csi {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::io: return "Io";
    case Errc::corrupt_snapshot: return "CorruptSnapshot";
    case Errc::unsupported_version: return "UnsupportedVersion";
    case Errc::malformed_xml: return "MalformedXml";
    case Errc::unknown_entity: return "UnknownEntity";
    case Errc::schema_violation: return "SchemaViolation";
    case Errc::missing_title: return "MissingTitle";
    case Errc::invalid_year: return "InvalidYear";
    case Errc::invalid_regex: return "InvalidRegex";
    case Errc::invalid_range: return "InvalidRange";
    case Errc::invalid_filter: return "InvalidFilter";
    case Errc::unknown_facet: return "UnknownFacet";
    case Errc::unknown_dimension: return "UnknownDimension";
    case Errc::invalid_metric: return "InvalidMetric";
    case Errc::empty_selection: return "EmptySelection";
    case Errc::bad_page: return "BadPage";
    case Errc::bad_sort_key: return "BadSortKey";
    case Errc::empty_corpus_after_cleaning: return "EmptyCorpusAfterCleaning";
    case Errc::too_many_documents: return "TooManyDocuments";
    case Errc::degenerate_corpus: return "DegenerateCorpus";
    case Errc::topic_out_of_range: return "TopicOutOfRange";
    case Errc::unknown_term: return "UnknownTerm";
    case Errc::unknown_job: return "UnknownJob";
    case Errc::unknown_model: return "UnknownModel";
    case Errc::job_not_done: return "JobNotDone";
    case Errc::corrupt_model: return "CorruptModel";
  }
  return "Unknown";
}

}  // namespace csi
