#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace csi {

/// Requests selecting more documents than this are rejected, never sampled.
inline constexpr std::size_t kMaxTrainingDocuments = 100'000;

/// Identifies the committed stopword list.
inline constexpr std::string_view kStopwordListVersion = "en-1";

std::span<const std::string_view> stopwords() noexcept;
bool is_stopword(std::string_view lowercase_word) noexcept;

/// Porter (1980) stemmer, original rules. Expects a lowercase word.
std::string porter_stem(std::string_view word);

/// Lowercases ASCII, splits on anything that is not a letter (bytes >= 0x80
/// count as letters so UTF-8 words stay whole), drops stopwords and tokens
/// shorter than three bytes, then stems.
std::vector<std::string> tokenize(std::string_view text);

struct DocumentText {
  std::string id;
  std::string title;
  std::optional<std::string> abstract;
};

struct ProcessedDocs {
  std::vector<std::vector<std::uint32_t>> docs;
  std::vector<std::string> vocabulary;  // sorted; index is the term id
  std::vector<std::string> doc_ids;     // parallel to docs
  std::vector<std::string> dropped_ids; // documents left with no tokens
  std::uint64_t token_total = 0;
};

/// Tokenizes title and abstract of every document and builds one vocabulary
/// over the batch. Throws Error(empty_corpus_after_cleaning) when nothing
/// survives, including for an empty input.
ProcessedDocs preprocess(std::span<const DocumentText> papers);

struct TrainParams {
  std::uint32_t topics = 20;
  std::optional<double> alpha;  // defaults to 50 / topics
  double beta = 0.01;
  std::uint32_t iterations = 500;
  std::uint64_t seed = 1;

  double effective_alpha() const { return alpha.value_or(50.0 / topics); }
};

/// Count tables after a Gibbs sweep. Row-major; the views are valid only
/// during the observer call.
struct GibbsCounts {
  std::uint32_t sweep = 0;  // 1-based
  std::size_t n_docs = 0;
  std::size_t n_topics = 0;
  std::size_t n_terms = 0;
  std::span<const std::uint32_t> doc_topic;   // n_docs x n_topics
  std::span<const std::uint32_t> topic_term;  // n_topics x n_terms
  std::span<const std::uint64_t> topic_total; // n_topics
  std::span<const std::uint32_t> doc_length;  // n_docs
};

using SweepObserver = std::function<void(const GibbsCounts&)>;

/// Returns the first violated count identity, or nullopt when
/// sum_k n_dk == |d| for every document and sum_w n_kw == n_k for every topic.
std::optional<std::string> check_count_conservation(const GibbsCounts& counts);

struct TopicModel {
  std::uint32_t topics = 0;
  double alpha = 0;
  double beta = 0;
  std::uint64_t seed = 0;
  std::uint32_t iterations = 0;
  std::vector<std::string> vocabulary;
  std::vector<double> phi;    // topics x vocabulary, P(term | topic)
  std::vector<double> theta;  // docs x topics, P(topic | doc); may be empty
  std::vector<std::string> doc_ids;
  std::vector<double> marginal;              // P(topic) over corpus tokens
  std::vector<std::uint64_t> term_freq;      // raw corpus counts
  std::vector<std::uint64_t> topic_tokens;   // tokens assigned per topic
  std::uint64_t token_total = 0;
  std::vector<std::array<double, 2>> coords; // intertopic map

  std::size_t n_terms() const noexcept { return vocabulary.size(); }
  double phi_at(std::size_t topic, std::size_t term) const {
    return phi[topic * vocabulary.size() + term];
  }
  std::optional<std::uint32_t> term_id(std::string_view stem) const;

  bool operator==(const TopicModel&) const = default;
};

/// Collapsed Gibbs sampling. Deterministic for a given corpus, parameters and
/// seed. Throws Error(too_many_documents), Error(degenerate_corpus),
/// Error(empty_corpus_after_cleaning) or Error(invalid_argument).
TopicModel train(const ProcessedDocs& corpus, const TrainParams& params,
                 const SweepObserver& observer = {});

struct TermScore {
  std::uint32_t term = 0;
  double score = 0;
};

/// P(topic | term) for every topic, proportional to phi[k][w] * marginal[k].
std::vector<double> topic_given_term(const TopicModel& model, std::uint32_t term);

/// All terms by descending saliency
///   P(w) * sum_k P(k|w) log(P(k|w) / P(k)),
/// ties by descending corpus frequency, then stem.
std::vector<TermScore> saliency(const TopicModel& model);

/// All terms by descending relevance
///   lambda * log phi[k][w] + (1 - lambda) * log(phi[k][w] / P(w)),
/// ties by descending corpus frequency, then stem.
/// Throws Error(topic_out_of_range) or Error(invalid_argument) for lambda
/// outside [0, 1].
std::vector<TermScore> relevance(const TopicModel& model, std::uint32_t topic, double lambda);

/// Jensen-Shannon divergence with natural logarithms.
double jensen_shannon(std::span<const double> p, std::span<const double> q);

/// Symmetric topics x topics matrix of JSD between phi rows.
std::vector<double> jsd_matrix(const TopicModel& model);

/// Classical (Torgerson) scaling of an n x n distance matrix to two
/// principal coordinates.
std::vector<std::array<double, 2>> classical_mds(std::span<const double> distances,
                                                 std::size_t n);

/// Two-dimensional topic positions from pairwise JSD. Axes are oriented so
/// the topic with the largest marginal has non-negative coordinates.
std::vector<std::array<double, 2>> intertopic_map(const TopicModel& model);

inline constexpr double kDefaultLambda = 0.6;
inline constexpr std::size_t kPanelSize = 30;

enum class PanelMode { salient_overall, relevant_in_topic };
std::string_view to_string(PanelMode mode) noexcept;

struct TermPanelRow {
  std::string term;
  std::uint64_t overall = 0;
  std::optional<double> in_topic;

  bool operator==(const TermPanelRow&) const = default;
};

struct PanelRequest {
  std::optional<std::uint32_t> topic;
  std::optional<std::string> term;
  double lambda = kDefaultLambda;
  std::size_t n = kPanelSize;
};

struct TermPanel {
  PanelMode mode = PanelMode::salient_overall;
  double lambda = kDefaultLambda;
  std::optional<std::uint32_t> selected_topic;
  std::optional<std::string> selected_term;
  std::vector<TermPanelRow> terms;
  std::vector<double> topic_weights;  // P(k | selected term); empty otherwise

  bool operator==(const TermPanel&) const = default;
};

/// Expected in-topic frequency of each term: phi[k][w] * n_k, rescaled per
/// term so that the topics together account for exactly its corpus count.
double in_topic_frequency(const TopicModel& model, std::uint32_t topic, std::uint32_t term);

/// Throws Error(invalid_argument) when both topic and term are set,
/// Error(unknown_term) and Error(topic_out_of_range).
TermPanel term_panel(const TopicModel& model, const PanelRequest& request);

inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string model_to_bytes(const TopicModel& model, bool include_theta = true);
/// Throws Error(corrupt_model) or Error(unsupported_version).
TopicModel model_from_bytes(std::string_view bytes);
void save_model(const TopicModel& model, const std::filesystem::path& path,
                bool include_theta = true);
TopicModel load_model(const std::filesystem::path& path);

}  // namespace csi
