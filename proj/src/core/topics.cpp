#include "csi/topics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csi/error.hpp"

namespace csi {

namespace {

bool is_letter(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char ascii_lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_topic(const TopicModel& model, std::uint32_t topic) {
  if (topic >= model.topics)
    throw Error(Errc::topic_out_of_range, "topic " + std::to_string(topic) + " is not in [0, " +
                                              std::to_string(model.topics) + ")");
}

// Descending score, then descending corpus frequency, then stem.
void rank_terms(const TopicModel& model, std::vector<TermScore>& scores) {
  std::sort(scores.begin(), scores.end(), [&](const TermScore& a, const TermScore& b) {
    if (a.score != b.score) return a.score > b.score;
    auto fa = model.term_freq[a.term], fb = model.term_freq[b.term];
    if (fa != fb) return fa > fb;
    return model.vocabulary[a.term] < model.vocabulary[b.term];
  });
}

double term_probability(const TopicModel& model, std::uint32_t term) {
  return static_cast<double>(model.term_freq[term]) / static_cast<double>(model.token_total);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (word.size() >= 3 && !is_stopword(word)) out.push_back(porter_stem(word));
    word.clear();
  };
  for (unsigned char c : text) {
    if (is_letter(c))
      word.push_back(ascii_lower(c));
    else
      flush();
  }
  flush();
  return out;
}

ProcessedDocs preprocess(std::span<const DocumentText> papers) {
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(papers.size());
  std::set<std::string, std::less<>> stems;
  ProcessedDocs out;
  for (const auto& paper : papers) {
    std::string text = paper.title;
    if (paper.abstract) {
      text.push_back(' ');
      text += *paper.abstract;
    }
    auto doc = tokenize(text);
    if (doc.empty()) {
      out.dropped_ids.push_back(paper.id);
      continue;
    }
    stems.insert(doc.begin(), doc.end());
    out.doc_ids.push_back(paper.id);
    tokens.push_back(std::move(doc));
  }
  if (tokens.empty())
    throw Error(Errc::empty_corpus_after_cleaning,
                std::to_string(papers.size()) + " documents, none with usable tokens");

  out.vocabulary.assign(stems.begin(), stems.end());
  out.docs.reserve(tokens.size());
  for (const auto& doc : tokens) {
    std::vector<std::uint32_t> ids;
    ids.reserve(doc.size());
    for (const auto& t : doc) {
      auto it = std::lower_bound(out.vocabulary.begin(), out.vocabulary.end(), t);
      ids.push_back(static_cast<std::uint32_t>(it - out.vocabulary.begin()));
    }
    out.token_total += ids.size();
    out.docs.push_back(std::move(ids));
  }
  return out;
}

std::optional<std::string> check_count_conservation(const GibbsCounts& c) {
  for (std::size_t d = 0; d < c.n_docs; ++d) {
    std::uint64_t sum = 0;
    for (std::size_t k = 0; k < c.n_topics; ++k) sum += c.doc_topic[d * c.n_topics + k];
    if (sum != c.doc_length[d])
      return "document " + std::to_string(d) + ": topic counts sum to " + std::to_string(sum) +
             ", length is " + std::to_string(c.doc_length[d]);
  }
  for (std::size_t k = 0; k < c.n_topics; ++k) {
    std::uint64_t sum = 0;
    for (std::size_t w = 0; w < c.n_terms; ++w) sum += c.topic_term[k * c.n_terms + w];
    if (sum != c.topic_total[k])
      return "topic " + std::to_string(k) + ": term counts sum to " + std::to_string(sum) +
             ", total is " + std::to_string(c.topic_total[k]);
  }
  return std::nullopt;
}

std::optional<std::uint32_t> TopicModel::term_id(std::string_view stem) const {
  auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), stem);
  if (it == vocabulary.end() || *it != stem) return std::nullopt;
  return static_cast<std::uint32_t>(it - vocabulary.begin());
}

TopicModel train(const ProcessedDocs& corpus, const TrainParams& params,
                 const SweepObserver& observer) {
  const std::size_t D = corpus.docs.size();
  const std::size_t V = corpus.vocabulary.size();
  const std::size_t K = params.topics;
  if (D > kMaxTrainingDocuments)
    throw Error(Errc::too_many_documents, std::to_string(D) + " documents exceed the cap of " +
                                              std::to_string(kMaxTrainingDocuments));
  if (K < 2) throw Error(Errc::invalid_argument, "topic count must be at least 2");
  if (params.iterations < 1) throw Error(Errc::invalid_argument, "iterations must be at least 1");
  const double alpha = params.effective_alpha();
  const double beta = params.beta;
  if (!(alpha > 0) || !std::isfinite(alpha) || !(beta > 0) || !std::isfinite(beta))
    throw Error(Errc::invalid_argument, "alpha and beta must be positive");
  if (D == 0) throw Error(Errc::empty_corpus_after_cleaning, "no documents to train on");
  if (V < K)
    throw Error(Errc::degenerate_corpus, "vocabulary of " + std::to_string(V) +
                                             " terms is smaller than " + std::to_string(K) +
                                             " topics");

  std::vector<std::uint32_t> n_dk(D * K, 0), n_kw(K * V, 0), n_d(D, 0);
  std::vector<std::uint64_t> n_k(K, 0);
  std::vector<std::vector<std::uint32_t>> z(D);
  std::mt19937_64 rng(params.seed);

  std::vector<std::uint64_t> term_freq(V, 0);
  std::uint64_t N = 0;
  for (std::size_t d = 0; d < D; ++d) {
    const auto& doc = corpus.docs[d];
    n_d[d] = static_cast<std::uint32_t>(doc.size());
    z[d].resize(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
      std::uint32_t w = doc[i];
      if (w >= V) throw Error(Errc::invalid_argument, "token id outside the vocabulary");
      auto k = static_cast<std::uint32_t>(rng() % K);
      z[d][i] = k;
      ++n_dk[d * K + k];
      ++n_kw[k * V + w];
      ++n_k[k];
      ++term_freq[w];
      ++N;
    }
  }

  const double v_beta = static_cast<double>(V) * beta;
  std::vector<double> cumulative(K);
  for (std::uint32_t sweep = 1; sweep <= params.iterations; ++sweep) {
    for (std::size_t d = 0; d < D; ++d) {
      const auto& doc = corpus.docs[d];
      std::uint32_t* dk = &n_dk[d * K];
      for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::uint32_t w = doc[i];
        std::uint32_t k = z[d][i];
        --dk[k];
        --n_kw[k * V + w];
        --n_k[k];
        double total = 0;
        for (std::size_t t = 0; t < K; ++t) {
          total += (dk[t] + alpha) * (n_kw[t * V + w] + beta) /
                   (static_cast<double>(n_k[t]) + v_beta);
          cumulative[t] = total;
        }
        const double u = uniform01(rng) * total;
        k = static_cast<std::uint32_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
        if (k >= K) k = static_cast<std::uint32_t>(K - 1);
        z[d][i] = k;
        ++dk[k];
        ++n_kw[k * V + w];
        ++n_k[k];
      }
    }
    GibbsCounts counts{sweep, D, K, V, n_dk, n_kw, n_k, n_d};
    assert(!check_count_conservation(counts));
    if (observer) observer(counts);
  }

  TopicModel model;
  model.topics = params.topics;
  model.alpha = alpha;
  model.beta = beta;
  model.seed = params.seed;
  model.iterations = params.iterations;
  model.vocabulary = corpus.vocabulary;
  model.doc_ids = corpus.doc_ids;
  model.term_freq = std::move(term_freq);
  model.topic_tokens = n_k;
  model.token_total = N;

  model.phi.resize(K * V);
  for (std::size_t k = 0; k < K; ++k) {
    const double denom = static_cast<double>(n_k[k]) + v_beta;
    for (std::size_t w = 0; w < V; ++w) model.phi[k * V + w] = (n_kw[k * V + w] + beta) / denom;
  }
  model.theta.resize(D * K);
  const double k_alpha = static_cast<double>(K) * alpha;
  for (std::size_t d = 0; d < D; ++d) {
    const double denom = static_cast<double>(n_d[d]) + k_alpha;
    for (std::size_t k = 0; k < K; ++k) model.theta[d * K + k] = (n_dk[d * K + k] + alpha) / denom;
  }
  model.marginal.resize(K);
  for (std::size_t k = 0; k < K; ++k)
    model.marginal[k] = static_cast<double>(n_k[k]) / static_cast<double>(N);
  model.coords = intertopic_map(model);
  return model;
}

std::vector<double> topic_given_term(const TopicModel& model, std::uint32_t term) {
  if (term >= model.n_terms()) throw Error(Errc::unknown_term, "term id out of range");
  std::vector<double> out(model.topics);
  double total = 0;
  for (std::size_t k = 0; k < model.topics; ++k) {
    out[k] = model.phi_at(k, term) * model.marginal[k];
    total += out[k];
  }
  if (total > 0)
    for (auto& p : out) p /= total;
  return out;
}

std::vector<TermScore> saliency(const TopicModel& model) {
  std::vector<TermScore> out;
  out.reserve(model.n_terms());
  for (std::uint32_t w = 0; w < model.n_terms(); ++w) {
    auto cond = topic_given_term(model, w);
    double distinctiveness = 0;
    for (std::size_t k = 0; k < model.topics; ++k)
      if (cond[k] > 0 && model.marginal[k] > 0)
        distinctiveness += cond[k] * std::log(cond[k] / model.marginal[k]);
    out.push_back({w, term_probability(model, w) * distinctiveness});
  }
  rank_terms(model, out);
  return out;
}

std::vector<TermScore> relevance(const TopicModel& model, std::uint32_t topic, double lambda) {
  check_topic(model, topic);
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw Error(Errc::invalid_argument, "lambda must lie in [0, 1]");
  std::vector<TermScore> out;
  out.reserve(model.n_terms());
  for (std::uint32_t w = 0; w < model.n_terms(); ++w) {
    const double phi = model.phi_at(topic, w);
    const double lift = phi / term_probability(model, w);
    out.push_back({w, lambda * std::log(phi) + (1.0 - lambda) * std::log(lift)});
  }
  rank_terms(model, out);
  return out;
}

double jensen_shannon(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw Error(Errc::invalid_argument, "distributions differ in length");
  double total = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0) total += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0) total += 0.5 * q[i] * std::log(q[i] / m);
  }
  return std::max(total, 0.0);
}

std::vector<double> jsd_matrix(const TopicModel& model) {
  const std::size_t K = model.topics, V = model.n_terms();
  std::vector<double> out(K * K, 0.0);
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = a + 1; b < K; ++b) {
      double d = jensen_shannon(std::span(model.phi).subspan(a * V, V),
                                std::span(model.phi).subspan(b * V, V));
      out[a * K + b] = out[b * K + a] = d;
    }
  return out;
}

std::vector<std::array<double, 2>> classical_mds(std::span<const double> distances,
                                                 std::size_t n) {
  if (distances.size() != n * n)
    throw Error(Errc::invalid_argument, "distance matrix is not n x n");
  std::vector<std::array<double, 2>> out(n, {0.0, 0.0});
  if (n < 2) return out;
  Eigen::MatrixXd d2(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double d = 0.5 * (distances[i * n + j] + distances[j * n + i]);
      d2(i, j) = d * d;
    }
  Eigen::MatrixXd centering = Eigen::MatrixXd::Identity(n, n) -
                              Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::MatrixXd b = -0.5 * centering * d2 * centering;
  b = 0.5 * (b + b.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  const auto& values = solver.eigenvalues();    // ascending
  const auto& vectors = solver.eigenvectors();
  for (std::size_t axis = 0; axis < 2 && axis < n; ++axis) {
    const auto col = static_cast<Eigen::Index>(n - 1 - axis);
    const double scale = std::sqrt(std::max(values(col), 0.0));
    for (std::size_t i = 0; i < n; ++i)
      out[i][axis] = vectors(static_cast<Eigen::Index>(i), col) * scale;
  }
  return out;
}

std::vector<std::array<double, 2>> intertopic_map(const TopicModel& model) {
  if (model.topics < 2) throw Error(Errc::invalid_argument, "intertopic map needs two topics");
  auto coords = classical_mds(jsd_matrix(model), model.topics);
  const auto anchor = static_cast<std::size_t>(
      std::max_element(model.marginal.begin(), model.marginal.end()) - model.marginal.begin());
  for (std::size_t axis = 0; axis < 2; ++axis)
    if (coords[anchor][axis] < 0)
      for (auto& c : coords) c[axis] = -c[axis];
  for (auto& c : coords)
    for (auto& x : c)
      if (x == 0.0) x = 0.0;  // normalizes -0.0
  return coords;
}

std::string_view to_string(PanelMode mode) noexcept {
  return mode == PanelMode::salient_overall ? "salient_overall" : "relevant_in_topic";
}

double in_topic_frequency(const TopicModel& model, std::uint32_t topic, std::uint32_t term) {
  check_topic(model, topic);
  if (term >= model.n_terms()) throw Error(Errc::unknown_term, "term id out of range");
  double across = 0;
  for (std::size_t k = 0; k < model.topics; ++k)
    across += model.phi_at(k, term) * static_cast<double>(model.topic_tokens[k]);
  if (across <= 0) return 0;
  const double expected = model.phi_at(topic, term) * static_cast<double>(model.topic_tokens[topic]);
  const double overall = static_cast<double>(model.term_freq[term]);
  return std::min(expected * overall / across, overall);
}

TermPanel term_panel(const TopicModel& model, const PanelRequest& request) {
  if (request.topic && request.term)
    throw Error(Errc::invalid_argument, "select either a topic or a term, not both");
  if (request.n == 0) throw Error(Errc::invalid_argument, "panel size must be at least 1");
  if (!(request.lambda >= 0.0 && request.lambda <= 1.0))
    throw Error(Errc::invalid_argument, "lambda must lie in [0, 1]");
  const std::size_t n = std::min(request.n, kPanelSize);

  TermPanel panel;
  panel.lambda = request.lambda;
  auto row = [&](std::uint32_t w) {
    return TermPanelRow{model.vocabulary[w], model.term_freq[w], std::nullopt};
  };

  if (request.topic) {
    const std::uint32_t k = *request.topic;
    auto ranked = relevance(model, k, request.lambda);
    panel.mode = PanelMode::relevant_in_topic;
    panel.selected_topic = k;
    for (std::size_t i = 0; i < ranked.size() && i < n; ++i) {
      auto r = row(ranked[i].term);
      r.in_topic = in_topic_frequency(model, k, ranked[i].term);
      panel.terms.push_back(std::move(r));
    }
    return panel;
  }

  auto ranked = saliency(model);
  std::optional<std::uint32_t> pinned;
  if (request.term) {
    pinned = model.term_id(*request.term);
    if (!pinned) throw Error(Errc::unknown_term, "unknown term '" + *request.term + "'");
    panel.selected_term = *request.term;
    panel.topic_weights = topic_given_term(model, *pinned);
    panel.terms.push_back(row(*pinned));
  }
  for (std::size_t i = 0; i < ranked.size() && panel.terms.size() < n; ++i)
    if (ranked[i].term != pinned) panel.terms.push_back(row(ranked[i].term));
  return panel;
}

std::string model_to_bytes(const TopicModel& model, bool include_theta) {
  nlohmann::ordered_json j;
  j["format"] = "csi-topic-model";
  j["version"] = kModelFormatVersion;
  j["stopwords"] = kStopwordListVersion;
  j["topics"] = model.topics;
  j["alpha"] = model.alpha;
  j["beta"] = model.beta;
  j["seed"] = model.seed;
  j["iterations"] = model.iterations;
  j["token_total"] = model.token_total;
  j["vocabulary"] = model.vocabulary;
  j["term_freq"] = model.term_freq;
  j["topic_tokens"] = model.topic_tokens;
  j["marginal"] = model.marginal;
  j["phi"] = model.phi;
  auto coords = nlohmann::ordered_json::array();
  for (const auto& c : model.coords) coords.push_back({c[0], c[1]});
  j["coords"] = std::move(coords);
  j["doc_ids"] = model.doc_ids;
  if (include_theta && !model.theta.empty()) j["theta"] = model.theta;
  return j.dump();
}

TopicModel model_from_bytes(std::string_view bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::corrupt_model, std::string("model is not valid JSON: ") + e.what());
  }
  TopicModel m;
  try {
    if (j.at("format").get<std::string>() != "csi-topic-model")
      throw Error(Errc::corrupt_model, "not a topic model artifact");
    auto version = j.at("version").get<std::uint32_t>();
    if (version > kModelFormatVersion)
      throw Error(Errc::unsupported_version,
                  "model format version " + std::to_string(version) + " is newer than " +
                      std::to_string(kModelFormatVersion));
    j.at("topics").get_to(m.topics);
    j.at("alpha").get_to(m.alpha);
    j.at("beta").get_to(m.beta);
    j.at("seed").get_to(m.seed);
    j.at("iterations").get_to(m.iterations);
    j.at("token_total").get_to(m.token_total);
    j.at("vocabulary").get_to(m.vocabulary);
    j.at("term_freq").get_to(m.term_freq);
    j.at("topic_tokens").get_to(m.topic_tokens);
    j.at("marginal").get_to(m.marginal);
    j.at("phi").get_to(m.phi);
    for (const auto& c : j.at("coords")) m.coords.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
    j.at("doc_ids").get_to(m.doc_ids);
    if (j.contains("theta")) j.at("theta").get_to(m.theta);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::corrupt_model, std::string("malformed model: ") + e.what());
  }
  const std::size_t K = m.topics, V = m.vocabulary.size();
  bool ok = K >= 2 && m.phi.size() == K * V && m.term_freq.size() == V &&
            m.topic_tokens.size() == K && m.marginal.size() == K && m.coords.size() == K &&
            (m.theta.empty() || m.theta.size() == K * m.doc_ids.size()) &&
            std::is_sorted(m.vocabulary.begin(), m.vocabulary.end());
  if (!ok) throw Error(Errc::corrupt_model, "model arrays have inconsistent shapes");
  return m;
}

void save_model(const TopicModel& model, const std::filesystem::path& path,
                bool include_theta) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write " + tmp.string());
    out << model_to_bytes(model, include_theta);
    if (!out.flush()) throw Error(Errc::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io, "cannot rename " + tmp.string() + ": " + ec.message());
}

TopicModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_bytes(buf.str());
}

}  // namespace csi
