#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "domain.hpp"

namespace courserec {

// Document frequencies over the global corpus.
struct CorpusStats {
  long n_docs = 0;
  std::map<TermId, long> df;

  long doc_freq(TermId id) const {
    auto it = df.find(id);
    return it == df.end() ? 0 : it->second;
  }

  void add_document(std::string_view text, const Vocabulary& vocab);
  CorpusStats with_document(std::string_view text, const Vocabulary& vocab) const;

  static CorpusStats build(std::span<const std::string> documents, const Vocabulary& vocab);

  bool operator==(const CorpusStats&) const = default;
};

struct CandidateFeatures {
  TermId term_id = 0;
  long freq = 0;
  long doc_size = 0;
  double tfidf = 0.0;
  double first_pos = 0.0;
};

// Every vocabulary term matched by some 1..3-gram of the document, with
// frequency and first-occurrence features. Sorted by term id. tfidf is left 0.
std::vector<CandidateFeatures> identify_candidates(std::string_view document,
                                                   const Vocabulary& vocab);

// (freq/doc_size) * -log2(df/n_docs)
double tfidf(long freq, long doc_size, long df, long n_docs);

// Fills tfidf on each candidate from the corpus statistics.
void assign_tfidf(std::vector<CandidateFeatures>& candidates, const CorpusStats& stats);

// Equal-frequency discretizer. Cut points sit halfway between distinct
// neighbouring values, so a constant feature gets a single bin.
class Discretizer {
 public:
  static constexpr int kBins = 10;

  Discretizer() = default;
  explicit Discretizer(std::vector<double> edges) : edges_(std::move(edges)) {}

  static Discretizer fit(std::vector<double> values);

  std::size_t bins() const { return edges_.size() + 1; }
  std::size_t bin(double value) const;
  const std::vector<double>& edges() const { return edges_; }

  bool operator==(const Discretizer&) const = default;

 private:
  std::vector<double> edges_;
};

// Per-feature, per-class bin counts. Likelihoods are add-1 smoothed.
struct FeatureTable {
  Discretizer bins;
  std::vector<long> yes;
  std::vector<long> no;

  double likelihood(double value, bool positive, long class_count) const;

  bool operator==(const FeatureTable&) const = default;
};

struct NbModel {
  long y_count = 0;
  long n_count = 0;
  FeatureTable tfidf;
  FeatureTable distance;
  // Statistics of the corpus the model was trained on, used when extracting
  // from documents outside any course store.
  CorpusStats corpus;

  double prior_yes() const { return static_cast<double>(y_count) / (y_count + n_count); }
  double prior_no() const { return static_cast<double>(n_count) / (y_count + n_count); }

  bool operator==(const NbModel&) const = default;
};

using LabeledCandidate = std::pair<CandidateFeatures, bool>;

NbModel nb_train(std::span<const LabeledCandidate> labeled);

struct ClassScores {
  double yes = 0.0;
  double no = 0.0;
};

ClassScores nb_class_scores(const NbModel& model, const CandidateFeatures& c);
// P[yes] / (P[yes] + P[no])
double keyphrase_posterior(double p_yes, double p_no);
double nb_score(const NbModel& model, const CandidateFeatures& c);

// Top three candidates by posterior; ties go to the earlier first occurrence,
// then the smaller id. `stats` must already count `document`.
std::vector<TermId> extract_keywords(std::string_view document, const Vocabulary& vocab,
                                     const CorpusStats& stats, const NbModel& model);

Discipline classify_course(std::span<const TermId> keywords, const Vocabulary& vocab);

// Training from manually indexed documents. `labels` holds
// (doc_id, term_id, is_keyphrase); candidates without a positive label are
// negatives.
struct KeyphraseLabel {
  std::string doc_id;
  TermId term_id = 0;
  bool positive = false;
};

std::vector<KeyphraseLabel> load_keyphrase_labels(const std::filesystem::path& path);

NbModel nb_train_from_documents(const std::map<std::string, std::string>& documents,
                                std::span<const KeyphraseLabel> labels, const Vocabulary& vocab);

// Reads `<dir>/<doc_id>.txt` for every file in the directory.
std::map<std::string, std::string> load_documents(const std::filesystem::path& dir);

std::string save_nb_model(const NbModel& model);
NbModel load_nb_model(std::string_view text);
NbModel load_nb_model_file(const std::filesystem::path& path);

}  // namespace courserec
