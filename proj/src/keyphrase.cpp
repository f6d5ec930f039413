#include "keyphrase.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

#include "error.hpp"
#include "io.hpp"
#include "text.hpp"

namespace courserec {

namespace fs = std::filesystem;

// --- candidates ---------------------------------------------------------------

std::vector<CandidateFeatures> identify_candidates(std::string_view document,
                                                   const Vocabulary& vocab) {
  auto tokens = normalized_tokens(document);
  const std::size_t n = tokens.size();
  const std::size_t max_len = std::min<std::size_t>(3, vocab.max_term_tokens());

  struct Hit {
    long freq = 0;
    std::size_t first = 0;
  };
  std::map<TermId, Hit> hits;
  std::string gram;
  for (std::size_t i = 0; i < n; ++i) {
    gram.clear();
    for (std::size_t len = 1; len <= max_len && i + len <= n; ++len) {
      if (len > 1) gram.push_back(' ');
      gram += tokens[i + len - 1];
      if (auto id = vocab.find(gram)) {
        auto [it, fresh] = hits.try_emplace(*id);
        if (fresh) it->second.first = i;
        ++it->second.freq;
      }
    }
  }

  std::vector<CandidateFeatures> out;
  out.reserve(hits.size());
  for (const auto& [id, hit] : hits) {
    CandidateFeatures c;
    c.term_id = id;
    c.freq = hit.freq;
    c.doc_size = static_cast<long>(n);
    c.first_pos = static_cast<double>(hit.first) / static_cast<double>(n);
    out.push_back(c);
  }
  return out;
}

double tfidf(long freq, long doc_size, long df, long n_docs) {
  if (doc_size < 1 || n_docs < 1)
    throw Error(ErrorKind::Validation, "document size and corpus size must be positive");
  if (freq == 0) return 0.0;
  if (df <= 0)
    throw Error(ErrorKind::Validation,
                "inconsistent corpus: term occurs in the document but has zero document frequency");
  if (df > n_docs)
    throw Error(ErrorKind::Validation, "inconsistent corpus: document frequency exceeds corpus size");
  if (df == n_docs) return 0.0;
  return (static_cast<double>(freq) / static_cast<double>(doc_size)) *
         -std::log2(static_cast<double>(df) / static_cast<double>(n_docs));
}

void assign_tfidf(std::vector<CandidateFeatures>& candidates, const CorpusStats& stats) {
  for (auto& c : candidates)
    c.tfidf = tfidf(c.freq, c.doc_size, stats.doc_freq(c.term_id), stats.n_docs);
}

// --- corpus statistics --------------------------------------------------------

void CorpusStats::add_document(std::string_view text, const Vocabulary& vocab) {
  ++n_docs;
  for (const auto& c : identify_candidates(text, vocab)) ++df[c.term_id];
}

CorpusStats CorpusStats::with_document(std::string_view text, const Vocabulary& vocab) const {
  CorpusStats s = *this;
  s.add_document(text, vocab);
  return s;
}

CorpusStats CorpusStats::build(std::span<const std::string> documents, const Vocabulary& vocab) {
  CorpusStats s;
  for (const auto& d : documents) s.add_document(d, vocab);
  return s;
}

// --- naive Bayes --------------------------------------------------------------

Discretizer Discretizer::fit(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  std::vector<double> edges;
  for (int i = 1; i < kBins; ++i) {
    std::size_t idx = static_cast<std::size_t>(i) * n / kBins;
    if (idx == 0 || idx >= n) continue;
    double lo = values[idx - 1], hi = values[idx];
    if (!(lo < hi)) continue;
    double edge = lo + (hi - lo) / 2;
    if (edges.empty() || edge > edges.back()) edges.push_back(edge);
  }
  return Discretizer(std::move(edges));
}

std::size_t Discretizer::bin(double value) const {
  return static_cast<std::size_t>(std::upper_bound(edges_.begin(), edges_.end(), value) -
                                  edges_.begin());
}

double FeatureTable::likelihood(double value, bool positive, long class_count) const {
  const auto& counts = positive ? yes : no;
  std::size_t b = bins.bin(value);
  return static_cast<double>(counts[b] + 1) /
         static_cast<double>(class_count + static_cast<long>(bins.bins()));
}

namespace {

FeatureTable fit_feature(std::span<const LabeledCandidate> labeled,
                         double (*get)(const CandidateFeatures&)) {
  std::vector<double> values;
  values.reserve(labeled.size());
  for (const auto& [c, label] : labeled) values.push_back(get(c));
  FeatureTable t;
  t.bins = Discretizer::fit(values);
  t.yes.assign(t.bins.bins(), 0);
  t.no.assign(t.bins.bins(), 0);
  for (const auto& [c, label] : labeled) ++(label ? t.yes : t.no)[t.bins.bin(get(c))];
  return t;
}

}  // namespace

NbModel nb_train(std::span<const LabeledCandidate> labeled) {
  NbModel m;
  for (const auto& [c, label] : labeled) ++(label ? m.y_count : m.n_count);
  if (m.y_count == 0 || m.n_count == 0)
    throw Error(ErrorKind::Training,
                "keyphrase model needs at least one positive and one negative example");
  m.tfidf = fit_feature(labeled, [](const CandidateFeatures& c) { return c.tfidf; });
  m.distance = fit_feature(labeled, [](const CandidateFeatures& c) { return c.first_pos; });
  return m;
}

ClassScores nb_class_scores(const NbModel& m, const CandidateFeatures& c) {
  ClassScores s;
  s.yes = m.prior_yes() * m.tfidf.likelihood(c.tfidf, true, m.y_count) *
          m.distance.likelihood(c.first_pos, true, m.y_count);
  s.no = m.prior_no() * m.tfidf.likelihood(c.tfidf, false, m.n_count) *
         m.distance.likelihood(c.first_pos, false, m.n_count);
  return s;
}

double keyphrase_posterior(double p_yes, double p_no) {
  double total = p_yes + p_no;
  if (!(total > 0)) return 0.5;
  return p_yes / total;
}

double nb_score(const NbModel& model, const CandidateFeatures& c) {
  auto s = nb_class_scores(model, c);
  return keyphrase_posterior(s.yes, s.no);
}

std::vector<TermId> extract_keywords(std::string_view document, const Vocabulary& vocab,
                                     const CorpusStats& stats, const NbModel& model) {
  auto candidates = identify_candidates(document, vocab);
  if (candidates.empty()) return {};
  assign_tfidf(candidates, stats);

  struct Scored {
    double p;
    double first_pos;
    TermId id;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (const auto& c : candidates) scored.push_back({nb_score(model, c), c.first_pos, c.term_id});
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.p != b.p) return a.p > b.p;
    if (a.first_pos != b.first_pos) return a.first_pos < b.first_pos;
    return a.id < b.id;
  });
  std::vector<TermId> out;
  for (std::size_t i = 0; i < scored.size() && i < kKeywordSlots; ++i) out.push_back(scored[i].id);
  return out;
}

Discipline classify_course(std::span<const TermId> keywords, const Vocabulary& vocab) {
  int electrical = 0, mechanical = 0;
  for (TermId id : keywords) {
    switch (vocab.at(id).discipline) {
      case Discipline::Electrical: ++electrical; break;
      case Discipline::Mechanical: ++mechanical; break;
      case Discipline::Both: ++electrical; ++mechanical; break;
    }
  }
  if (electrical > mechanical) return Discipline::Electrical;
  if (mechanical > electrical) return Discipline::Mechanical;
  return Discipline::Both;
}

// --- training from documents --------------------------------------------------

std::vector<KeyphraseLabel> load_keyphrase_labels(const fs::path& path) {
  std::vector<KeyphraseLabel> out;
  int line_no = 0;
  for (auto line : split(read_file(path), '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 3)
      throw Error(ErrorKind::Format, path.filename().string() + " line " +
                                         std::to_string(line_no) +
                                         ": expected doc_id<TAB>term_id<TAB>label");
    KeyphraseLabel l;
    l.doc_id = f[0];
    l.term_id = static_cast<TermId>(parse_long(f[1]));
    auto v = trim(f[2]);
    if (v == "1" || v == "yes")
      l.positive = true;
    else if (v == "0" || v == "no")
      l.positive = false;
    else
      throw Error(ErrorKind::Format, path.filename().string() + " line " +
                                         std::to_string(line_no) + ": label must be 1/0");
    out.push_back(std::move(l));
  }
  return out;
}

std::map<std::string, std::string> load_documents(const fs::path& dir) {
  std::map<std::string, std::string> docs;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "not a directory: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    docs.emplace(entry.path().stem().string(), read_file(entry.path()));
  }
  return docs;
}

NbModel nb_train_from_documents(const std::map<std::string, std::string>& documents,
                                std::span<const KeyphraseLabel> labels, const Vocabulary& vocab) {
  CorpusStats stats;
  for (const auto& [id, text] : documents) stats.add_document(text, vocab);

  std::set<std::pair<std::string, TermId>> positives;
  for (const auto& l : labels)
    if (l.positive) positives.emplace(l.doc_id, l.term_id);

  std::vector<LabeledCandidate> labeled;
  for (const auto& [id, text] : documents) {
    auto candidates = identify_candidates(text, vocab);
    assign_tfidf(candidates, stats);
    for (const auto& c : candidates) labeled.emplace_back(c, positives.count({id, c.term_id}) > 0);
  }
  NbModel m = nb_train(labeled);
  m.corpus = std::move(stats);
  return m;
}

// --- checkpoint ---------------------------------------------------------------

namespace {

constexpr std::string_view kNbMagic = "courserec-nb-model 1";

void write_feature(std::ostringstream& out, std::string_view name, const FeatureTable& t) {
  out << "feature " << name << '\n';
  out << "edges " << t.bins.edges().size();
  for (double e : t.bins.edges()) out << ' ' << format_double(e);
  out << '\n' << "yes";
  for (long c : t.yes) out << ' ' << c;
  out << '\n' << "no";
  for (long c : t.no) out << ' ' << c;
  out << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : lines_(split(text, '\n')) {}

  std::vector<std::string> next(std::string_view expected_head) {
    while (pos_ < lines_.size() && trim(lines_[pos_]).empty()) ++pos_;
    if (pos_ >= lines_.size())
      throw Error(ErrorKind::Format, "unexpected end of model file, expected '" +
                                         std::string(expected_head) + "'");
    auto fields = split(trim(lines_[pos_]), ' ');
    ++pos_;
    if (fields.empty() || fields[0] != expected_head)
      throw Error(ErrorKind::Format, "model file line " + std::to_string(pos_) + ": expected '" +
                                         std::string(expected_head) + "'");
    return fields;
  }

 private:
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

FeatureTable read_feature(LineReader& in, std::string_view name) {
  auto head = in.next("feature");
  if (head.size() != 2 || head[1] != name)
    throw Error(ErrorKind::Format, "expected feature " + std::string(name));
  auto edges = in.next("edges");
  std::size_t k = static_cast<std::size_t>(parse_long(edges.at(1)));
  if (edges.size() != k + 2) throw Error(ErrorKind::Format, "edge count mismatch");
  std::vector<double> e;
  for (std::size_t i = 0; i < k; ++i) e.push_back(parse_double(edges[i + 2]));
  FeatureTable t;
  t.bins = Discretizer(std::move(e));
  for (auto [head_name, target] : {std::pair{"yes", &t.yes}, std::pair{"no", &t.no}}) {
    auto row = in.next(head_name);
    if (row.size() != t.bins.bins() + 1) throw Error(ErrorKind::Format, "bin count mismatch");
    for (std::size_t i = 1; i < row.size(); ++i) target->push_back(parse_long(row[i]));
  }
  return t;
}

}  // namespace

std::string save_nb_model(const NbModel& m) {
  std::ostringstream out;
  out << kNbMagic << '\n';
  out << "counts " << m.y_count << ' ' << m.n_count << '\n';
  write_feature(out, "tfidf", m.tfidf);
  write_feature(out, "distance", m.distance);
  out << "corpus " << m.corpus.n_docs << ' ' << m.corpus.df.size() << '\n';
  for (const auto& [id, count] : m.corpus.df) out << "df " << id << ' ' << count << '\n';
  out << "end\n";
  return out.str();
}

NbModel load_nb_model(std::string_view text) {
  auto nl = text.find('\n');
  if (trim(text.substr(0, nl)) != kNbMagic)
    throw Error(ErrorKind::Format, "not a keyphrase model file");
  LineReader in(text.substr(nl == std::string_view::npos ? text.size() : nl + 1));
  NbModel m;
  auto counts = in.next("counts");
  if (counts.size() != 3) throw Error(ErrorKind::Format, "bad counts line");
  m.y_count = parse_long(counts[1]);
  m.n_count = parse_long(counts[2]);
  if (m.y_count < 1 || m.n_count < 1) throw Error(ErrorKind::Format, "class counts must be positive");
  m.tfidf = read_feature(in, "tfidf");
  m.distance = read_feature(in, "distance");
  auto corpus = in.next("corpus");
  if (corpus.size() != 3) throw Error(ErrorKind::Format, "bad corpus line");
  m.corpus.n_docs = parse_long(corpus[1]);
  long entries = parse_long(corpus[2]);
  for (long i = 0; i < entries; ++i) {
    auto row = in.next("df");
    if (row.size() != 3) throw Error(ErrorKind::Format, "bad df line");
    m.corpus.df[static_cast<TermId>(parse_long(row[1]))] = parse_long(row[2]);
  }
  in.next("end");
  return m;
}

NbModel load_nb_model_file(const fs::path& path) { return load_nb_model(read_file(path)); }

}  // namespace courserec
