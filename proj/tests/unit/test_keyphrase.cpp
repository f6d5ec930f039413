#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "error.hpp"
#include "keyphrase.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace courserec;
using courserec::testing::fixture_catalog;
using courserec::testing::fixture_dir;

namespace {

Vocabulary small_vocab() {
  return Vocabulary::parse(
      "1\tpump\tmechanical\n"
      "2\tenergy management\tboth\n"
      "3\tswitchgear\telectrical\n"
      "4\tvalve\tmechanical\n"
      "5\tcircuit breaker\telectrical\n"
      "6\tturbine\tmechanical\n");
}

CandidateFeatures features(double t, double f) {
  CandidateFeatures c;
  c.term_id = 1;
  c.freq = 1;
  c.doc_size = 10;
  c.tfidf = t;
  c.first_pos = f;
  return c;
}

const NbModel& fixture_model() {
  static const NbModel m = nb_train_from_documents(
      load_documents(fixture_dir() / "nb" / "docs"),
      load_keyphrase_labels(fixture_dir() / "nb" / "labels.tsv"), fixture_catalog().vocabulary);
  return m;
}

}  // namespace

TEST_CASE("identify_candidates") {
  auto vocab = small_vocab();
  SUBCASE("single term document") {
    auto c = identify_candidates("Switchgear", vocab);
    REQUIRE(c.size() == 1);
    CHECK(c[0].term_id == 3);
    CHECK(c[0].freq == 1);
    CHECK(c[0].first_pos == 0.0);
    CHECK(c[0].doc_size == 1);
  }
  SUBCASE("plural pseudo-match and frequency") {
    // tokens: pump selection and pump maintenance
    auto c = identify_candidates("Pump selection and pump maintenance", vocab);
    REQUIRE(c.size() == 1);
    CHECK(c[0].term_id == 1);
    CHECK(c[0].freq == 2);
    CHECK(c[0].first_pos == 0.0);
    CHECK(c[0].doc_size == 5);
    auto plural = identify_candidates("Servicing of PUMPS.", vocab);
    REQUIRE(plural.size() == 1);
    CHECK(plural[0].first_pos == doctest::Approx(2.0 / 3));
  }
  SUBCASE("multiword terms") {
    auto c = identify_candidates("Intro to energy-management and circuit breakers", vocab);
    REQUIRE(c.size() == 2);
    CHECK(c[0].term_id == 2);
    CHECK(c[0].first_pos == doctest::Approx(2.0 / 7));
    CHECK(c[1].term_id == 5);
  }
  SUBCASE("no matches") { CHECK(identify_candidates("Welcome to the course.", vocab).empty()); }
}

TEST_CASE("tfidf") {
  CHECK(tfidf(0, 100, 0, 8) == 0.0);
  CHECK(tfidf(2, 100, 1, 8) == doctest::Approx(0.06).epsilon(1e-15));
  CHECK(tfidf(5, 10, 8, 8) == 0.0);
  CHECK(tfidf(1, 10, 8, 8) == 0.0);
  CHECK_THROWS_AS(tfidf(1, 10, 0, 8), Error);
  CHECK_THROWS_AS(tfidf(1, 0, 1, 8), Error);
}

TEST_CASE("tfidf equals a brute-force recount on the 20-document corpus") {
  const auto& vocab = fixture_catalog().vocabulary;
  auto docs_map = load_documents(fixture_dir() / "corpus20");
  REQUIRE(docs_map.size() == 20);
  std::vector<std::string> docs;
  for (auto& [id, text] : docs_map) docs.push_back(text);
  auto stats = CorpusStats::build(docs, vocab);
  std::size_t checked = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    auto cands = identify_candidates(docs[d], vocab);
    assign_tfidf(cands, stats);
    std::set<TermId> matched;
    for (const auto& c : cands) {
      matched.insert(c.term_id);
      CHECK(std::abs(c.tfidf - oracle::brute_tfidf(docs, d, vocab.at(c.term_id).term)) <= 1e-12);
      ++checked;
    }
    // Terms that are not candidates have zero recount.
    for (const auto& e : vocab.entries())
      if (!matched.count(e.id)) CHECK(oracle::brute_tfidf(docs, d, e.term) == 0.0);
  }
  CHECK(checked > 60);
}

TEST_CASE("discretizer") {
  auto d = Discretizer::fit({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  CHECK(d.bins() == 10);
  CHECK(d.bin(1) == 0);
  CHECK(d.bin(10) == 9);
  CHECK(d.bin(-100) == 0);
  CHECK(d.bin(1e9) == 9);
  auto constant = Discretizer::fit(std::vector<double>(50, 0.3));
  CHECK(constant.bins() == 1);
}

TEST_CASE("nb_train") {
  SUBCASE("prior from class counts") {
    std::vector<LabeledCandidate> data;
    for (int i = 0; i < 10; ++i) data.emplace_back(features(0.1 * i, 0.01 * i), true);
    for (int i = 0; i < 30; ++i) data.emplace_back(features(0.02 * i, 0.03 * i), false);
    auto m = nb_train(data);
    CHECK(m.y_count == 10);
    CHECK(m.n_count == 30);
    CHECK(m.prior_yes() == 0.25);
    // per-class likelihoods over bins sum to one and stay inside (0,1)
    for (const FeatureTable* t : {&m.tfidf, &m.distance}) {
      for (bool cls : {true, false}) {
        double sum = 0;
        long count = cls ? m.y_count : m.n_count;
        for (std::size_t b = 0; b < t->bins.bins(); ++b) {
          double l = static_cast<double>((cls ? t->yes : t->no)[b] + 1) /
                     static_cast<double>(count + static_cast<long>(t->bins.bins()));
          CHECK(l > 0.0);
          CHECK(l < 1.0);
          sum += l;
        }
        CHECK(sum == doctest::Approx(1.0));
      }
    }
  }
  SUBCASE("uninformative features give the prior") {
    std::vector<LabeledCandidate> data;
    for (int i = 0; i < 7; ++i) data.emplace_back(features(0.2, 0.5), true);
    for (int i = 0; i < 13; ++i) data.emplace_back(features(0.2, 0.5), false);
    auto m = nb_train(data);
    for (double t : {0.0, 0.2, 5.0})
      for (double f : {0.0, 0.5, 0.99})
        CHECK(nb_score(m, features(t, f)) == doctest::Approx(m.prior_yes()).epsilon(1e-12));
  }
  SUBCASE("single class or empty") {
    std::vector<LabeledCandidate> data{{features(0.1, 0.1), true}};
    CHECK_THROWS_AS(nb_train(data), Error);
    CHECK_THROWS_AS(nb_train({}), Error);
  }
}

TEST_CASE("posterior") {
  CHECK(keyphrase_posterior(0.3, 0.3) == 0.5);
  CHECK(keyphrase_posterior(0.02, 0.06) == doctest::Approx(0.25).epsilon(1e-15));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  for (int i = 0; i < 1000; ++i) {
    double a = u(rng), b = u(rng);
    double p = keyphrase_posterior(a, b);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(keyphrase_posterior(a * 0.125, b * 0.125) == p);
    CHECK(keyphrase_posterior(a * 3.7, b * 3.7) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("nb_score is monotone in the positive tfidf likelihood") {
  const auto& m = fixture_model();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> t(0.0, 0.3), f(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    auto c = features(t(rng), f(rng));
    double before = nb_score(m, c);
    auto boosted = m;
    ++boosted.tfidf.yes[boosted.tfidf.bins.bin(c.tfidf)];
    CHECK(nb_score(boosted, c) >= before);
    CHECK(before >= 0.0);
    CHECK(before <= 1.0);
  }
}

TEST_CASE("extract_keywords") {
  const auto& vocab = fixture_catalog().vocabulary;
  const auto& model = fixture_model();

  SUBCASE("one matching term") {
    std::string doc = "An afternoon workshop on switchgear for site staff.";
    auto stats = model.corpus.with_document(doc, vocab);
    CHECK(extract_keywords(doc, vocab, stats, model) == std::vector<TermId>{2});
  }
  SUBCASE("top three by posterior") {
    std::string doc =
        "Pumps, valves, switchgear, crane operation and welding. Pump and valve maintenance.";
    auto stats = model.corpus.with_document(doc, vocab);
    auto cands = identify_candidates(doc, vocab);
    REQUIRE(cands.size() >= 5);
    assign_tfidf(cands, stats);
    std::vector<std::pair<double, CandidateFeatures>> scored;
    for (auto& c : cands) scored.emplace_back(nb_score(model, c), c);
    std::sort(scored.begin(), scored.end(), [](auto& a, auto& b) {
      if (a.first != b.first) return a.first > b.first;
      if (a.second.first_pos != b.second.first_pos) return a.second.first_pos < b.second.first_pos;
      return a.second.term_id < b.second.term_id;
    });
    auto got = extract_keywords(doc, vocab, stats, model);
    REQUIRE(got.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(got[i] == scored[i].second.term_id);
  }
  SUBCASE("equal posterior prefers the earlier term") {
    std::vector<LabeledCandidate> flat;
    flat.emplace_back(features(0.1, 0.1), true);
    flat.emplace_back(features(0.1, 0.1), false);
    auto uninformative = nb_train(flat);
    auto small = small_vocab();
    std::string doc = "one two three four valve five six seven eight nine pump";
    CorpusStats stats;
    stats.add_document(doc, small);
    auto got = extract_keywords(doc, small, stats, uninformative);
    CHECK(got == std::vector<TermId>{4, 1});
  }
  SUBCASE("inconsistent corpus statistics") {
    CorpusStats empty;
    empty.n_docs = 3;
    CHECK_THROWS_AS(extract_keywords("pump", vocab, empty, model), Error);
  }
}

TEST_CASE("extraction contract over fixture documents") {
  const auto& vocab = fixture_catalog().vocabulary;
  const auto& model = fixture_model();
  auto docs = load_documents(fixture_dir() / "corpus20");
  for (const auto& [id, text] : docs) {
    auto stats = model.corpus.with_document(text, vocab);
    auto kw = extract_keywords(text, vocab, stats, model);
    CHECK(kw.size() <= 3);
    CHECK(!kw.empty());
    std::set<TermId> unique(kw.begin(), kw.end());
    CHECK(unique.size() == kw.size());
    for (TermId k : kw) CHECK(vocab.contains(k));
    CHECK(extract_keywords(text, vocab, stats, model) == kw);

    // The keywords' own terms, as a document, extract back to themselves.
    std::string self;
    for (TermId k : kw) self += vocab.at(k).term + ". ";
    auto self_stats = model.corpus.with_document(self, vocab);
    auto again = extract_keywords(self, vocab, self_stats, model);
    CHECK(std::set<TermId>(again.begin(), again.end()) == unique);
  }
}

TEST_CASE("extraction recovers labelled keyphrases on training documents") {
  const auto& vocab = fixture_catalog().vocabulary;
  const auto& model = fixture_model();
  auto docs = load_documents(fixture_dir() / "nb" / "docs");
  auto labels = load_keyphrase_labels(fixture_dir() / "nb" / "labels.tsv");
  std::set<std::pair<std::string, TermId>> positives;
  for (auto& l : labels)
    if (l.positive) positives.emplace(l.doc_id, l.term_id);
  int hits = 0, total = 0;
  for (const auto& [id, text] : docs) {
    for (TermId k : extract_keywords(text, vocab, model.corpus, model)) {
      ++total;
      hits += positives.count({id, k}) ? 1 : 0;
    }
  }
  CHECK(static_cast<double>(hits) / total >= 0.8);
}

TEST_CASE("classify_course") {
  auto vocab = small_vocab();
  std::vector<TermId> eem{3, 5, 1}, em{3, 1}, none, both_only{2}, eb{3, 2};
  CHECK(classify_course(eem, vocab) == Discipline::Electrical);
  CHECK(classify_course(em, vocab) == Discipline::Both);
  CHECK(classify_course(none, vocab) == Discipline::Both);
  CHECK(classify_course(both_only, vocab) == Discipline::Both);
  CHECK(classify_course(eb, vocab) == Discipline::Electrical);
}

TEST_CASE("nb checkpoint round trip is exact") {
  const auto& m = fixture_model();
  auto text = save_nb_model(m);
  auto back = load_nb_model(text);
  CHECK(back == m);
  CHECK(save_nb_model(back) == text);
  CHECK_THROWS_AS(load_nb_model(text.substr(0, text.size() / 2)), Error);
  CHECK_THROWS_AS(load_nb_model("garbage"), Error);
}
