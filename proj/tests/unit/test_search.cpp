#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <random>

#include "error.hpp"
#include "search.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/synthetic_courses.hpp"

using namespace courserec;
using courserec::testing::fixture_catalog;
using courserec::testing::sample_profile;
using courserec::testing::synthetic_courses;

namespace {

Course course(std::string id, std::string title, std::string desc, Discipline d) {
  Course c;
  c.course_id = std::move(id);
  c.provider = "P";
  c.title = std::move(title);
  c.description = std::move(desc);
  c.discipline = d;
  return c;
}

}  // namespace

TEST_CASE("index_course") {
  InvertedIndex index;
  index.index_course(course("c1", "Pump Maintenance", "", Discipline::Mechanical));
  CHECK(index.n_docs() == 1);
  CHECK(index.doc_lengths().at("c1") == 2);
  auto hits = index.search(text_query("maintenance", std::nullopt), 10);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].course_id == "c1");
  CHECK_THROWS_AS(index.index_course(course("c1", "Other", "", Discipline::Both)), Error);
}

TEST_CASE("single course score matches a hand recount") {
  InvertedIndex index;
  index.index_course(course("c1", "Pumps", "pump curves and pump sizing", Discipline::Mechanical));
  index.index_course(course("c2", "Switchgear", "switchgear basics", Discipline::Electrical));
  auto hits = index.search(text_query("pump", Discipline::Mechanical), 10);
  REQUIRE(hits.size() == 1);
  // tf("pump") = 3 (Pumps, pump, pump), df = 1, N = 2
  CHECK(hits[0].score == 3 * std::log(1.0 + 2.0 / 1.0));
  CHECK(index.search(text_query("turbine", std::nullopt), 10).empty());
}

TEST_CASE("discipline filter") {
  InvertedIndex index;
  index.index_course(course("e1", "Relay coordination", "", Discipline::Electrical));
  index.index_course(course("m1", "Relay valves", "", Discipline::Mechanical));
  index.index_course(course("b1", "Relay project management", "", Discipline::Both));
  auto ids = [](const std::vector<SearchHit>& hits) {
    std::vector<std::string> out;
    for (auto& h : hits) out.push_back(h.course_id);
    std::sort(out.begin(), out.end());
    return out;
  };
  CHECK(ids(index.search(text_query("relay", Discipline::Mechanical), 10)) ==
        std::vector<std::string>{"b1", "m1"});
  CHECK(ids(index.search(text_query("relay", Discipline::Electrical), 10)) ==
        std::vector<std::string>{"b1", "e1"});
  CHECK(index.search(text_query("relay", std::nullopt), 10).size() == 3);
}

TEST_CASE("build_query") {
  const auto& vocab = fixture_catalog().vocabulary;
  auto p = sample_profile();
  p.professional_interests = {98};
  auto q = build_query(p, vocab);
  CHECK(q.terms == std::vector<std::string>{"pump"});
  CHECK(q.discipline_filter == Discipline::Mechanical);

  // "energy management" and "energy efficiency" share "energy"
  p.professional_interests = {195, 196};
  q = build_query(p, vocab);
  CHECK(std::count(q.terms.begin(), q.terms.end(), "energy") == 1);
  CHECK(q.terms.size() == 3);
  CHECK(build_query(p, vocab).terms == q.terms);
}

TEST_CASE("search equals a brute-force linear scan") {
  const auto& vocab = fixture_catalog().vocabulary;
  auto courses = synthetic_courses(vocab, 200, 99);
  auto index = InvertedIndex::build(courses);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    std::string text;
    for (std::size_t k = 0, n = 1 + rng() % 4; k < n; ++k)
      text += vocab.at(1 + static_cast<TermId>(rng() % vocab.size())).term + " ";
    std::optional<Discipline> filter;
    if (rng() % 3) filter = rng() % 2 ? Discipline::Electrical : Discipline::Mechanical;
    std::size_t limit = 1 + rng() % 60;
    auto q = text_query(text, filter);
    auto got = index.search(q, limit);
    std::vector<std::string> terms;
    for (auto& w : oracle::words(text))
      if (std::find(terms.begin(), terms.end(), w) == terms.end()) terms.push_back(w);
    auto want = oracle::brute_search(courses, terms, filter, limit);
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      CHECK(got[k].course_id == want[k].first);
      CHECK(got[k].score == want[k].second);
    }
    CHECK(got.size() <= limit);
    for (std::size_t k = 1; k < got.size(); ++k) CHECK(got[k - 1].score >= got[k].score);
  }
}

TEST_CASE("incremental and rebuilt indexes agree") {
  const auto& vocab = fixture_catalog().vocabulary;
  auto courses = synthetic_courses(vocab, 80, 3);
  auto shuffled = courses;
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  InvertedIndex incremental;
  for (const auto& c : shuffled) incremental.index_course(c);
  CHECK(incremental == InvertedIndex::build(courses));

  // removing by rebuild restores the earlier postings
  auto before = InvertedIndex::build(std::span(courses).first(79));
  auto all = InvertedIndex::build(courses);
  CHECK_FALSE(before == all);
  CHECK(InvertedIndex::build(std::span(courses).first(79)) == before);
}

TEST_CASE("query latency on 10,000 courses") {
  const auto& vocab = fixture_catalog().vocabulary;
  auto courses = synthetic_courses(vocab, 10000, 7);
  auto index = InvertedIndex::build(courses);
  std::mt19937_64 rng(8);
  std::vector<double> ms;
  for (int i = 0; i < 300; ++i) {
    auto p = sample_profile();
    p.professional_interests.clear();
    for (std::size_t k = 0, n = 1 + rng() % 5; k < n; ++k) {
      TermId id = 1 + static_cast<TermId>(rng() % vocab.size());
      if (std::find(p.professional_interests.begin(), p.professional_interests.end(), id) ==
          p.professional_interests.end())
        p.professional_interests.push_back(id);
    }
    auto q = build_query(p, vocab);
    auto t0 = std::chrono::steady_clock::now();
    auto hits = index.search(q, kCandidateLimit);
    auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  double p99 = ms[ms.size() * 99 / 100];
  MESSAGE("p99 query latency (ms): " << p99);
  CHECK(p99 < 50.0);
}
