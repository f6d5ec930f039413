#include "search.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "error.hpp"
#include "text.hpp"

namespace courserec {

void InvertedIndex::index_course(const Course& course) {
  if (doc_lengths_.count(course.course_id))
    throw Error(ErrorKind::Conflict, "course " + course.course_id + " is already indexed");
  auto tokens = normalized_tokens(course.title + " " + course.description);
  std::map<std::string, long> counts;
  for (auto& t : tokens) ++counts[t];
  for (auto& [term, tf] : counts) {
    auto& list = postings_[term];
    Posting p{course.course_id, tf};
    auto at = std::lower_bound(list.begin(), list.end(), p, [](const Posting& a, const Posting& b) {
      return a.course_id < b.course_id;
    });
    list.insert(at, std::move(p));
  }
  doc_lengths_[course.course_id] = static_cast<long>(tokens.size());
  disciplines_[course.course_id] = course.discipline;
  ++n_docs_;
}

InvertedIndex InvertedIndex::build(std::span<const Course> courses) {
  InvertedIndex index;
  for (const auto& c : courses) index.index_course(c);
  return index;
}

bool passes_filter(Discipline course, std::optional<Discipline> filter) {
  return !filter || course == *filter || course == Discipline::Both;
}

std::vector<SearchHit> InvertedIndex::search(const Query& query, std::size_t limit) const {
  std::map<std::string, double> scores;
  for (const auto& term : query.terms) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double idf = std::log(1.0 + static_cast<double>(n_docs_) /
                                          static_cast<double>(it->second.size()));
    for (const auto& p : it->second) {
      if (!passes_filter(disciplines_.at(p.course_id), query.discipline_filter)) continue;
      scores[p.course_id] += static_cast<double>(p.tf) * idf;
    }
  }
  std::vector<SearchHit> hits;
  hits.reserve(scores.size());
  for (auto& [id, s] : scores) hits.push_back({id, s});
  auto better = [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.course_id < b.course_id;
  };
  if (hits.size() > limit) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<long>(limit), hits.end(), better);
    hits.resize(limit);
  } else {
    std::sort(hits.begin(), hits.end(), better);
  }
  return hits;
}

namespace {

void add_terms(Query& q, std::set<std::string>& seen, std::string_view text) {
  for (auto& t : normalized_tokens(text))
    if (seen.insert(t).second) q.terms.push_back(std::move(t));
}

}  // namespace

Query build_query(const UserProfile& profile, const Vocabulary& vocab) {
  Query q;
  std::set<std::string> seen;
  for (TermId id : profile.professional_interests) add_terms(q, seen, vocab.at(id).term);
  q.discipline_filter = profile.discipline;
  return q;
}

Query text_query(std::string_view text, std::optional<Discipline> filter) {
  Query q;
  std::set<std::string> seen;
  add_terms(q, seen, text);
  q.discipline_filter = filter;
  return q;
}

}  // namespace courserec
