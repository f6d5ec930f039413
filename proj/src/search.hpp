#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "domain.hpp"

namespace courserec {

struct Posting {
  std::string course_id;
  long tf = 0;

  bool operator==(const Posting&) const = default;
};

struct Query {
  std::vector<std::string> terms;  // normalized, unique, in first-seen order
  std::optional<Discipline> discipline_filter;
};

struct SearchHit {
  std::string course_id;
  double score = 0.0;

  bool operator==(const SearchHit&) const = default;
};

inline constexpr std::size_t kCandidateLimit = 50;

// Inverted index over course title + description.
class InvertedIndex {
 public:
  void index_course(const Course& course);
  static InvertedIndex build(std::span<const Course> courses);

  // OR semantics. score = sum over query terms of tf * log(1 + n_docs / df).
  // Courses outside {filter, both} are dropped. Ties go to the smaller id.
  std::vector<SearchHit> search(const Query& query, std::size_t limit) const;

  long n_docs() const { return n_docs_; }
  bool contains(const std::string& course_id) const { return doc_lengths_.count(course_id) > 0; }
  const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }
  const std::map<std::string, long>& doc_lengths() const { return doc_lengths_; }

  bool operator==(const InvertedIndex&) const = default;

 private:
  std::map<std::string, std::vector<Posting>> postings_;  // postings sorted by course id
  std::map<std::string, long> doc_lengths_;
  std::map<std::string, Discipline> disciplines_;
  long n_docs_ = 0;
};

// Union of the tokenized professional-interest terms; the profile's
// discipline becomes the filter.
Query build_query(const UserProfile& profile, const Vocabulary& vocab);

// Free-text query with an optional filter.
Query text_query(std::string_view text, std::optional<Discipline> filter);

bool passes_filter(Discipline course, std::optional<Discipline> filter);

}  // namespace courserec
