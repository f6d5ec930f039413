#pragma once

// Independent reference computations used to freeze expected values. None of
// these call into the engine's tokenizer, index or scorer.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <regex>
#include <string>
#include <vector>

namespace courserec::oracle {

inline std::vector<std::string> words(const std::string& text) {
  static const std::regex word("[A-Za-z0-9\\x80-\\xff]+");
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), word); it != std::sregex_iterator();
       ++it) {
    std::string w = it->str();
    for (auto& ch : w) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    auto ends = [&](const std::string& s) {
      return w.size() >= s.size() && w.compare(w.size() - s.size(), s.size(), s) == 0;
    };
    if (w.size() > 4 && (ends("sses") || ends("xes") || ends("ches") || ends("shes") || ends("zes")))
      w.erase(w.size() - 2);
    else if (w.size() > 3 && ends("s") && !ends("ss") && !ends("us") && !ends("is"))
      w.pop_back();
    out.push_back(w);
  }
  return out;
}

// Occurrences of the token sequence `term` in `doc`.
inline long count_phrase(const std::vector<std::string>& doc, const std::vector<std::string>& term) {
  if (term.empty() || term.size() > doc.size()) return 0;
  long n = 0;
  for (std::size_t i = 0; i + term.size() <= doc.size(); ++i)
    if (std::equal(term.begin(), term.end(), doc.begin() + static_cast<long>(i))) ++n;
  return n;
}

// Direct evaluation of the TF x IDF definition by rescanning every document.
inline double brute_tfidf(const std::vector<std::string>& corpus, std::size_t doc_index,
                          const std::string& term) {
  auto t = words(term);
  auto doc = words(corpus[doc_index]);
  long freq = count_phrase(doc, t);
  if (freq == 0) return 0.0;
  long df = 0;
  for (const auto& d : corpus)
    if (count_phrase(words(d), t) > 0) ++df;
  double idf = -std::log2(static_cast<double>(df) / static_cast<double>(corpus.size()));
  return static_cast<double>(freq) / static_cast<double>(doc.size()) * idf;
}

}  // namespace courserec::oracle

#include <optional>
#include <utility>

#include "domain.hpp"

namespace courserec::oracle {

// Linear scan over every course, recomputing tf and df from raw text.
inline std::vector<std::pair<std::string, double>> brute_search(
    const std::vector<Course>& courses, const std::vector<std::string>& query_terms,
    std::optional<Discipline> filter, std::size_t limit) {
  std::vector<std::vector<std::string>> docs;
  for (const auto& c : courses) docs.push_back(words(c.title + " " + c.description));
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t d = 0; d < courses.size(); ++d) {
    const auto& c = courses[d];
    if (filter && c.discipline != *filter && c.discipline != Discipline::Both) continue;
    double score = 0.0;
    bool any = false;
    for (const auto& term : query_terms) {
      long tf = std::count(docs[d].begin(), docs[d].end(), term);
      if (tf == 0) continue;
      long df = 0;
      for (const auto& other : docs)
        if (std::find(other.begin(), other.end(), term) != other.end()) ++df;
      double idf = std::log(1.0 + static_cast<double>(courses.size()) / static_cast<double>(df));
      score += static_cast<double>(tf) * idf;
      any = true;
    }
    if (any) out.emplace_back(c.course_id, score);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (out.size() > limit) out.resize(limit);
  return out;
}

}  // namespace courserec::oracle
