#pragma once

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "domain.hpp"

namespace courserec::testing {

// Courses whose text mixes vocabulary terms with filler words.
inline std::vector<Course> synthetic_courses(const Vocabulary& vocab, std::size_t count,
                                             std::uint64_t seed) {
  static const char* filler[] = {"introduction", "advanced", "practical", "workshop", "for",
                                 "engineers",    "site",     "and",       "the",      "module"};
  std::mt19937_64 rng(seed);
  auto term = [&]() { return vocab.at(1 + static_cast<TermId>(rng() % vocab.size())).term; };
  std::vector<Course> out;
  for (std::size_t i = 0; i < count; ++i) {
    Course c;
    char id[32];
    std::snprintf(id, sizeof id, "c%06zu", i + 1);
    c.course_id = id;
    c.provider = "Provider " + std::to_string(rng() % 5);
    c.title = term() + " " + filler[rng() % 10] + " " + term();
    std::size_t words = 5 + rng() % 30;
    for (std::size_t w = 0; w < words; ++w) {
      if (!c.description.empty()) c.description += ' ';
      c.description += (rng() % 3 == 0) ? term() : filler[rng() % 10];
    }
    if (rng() % 9 == 0) c.description.clear();
    c.discipline = static_cast<Discipline>(rng() % 3);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace courserec::testing
