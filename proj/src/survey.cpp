#include "survey.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "error.hpp"

namespace courserec {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

// Box-Muller; std::normal_distribution is not reproducible across standard
// libraries.
double normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng), u2 = uniform01(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::vector<TermId> terms_for(const Vocabulary& vocab, Discipline d) {
  std::vector<TermId> out;
  for (const auto& e : vocab.entries())
    if (e.discipline == d || e.discipline == Discipline::Both) out.push_back(e.id);
  return out;
}

std::vector<TermId> sample_distinct(std::mt19937_64& rng, const std::vector<TermId>& pool,
                                    std::size_t count) {
  std::set<TermId> chosen;
  while (chosen.size() < count) chosen.insert(pool[pick(rng, pool.size())]);
  return {chosen.begin(), chosen.end()};
}

UserProfile sample_profile(std::mt19937_64& rng, const Catalog& cat,
                           const std::vector<TermId>& electrical,
                           const std::vector<TermId>& mechanical) {
  UserProfile p;
  p.discipline = pick(rng, 2) == 0 ? Discipline::Electrical : Discipline::Mechanical;
  const auto& pool = p.discipline == Discipline::Electrical ? electrical : mechanical;
  p.professional_interests = sample_distinct(rng, pool, 1 + pick(rng, 5));
  std::set<int> pis;
  while (pis.size() < 3) pis.insert(1 + static_cast<int>(pick(rng, cat.interests.size())));
  std::copy(pis.begin(), pis.end(), p.personal_interests.begin());
  p.experience = static_cast<Experience>(1 + pick(rng, 4));
  p.short_goal = 1 + static_cast<int>(pick(rng, cat.goals.size()));
  p.long_goal = 1 + static_cast<int>(pick(rng, cat.goals.size()));
  return p;
}

struct PoolCourse {
  Discipline discipline;
  std::vector<TermId> keywords;
};

PoolCourse sample_course(std::mt19937_64& rng, const std::vector<TermId>& electrical,
                         const std::vector<TermId>& mechanical) {
  PoolCourse c;
  c.discipline = pick(rng, 2) == 0 ? Discipline::Electrical : Discipline::Mechanical;
  const auto& pool = c.discipline == Discipline::Electrical ? electrical : mechanical;
  c.keywords = sample_distinct(rng, pool, pick(rng, 4) == 0 ? 2 : 3);
  return c;
}

}  // namespace

SurveyOracle::SurveyOracle(const Catalog& catalog) : catalog_(&catalog) {
  if (catalog.vocabulary.size() == 0 || catalog.goals.size() == 0 || catalog.interests.size() < 3)
    throw Error(ErrorKind::Validation, "survey oracle needs a populated catalog");
  std::mt19937_64 rng(kPopulationSeed);
  for (auto& b : base_) b = normal(rng);
  for (auto& row : projection_)
    for (auto& w : row) w = 2.0 * normal(rng);

  auto electrical = terms_for(catalog.vocabulary, Discipline::Electrical);
  auto mechanical = terms_for(catalog.vocabulary, Discipline::Mechanical);
  std::vector<double> draws;
  draws.reserve(kReferenceDraws);
  for (int i = 0; i < kReferenceDraws; ++i) {
    auto p = sample_profile(rng, catalog, electrical, mechanical);
    auto c = sample_course(rng, electrical, mechanical);
    draws.push_back(affinity(p, c.keywords));
  }
  std::sort(draws.begin(), draws.end());
  for (std::size_t q = 0; q < 4; ++q) cuts_[q] = draws[(q + 1) * draws.size() / 5];
}

double SurveyOracle::affinity(const UserProfile& profile, std::span<const TermId> keywords) const {
  auto g = encode_profile(profile, *catalog_);
  std::array<double, 8> pref{};
  for (std::size_t b = 0; b < 8; ++b) {
    pref[b] = base_[b];
    for (std::size_t i = 0; i < kProfileInputs; ++i) pref[b] += projection_[b][i] * (g[i] - 0.5);
  }
  auto bits = encode_keywords(keywords);
  double a = 0.0;
  for (std::size_t k = 0; k < kKeywordBits; ++k)
    if (bits[k]) a += pref[k % 8];
  return a;
}

int SurveyOracle::rank_for(double a) const {
  // cuts_ ascending: above the top cut is rank 1
  int above = static_cast<int>(std::upper_bound(cuts_.begin(), cuts_.end(), a) - cuts_.begin());
  return 5 - above;
}

SurveyOracle::Dataset SurveyOracle::generate(std::uint64_t seed, std::size_t n_train,
                                             std::size_t n_test) const {
  std::mt19937_64 rng(seed);
  auto electrical = terms_for(catalog_->vocabulary, Discipline::Electrical);
  auto mechanical = terms_for(catalog_->vocabulary, Discipline::Mechanical);
  std::vector<PoolCourse> pool;
  for (int i = 0; i < kCoursePool; ++i) pool.push_back(sample_course(rng, electrical, mechanical));

  // Each respondent ranks one course from their own discipline.
  auto draw = [&]() {
    SurveyRecord r;
    r.profile = sample_profile(rng, *catalog_, electrical, mechanical);
    std::vector<const PoolCourse*> shown;
    for (const auto& c : pool)
      if (c.discipline == r.profile.discipline) shown.push_back(&c);
    if (shown.empty()) shown.push_back(&pool[0]);
    r.course_keywords = shown[pick(rng, shown.size())]->keywords;
    double spread = cuts_[3] - cuts_[0];
    r.rank = rank_for(affinity(r.profile, r.course_keywords) + kNoise * spread * normal(rng));
    return r;
  };
  Dataset d;
  for (std::size_t i = 0; i < n_train; ++i) d.train.push_back(draw());
  for (std::size_t i = 0; i < n_test; ++i) d.test.push_back(draw());
  return d;
}

}  // namespace courserec
