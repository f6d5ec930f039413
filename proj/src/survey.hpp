#pragma once

#include <cstdint>
#include <vector>

#include "domain.hpp"

namespace courserec {

// Synthetic stand-in for the engineer survey.
//
// Population model (fixed, independent of the sampling seed):
//   g        = encode_profile(profile) - 0.5            (6 values)
//   pref_b   = base_b + sum_i W_bi * g_i                  (one weight per keyword bit, b = 0..7)
//   affinity = sum over course keywords k, bits b of bit_b(k) * pref_b, plus N(0, noise^2)
// base and W are drawn once from kPopulationSeed. The affinity is turned into a
// rank with population quintile cut points estimated from kReferenceDraws
// noise-free draws: top fifth -> rank 1, bottom fifth -> rank 5.
//
// The sampling seed picks the respondents, the pool of courses shown to them
// and the noise.
class SurveyOracle {
 public:
  static constexpr std::uint64_t kPopulationSeed = 0x5eed2009ULL;
  static constexpr int kReferenceDraws = 20000;
  static constexpr int kCoursePool = 40;
  static constexpr double kNoise = 0.05;

  explicit SurveyOracle(const Catalog& catalog);

  // Noise-free affinity.
  double affinity(const UserProfile& profile, std::span<const TermId> keywords) const;
  int rank_for(double affinity) const;
  const std::array<double, 4>& cut_points() const { return cuts_; }

  struct Dataset {
    std::vector<SurveyRecord> train;
    std::vector<SurveyRecord> test;
  };
  Dataset generate(std::uint64_t seed, std::size_t n_train, std::size_t n_test) const;

 private:
  const Catalog* catalog_;
  std::array<double, 8> base_{};
  std::array<std::array<double, kProfileInputs>, 8> projection_{};
  std::array<double, 4> cuts_{};
};

}  // namespace courserec
