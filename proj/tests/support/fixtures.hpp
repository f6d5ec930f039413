#pragma once

#include <filesystem>

#include "domain.hpp"

namespace courserec::testing {

inline std::filesystem::path fixture_dir() { return COURSEREC_FIXTURE_DIR; }

inline const Catalog& fixture_catalog() {
  static const Catalog catalog = Catalog::load(fixture_dir());
  return catalog;
}

inline UserProfile sample_profile() {
  UserProfile p;
  p.user_id = "u-test";
  p.discipline = Discipline::Mechanical;
  p.professional_interests = {98};
  p.personal_interests = {1, 2, 3};
  p.experience = Experience::Junior;
  p.short_goal = 1;
  p.long_goal = 1;
  return p;
}

}  // namespace courserec::testing
