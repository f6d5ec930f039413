#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace courserec {

enum class Discipline { Electrical, Mechanical, Both };

std::string_view to_string(Discipline d);
Discipline parse_discipline(std::string_view s);

enum class Experience : int { Junior = 1, Intermediate = 2, Senior = 3, Management = 4 };

std::string_view to_string(Experience e);
Experience parse_experience(std::string_view s);

using TermId = int;

struct VocabularyEntry {
  TermId id = 0;
  std::string term;        // as written in the vocabulary file
  std::string normalized;  // normalize_phrase(term)
  Discipline discipline = Discipline::Both;
};

// The controlled vocabulary. Ids are contiguous from 1 and fit in 8 bits.
class Vocabulary {
 public:
  static constexpr TermId kMaxId = 255;

  Vocabulary() = default;
  explicit Vocabulary(std::vector<VocabularyEntry> entries);

  static Vocabulary load(const std::filesystem::path& path);
  static Vocabulary parse(std::string_view text);

  std::size_t size() const { return entries_.size(); }
  bool contains(TermId id) const { return id >= 1 && id <= static_cast<TermId>(entries_.size()); }
  const VocabularyEntry& at(TermId id) const;
  const std::vector<VocabularyEntry>& entries() const { return entries_; }

  // Lookup by normalized phrase.
  std::optional<TermId> find(std::string_view normalized) const;
  // Longest vocabulary term, in tokens.
  std::size_t max_term_tokens() const { return max_tokens_; }

 private:
  std::vector<VocabularyEntry> entries_;
  std::unordered_map<std::string, TermId> by_term_;
  std::size_t max_tokens_ = 0;
};

// Goal and personal-interest tables: `id<TAB>label` per line.
class IdTable {
 public:
  IdTable() = default;
  explicit IdTable(std::vector<std::string> labels) : labels_(std::move(labels)) {}

  static IdTable load(const std::filesystem::path& path);
  static IdTable parse(std::string_view text);

  std::size_t size() const { return labels_.size(); }
  bool contains(int id) const { return id >= 1 && id <= static_cast<int>(labels_.size()); }
  const std::string& label(int id) const { return labels_.at(static_cast<std::size_t>(id - 1)); }

 private:
  std::vector<std::string> labels_;
};

// Everything the encoders and validators need to resolve ids.
struct Catalog {
  Vocabulary vocabulary;
  IdTable goals;
  IdTable interests;

  // Loads `vocab.tsv`, `tables/goals.tsv` and `tables/interests.tsv` from dir.
  static Catalog load(const std::filesystem::path& dir);
};

struct UserProfile {
  std::string user_id;
  Discipline discipline = Discipline::Electrical;
  std::vector<TermId> professional_interests;
  std::array<int, 3> personal_interests{};
  Experience experience = Experience::Junior;
  int short_goal = 0;
  int long_goal = 0;

  bool operator==(const UserProfile&) const = default;
};

// Throws Error{Validation} naming the first offending field.
void validate(const UserProfile& p, const Catalog& catalog);

struct Course {
  std::string course_id;
  std::string provider;
  std::string title;
  std::string description;
  Discipline discipline = Discipline::Both;
  std::vector<TermId> keywords;
  std::optional<std::string> source_url;

  bool operator==(const Course&) const = default;
};

void validate(const Course& c, const Vocabulary& vocab);

// Text the keyphrase extractor and corpus statistics operate on.
std::string course_document(const Course& c);

struct RankedCourse {
  std::string course_id;
  double score = 0.0;
  int predicted_rank = 3;
};

struct SurveyRecord {
  UserProfile profile;  // user_id unused
  std::vector<TermId> course_keywords;
  int rank = 3;

  bool operator==(const SurveyRecord&) const = default;
};

void validate(const SurveyRecord& r, const Catalog& catalog);

// One survey record per line, tab separated:
//   discipline, professional ids (comma list), personal ids (comma list),
//   experience (1..4), short goal, long goal, course keyword ids (comma list,
//   may be empty), rank (1..5)
std::string format_survey_line(const SurveyRecord& r);
SurveyRecord parse_survey_line(std::string_view line);
std::vector<SurveyRecord> load_survey_file(const std::filesystem::path& path);
void save_survey_file(const std::filesystem::path& path, std::span<const SurveyRecord> records);

// --- encoders ---------------------------------------------------------------

inline constexpr std::size_t kKeywordSlots = 3;
inline constexpr std::size_t kKeywordBits = 8 * kKeywordSlots;
inline constexpr std::size_t kProfileInputs = 6;
inline constexpr std::size_t kInputSize = kKeywordBits + kProfileInputs;

using KeywordBits = std::array<std::uint8_t, kKeywordBits>;
using ProfileVector = std::array<double, kProfileInputs>;
using InputVector = std::array<double, kInputSize>;

// Keywords sorted ascending, each written MSB first in an 8-bit slot, unused
// slots zero.
KeywordBits encode_keywords(std::span<const TermId> keywords);

// [experience/4, short/|G|, long/|G|, pi1/|PI|, pi2/|PI|, pi3/|PI|] with the
// personal interests in ascending order.
ProfileVector encode_profile(const UserProfile& p, const Catalog& catalog);

InputVector input_vector(const UserProfile& p, std::span<const TermId> course_keywords,
                         const Catalog& catalog);

// --- json -------------------------------------------------------------------

nlohmann::json profile_to_json(const UserProfile& p);
UserProfile profile_from_json(const nlohmann::json& j);
nlohmann::json course_to_json(const Course& c);
Course course_from_json(const nlohmann::json& j);
nlohmann::json survey_to_json(const SurveyRecord& r);
SurveyRecord survey_from_json(const nlohmann::json& j);

}  // namespace courserec
